"""Spectral features from the Hamming-windowed magnitude spectrum.

All band edges are inclusive and refer to the bin frequencies
``j * fs / n``. A signal whose magnitude spectrum is empty on [0.5, 30] Hz
yields 0 for every feature here except ``vf_leak``.
"""

from dataclasses import dataclass

import numpy as np

ANALYSIS_BAND = (0.5, 30.0)


@dataclass
class Spectrum:
    freqs: np.ndarray
    amp: np.ndarray
    peak: float   # frequency of the largest amplitude on ANALYSIS_BAND, 0 if empty
    total: float  # amplitude sum on ANALYSIS_BAND

    def band(self, lo, hi):
        return (self.freqs >= lo) & (self.freqs <= hi)

    @property
    def empty(self):
        return not self.total > 0


def spectrum(x, fs=250):
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    amp = np.abs(np.fft.rfft(x * np.hamming(n)))
    freqs = np.arange(amp.size) * fs / n
    sel = (freqs >= ANALYSIS_BAND[0]) & (freqs <= ANALYSIS_BAND[1])
    total = float(amp[sel].sum())
    peak = float(freqs[sel][np.argmax(amp[sel])]) if total > 0 else 0.0
    return Spectrum(freqs, amp, peak, total)


def _spec(x, fs, spec):
    return spec if spec is not None else spectrum(x, fs)


def vf_leak(x, fs=250, spec=None):
    """VF filter leakage with a half-period shift estimated from the signal."""
    x = np.asarray(x, dtype=np.float64)
    diff_sum = np.sum(np.abs(np.diff(x)))
    if diff_sum == 0:
        return 0.0
    period = np.pi * np.sum(np.abs(x)) / diff_sum
    shift = int(np.floor(period / 2.0 + 0.5))
    shift = min(max(shift, 1), x.size - 1)
    a, b = x[shift:], x[:-shift]
    den = np.sum(np.abs(a) + np.abs(b))
    return float(np.sum(np.abs(a + b)) / den) if den > 0 else 0.0


def spectral_moment(x, fs=250, spec=None):
    s = _spec(x, fs, spec)
    if s.empty or s.peak == 0:
        return 0.0
    sel = s.band(0.0, min(20.0 * s.peak, 100.0))
    a = s.amp[sel]
    return float(np.sum(a * s.freqs[sel]) / (s.peak * np.sum(a)))


def a2(x, fs=250, spec=None):
    s = _spec(x, fs, spec)
    if s.empty:
        return 0.0
    return float(s.amp[s.band(0.7 * s.peak, 1.4 * s.peak)].sum() / s.total)


def center_frequency(x, fs=250, spec=None):
    s = _spec(x, fs, spec)
    if s.empty:
        return 0.0
    sel = s.band(0.0, 30.0)
    a = s.amp[sel]
    return float(np.sum(a * s.freqs[sel]) / np.sum(a))


def _power_ratio(s, lo, hi):
    p = s.amp ** 2
    tot = p[s.band(*ANALYSIS_BAND)].sum()
    return float(p[s.band(lo, hi)].sum() / tot)


def psa(x, fs=250, spec=None):
    s = _spec(x, fs, spec)
    return 0.0 if s.empty else _power_ratio(s, 4.0, 10.0)


def center_power(x, fs=250, spec=None):
    s = _spec(x, fs, spec)
    return 0.0 if s.empty else _power_ratio(s, s.peak - 0.5, s.peak + 0.5)


def bwt(x, fs=250, spec=None):
    s = _spec(x, fs, spec)
    if s.empty:
        return 0.0
    sel = s.band(0.0, 30.0)
    a, f = s.amp[sel], s.freqs[sel]
    c = np.sum(a * f) / np.sum(a)
    return float(np.sqrt(np.sum(a * (f - c) ** 2) / np.sum(a)))


def bw(x, fs=250, spec=None):
    """Width of the narrowest band centred on the peak bin holding half the
    analysis-band amplitude."""
    s = _spec(x, fs, spec)
    if s.empty:
        return 0.0
    idx = np.nonzero(s.band(*ANALYSIS_BAND))[0]
    lo_b, hi_b = idx[0], idx[-1]
    a = s.amp
    p = int(np.searchsorted(s.freqs, s.peak))
    csum = np.concatenate(([0.0], np.cumsum(a)))
    target = 0.5 * s.total
    for j in range(hi_b - lo_b + 1):
        lo, hi = max(lo_b, p - j), min(hi_b, p + j)
        if csum[hi + 1] - csum[lo] >= target:
            return float(s.freqs[hi] - s.freqs[lo])
    return float(s.freqs[hi_b] - s.freqs[lo_b])


def li(x, fs=250, spec=None):
    """Spectral flatness of the power on the analysis band."""
    s = _spec(x, fs, spec)
    if s.empty:
        return 0.0
    p = s.amp[s.band(*ANALYSIS_BAND)] ** 2
    if np.any(p <= 0):
        return 0.0
    return float(np.exp(np.mean(np.log(p))) / np.mean(p))
