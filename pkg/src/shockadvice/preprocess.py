"""Segment conditioning: moving average, baseline removal, low-pass Butterworth."""

from dataclasses import dataclass, replace

import numpy as np
from scipy import signal

from .ingest import FS


@dataclass(frozen=True)
class FilterChainConfig:
    ma_order: int = 5
    hp_cutoff: float = 1.0
    lp_cutoff: float = 30.0
    lp_order: int = 2

    def __post_init__(self):
        if self.ma_order < 1 or self.ma_order % 2 == 0:
            raise ValueError("ma_order must be odd and >= 1")
        if not 0 < self.hp_cutoff < self.lp_cutoff < FS / 2:
            raise ValueError("need 0 < hp_cutoff < lp_cutoff < 125 Hz")
        if self.lp_order != 2:
            raise ValueError("lp_order is fixed at 2")


def moving_average(x, order=5):
    """Centered moving average; windows shrink at the edges."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if n == 0:
        raise ValueError("empty input")
    if order < 1 or order % 2 == 0:
        raise ValueError("order must be odd and >= 1")
    if order > n:
        raise ValueError("order exceeds input length")
    h = order // 2
    csum = np.concatenate(([0.0], np.cumsum(x)))
    idx = np.arange(n)
    lo = np.maximum(idx - h, 0)
    hi = np.minimum(idx + h + 1, n)
    return (csum[hi] - csum[lo]) / (hi - lo)


def _zero_phase(b, a, x):
    x = np.asarray(x, dtype=np.float64)
    if x.size < 8:
        raise ValueError("need at least 8 samples")
    padlen = min(3 * max(len(a), len(b)), x.size - 1)
    return signal.filtfilt(b, a, x, padtype="odd", padlen=padlen)


def remove_baseline(x, hp_cutoff=1.0, fs=FS):
    """First-order Butterworth high-pass, applied forward and backward."""
    b, a = signal.butter(1, hp_cutoff, btype="highpass", fs=fs)
    return _zero_phase(b, a, x)


def lowpass_butter2(x, lp_cutoff=30.0, fs=FS):
    """Second-order Butterworth low-pass (bilinear), applied forward and backward."""
    b, a = signal.butter(2, lp_cutoff, btype="lowpass", fs=fs)
    return _zero_phase(b, a, x)


def filter_chain(x, cfg=FilterChainConfig()):
    y = moving_average(x, cfg.ma_order)
    y = remove_baseline(y, cfg.hp_cutoff)
    return lowpass_butter2(y, cfg.lp_cutoff)


def preprocess_segment(seg, cfg=FilterChainConfig()):
    return replace(seg, samples=filter_chain(seg.samples, cfg))
