"""Time-domain features: threshold crossings, amplitude and exponential envelopes."""

import numpy as np

from .._backend import kernels


def _windows(n, width, stride):
    if n < width:
        return [(0, n)]
    return [(s, s + width) for s in range(0, n - width + 1, stride)]


def tci(x, fs=250, threshold=0.2):
    """Threshold crossing interval in ms, averaged over 1-s subwindows.

    In each subwindow the threshold is ``threshold * max|x|`` of that window
    and upward crossings satisfy ``x[i-1] < th <= x[i]``. Fewer than two
    crossings count as one full window (1000 ms).
    """
    x = np.asarray(x, dtype=np.float64)
    w = int(fs)
    vals = []
    for a, b in _windows(x.size, w, w):
        seg = x[a:b]
        th = threshold * np.max(np.abs(seg))
        up = np.nonzero((seg[:-1] < th) & (seg[1:] >= th))[0] + 1
        if up.size >= 2:
            vals.append(np.mean(np.diff(up)) * 1000.0 / fs)
        else:
            vals.append((b - a) * 1000.0 / fs)
    return float(np.mean(vals))


def tcsc(x, fs=250, threshold=0.2, window_s=3.0):
    """Threshold crossing sample count: share of samples above 20% of the
    window maximum, over 3-s windows with a 1-s stride."""
    x = np.asarray(x, dtype=np.float64)
    vals = []
    for a, b in _windows(x.size, int(window_s * fs), int(fs)):
        y = np.abs(x[a:b])
        m = y.max()
        vals.append(0.0 if m == 0 else float(np.mean(y / m > threshold)))
    return float(np.mean(vals))


def mav(x, fs=250, window_s=2.0):
    x = np.asarray(x, dtype=np.float64)
    vals = [np.mean(np.abs(x[a:b])) for a, b in _windows(x.size, int(window_s * fs), int(fs))]
    return float(np.mean(vals))


def ste(x, fs=250, time_constant=3.0):
    """Standard exponential: crossings between ``|x|`` and a two-sided
    exponential hung from the global peak."""
    y = np.abs(np.asarray(x, dtype=np.float64))
    t_peak = int(np.argmax(y))
    env = y[t_peak] * np.exp(-np.abs(np.arange(y.size) - t_peak) / (time_constant * fs))
    d = y - env
    return float(np.count_nonzero(d[:-1] * d[1:] < 0))


def mea(x, fs=250, time_constant=0.2):
    """Modified exponential: number of times the decaying envelope is
    re-lifted by a local maximum of ``|x|`` rising above it."""
    y = np.abs(np.asarray(x, dtype=np.float64))
    return float(kernels.exponential_lifts(y, time_constant * fs))


def bcp(x, fs=250, window_s=0.5, ratio=0.25):
    y = np.abs(np.asarray(x, dtype=np.float64))
    w = min(int(window_s * fs), y.size)
    local_max = np.lib.stride_tricks.sliding_window_view(y, w).max(axis=1)
    return float(np.mean(local_max < ratio * y.max()))


def count1(x):
    y = np.abs(np.asarray(x, dtype=np.float64))
    return float(np.count_nonzero(y >= 0.5 * y.max()) / y.size)


def count2(x):
    y = np.abs(np.asarray(x, dtype=np.float64))
    return float(np.count_nonzero(y >= y.mean()) / y.size)


def count3(x):
    y = np.abs(np.asarray(x, dtype=np.float64))
    return float(np.count_nonzero((y >= y.mean()) & (y <= 0.5 * y.max())) / y.size)
