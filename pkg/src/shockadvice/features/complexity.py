"""Phase-space occupancy, Lempel-Ziv complexity, binary-sequence and moment features."""

import numpy as np
from scipy.signal import hilbert

from .._backend import kernels

GRID = 40


def _grid_index(v, lo, hi):
    idx = np.floor((v - lo) / (hi - lo) * GRID).astype(np.int64)
    return np.minimum(idx, GRID - 1)


def _occupancy(u, v):
    if not (u.max() > u.min() and v.max() > v.min()):
        return 0.0
    iu = _grid_index(u, u.min(), u.max())
    iv = _grid_index(v, v.min(), v.max())
    cells = np.unique(iu * GRID + iv)
    return cells.size / float(GRID * GRID)


def psr(x, fs=250, delay_s=0.5):
    """Share of a 40x40 grid visited by (x(t), x(t + 0.5 s)); both axes span
    the signal's [min, max]."""
    x = np.asarray(x, dtype=np.float64)
    d = int(delay_s * fs)
    lo, hi = x.min(), x.max()
    if not hi > lo:
        return 0.0
    a = _grid_index(x[:-d], lo, hi)
    b = _grid_index(x[d:], lo, hi)
    return np.unique(a * GRID + b).size / float(GRID * GRID)


def hilb(x):
    """Grid occupancy of (x, Hilbert transform of x), each axis on its own range."""
    x = np.asarray(x, dtype=np.float64)
    return _occupancy(x, np.imag(hilbert(x)))


def cm(x):
    x = np.asarray(x, dtype=np.float64)
    b = (x > np.median(x)).astype(np.uint8)
    n = b.size
    return kernels.lempel_ziv(b) * np.log2(n) / n


def _binary(x, ratio=0.2):
    y = np.abs(np.asarray(x, dtype=np.float64))
    return y >= ratio * y.max()


def _run_lengths(b):
    change = np.nonzero(b[1:] != b[:-1])[0] + 1
    edges = np.concatenate(([0], change, [b.size]))
    return np.diff(edges)


def cvbin(x):
    return float(np.var(_run_lengths(_binary(x))))


def area(x):
    return float(np.mean(_binary(x)))


def frq(x, fs=250):
    b = _binary(x).astype(np.int8)
    rises = np.count_nonzero((b[1:] - b[:-1]) == 1)
    return rises / (b.size / fs)


def kurtosis(x):
    x = np.asarray(x, dtype=np.float64)
    c = x - x.mean()
    m2 = np.mean(c ** 2)
    if m2 == 0:
        return 0.0
    return float(np.mean(c ** 4) / m2 ** 2)
