"""Entropy-family features. Tolerances ``r`` are relative to the signal's
population standard deviation; a flat signal gives 0 for every entropy."""

import numpy as np
from scipy.special import ndtr

from .._backend import kernels


def dispersion_entropy(x, classes=6, m=2):
    x = np.asarray(x, dtype=np.float64)
    sd = x.std()
    if sd == 0:
        return 0.0
    y = ndtr((x - x.mean()) / sd)
    z = np.minimum(np.floor(classes * y).astype(np.int64) + 1, classes)
    n_pat = x.size - m + 1
    codes = np.zeros(n_pat, dtype=np.int64)
    for s in range(m):
        codes = codes * classes + (z[s:s + n_pat] - 1)
    p = np.bincount(codes, minlength=classes ** m) / n_pat
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)) / np.log(classes ** m))


def sample_entropy(x, m=2, r=0.2):
    x = np.asarray(x, dtype=np.float64)
    sd = x.std()
    if sd == 0:
        return 0.0
    a, b = kernels.sample_entropy_counts(x, m, r * sd)
    if a == 0 or b == 0:
        n_t = x.size - m
        return float(np.log(n_t * (n_t - 1) / 2.0))
    return float(-np.log(a / b))


def energy(x):
    x = np.asarray(x, dtype=np.float64)
    return float(np.dot(x, x))


def renyi_entropy(x, bins=64):
    """Order-2 Renyi entropy of the amplitude histogram on [min, max]."""
    x = np.asarray(x, dtype=np.float64)
    lo, hi = x.min(), x.max()
    if not hi > lo:
        return 0.0
    idx = np.minimum(np.floor((x - lo) / (hi - lo) * bins).astype(np.int64), bins - 1)
    p = np.bincount(idx, minlength=bins) / x.size
    return float(-np.log(np.sum(p ** 2)))


def fuzzy_entropy(x, m=2, r=0.2):
    x = np.asarray(x, dtype=np.float64)
    sd = x.std()
    if sd == 0:
        return 0.0
    phi_m, phi_m1 = kernels.fuzzy_entropy_phi(x, m, r * sd)
    if phi_m <= 0 or phi_m1 <= 0:
        return 0.0
    return float(np.log(phi_m) - np.log(phi_m1))


def haar_energies(x, levels=5):
    """Detail energies d1..dL followed by the final approximation energy.

    Odd-length levels drop their last sample before pairing.
    """
    a = np.asarray(x, dtype=np.float64)
    out = []
    for _ in range(levels):
        n = a.size - a.size % 2
        even, odd = a[0:n:2], a[1:n:2]
        d = (even - odd) / np.sqrt(2.0)
        a = (even + odd) / np.sqrt(2.0)
        out.append(float(np.dot(d, d)))
    out.append(float(np.dot(a, a)))
    return np.array(out)


def wavelet_entropy(x, levels=5):
    e = haar_energies(x, levels)
    tot = e.sum()
    if tot == 0:
        return 0.0
    p = e[e > 0] / tot
    return float(-np.sum(p * np.log(p)))
