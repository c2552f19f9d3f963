"""Pure-Python/numpy implementations of the hot kernels.

Every function here has a twin with the same signature in ``_kernels.pyx``.
:mod:`shockadvice._backend` picks one of the two at import time.
"""

import numpy as np


def vmd_admm(f_hat, freqs, omega0, alpha, tau, tol, max_iters, dc):
    """Alternating-direction solver for the half-spectrum VMD problem.

    Parameters
    ----------
    f_hat : complex ndarray, shape (M,)
        Non-negative-frequency spectrum of the (mirrored) signal.
    freqs : float ndarray, shape (M,)
        Normalized frequency of each bin, in cycles per sample.
    omega0 : float ndarray, shape (K,)
        Initial center frequencies.
    alpha, tau, tol : float
        Bandwidth penalty, dual ascent step and stopping threshold.
    max_iters : int
    dc : bool
        Hold the first mode at zero frequency.

    Returns
    -------
    u_hat : complex ndarray, shape (K, M)
    omega : float ndarray, shape (K,)
    n_iter : int
    delta : float
        Value of the stopping statistic at exit.
    """
    f_hat = np.asarray(f_hat, dtype=np.complex128)
    freqs = np.asarray(freqs, dtype=np.float64)
    omega = np.array(omega0, dtype=np.float64)
    K = omega.shape[0]
    M = f_hat.shape[0]
    u_hat = np.zeros((K, M), dtype=np.complex128)
    lam = np.zeros(M, dtype=np.complex128)
    total = np.zeros(M, dtype=np.complex128)
    if dc:
        omega[0] = 0.0

    delta = np.inf
    n = 0
    while n < max_iters:
        n += 1
        delta = 0.0
        for k in range(K):
            prev = u_hat[k].copy()
            others = total - prev
            new = (f_hat - others + 0.5 * lam) / (1.0 + alpha * (freqs - omega[k]) ** 2)
            u_hat[k] = new
            total = others + new
            if not (dc and k == 0):
                power = new.real ** 2 + new.imag ** 2
                s = power.sum()
                if s > 0.0:
                    omega[k] = np.dot(freqs, power) / s
            step = new - prev
            num = np.sum(step.real ** 2 + step.imag ** 2)
            den = np.sum(prev.real ** 2 + prev.imag ** 2)
            if den > 0.0:
                delta += num / den
            elif num > 0.0:
                delta = np.inf
        if tau != 0.0:
            lam = lam + tau * (f_hat - total)
        if delta < tol:
            break
    return u_hat, omega, n, float(delta)


def sample_entropy_counts(x, m, r):
    """Return ``(A, B)``: template pairs within ``r`` at lengths m+1 and m.

    Both lengths use the first ``N - m`` templates; Chebyshev distance,
    pairs ``i < j``, match when distance <= r.
    """
    x = np.asarray(x, dtype=np.float64)
    n_t = x.shape[0] - m
    if n_t < 2:
        return 0, 0
    dist = np.zeros((n_t, n_t))
    for s in range(m):
        seg = x[s:s + n_t]
        np.maximum(dist, np.abs(seg[:, None] - seg[None, :]), out=dist)
    iu = np.triu_indices(n_t, 1)
    match_m = dist[iu] <= r
    last = x[m:m + n_t]
    d_last = np.abs(last[:, None] - last[None, :])[iu]
    match_m1 = match_m & (d_last <= r)
    return int(match_m1.sum()), int(match_m.sum())


def fuzzy_entropy_phi(x, m, r):
    """Return ``(phi_m, phi_m1)`` of fuzzy entropy with Gaussian membership.

    Templates are baseline-removed (own mean subtracted); ``N - m`` templates
    at both lengths; similarity ``exp(-(d/r)^2)`` with Chebyshev ``d``.
    """
    x = np.asarray(x, dtype=np.float64)
    n_t = x.shape[0] - m
    if n_t < 2:
        return 0.0, 0.0
    out = []
    for length in (m, m + 1):
        tpl = np.stack([x[s:s + n_t] for s in range(length)], axis=1)
        tpl = tpl - tpl.mean(axis=1, keepdims=True)
        dist = np.zeros((n_t, n_t))
        for s in range(length):
            col = tpl[:, s]
            np.maximum(dist, np.abs(col[:, None] - col[None, :]), out=dist)
        sim = np.exp(-((dist / r) ** 2))
        np.fill_diagonal(sim, 0.0)
        out.append(float(sim.sum() / (n_t * (n_t - 1))))
    return out[0], out[1]


def lempel_ziv(b):
    """Lempel-Ziv (1976) complexity count of a binary sequence."""
    s = bytes(np.asarray(b, dtype=np.uint8))
    n = len(s)
    if n == 0:
        return 0
    if n == 1:
        return 1
    c, l, i, k, k_max = 1, 1, 0, 1, 1
    while True:
        if s[i + k - 1] == s[l + k - 1]:
            k += 1
            if l + k > n:
                c += 1
                break
        else:
            if k > k_max:
                k_max = k
            i += 1
            if i == l:
                c += 1
                l += k_max
                if l + 1 > n:
                    break
                i, k, k_max = 0, 1, 1
            else:
                k = 1
    return c


def exponential_lifts(y, tau):
    """Count envelope re-lifts of a decaying exponential riding on ``y``.

    The envelope starts at ``y[0]`` and decays with time constant ``tau``
    samples. A local maximum of ``y`` strictly above the envelope counts as a
    lift and re-anchors the envelope there.
    """
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    if n < 3:
        return 0
    anchor_t = 0
    anchor_v = y[0]
    lifts = 0
    for t in range(1, n - 1):
        v = y[t]
        if v >= y[t - 1] and v >= y[t + 1]:
            env = anchor_v * np.exp(-(t - anchor_t) / tau)
            if v > env:
                lifts += 1
                anchor_t = t
                anchor_v = v
    return lifts


def accumulate_sqdist(D, qcol, tcol):
    """In place ``D[i, j] += (qcol[i] - tcol[j])**2``."""
    diff = np.subtract.outer(np.asarray(qcol, dtype=np.float64), np.asarray(tcol, dtype=np.float64))
    diff *= diff
    D += diff
    return D


def topk_indices(D, kmax):
    """Indices of the ``kmax`` smallest entries per row, ordered by (value, index)."""
    D = np.asarray(D, dtype=np.float64)
    kmax = min(int(kmax), D.shape[1])
    return np.argsort(D, axis=1, kind="stable")[:, :kmax].astype(np.int64)
