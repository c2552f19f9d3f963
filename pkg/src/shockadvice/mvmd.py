"""Variational mode decomposition with a pinned DC mode, and SH/NSH signal synthesis.

The input is extended by half its length on each side with a point
(odd) reflection about each end sample, which keeps value and slope
continuous at the boundaries. The extended signal is transformed with a real
FFT and the modes are solved for on the non-negative half spectrum, with the
bandwidth penalty ``alpha * (f - f_k)**2`` in cycles per sample. ``irfft``
restores Hermitian symmetry, so every mode is real.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .ingest import FS, NSH, SH


@dataclass(frozen=True)
class VmdConfig:
    K: int = 10
    alpha: float = 2000.0
    tau: float = 0.0
    tol: float = 1e-7
    max_iters: int = 500
    dc_mode: bool = True
    freq_bound: float = 10.0
    fs: float = FS

    def __post_init__(self):
        if self.K < 2:
            raise ValueError("K must be >= 2")
        if self.alpha <= 0 or self.tol <= 0:
            raise ValueError("alpha and tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not 0 < self.freq_bound < self.fs / 2:
            raise ValueError("freq_bound must lie inside (0, Nyquist)")


@dataclass
class ModeDecomposition:
    modes: np.ndarray          # (K, n)
    center_freqs: np.ndarray   # (K,) Hz, ascending
    residual: np.ndarray       # (n,)
    iterations_used: int
    delta: float = float("nan")
    spectra: np.ndarray = field(default=None, repr=False)  # (K, M) half spectra of the mirrored signal
    dc_index: int | None = 0


@dataclass
class TriSignal:
    ecg: np.ndarray
    sh: np.ndarray
    nsh: np.ndarray

    def as_array(self):
        return np.stack([self.ecg, self.sh, self.nsh])


def _mirror(x):
    h = x.size // 2
    left = 2.0 * x[0] - x[1:h + 1][::-1]
    right = 2.0 * x[-1] - x[x.size - h - 1:-1][::-1]
    return np.concatenate([left, x, right]), h


def vmd_decompose(x, cfg=VmdConfig()):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size < 64:
        raise ValueError("need a 1-D signal of at least 64 samples")
    if not np.all(np.isfinite(x)):
        raise ValueError("signal contains non-finite values")
    n = x.size
    xm, h = _mirror(x)
    T = xm.size
    f_hat = np.fft.rfft(xm)
    freqs = np.arange(f_hat.size) / T
    omega0 = 0.5 * np.arange(cfg.K) / cfg.K
    u_hat, omega, n_iter, delta = kernels.vmd_admm(
        f_hat, freqs, omega0, float(cfg.alpha), float(cfg.tau), float(cfg.tol),
        int(cfg.max_iters), bool(cfg.dc_mode))

    order = np.argsort(omega, kind="stable")
    if cfg.dc_mode:
        # keep the pinned mode first even if another mode also sits at 0 Hz
        order = np.concatenate([[0], order[order != 0]])
    u_hat = u_hat[order]
    omega = omega[order]
    full = np.fft.irfft(u_hat, n=T, axis=1)
    modes = np.ascontiguousarray(full[:, h:h + n])
    residual = x - modes.sum(axis=0)
    return ModeDecomposition(modes=modes, center_freqs=omega * cfg.fs, residual=residual,
                             iterations_used=int(n_iter), delta=float(delta), spectra=u_hat,
                             dc_index=0 if cfg.dc_mode else None)


def synthesize_tri(x, dec, cfg=VmdConfig()):
    """Group non-DC modes below ``freq_bound`` into NSH, the rest into SH."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    sh = np.zeros(n)
    nsh = np.zeros(n)
    for k, cf in enumerate(dec.center_freqs):
        if dec.dc_index is not None and k == dec.dc_index:
            continue
        if cf < cfg.freq_bound:
            nsh += dec.modes[k]
        else:
            sh += dec.modes[k]
    return TriSignal(ecg=x.copy(), sh=sh, nsh=nsh)


def tri_signal(x, cfg=VmdConfig()):
    return synthesize_tri(x, vmd_decompose(x, cfg), cfg)


# Trisignal cache: little-endian records after an 8-byte magic and a u32 sample count.
_MAGIC = b"TRISIG1\x00"
_LABEL_CODE = {SH: 1, NSH: 0}
_CODE_LABEL = {1: SH, 0: NSH}


def write_trisignals(path, items):
    """``items``: iterable of (record_id, start_index, label, TriSignal)."""
    items = list(items)
    n = items[0][3].ecg.size if items else 0
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", n))
        for rid, start, label, tri in items:
            rb = rid.encode("utf-8")
            fh.write(struct.pack("<H", len(rb)))
            fh.write(rb)
            fh.write(struct.pack("<qB", int(start), _LABEL_CODE[label]))
            fh.write(np.ascontiguousarray(tri.as_array(), dtype="<f8").tobytes())


def read_trisignals(path):
    out = []
    with open(path, "rb") as fh:
        if fh.read(8) != _MAGIC:
            raise ValueError(f"{path}: not a trisignal file")
        (n,) = struct.unpack("<I", fh.read(4))
        while True:
            head = fh.read(2)
            if not head:
                break
            (ln,) = struct.unpack("<H", head)
            rid = fh.read(ln).decode("utf-8")
            start, code = struct.unpack("<qB", fh.read(9))
            arr = np.frombuffer(fh.read(3 * n * 8), dtype="<f8").reshape(3, n).astype(np.float64)
            out.append((rid, start, _CODE_LABEL[code], TriSignal(arr[0], arr[1], arr[2])))
    return out
