"""Confusion counts and the four detection metrics.

SH is the positive class: ``tp`` is SH classified SH, ``fp`` is NSH classified SH.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fn: int
    tn: int
    fp: int

    def __post_init__(self):
        for name in ("tp", "fn", "tn", "fp"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v}")

    @classmethod
    def from_labels(cls, y_true, y_pred):
        t = np.asarray(y_true).astype(bool)
        p = np.asarray(y_pred).astype(bool)
        return cls(int(np.sum(t & p)), int(np.sum(t & ~p)), int(np.sum(~t & ~p)), int(np.sum(~t & p)))

    def __add__(self, other):
        return ConfusionCounts(self.tp + other.tp, self.fn + other.fn,
                               self.tn + other.tn, self.fp + other.fp)

    @property
    def total(self):
        return self.tp + self.fn + self.tn + self.fp

    def as_tuple(self):
        return (self.tp, self.fn, self.tn, self.fp)


def rates(tp, fn, tn, fp):
    """Vectorised (Ac, Se, Sp, BER); works on scalars or equal-shape arrays."""
    tp, fn, tn, fp = (np.asarray(v, dtype=np.float64) for v in (tp, fn, tn, fp))
    se = tp / (tp + fn)
    sp = tn / (tn + fp)
    ac = (tp + tn) / (tp + fn + tn + fp)
    ber = 1.0 - (se + sp) / 2.0
    return ac, se, sp, ber


def metrics(c):
    """``(Ac, Se, Sp, BER)`` of a :class:`ConfusionCounts`."""
    if c.tp + c.fn == 0:
        raise ValueError("no SH samples: sensitivity undefined")
    if c.tn + c.fp == 0:
        raise ValueError("no NSH samples: specificity undefined")
    return tuple(float(v) for v in rates(c.tp, c.fn, c.tn, c.fp))


def ber_from_counts(counts):
    """BER over the last axis of an integer ``(..., 4)`` array of (tp, fn, tn, fp)."""
    counts = np.asarray(counts)
    pos = counts[..., 0] + counts[..., 1]
    neg = counts[..., 2] + counts[..., 3]
    if np.any(pos == 0) or np.any(neg == 0):
        raise ValueError("a class is absent from an evaluation fold")
    return rates(counts[..., 0], counts[..., 1], counts[..., 2], counts[..., 3])[3]
