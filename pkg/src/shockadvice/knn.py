"""Brute-force k-nearest-neighbours on z-scored features.

Squared Euclidean distances are accumulated one feature column at a time in
subset order. Forward selection grows its distance matrices the same way, so a
distance computed incrementally is bit-identical to one computed from scratch.
"""

from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels

SH, NSH = "SH", "NSH"
DEFAULT_K_GRID = (1, 3, 5, 7, 9, 11)


def encode_labels(labels):
    """``SH`` -> 1, ``NSH`` -> 0."""
    labels = np.asarray(labels)
    if labels.dtype.kind in "iub":
        return labels.astype(np.int8)
    bad = set(labels.tolist()) - {SH, NSH}
    if bad:
        raise ValueError(f"unknown labels {sorted(bad)}")
    return (labels == SH).astype(np.int8)


def decode_labels(y):
    return np.where(np.asarray(y) == 1, SH, NSH)


@dataclass
class Dataset:
    matrix: np.ndarray
    labels: np.ndarray
    record_ids: np.ndarray
    feature_ids: tuple = ()

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        if self.matrix.ndim != 2:
            raise ValueError("matrix must be 2-D")
        self.labels = decode_labels(encode_labels(self.labels))
        self.record_ids = np.asarray(self.record_ids).astype(str)
        n, d = self.matrix.shape
        if self.labels.shape != (n,) or self.record_ids.shape != (n,):
            raise ValueError("matrix, labels and record_ids must have the same row count")
        if not self.feature_ids:
            self.feature_ids = tuple(f"f{i}" for i in range(d))
        self.feature_ids = tuple(self.feature_ids)
        if len(self.feature_ids) != d:
            raise ValueError("feature_ids length does not match matrix width")

    def __len__(self):
        return self.matrix.shape[0]

    @property
    def y(self):
        return encode_labels(self.labels)

    def columns(self, feature_ids):
        pos = {f: i for i, f in enumerate(self.feature_ids)}
        try:
            return [pos[f] for f in feature_ids]
        except KeyError as exc:
            raise KeyError(f"unknown feature {exc.args[0]!r}") from None

    def subset_rows(self, idx):
        return Dataset(self.matrix[idx], self.labels[idx], self.record_ids[idx], self.feature_ids)

    def subset_features(self, feature_ids):
        cols = self.columns(feature_ids)
        return Dataset(self.matrix[:, cols], self.labels, self.record_ids, tuple(feature_ids))


def column_stats(col):
    """Mean and population std of one column; std 1 when the column is constant."""
    col = np.ascontiguousarray(col, dtype=np.float64)
    # test constancy exactly: std() of a constant column can round to ~1e-16
    if col.size == 0 or np.all(col == col[0]):
        return (col[0] if col.size else 0.0), 1.0
    return col.mean(), col.std()


def standardizer(matrix):
    """Per-column statistics, one contiguous column at a time so they equal
    what :func:`column_stats` gives for the same column alone."""
    matrix = np.asarray(matrix, dtype=np.float64)
    stats = [column_stats(matrix[:, j]) for j in range(matrix.shape[1])]
    mean = np.array([s[0] for s in stats])
    std = np.array([s[1] for s in stats])
    return mean, std


def check_k(k, n):
    if int(k) != k or k < 1 or k % 2 == 0:
        raise ValueError(f"k must be a positive odd integer, got {k}")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of training rows ({n})")


def sqdist(query, train):
    """Squared distances, accumulated column by column."""
    query = np.asarray(query, dtype=np.float64)
    train = np.asarray(train, dtype=np.float64)
    D = np.zeros((query.shape[0], train.shape[0]))
    for j in range(query.shape[1]):
        kernels.accumulate_sqdist(D, np.ascontiguousarray(query[:, j]),
                                  np.ascontiguousarray(train[:, j]))
    return D


def sh_votes(D, y_train, kmax):
    """Cumulative SH votes among the nearest neighbours.

    Column ``k - 1`` of the result holds the SH count among the ``k`` nearest,
    with distance ties broken by lower training index.
    """
    nn = kernels.topk_indices(D, kmax)
    return np.cumsum(np.asarray(y_train)[nn], axis=1)


def vote(votes, k):
    """Majority decision for odd ``k`` from :func:`sh_votes` output."""
    return (votes[:, k - 1] > k // 2).astype(np.int8)


@dataclass
class KnnModel:
    train_matrix: np.ndarray          # standardized
    train_labels: np.ndarray          # 1 = SH, 0 = NSH
    k: int
    mean: np.ndarray
    std: np.ndarray
    feature_ids: tuple = field(default=())

    def predict(self, x):
        return predict(self, x)

    def save(self, path):
        np.savez(
            path,
            train_matrix=self.train_matrix,
            train_labels=self.train_labels,
            k=np.int64(self.k),
            mean=self.mean,
            std=self.std,
            feature_ids=np.array(self.feature_ids, dtype=str),
        )

    @classmethod
    def load(cls, path):
        with np.load(path, allow_pickle=False) as z:
            return cls(
                z["train_matrix"], z["train_labels"], int(z["k"]), z["mean"], z["std"],
                tuple(z["feature_ids"].tolist()),
            )


def fit(train, k):
    """Standardize ``train`` with its own statistics and store it."""
    check_k(k, len(train))
    mean, std = standardizer(train.matrix)
    z = (train.matrix - mean) / std
    return KnnModel(z, train.y.copy(), int(k), mean, std, tuple(train.feature_ids))


def predict(model, x):
    """Labels (``SH``/``NSH``) for one vector or a matrix of query rows."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    q = np.atleast_2d(x)
    if q.shape[1] != model.train_matrix.shape[1]:
        raise ValueError(f"query has {q.shape[1]} features, model expects {model.train_matrix.shape[1]}")
    D = sqdist((q - model.mean) / model.std, model.train_matrix)
    pred = decode_labels(vote(sh_votes(D, model.train_labels, model.k), model.k))
    return pred[0] if single else pred


def tune_k(train, k_grid=DEFAULT_K_GRID, cv=None, rng_seed=None, workers=1):
    """k with the lowest mean CV BER on ``train`` over all features; ties go to the smaller k."""
    from .selection import CvSpec, cv_ber_grid

    cv = cv or CvSpec()
    if rng_seed is not None:
        cv = cv.with_seed(rng_seed)
    k_grid = sorted(set(int(k) for k in k_grid))
    if not k_grid:
        raise ValueError("k_grid is empty")
    means, _ = cv_ber_grid(train, list(train.feature_ids), cv, k_grid, workers=workers)
    return k_grid[int(np.argmin(means))]
