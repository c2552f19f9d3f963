"""Repeated cross-validated KNN error, feature ranking and forward selection.

Every repetition draws its own fold assignment from a generator seeded with
``SeedSequence([seed, stream, repetition])``. Repetitions are independent
tasks and are reduced in repetition order, so results do not depend on the
worker count.

Forward selection adds features in ranked order without backward steps. The
distance matrix of each fold is extended by one column per step, which is
exactly the distance a from-scratch KNN on the same prefix would compute.
"""

import csv
import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ._backend import kernels
from ._parallel import pmap
from .knn import DEFAULT_K_GRID, check_k, column_stats, sh_votes
from .metrics import ber_from_counts

STREAM_SELECTION = 0
STREAM_EVAL = 1


@dataclass(frozen=True)
class CvSpec:
    folds: int = 5
    repetitions: int = 50
    stratified: bool = True
    seed: int = 0
    group_by_record: bool = False

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")

    def with_seed(self, seed):
        return replace(self, seed=int(seed))


def repetition_rng(seed, repetition, stream=STREAM_SELECTION):
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(stream), int(repetition)]))


def assign_folds(y, folds, rng, stratified=True, groups=None):
    """Fold index per row.

    Without groups, each class is permuted and dealt round-robin, continuing
    the deal where the previous class stopped so fold sizes stay balanced.
    With groups (record ids), whole groups are dealt in a random order to the
    fold that currently holds the fewest SH rows (then the fewest rows).
    """
    y = np.asarray(y)
    n = y.size
    fold = np.empty(n, dtype=np.int64)
    if groups is None:
        if not stratified:
            fold[rng.permutation(n)] = np.arange(n) % folds
            return fold
        offset = 0
        for c in (1, 0):
            idx = np.flatnonzero(y == c)
            fold[rng.permutation(idx)] = (offset + np.arange(idx.size)) % folds
            offset += idx.size
        return fold
    groups = np.asarray(groups)
    uniq, inv = np.unique(groups, return_inverse=True)
    order = rng.permutation(uniq.size)
    sh = np.bincount(inv, weights=(y == 1), minlength=uniq.size)
    size = np.bincount(inv, minlength=uniq.size)
    if stratified:
        order = order[np.argsort(-sh[order], kind="stable")]
    load_sh = np.zeros(folds)
    load_n = np.zeros(folds)
    g_fold = np.empty(uniq.size, dtype=np.int64)
    for g in order:
        key = np.lexsort((np.arange(folds), load_n, load_sh)) if stratified else np.lexsort((np.arange(folds), load_n))
        f = key[0]
        g_fold[g] = f
        load_sh[f] += sh[g]
        load_n[f] += size[g]
    return g_fold[inv]


def fold_plan(data, cv, stream=STREAM_SELECTION):
    """Fold assignments for every repetition, shape (repetitions, n)."""
    y = data.y
    if y.min() == y.max():
        raise ValueError("both SH and NSH samples are required")
    groups = data.record_ids if cv.group_by_record else None
    return np.stack([
        assign_folds(y, cv.folds, repetition_rng(cv.seed, r, stream), cv.stratified, groups)
        for r in range(cv.repetitions)
    ])


def _counts(votes, yq, k_grid):
    out = np.empty((len(k_grid), 4), dtype=np.int64)
    t = yq.astype(bool)
    for i, k in enumerate(k_grid):
        p = votes[:, k - 1] > k // 2
        out[i] = (np.sum(t & p), np.sum(t & ~p), np.sum(~t & ~p), np.sum(~t & p))
    return out


def _repetition_counts(task):
    """Confusion counts for one repetition.

    ``mode="prefix"``: step j uses columns 0..j (forward selection).
    ``mode="single"``: step j uses column j alone (individual ranking).
    ``mode="last"``: only the full column set is scored.
    Returns an int array (steps, folds, len(k_grid), 4); one step for "last".
    """
    X, y, fold, folds, k_grid, mode = task
    kmax = max(k_grid)
    n_steps = X.shape[1]
    out = np.zeros((1 if mode == "last" else n_steps, folds, len(k_grid), 4), dtype=np.int64)
    for f in range(folds):
        te = fold == f
        tr = ~te
        y_tr, y_te = y[tr], y[te]
        if y_te.min() == y_te.max():
            raise ValueError(f"fold {f} lacks a class; use fewer folds")
        check_k(kmax, int(tr.sum()))
        D = np.zeros((int(te.sum()), int(tr.sum())))
        for j in range(n_steps):
            if mode == "single":
                D.fill(0.0)
            col = X[:, j]
            mu, sd = column_stats(col[tr])
            kernels.accumulate_sqdist(D, np.ascontiguousarray((col[te] - mu) / sd),
                                      np.ascontiguousarray((col[tr] - mu) / sd))
            if mode != "last":
                out[j, f] = _counts(sh_votes(D, y_tr, kmax), y_te, k_grid)
        if mode == "last":
            out[0, f] = _counts(sh_votes(D, y_tr, kmax), y_te, k_grid)
    return out


def _run(data, feature_ids, cv, k_grid, mode, workers):
    k_grid = sorted(set(int(k) for k in k_grid))
    if not k_grid:
        raise ValueError("k_grid is empty")
    for k in k_grid:
        check_k(k, len(data))
    X = np.ascontiguousarray(data.matrix[:, data.columns(feature_ids)])
    y = data.y
    plan = fold_plan(data, cv)
    tasks = [(X, y, plan[r], cv.folds, k_grid, mode) for r in range(cv.repetitions)]
    counts = np.stack(pmap(_repetition_counts, tasks, workers=workers))
    # (reps, steps, folds, k, 4) -> BER over reps x folds
    ber = ber_from_counts(counts)
    ber = np.moveaxis(ber, 1, 0).reshape(counts.shape[1], -1, len(k_grid))
    return k_grid, ber


def cv_ber_grid(data, feature_ids, cv, k_grid=DEFAULT_K_GRID, workers=1):
    """Mean and std of fold BER over repetitions x folds for each k in ``k_grid``
    (sorted ascending)."""
    feature_ids = list(feature_ids)
    if not feature_ids:
        raise ValueError("feature subset is empty")
    k_grid, ber = _run(data, feature_ids, cv, k_grid, "last", workers)
    last = ber[0]
    return last.mean(axis=0), last.std(axis=0)


def cv_ber(data, feature_ids, cv, k, workers=1):
    means, stds = cv_ber_grid(data, feature_ids, cv, [k], workers)
    return float(means[0]), float(stds[0])


def rank_individual(train, cv, k_grid=DEFAULT_K_GRID, workers=1, feature_ids=None):
    """Features sorted by their best single-feature mean CV BER over ``k_grid``.

    Returns ``(ranked_ids, scores)`` with ``scores`` in input order. Equal
    scores keep input (registry) order.
    """
    feature_ids = list(feature_ids or train.feature_ids)
    _, ber = _run(train, feature_ids, cv, k_grid, "single", workers)
    scores = ber.mean(axis=1).min(axis=1)
    order = np.argsort(scores, kind="stable")
    return [feature_ids[i] for i in order], scores


@dataclass
class CurvePoint:
    size: int
    mean_ber: float
    std_ber: float
    k: int
    feature_id: str


@dataclass
class SelectionResult:
    curve: list
    ranking: list
    individual_scores: dict
    best_size: int
    best_subset: list
    best_k: int
    seed: int
    cv: dict = field(default_factory=dict)
    k_grid: list = field(default_factory=list)

    def subset_at(self, size):
        return [p.feature_id for p in self.curve[:size]]

    def to_dict(self):
        return {
            "best_k": self.best_k,
            "best_size": self.best_size,
            "best_subset": list(self.best_subset),
            "curve": [dict(asdict(p), subset=self.subset_at(p.size)) for p in self.curve],
            "cv": dict(self.cv),
            "individual_scores": dict(self.individual_scores),
            "k_grid": list(self.k_grid),
            "k_per_step": [p.k for p in self.curve],
            "ranking": list(self.ranking),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d):
        curve = [CurvePoint(p["size"], p["mean_ber"], p["std_ber"], p["k"], p["feature_id"])
                 for p in d["curve"]]
        return cls(curve, d["ranking"], d["individual_scores"], d["best_size"],
                   d["best_subset"], d["best_k"], d["seed"], d.get("cv", {}), d.get("k_grid", []))

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def read_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def write_curve_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["size", "mean_ber", "std_ber", "k", "feature_id"])
        for p in self.curve:
            w.writerow([p.size, repr(p.mean_ber), repr(p.std_ber), p.k, p.feature_id])


def sffs(train, cv, k_grid=DEFAULT_K_GRID, workers=1, ranking=None):
    """Forward selection over the ranked features with k tuned at each step.

    The curve has one point per subset size. The best size minimises the mean
    BER, the smaller size winning ties, and the best subset is that prefix of
    the ranking.
    """
    if ranking is None:
        ranking, scores = rank_individual(train, cv, k_grid, workers)
        score_map = dict(zip(train.feature_ids, (float(s) for s in scores)))
    else:
        ranking = list(ranking)
        score_map = {}
    k_grid, ber = _run(train, ranking, cv, k_grid, "prefix", workers)
    means = ber.mean(axis=1)
    stds = ber.std(axis=1)
    curve = []
    for j, fid in enumerate(ranking):
        ki = int(np.argmin(means[j]))
        curve.append(CurvePoint(j + 1, float(means[j, ki]), float(stds[j, ki]), k_grid[ki], fid))
    best = int(np.argmin([p.mean_ber for p in curve]))
    return SelectionResult(
        curve=curve,
        ranking=list(ranking),
        individual_scores=score_map,
        best_size=best + 1,
        best_subset=list(ranking[:best + 1]),
        best_k=curve[best].k,
        seed=cv.seed,
        cv=asdict(cv),
        k_grid=list(k_grid),
    )
