"""Repeated k-fold validation of a feature subset and report rendering.

In the default ``within_test`` mode each repetition splits the test set into
stratified folds. Each fold is classified once by a KNN trained on the other
folds, and confusion counts are pooled over the folds before metrics are taken.
``train_on_train`` fits once on the training partition and classifies the
whole test set instead.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from ._parallel import pmap
from .knn import Dataset, fit, predict, tune_k
from .metrics import ConfusionCounts, metrics
from .selection import STREAM_EVAL, CvSpec, _repetition_counts, fold_plan

MODES = ("within_test", "train_on_train")
METRIC_NAMES = ("ac", "se", "sp", "ber")

# Published figures for two earlier detectors (percent). Reproduced here as
# fixed reference constants, not as results of this code.
LITERATURE_ROWS = (
    {"method": "Reference detector A (reported)", "ac": 99.3, "se": 97.1, "sp": 99.2},
    {"method": "Reference detector B (reported)", "ac": 99.1, "se": 99.7, "sp": 98.9},
)


@dataclass
class MetricsReport:
    per_repetition: list
    mean: dict
    std: dict
    config: dict = field(default_factory=dict)

    def to_dict(self):
        return {"config": self.config, "mean": self.mean, "std": self.std,
                "per_repetition": self.per_repetition}

    @classmethod
    def from_dict(cls, d):
        return cls(d["per_repetition"], d["mean"], d["std"], d.get("config", {}))


def summarize(counts_per_rep, config=None):
    """Build a :class:`MetricsReport` from one ConfusionCounts per repetition."""
    if not counts_per_rep:
        raise ValueError("no repetitions to summarize")
    rows = []
    for c in counts_per_rep:
        ac, se, sp, ber = metrics(c)
        rows.append({"tp": c.tp, "fn": c.fn, "tn": c.tn, "fp": c.fp,
                     "ac": ac, "se": se, "sp": sp, "ber": ber})
    arr = {m: np.array([r[m] for r in rows]) for m in METRIC_NAMES}
    mean = {m: float(arr[m].mean()) for m in METRIC_NAMES}
    std = {m: float(arr[m].std()) for m in METRIC_NAMES}
    return MetricsReport(rows, mean, std, dict(config or {}))


def _resolve_k(k_grid, train, feature_ids, cv, workers):
    k_grid = sorted(set(int(k) for k in k_grid))
    if len(k_grid) == 1:
        return k_grid[0]
    if train is None:
        raise ValueError("several k values given but no training set to tune them on")
    return tune_k(train.subset_features(feature_ids), k_grid, cv, workers=workers)


def evaluate_subset(test, feature_ids, cv=None, k_grid=(1,), train=None,
                    mode="within_test", workers=1):
    """Ac, Se, Sp and BER of a KNN on ``feature_ids`` over repeated folds.

    Parameters
    ----------
    test : Dataset
        Held-out segments, disjoint in records from ``train``.
    feature_ids : sequence of str
    cv : CvSpec
    k_grid : sequence of odd int
        A single k is used as is. With several, k is tuned on ``train``.
    train : Dataset, optional
        Needed for ``train_on_train`` and for tuning k.
    mode : {"within_test", "train_on_train"}
    """
    cv = cv or CvSpec()
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    feature_ids = list(feature_ids)
    y = test.y
    if y.min() == y.max():
        raise ValueError("test data must contain both SH and NSH segments")
    k = _resolve_k(k_grid, train, feature_ids, cv, workers)

    if mode == "within_test":
        X = np.ascontiguousarray(test.matrix[:, test.columns(feature_ids)])
        plan = fold_plan(test, cv, STREAM_EVAL)
        tasks = [(X, y, plan[r], cv.folds, [k], "last") for r in range(cv.repetitions)]
        pooled = [c[0, :, 0, :].sum(axis=0) for c in pmap(_repetition_counts, tasks, workers=workers)]
        counts = [ConfusionCounts(*(int(v) for v in p)) for p in pooled]
    else:
        if train is None:
            raise ValueError("train_on_train mode needs the training partition")
        model = fit(train.subset_features(feature_ids), k)
        pred = predict(model, test.matrix[:, test.columns(feature_ids)])
        c = ConfusionCounts.from_labels(y, pred == "SH")
        # the pooled prediction of every repetition is the same full-set prediction
        counts = [c] * cv.repetitions

    config = {"seed": cv.seed, "folds": cv.folds, "repetitions": cv.repetitions,
              "stratified": cv.stratified, "group_by_record": cv.group_by_record,
              "k": k, "mode": mode, "subset": feature_ids, "n_features": len(feature_ids),
              "n_test": len(test)}
    return summarize(counts, config)


def comparison_table(report):
    """Rows of (method, Ac, Se, Sp) in percent: this pipeline, then the two
    literature constants."""
    if not report.per_repetition:
        raise ValueError("report has no repetitions")
    n = report.config.get("n_features", "?")
    own = {"method": f"KNN on {n} selected features (this run)",
           "ac": 100.0 * report.mean["ac"], "se": 100.0 * report.mean["se"],
           "sp": 100.0 * report.mean["sp"], "source": "computed"}
    lit = [dict(r, source="literature constant") for r in LITERATURE_ROWS]
    return [own, *lit]


def _pct(report, m):
    return f"{100 * report.mean[m]:.2f} ± {100 * report.std[m]:.2f}"


def render_markdown(census, reports, table):
    """Plain markdown with the segment census, metric summaries and comparison."""
    out = ["# Shock advice evaluation", "", "## Segments", "",
           "| partition | SH | NSH | records |", "|---|---|---|---|"]
    for part in ("train", "test", "total"):
        c = census.get(part)
        if c:
            out.append(f"| {part} | {c['SH']} | {c['NSH']} | {c.get('records', '')} |")
    out += ["", "## Validation on test data", "",
            "| subset | features | k | BER (%) | Ac (%) | Se (%) | Sp (%) |",
            "|---|---|---|---|---|---|---|"]
    for name, rep in reports.items():
        cfg = rep.config
        out.append(f"| {name} | {cfg['n_features']} | {cfg['k']} | {_pct(rep, 'ber')} | "
                   f"{_pct(rep, 'ac')} | {_pct(rep, 'se')} | {_pct(rep, 'sp')} |")
    out += ["", "## Comparison", "", "| method | Ac (%) | Se (%) | Sp (%) | source |",
            "|---|---|---|---|---|"]
    for r in table:
        out.append(f"| {r['method']} | {r['ac']:.1f} | {r['se']:.1f} | {r['sp']:.1f} | {r['source']} |")
    out.append("")
    return "\n".join(out)


def dumps_report(obj):
    """Deterministic JSON text: sorted keys, fixed indentation, shortest float repr."""
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def dataset_from_features(rows, matrix, feature_ids, keep=None):
    """Dataset from ``features.csv`` contents, optionally restricted to record ids in ``keep``."""
    rows = list(rows)
    idx = np.arange(len(rows)) if keep is None else np.array(
        [i for i, r in enumerate(rows) if r[0] in keep], dtype=np.int64)
    return Dataset(
        matrix[idx],
        np.array([rows[i][2] for i in idx], dtype=str),
        np.array([rows[i][0] for i in idx], dtype=str),
        tuple(feature_ids),
    )
