"""31 features per signal, evaluated on the ECG, SH and NSH signals (93 total).

Feature ``k`` of signal ``s`` lives at index ``31 * s + k`` with
``s`` = 0 (ecg), 1 (sh), 2 (nsh).
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from . import complexity, entropy, spectral, temporal

REGISTRY_VERSION = "1"
SIGNALS = ("ecg", "sh", "nsh")


@dataclass(frozen=True)
class FeatureSpec:
    feature_id: str
    family: str
    func: object = field(repr=False, compare=False)
    params: dict = field(default_factory=dict, compare=False)
    spectral: bool = False


def _t(fid, func, **params):
    return FeatureSpec(fid, "temporal", func, params)


def _s(fid, func):
    return FeatureSpec(fid, "spectral", func, {}, spectral=True)


def _c(fid, func, **params):
    return FeatureSpec(fid, "complexity", func, params)


def _e(fid, func, **params):
    return FeatureSpec(fid, "entropy", func, params)


REGISTRY = (
    _t("tci", temporal.tci, threshold=0.2),
    _t("tcsc", temporal.tcsc, threshold=0.2, window_s=3.0),
    _t("mav", temporal.mav, window_s=2.0),
    _t("ste", temporal.ste, time_constant=3.0),
    _t("mea", temporal.mea, time_constant=0.2),
    _t("bcp", temporal.bcp, window_s=0.5, ratio=0.25),
    _t("count1", temporal.count1),
    _t("count2", temporal.count2),
    _t("count3", temporal.count3),
    FeatureSpec("vf_leak", "spectral", spectral.vf_leak),
    _s("m", spectral.spectral_moment),
    _s("a2", spectral.a2),
    _s("center_freq", spectral.center_frequency),
    _s("psa", spectral.psa),
    _s("center_power", spectral.center_power),
    _s("bwt", spectral.bwt),
    _s("bw", spectral.bw),
    _s("li", spectral.li),
    _c("psr", complexity.psr, delay_s=0.5),
    _c("hilb", complexity.hilb),
    _c("cm", complexity.cm),
    _c("cvbin", complexity.cvbin),
    _c("area", complexity.area),
    _c("frq", complexity.frq),
    _c("kurtosis", complexity.kurtosis),
    _e("disp_en", entropy.dispersion_entropy, classes=6, m=2),
    _e("samp_en", entropy.sample_entropy, m=2, r=0.2),
    _e("energy", entropy.energy),
    _e("renyi", entropy.renyi_entropy, bins=64),
    _e("fuzzy_en", entropy.fuzzy_entropy, m=2, r=0.2),
    _e("wavelet_en", entropy.wavelet_entropy, levels=5),
)

FEATURE_IDS = tuple(f.feature_id for f in REGISTRY)
_BY_ID = {f.feature_id: f for f in REGISTRY}
_NEEDS_FS = {"tci", "tcsc", "mav", "ste", "mea", "bcp", "psr", "frq"}

assert len(REGISTRY) == 31 and len(_BY_ID) == 31

FULL_IDS = tuple(f"{s}_{fid}" for s in SIGNALS for fid in FEATURE_IDS)


def feature(x, feature_id, fs=250, **params):
    """Evaluate one registered feature on one signal."""
    try:
        spec = _BY_ID[feature_id]
    except KeyError:
        raise KeyError(f"unknown feature {feature_id!r}") from None
    kw = {**spec.params, **params}
    if spec.family == "spectral" or feature_id in _NEEDS_FS:
        kw["fs"] = fs
    return float(spec.func(np.asarray(x, dtype=np.float64), **kw))


def signal_features(x, fs=250):
    """All 31 features of one signal, in registry order."""
    x = np.asarray(x, dtype=np.float64)
    spec = spectral.spectrum(x, fs)
    out = np.empty(len(REGISTRY))
    for i, f in enumerate(REGISTRY):
        if f.spectral:
            out[i] = f.func(x, fs=fs, spec=spec)
        elif f.feature_id == "vf_leak":
            out[i] = f.func(x, fs=fs)
        else:
            kw = dict(f.params)
            if f.feature_id in _NEEDS_FS:
                kw["fs"] = fs
            out[i] = f.func(x, **kw)
    return out


def extract_all(tri, fs=250):
    """93-vector for a :class:`~shockadvice.mvmd.TriSignal`."""
    vec = np.concatenate([signal_features(tri.ecg, fs), signal_features(tri.sh, fs),
                          signal_features(tri.nsh, fs)])
    if not np.all(np.isfinite(vec)):
        raise FloatingPointError("non-finite feature value")
    return vec


def write_features_csv(path, rows, matrix):
    """``rows``: list of (record_id, start_index, label) aligned with ``matrix``."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# registry_version={REGISTRY_VERSION}\n")
        w = csv.writer(fh)
        w.writerow(["record_id", "start_index", "label", *FULL_IDS])
        for (rid, start, label), vec in zip(rows, matrix):
            w.writerow([rid, start, label, *(repr(float(v)) for v in vec)])


def read_features_csv(path):
    """Returns ``(rows, matrix, feature_ids)``."""
    with open(path, newline="") as fh:
        first = fh.readline()
        if not first.startswith("# registry_version="):
            raise ValueError(f"{path}: missing registry version line")
        version = first.strip().split("=", 1)[1]
        if version != REGISTRY_VERSION:
            raise ValueError(f"{path}: registry version {version}, expected {REGISTRY_VERSION}")
        r = csv.reader(fh)
        head = next(r)
        ids = head[3:]
        rows, vals = [], []
        for row in r:
            rows.append((row[0], int(row[1]), row[2]))
            vals.append([float(v) for v in row[3:]])
    matrix = np.array(vals, dtype=np.float64).reshape(len(rows), len(ids))
    return rows, matrix, tuple(ids)
