"""Pipeline configuration from a TOML file.

Every section is optional; missing keys take the defaults below. Unknown
keys are rejected so typos fail loudly.

::

    seed = 0
    db_dir = "data"
    cache_dir = ".shockadvice-cache"

    [ingest]
    initial_rhythm = "N"
    shockable = ["VF", "VFIB", "VFL", "VT", "FLU"]
    discard = ["NOISE", "ASYS"]

    [preprocess]
    ma_order = 5
    hp_cutoff = 1.0
    lp_cutoff = 30.0
    lp_order = 2

    [vmd]
    K = 10
    alpha = 2000.0
    tau = 0.0
    tol = 1e-7
    max_iters = 500
    freq_bound = 10.0

    [cv]
    folds = 5
    repetitions = 50
    stratified = true
    group_by_record = false

    [knn]
    k_grid = [1, 3, 5, 7, 9, 11]

    [eval]
    mode = "within_test"

    [stages]
    evaluate_full_set = true
"""

import sys
from dataclasses import asdict, dataclass, field, fields, replace

from .evaluation import MODES
from .ingest import LabelMap
from .knn import DEFAULT_K_GRID
from .mvmd import VmdConfig
from .preprocess import FilterChainConfig
from .selection import CvSpec

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class IngestConfig:
    initial_rhythm: str = "N"
    shockable: tuple = tuple(sorted(LabelMap().shockable))
    discard: tuple = tuple(sorted(LabelMap().discard))

    def __post_init__(self):
        # sets in effect: normalize so equal maps give equal cache keys
        object.__setattr__(self, "shockable", tuple(sorted({s.upper() for s in self.shockable})))
        object.__setattr__(self, "discard", tuple(sorted({s.upper() for s in self.discard})))

    def label_map(self):
        return LabelMap(frozenset(s.upper() for s in self.shockable),
                        frozenset(s.upper() for s in self.discard))


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    db_dir: str = "data"
    cache_dir: str = ".shockadvice-cache"
    ingest: IngestConfig = field(default_factory=IngestConfig)
    preprocess: FilterChainConfig = field(default_factory=FilterChainConfig)
    vmd: VmdConfig = field(default_factory=VmdConfig)
    cv: CvSpec = field(default_factory=CvSpec)
    k_grid: tuple = DEFAULT_K_GRID
    eval_mode: str = "within_test"
    evaluate_full_set: bool = True

    def __post_init__(self):
        if not self.k_grid:
            raise ConfigError("knn.k_grid is empty")
        for k in self.k_grid:
            if int(k) != k or k < 1 or k % 2 == 0:
                raise ConfigError(f"knn.k_grid must hold positive odd integers, got {k}")
        if self.eval_mode not in MODES:
            raise ConfigError(f"eval.mode must be one of {MODES}")
        if self.cv.seed != self.seed:
            object.__setattr__(self, "cv", replace(self.cv, seed=self.seed))

    def with_overrides(self, seed=None, db_dir=None, cache_dir=None, group_by_record=None):
        cfg = self
        if seed is not None:
            cfg = replace(cfg, seed=int(seed), cv=replace(cfg.cv, seed=int(seed)))
        if db_dir is not None:
            cfg = replace(cfg, db_dir=str(db_dir))
        if cache_dir is not None:
            cfg = replace(cfg, cache_dir=str(cache_dir))
        if group_by_record:
            cfg = replace(cfg, cv=replace(cfg.cv, group_by_record=True))
        return cfg

    def section(self, name):
        """Plain-data view of the fields one stage reads (used for cache keys)."""
        if name == "ingest":
            return {"seed": self.seed, **asdict(self.ingest)}
        if name == "preprocess":
            return asdict(self.preprocess)
        if name == "decompose":
            return asdict(self.vmd)
        if name == "features":
            return {}
        if name == "select":
            return {"cv": asdict(self.cv), "k_grid": list(self.k_grid)}
        if name == "evaluate":
            return {"cv": asdict(self.cv), "mode": self.eval_mode,
                    "evaluate_full_set": self.evaluate_full_set}
        raise KeyError(name)


_SECTION_TYPES = {
    "ingest": IngestConfig,
    "preprocess": FilterChainConfig,
    "vmd": VmdConfig,
    "cv": CvSpec,
}


def _build(cls, table, name, drop=()):
    allowed = {f.name for f in fields(cls)} - set(drop)
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"[{name}] unknown keys: {sorted(unknown)}")
    kw = {k: (tuple(v) if isinstance(v, list) else v) for k, v in table.items()}
    try:
        return cls(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{name}] {exc}") from None


def from_dict(d):
    d = dict(d)
    top = {k: d.pop(k) for k in ("seed", "db_dir", "cache_dir") if k in d}
    kw = dict(top)
    for name, cls in _SECTION_TYPES.items():
        table = d.pop(name, {})
        drop = ("seed",) if name == "cv" else ("dc_mode", "fs") if name == "vmd" else ()
        kw[name] = _build(cls, table, name, drop)
    knn = d.pop("knn", {})
    if set(knn) - {"k_grid"}:
        raise ConfigError(f"[knn] unknown keys: {sorted(set(knn) - {'k_grid'})}")
    if "k_grid" in knn:
        kw["k_grid"] = tuple(int(k) for k in knn["k_grid"])
    ev = d.pop("eval", {})
    if set(ev) - {"mode"}:
        raise ConfigError(f"[eval] unknown keys: {sorted(set(ev) - {'mode'})}")
    if "mode" in ev:
        kw["eval_mode"] = ev["mode"]
    st = d.pop("stages", {})
    if set(st) - {"evaluate_full_set"}:
        raise ConfigError(f"[stages] unknown keys: {sorted(set(st) - {'evaluate_full_set'})}")
    if "evaluate_full_set" in st:
        kw["evaluate_full_set"] = bool(st["evaluate_full_set"])
    if d:
        raise ConfigError(f"unknown top-level keys: {sorted(d)}")
    if "seed" in kw:
        kw["cv"] = replace(kw["cv"], seed=int(kw["seed"]))
    return PipelineConfig(**kw)


def load_config(path=None):
    """Read a TOML config; ``None`` gives the defaults."""
    if path is None:
        return PipelineConfig()
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    return from_dict(data)
