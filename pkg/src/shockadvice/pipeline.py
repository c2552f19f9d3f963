"""Stage orchestration with on-disk caching.

Stages run in the order ingest, preprocess, decompose, features, select,
evaluate. Each one writes its artifacts plus a ``stage.json`` holding a key.
The key hashes the stage's own config fields together with the key of the
stage before it (for ingest, a content hash of the database files). A stage
whose stored key matches is skipped. When the keys differ, the stage is
recomputed with a warning.
"""

import csv
import hashlib
import json
import logging
import os
import sys

import numpy as np

from . import features as feat
from ._parallel import pmap
from .evaluation import comparison_table, dataset_from_features, dumps_report, evaluate_subset, render_markdown
from .ingest import (REFERENCE_SEGMENT_COUNTS, EcgSegment, SplitManifest, ingest_directory, read_segments_csv,
                     split_records, write_segments_csv)
from .mvmd import TriSignal, read_trisignals, tri_signal, write_trisignals
from .preprocess import filter_chain
from .selection import SelectionResult, sffs

logger = logging.getLogger(__name__)

STAGES = ("ingest", "preprocess", "decompose", "features", "select", "evaluate")
UPSTREAM = dict(zip(STAGES[1:], STAGES[:-1]))
ARTIFACTS = {
    "ingest": ("segments.csv", "manifest.json", "census.json"),
    "preprocess": ("segments.npz",),
    "decompose": ("trisignals.bin",),
    "features": ("features.csv",),
    "select": ("selection.json", "curve.csv"),
    "evaluate": ("report.json", "report.md"),
}
# bump when a stage's output format or algorithm changes
STAGE_VERSION = {"ingest": 1, "preprocess": 1, "decompose": 1, "features": feat.REGISTRY_VERSION,
                 "select": 1, "evaluate": 1}
CHUNK = 32


class StageError(RuntimeError):
    pass


def _hash(obj):
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()


def db_fingerprint(db_dir):
    """Content hash of every WFDB file under ``db_dir``."""
    h = hashlib.sha256()
    found = False
    for root, dirs, files in os.walk(db_dir):
        dirs.sort()
        for f in sorted(files):
            if not f.endswith((".hea", ".dat", ".atr")):
                continue
            found = True
            path = os.path.join(root, f)
            h.update(os.path.relpath(path, db_dir).encode() + b"\0")
            with open(path, "rb") as fh:
                for block in iter(lambda: fh.read(1 << 20), b""):
                    h.update(block)
    if not found:
        raise StageError(f"no WFDB records under {db_dir!r}; point --db-dir at the CUDB/VFDB files")
    return h.hexdigest()


def _chunks(seq, size=CHUNK):
    return [seq[i:i + size] for i in range(0, len(seq), size)]


def _filter_chunk(task):
    block, cfg = task
    return np.stack([filter_chain(x, cfg) for x in block])


def _tri_chunk(task):
    block, cfg = task
    return np.stack([tri_signal(x, cfg).as_array() for x in block])


def _feature_chunk(block):
    return np.stack([feat.extract_all(TriSignal(*arr)) for arr in block])


def save_segment_arrays(path, record_ids, starts, labels, samples):
    np.savez(path, record_ids=np.asarray(record_ids, dtype=str), starts=np.asarray(starts, dtype=np.int64),
             labels=np.asarray(labels, dtype=str), samples=np.asarray(samples, dtype=np.float64))


def load_segment_arrays(path):
    with np.load(path, allow_pickle=False) as z:
        return z["record_ids"].tolist(), z["starts"].tolist(), z["labels"].tolist(), z["samples"]


def _census(rows, manifest):
    def count(keep):
        sel = [r for r in rows if keep is None or r[0] in keep]
        return {"SH": sum(r[2] == "SH" for r in sel), "NSH": sum(r[2] == "NSH" for r in sel),
                "records": len({r[0] for r in sel})}

    return {"train": count(manifest.train_record_ids), "test": count(manifest.test_record_ids),
            "total": count(None)}


class Pipeline:
    def __init__(self, cfg, workers=1):
        self.cfg = cfg
        self.workers = workers

    # cache bookkeeping

    def stage_dir(self, name):
        return os.path.join(self.cfg.cache_dir, name)

    def path(self, name, artifact):
        return os.path.join(self.stage_dir(name), artifact)

    def meta(self, name):
        p = self.path(name, "stage.json")
        if not os.path.exists(p):
            return None
        if not all(os.path.exists(self.path(name, a)) for a in ARTIFACTS[name]):
            return None
        with open(p) as fh:
            return json.load(fh)

    def _own(self, name):
        return {"version": STAGE_VERSION[name], "config": self.cfg.section(name)}

    def _upstream_key(self, name):
        up = UPSTREAM[name]
        m = self.meta(up)
        if m is None:
            raise StageError(f"stage {name!r} needs the {up!r} cache in {self.stage_dir(up)}; "
                             f"run `shockadvice {up}` first")
        if m["own"] != _hash(self._own(up)):
            raise StageError(f"the {up!r} cache was built with a different configuration; "
                             f"rerun `shockadvice {up}` (or `shockadvice run`)")
        return m["key"]

    def key(self, name):
        if name == "ingest":
            base = db_fingerprint(self.cfg.db_dir)
        else:
            base = self._upstream_key(name)
        return _hash({"stage": name, "upstream": base, **self._own(name)})

    def run_stage(self, name, force=False):
        """Run one stage unless its cache is current. Returns True if it ran."""
        key = self.key(name)
        m = self.meta(name)
        if m is not None and m["key"] == key and not force:
            logger.info("[%s] cache hit", name)
            return False
        if m is not None and m["key"] != key:
            logger.warning("[%s] cache is stale, recomputing", name)
        os.makedirs(self.stage_dir(name), exist_ok=True)
        stale = self.path(name, "stage.json")
        if os.path.exists(stale):
            os.remove(stale)
        logger.info("[%s] running", name)
        getattr(self, f"_do_{name}")()
        with open(stale, "w") as fh:
            json.dump({"stage": name, "key": key, "own": _hash(self._own(name))}, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return True

    def run(self, force=False):
        ran = [self.run_stage(s, force) for s in STAGES]
        return dict(zip(STAGES, ran))

    # stages

    def _do_ingest(self):
        ic = self.cfg.ingest
        ids, segs = ingest_directory(self.cfg.db_dir, ic.label_map(), self.workers, ic.initial_rhythm)
        if not segs:
            raise StageError("ingest produced no labelled segments")
        manifest = split_records(ids, self.cfg.seed)
        write_segments_csv(self.path("ingest", "segments.csv"), segs)
        with open(self.path("ingest", "manifest.json"), "w") as fh:
            fh.write(dumps_report(manifest.to_dict()))
        rows = [(s.record_id, s.start_index, s.label) for s in segs]
        with open(self.path("ingest", "census.json"), "w") as fh:
            fh.write(dumps_report(_census(rows, manifest)))
        logger.info("[ingest] %d records, %d segments", len(ids), len(segs))

    def _do_preprocess(self):
        segs = read_segments_csv(self.path("ingest", "segments.csv"))
        raw = np.stack([s.samples for s in segs])
        blocks = pmap(_filter_chunk, [(b, self.cfg.preprocess) for b in _chunks(raw)], self.workers)
        save_segment_arrays(self.path("preprocess", "segments.npz"), [s.record_id for s in segs],
                            [s.start_index for s in segs], [s.label for s in segs], np.concatenate(blocks))

    def _do_decompose(self):
        ids, starts, labels, samples = load_segment_arrays(self.path("preprocess", "segments.npz"))
        blocks = pmap(_tri_chunk, [(b, self.cfg.vmd) for b in _chunks(samples)], self.workers)
        tri = np.concatenate(blocks)
        write_trisignals(self.path("decompose", "trisignals.bin"),
                         [(r, s, lab, TriSignal(*t)) for r, s, lab, t in zip(ids, starts, labels, tri)])

    def _do_features(self):
        items = read_trisignals(self.path("decompose", "trisignals.bin"))
        arrays = [t.as_array() for *_, t in items]
        blocks = pmap(_feature_chunk, _chunks(arrays), self.workers)
        feat.write_features_csv(self.path("features", "features.csv"),
                                [(r, s, lab) for r, s, lab, _ in items], np.concatenate(blocks))

    def manifest(self):
        with open(self.path("ingest", "manifest.json")) as fh:
            d = json.load(fh)
        return SplitManifest(frozenset(d["train"]), frozenset(d["test"]), d["seed"])

    def datasets(self):
        rows, matrix, ids = feat.read_features_csv(self.path("features", "features.csv"))
        man = self.manifest()
        return (dataset_from_features(rows, matrix, ids, man.train_record_ids),
                dataset_from_features(rows, matrix, ids, man.test_record_ids))

    def _do_select(self):
        train, _ = self.datasets()
        res = sffs(train, self.cfg.cv, self.cfg.k_grid, self.workers)
        res.write_json(self.path("select", "selection.json"))
        with open(self.path("select", "curve.csv"), "w", newline="") as fh:
            res.write_curve_csv(fh)
        logger.info("[select] best size %d, mean BER %.4f, k=%d", res.best_size,
                    res.curve[res.best_size - 1].mean_ber, res.best_k)

    def _do_evaluate(self):
        train, test = self.datasets()
        sel = SelectionResult.read_json(self.path("select", "selection.json"))
        cv = self.cfg.cv
        reports = {"selected": evaluate_subset(test, sel.best_subset, cv, [sel.best_k], train=train,
                                               mode=self.cfg.eval_mode, workers=self.workers)}
        if self.cfg.evaluate_full_set:
            full = sel.curve[-1]
            reports["full"] = evaluate_subset(test, sel.ranking, cv, [full.k], train=train,
                                              mode=self.cfg.eval_mode, workers=self.workers)
        with open(self.path("ingest", "census.json")) as fh:
            census = json.load(fh)
        table = comparison_table(reports["selected"])
        report = {
            "census": census,
            "reference_counts": {k: {"SH": v[0], "NSH": v[1]} for k, v in REFERENCE_SEGMENT_COUNTS.items()},
            "split": self.manifest().to_dict(),
            "selection": {
                "best_size": sel.best_size, "best_subset": sel.best_subset, "best_k": sel.best_k,
                "curve": [[p.size, p.mean_ber, p.std_ber, p.k, p.feature_id] for p in sel.curve],
            },
            "evaluation": {name: rep.to_dict() for name, rep in reports.items()},
            "comparison": table,
            "config": {s: self.cfg.section(s) for s in STAGES},
        }
        with open(self.path("evaluate", "report.json"), "w") as fh:
            fh.write(dumps_report(report))
        with open(self.path("evaluate", "report.md"), "w") as fh:
            fh.write(render_markdown(census, reports, table))
        r = reports["selected"].mean
        logger.info("[evaluate] Ac %.4f Se %.4f Sp %.4f BER %.4f", r["ac"], r["se"], r["sp"], r["ber"])

    # plotting data

    def plot_data(self, kind, out=None, record=None, start=None):
        out = out or sys.stdout
        w = csv.writer(out, lineterminator="\n")
        if kind == "ber_curve":
            if self.meta("select") is None:
                raise StageError("no selection cache; run `shockadvice select` first")
            sel = SelectionResult.read_json(self.path("select", "selection.json"))
            w.writerow(["size", "mean_ber", "std_ber"])
            for p in sel.curve:
                w.writerow([p.size, repr(p.mean_ber), repr(p.std_ber)])
        elif kind == "trisignal":
            if self.meta("decompose") is None:
                raise StageError("no trisignal cache; run `shockadvice decompose` first")
            items = read_trisignals(self.path("decompose", "trisignals.bin"))
            pick = [it for it in items if (record is None or it[0] == record)
                    and (start is None or it[1] == int(start))]
            if not pick:
                raise StageError(f"no segment matches record={record!r} start={start!r}")
            rid, s0, label, tri = pick[0]
            fs = self.cfg.vmd.fs
            w.writerow(["t", "ecg", "sh", "nsh"])
            for i in range(tri.ecg.size):
                w.writerow([repr(i / fs), repr(float(tri.ecg[i])), repr(float(tri.sh[i])), repr(float(tri.nsh[i]))])
        else:
            raise ValueError(f"unknown plot kind {kind!r}")


def segments_from_arrays(ids, starts, labels, samples):
    return [EcgSegment(r, int(s), x, lab) for r, s, lab, x in zip(ids, starts, labels, samples)]
