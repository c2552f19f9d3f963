"""Record loading, 250 Hz resampling, 8-s segmentation, labeling and record splits."""

import csv
import logging
import os
from collections import Counter
from dataclasses import dataclass, field, replace

import numpy as np

from . import wfdb
from ._parallel import pmap

logger = logging.getLogger(__name__)

FS = 250
SEGMENT_SECONDS = 8
SEGMENT_LEN = FS * SEGMENT_SECONDS
TRAIN_FRACTION = 0.7

SH = "SH"
NSH = "NSH"

# Published segment populations (shockable, non-shockable) used as census targets.
REFERENCE_SEGMENT_COUNTS = {
    "train": (1464, 7195),
    "test": (2273, 7572),
    "total": (3737, 14767),
}


@dataclass
class EcgRecord:
    record_id: str
    db: str
    samples: np.ndarray
    fs: float
    annotations: list = field(default_factory=list)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.size == 0:
            raise ValueError(f"record {self.record_id} has no samples")
        if self.fs <= 0:
            raise ValueError(f"record {self.record_id}: fs must be positive")
        idx = [a[0] for a in self.annotations]
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError(f"record {self.record_id}: annotation indices not increasing")
        if idx and (idx[0] < 0 or idx[-1] >= self.samples.size):
            raise ValueError(f"record {self.record_id}: annotation outside sample range")


@dataclass
class EcgSegment:
    record_id: str
    start_index: int
    samples: np.ndarray
    label: str

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.shape != (SEGMENT_LEN,):
            raise ValueError(f"segment must hold {SEGMENT_LEN} samples, got {self.samples.shape}")
        if self.label not in (SH, NSH):
            raise ValueError(f"bad label {self.label!r}")


@dataclass
class SplitManifest:
    train_record_ids: frozenset
    test_record_ids: frozenset
    seed: int

    def to_dict(self):
        return {"train": sorted(self.train_record_ids), "test": sorted(self.test_record_ids),
                "seed": self.seed}


@dataclass(frozen=True)
class LabelMap:
    """Rhythm string -> SH / NSH / discard (None). Unlisted rhythms are NSH."""

    shockable: frozenset = frozenset({"VF", "VFIB", "VFL", "VT", "FLU"})
    discard: frozenset = frozenset({"NOISE", "ASYS"})

    def __call__(self, rhythm):
        key = rhythm.strip().upper()
        if key in self.discard:
            return None
        if key in self.shockable:
            return SH
        return NSH


def _db_of(record_id):
    return "CUDB" if record_id.lower().startswith("cu") else "VFDB"


def rhythm_events(annotations, n_samples, initial="N"):
    """Turn raw annotations into ``(sample_index, rhythm)`` change events.

    ``+`` annotations carry the rhythm in their aux string (``"(VT"``);
    ``[`` and ``]`` bracket ventricular flutter/fibrillation episodes.
    Several events on one sample collapse to the last one.
    """
    events = {}
    current = initial
    before_vf = initial
    for ann in annotations:
        if ann.sample >= n_samples or ann.sample < 0:
            continue
        if ann.code == wfdb.RHYTHM and ann.aux:
            current = ann.aux.split("\x00")[0].strip().lstrip("(").strip() or current
        elif ann.code == wfdb.VFON:
            if current != "VF":
                before_vf = current
            current = "VF"
        elif ann.code == wfdb.VFOFF:
            current = before_vf
        else:
            continue
        events[ann.sample] = current
    out = sorted(events.items())
    if not out or out[0][0] != 0:
        out.insert(0, (0, initial))
    # drop no-op changes
    merged = [out[0]]
    for s, lab in out[1:]:
        if lab != merged[-1][1]:
            merged.append((s, lab))
    return merged


def read_record(path, initial_rhythm="N"):
    """Read a WFDB record (``path`` without extension, or the ``.hea`` path).

    Channel 0 is kept. Rhythm annotations come from ``<record>.atr`` when present.
    """
    base = path[:-4] if path.endswith(".hea") else path
    directory, name = os.path.split(base)
    with open(base + ".hea") as fh:
        header = wfdb.parse_header(fh.read())
    digital = wfdb.read_signals(header, directory)
    samples = wfdb.to_physical(digital[:, 0], header.signals[0])
    anns = []
    if os.path.exists(base + ".atr"):
        anns = rhythm_events(wfdb.read_annotations(base + ".atr"), samples.size, initial_rhythm)
    else:
        anns = [(0, initial_rhythm)]
    return EcgRecord(record_id=name, db=_db_of(name), samples=samples, fs=header.fs,
                     annotations=anns)


def resample_250(rec):
    """Linear-interpolation resampling to 250 Hz (identity when already there)."""
    if rec.fs == FS:
        return rec
    n = rec.samples.size
    n_out = int(np.floor((n - 1) * FS / rec.fs)) + 1
    t_in = np.arange(n) / rec.fs
    t_out = np.arange(n_out) / FS
    samples = np.interp(t_out, t_in, rec.samples)
    events = {}
    for idx, lab in rec.annotations:
        j = min(int(round(idx * FS / rec.fs)), n_out - 1)
        events[j] = lab
    return replace(rec, samples=samples, fs=float(FS), annotations=sorted(events.items()))


def _per_sample_rhythm(rec):
    n = rec.samples.size
    labels = sorted({lab for _, lab in rec.annotations}) or ["N"]
    code = {lab: i for i, lab in enumerate(labels)}
    arr = np.zeros(n, dtype=np.int64)
    events = rec.annotations or [(0, labels[0])]
    for (s, lab), nxt in zip(events, list(events[1:]) + [(n, None)]):
        arr[s:nxt[0]] = code[lab]
    return arr, labels


def segment_and_label(rec, label_map=None):
    """Cut non-overlapping 8-s windows and label each by its majority rhythm."""
    if rec.fs != FS:
        raise ValueError("record must be resampled to 250 Hz first")
    label_map = label_map or LabelMap()
    n_win = rec.samples.size // SEGMENT_LEN
    if n_win == 0:
        return []
    per_sample, names = _per_sample_rhythm(rec)
    out = []
    for w in range(n_win):
        start = w * SEGMENT_LEN
        window = per_sample[start:start + SEGMENT_LEN]
        counts = Counter(window.tolist())
        best = max(counts.values())
        # ties go to the rhythm seen first in the window
        rhythm = next(names[c] for c in window.tolist() if counts[c] == best)
        cls = label_map(rhythm)
        if cls is None:
            continue
        out.append(EcgSegment(rec.record_id, start, rec.samples[start:start + SEGMENT_LEN].copy(), cls))
    return out


def split_records(records, seed):
    """Record-level 70/30 split, deterministic in ``seed``."""
    ids = sorted({r.record_id if isinstance(r, EcgRecord) else str(r) for r in records})
    n_train = int(round(TRAIN_FRACTION * len(ids)))
    perm = np.random.default_rng(seed).permutation(len(ids))
    train = frozenset(ids[i] for i in perm[:n_train])
    test = frozenset(ids) - train
    return SplitManifest(train, test, seed)


def list_records(db_dir):
    """Record base paths under ``db_dir`` (recursive), sorted by record id."""
    found = []
    for root, _, files in os.walk(db_dir):
        for f in files:
            if f.endswith(".hea"):
                found.append(os.path.join(root, f[:-4]))
    return sorted(found, key=lambda p: (os.path.basename(p), p))


def _load_and_segment(args):
    path, label_map, initial_rhythm = args
    rec = resample_250(read_record(path, initial_rhythm))
    return rec.record_id, segment_and_label(rec, label_map)


def ingest_directory(db_dir, label_map=None, workers=1, initial_rhythm="N"):
    """Read, resample and segment every record under ``db_dir``.

    Returns ``(record_ids, segments)`` with segments ordered by record then time.
    """
    paths = list_records(db_dir)
    if not paths:
        raise FileNotFoundError(f"no WFDB records under {db_dir}")
    label_map = label_map or LabelMap()
    results = pmap(_load_and_segment, [(p, label_map, initial_rhythm) for p in paths], workers)
    ids = [rid for rid, _ in results]
    segments = [s for _, segs in results for s in segs]
    return ids, segments


def census(segments, manifest=None):
    """Count (SH, NSH) segments overall and per split."""
    def count(segs):
        c = Counter(s.label for s in segs)
        return c.get(SH, 0), c.get(NSH, 0)

    out = {"total": count(segments)}
    if manifest is not None:
        out["train"] = count([s for s in segments if s.record_id in manifest.train_record_ids])
        out["test"] = count([s for s in segments if s.record_id in manifest.test_record_ids])
    return out


def write_segments_csv(path, segments):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["record_id", "start_index", "label"] + [f"s{i}" for i in range(SEGMENT_LEN)])
        for s in segments:
            w.writerow([s.record_id, s.start_index, s.label] + [repr(float(v)) for v in s.samples])


def read_segments_csv(path):
    out = []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        head = next(r)
        if head[:3] != ["record_id", "start_index", "label"] or len(head) != 3 + SEGMENT_LEN:
            raise ValueError(f"{path}: not a segment cache")
        for row in r:
            out.append(EcgSegment(row[0], int(row[1]), np.array(row[3:], dtype=np.float64), row[2]))
    return out
