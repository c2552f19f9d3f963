"""Command line entry point: ``shockadvice <command> [options]``."""

import argparse
import logging
import shutil
import sys

import numpy as np

from . import features as feat
from ._parallel import default_workers, pmap
from .config import ConfigError, load_config
from .ingest import EcgSegment, read_segments_csv, write_segments_csv
from .mvmd import TriSignal, read_trisignals, write_trisignals
from .pipeline import STAGES, Pipeline, StageError, _chunks, _feature_chunk, _filter_chunk, _tri_chunk


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="TOML config file")
    p.add_argument("--seed", type=int, help="master seed (overrides the config)")
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: all CPUs)")
    p.add_argument("--group-by-record", action="store_true", help="keep each record within one CV fold")
    p.add_argument("--db-dir", help="directory holding the WFDB records")
    p.add_argument("--cache-dir", help="stage cache directory")
    p.add_argument("--force", action="store_true", help="recompute even when the cache is current")
    p.add_argument("-q", "--quiet", action="store_true")
    return p


def build_parser():
    common = _common()
    ap = argparse.ArgumentParser(prog="shockadvice", description="Shockable rhythm detection pipeline.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="read records, segment and label, split records")
    p.add_argument("--out", help="also write the segment CSV here")
    p = sub.add_parser("preprocess", parents=[common], help="filter segments")
    p.add_argument("--in", dest="inp", help="segment CSV to filter instead of the cache")
    p.add_argument("--out", help="output segment CSV (with --in)")
    p = sub.add_parser("decompose", parents=[common], help="mode decomposition into ECG/SH/NSH signals")
    p.add_argument("--in", dest="inp", help="segment CSV to decompose instead of the cache")
    p.add_argument("--out", help="output trisignal file (with --in)")
    p = sub.add_parser("features", parents=[common], help="93-feature extraction")
    p.add_argument("--in", dest="inp", help="trisignal file instead of the cache")
    p.add_argument("--out", help="output feature CSV (with --in)")
    sub.add_parser("select", parents=[common], help="feature ranking and forward selection on training records")
    sub.add_parser("evaluate", parents=[common], help="repeated cross-validation on test records")
    sub.add_parser("run", parents=[common], help="all stages, reusing current caches")
    p = sub.add_parser("plot-data", parents=[common], help="CSV for plotting on standard output")
    p.add_argument("kind", choices=("ber_curve", "trisignal"))
    p.add_argument("--record", help="record id (trisignal)")
    p.add_argument("--start", type=int, help="segment start index (trisignal)")
    return ap


def _file_mode(cmd, args, cfg, workers):
    if not args.out:
        raise StageError(f"{cmd} --in needs --out")
    if cmd == "preprocess":
        segs = read_segments_csv(args.inp)
        blocks = pmap(_filter_chunk, [(b, cfg.preprocess) for b in _chunks([s.samples for s in segs])], workers)
        out = np.concatenate(blocks) if blocks else []
        write_segments_csv(args.out, [EcgSegment(s.record_id, s.start_index, x, s.label) for s, x in zip(segs, out)])
    elif cmd == "decompose":
        segs = read_segments_csv(args.inp)
        blocks = pmap(_tri_chunk, [(b, cfg.vmd) for b in _chunks([s.samples for s in segs])], workers)
        out = np.concatenate(blocks) if blocks else []
        write_trisignals(args.out, [(s.record_id, s.start_index, s.label, TriSignal(*t)) for s, t in zip(segs, out)])
    elif cmd == "features":
        items = read_trisignals(args.inp)
        blocks = pmap(_feature_chunk, _chunks([t.as_array() for *_, t in items]), workers)
        out = np.concatenate(blocks) if blocks else np.empty((0, len(feat.FULL_IDS)))
        feat.write_features_csv(args.out, [(r, s, lab) for r, s, lab, _ in items], out)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    workers = args.workers if args.workers is not None else default_workers()
    try:
        cfg = load_config(args.config).with_overrides(
            seed=args.seed, db_dir=args.db_dir, cache_dir=args.cache_dir,
            group_by_record=args.group_by_record)
        pipe = Pipeline(cfg, workers=max(1, workers))
        cmd = args.command
        if cmd in ("preprocess", "decompose", "features") and args.inp:
            _file_mode(cmd, args, cfg, max(1, workers))
        elif cmd in STAGES:
            pipe.run_stage(cmd, force=args.force)
            if cmd == "ingest" and args.out:
                shutil.copyfile(pipe.path("ingest", "segments.csv"), args.out)
        elif cmd == "run":
            pipe.run(force=args.force)
            print(pipe.path("evaluate", "report.json"))
        elif cmd == "plot-data":
            pipe.plot_data(args.kind, record=args.record, start=args.start)
    except (StageError, ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
