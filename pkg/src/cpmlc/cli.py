"""Command-line entry point: ``cpmlc <subcommand> --config run.ini``.

Subcommands
-----------
sweep              BER at every point of ``experiment.snr``
threshold          SNR at which the pre-outer BER crosses ``experiment.target_ber``
ncg                net coding gain; with several configs, deltas against the first
interleaver-sweep  SNR loss per interleaver size relative to S = n_c
schedule-trace     message order of the iterative decoder, optionally with one decoded frame

Results are written as comma-separated records to ``--out`` together with a
``<out>.meta.json`` sidecar holding the configuration echo and versions.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .channel import ChannelConfig, frame_rng
from .config import ConfigError, RunConfig, load, parse_grid, snr_channels, with_overrides
from .schemes import cpmlcid_decode, encode_frames, message_schedule
from .sim import (
    FIXED_FRAMES,
    SweepRecord,
    UnbracketedError,
    channel_llrs,
    find_threshold,
    interleaver_sweep,
    ncg_from_required,
    run_metadata,
    run_point,
    sdd_count,
    write_records,
)

EXIT_UNRESOLVED = 2
EXIT_UNBRACKETED = 3
EXIT_CONFIG = 4

log = logging.getLogger("cpmlc")


def _common(p: argparse.ArgumentParser, many: bool = False):
    if many:
        p.add_argument("--config", action="append", required=True, help="config file (repeatable)")
    else:
        p.add_argument("--config", required=True, help="config file")
    p.add_argument("--seed", type=int, help="master seed (overrides [channel] seed)")
    p.add_argument("--workers", type=int, help="worker processes")
    p.add_argument("--min-errors", type=int, help="bit errors required per point")
    p.add_argument("--max-frames", type=int, help="frame cap per point")
    p.add_argument("--fixed-frames", action="store_true", help="300 frames per point, no error target")
    p.add_argument("--out", type=Path, help="CSV output path (sidecar goes to <out>.meta.json)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cpmlc", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log every probe")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="BER vs SNR grid")
    _common(p, many=True)
    p.add_argument("--snr", help="override the grid, e.g. 4:5:0.25 or 4,4.5")

    for name in ("threshold", "ncg"):
        p = sub.add_parser(name, help="required SNR" if name == "threshold" else "net coding gain")
        _common(p, many=True)
        p.add_argument("--allow-unresolved", action="store_true", help="exit 0 even if under-resolved")

    p = sub.add_parser("interleaver-sweep", help="SNR loss vs interleaver size")
    _common(p)
    p.add_argument("--allow-unresolved", action="store_true")

    p = sub.add_parser("schedule-trace", help="decoder message schedule")
    p.add_argument("--config", help="cp-mlc-id config (otherwise use --d/--iterations)")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--iterations", type=int, default=3)
    p.add_argument("--snr", type=float, help="also decode one frame at this SNR and show flips")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--frame", type=int, default=0, help="frame index for --snr")
    return ap


def _load_all(args) -> list[RunConfig]:
    paths = args.config if isinstance(args.config, list) else [args.config]
    runs = []
    for path in paths:
        run = load(path)
        run = with_overrides(
            run,
            seed=args.seed,
            workers=args.workers,
            min_errors=args.min_errors,
            max_frames=args.max_frames,
            rule=FIXED_FRAMES if args.fixed_frames else None,
        )
        runs.append(run)
    return runs


def _write_table(rows: list[dict], path: Path | None, meta: dict):
    if not rows:
        return
    fields = list(rows[0])
    if path is None:
        w = csv.DictWriter(sys.stdout, fieldnames=fields)
        w.writeheader()
        w.writerows(rows)
        return
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        w.writerows(rows)
    Path(str(path) + ".meta.json").write_text(json.dumps(run_metadata(meta), indent=2, default=str))


def _emit_records(records: list[SweepRecord], out: Path | None, meta: dict):
    if out is not None:
        write_records(records, out, meta)
    else:
        w = csv.DictWriter(sys.stdout, fieldnames=SweepRecord.CSV_FIELDS)
        w.writeheader()
        for r in records:
            w.writerow(r.csv_row())


def cmd_sweep(args) -> int:
    records = []
    runs = _load_all(args)
    for run in runs:
        grid = parse_grid(args.snr) if args.snr else None
        channels = snr_channels(run, grid)
        if not channels:
            raise ConfigError(f"{run.source}: no SNR grid; set [experiment] snr or pass --snr")
        for ch in channels:
            rec = run_point(run.scheme, ch, run.experiment.rule, run.experiment.workers)
            log.info("%s snr=%.3f ber=%.3e", rec.scheme, rec.snr_db, rec.pre_outer_ber)
            records.append(rec)
    _emit_records(records, args.out, {"command": "sweep", "configs": [r.echo() for r in runs]})
    return 0


def _thresholds(runs):
    out = []
    for run in runs:
        e = run.experiment
        res = find_threshold(
            run.scheme,
            e.target_ber,
            e.bracket,
            e.tol,
            rule=e.rule,
            seed=run.channel.master_seed,
            workers=e.workers,
        )
        out.append(res)
    return out


def cmd_threshold(args, with_ncg: bool = False) -> int:
    runs = _load_all(args)
    results = _thresholds(runs)
    summary = []
    base_ncg = None
    for run, res in zip(runs, results):
        row = {
            "scheme": run.scheme.label,
            "required_snr_db": round(res.snr_db, 4),
            "target_ber": res.target_ber,
            "under_resolved": res.under_resolved,
            "n_sdd_per_3_lanes": sdd_count(run.scheme),
        }
        if with_ncg:
            g = ncg_from_required(run.scheme, res.snr_db)
            row["ncg_db"] = round(g, 4)
            if base_ncg is None:
                base_ncg = g
            row["ncg_delta_db"] = round(g - base_ncg, 4)
        summary.append(row)
        print("  ".join(f"{k}={v}" for k, v in row.items()))
    records = [r for res in results for r in res.records]
    if args.out is not None:
        meta = {"command": args.command, "configs": [r.echo() for r in runs], "summary": summary}
        write_records(records, args.out, meta)
    if any(res.under_resolved for res in results) and not args.allow_unresolved:
        print("error: under-resolved threshold (use --allow-unresolved to accept)", file=sys.stderr)
        return EXIT_UNRESOLVED
    return 0


def cmd_interleaver_sweep(args) -> int:
    (run,) = _load_all(args)
    e = run.experiment
    rows = interleaver_sweep(
        run.scheme,
        e.sizes,
        e.iteration_counts,
        e.target_ber,
        e.bracket,
        e.tol,
        rule=e.rule,
        seed=run.channel.master_seed,
        workers=e.workers,
    )
    table = [
        {
            "size": r.size,
            "iterations": r.iterations,
            "required_snr_db": f"{r.required_snr_db:.4f}",
            "snr_loss_db": f"{r.snr_loss_db:.4f}",
            "under_resolved": int(r.under_resolved),
        }
        for r in rows
    ]
    _write_table(table, args.out, {"command": "interleaver-sweep", "config": run.echo()})
    if args.out is not None:
        for t in table:
            print("  ".join(f"{k}={v}" for k, v in t.items()))
    if any(r.under_resolved for r in rows) and not args.allow_unresolved:
        print("error: under-resolved threshold (use --allow-unresolved to accept)", file=sys.stderr)
        return EXIT_UNRESOLVED
    return 0


def cmd_schedule_trace(args) -> int:
    cfg = None
    if args.config:
        cfg = load(args.config).scheme
        if cfg.kind != "cp-mlc-id":
            raise ConfigError("schedule-trace needs a cp-mlc-id scheme")
        d, iters = cfg.d, cfg.iterations
    else:
        d, iters = args.d, args.iterations
    flips = None
    if args.snr is not None:
        if cfg is None:
            raise ConfigError("--snr needs --config")
        ch = ChannelConfig("awgn", args.snr, master_seed=args.seed)
        rng = frame_rng(args.seed, args.frame)
        info = rng.integers(0, 2, cfg.info_bits, dtype=np.uint8)[None]
        draws = rng.standard_normal((1, cfg.d, cfg.n))
        llrs = channel_llrs(ch, encode_frames(cfg, info).b, draws)
        res = cpmlcid_decode(cfg, llrs, return_trace=True)
        flips = {t.iteration: (t.lane, int(t.flips[0])) for t in res.trace}
        errs = int((res.info != info).sum())
    for entry in message_schedule(d, iters):
        line = f"i={entry.iteration} j={entry.lane}  " + " -> ".join(entry.messages)
        if flips is not None:
            lane, f = flips[entry.iteration]
            assert lane == entry.lane
            line += f"  [osd flips={f}]"
        print(line)
    if flips is not None:
        print(f"frame {args.frame}: {errs} info-bit errors")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(message)s",
    )
    try:
        if args.command == "sweep":
            return cmd_sweep(args)
        if args.command == "threshold":
            return cmd_threshold(args)
        if args.command == "ncg":
            return cmd_threshold(args, with_ncg=True)
        if args.command == "interleaver-sweep":
            return cmd_interleaver_sweep(args)
        return cmd_schedule_trace(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnbracketedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNBRACKETED


if __name__ == "__main__":
    sys.exit(main())
