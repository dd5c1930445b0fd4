"""Command line front end: codebook export, sensing runs, sweeps, bounds.

Exit codes: 0 success, 2 configuration error, 3 when the fraction of failed
trials exceeds the --fail-threshold.
"""

from __future__ import annotations

import argparse
import json
import struct
import sys

import numpy as np

from . import harness
from .codebook import HierarchicalCodebook, gain_map
from .config import ConfigError, load_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARTIAL = 3


def _parse_values(text: str):
    return [float(v) if "." in v or "e" in v.lower() else int(v)
            for v in text.split(",") if v]


def _parse_range(text: str):
    # start:stop:step, inclusive of stop when it lands on the grid
    start, stop, step = (float(x) for x in text.split(":"))
    n = int(round((stop - start) / step)) + 1
    return [start + i * step for i in range(n)]


def cmd_codebook(args) -> int:
    book = HierarchicalCodebook(args.m)
    with open(args.out, "wb") as fh:
        # little-endian header: side length m, layer count K
        fh.write(struct.pack("<II", book.m, book.n_layers))
        for k in range(1, book.n_layers + 1):
            for cw in book.layer(k):
                fh.write(struct.pack("<III", cw.layer, cw.i, cw.j))
                fh.write(cw.phases.astype(np.complex64).tobytes())
    print(f"wrote {args.out}: m={book.m}, {book.n_layers} layers")
    if args.gain_map:
        grid = np.linspace(-1.0, 1.0, args.grid, endpoint=False) + 1.0 / args.grid
        rows = []
        for cw in book.layer(args.layer):
            gm = gain_map(cw.phases, grid)
            for a, u in enumerate(grid):
                for b, v in enumerate(grid):
                    rows.append({"k": cw.layer, "i": cw.i, "j": cw.j,
                                 "u": u, "v": v, "gain": gm[a, b]})
        harness.rows_to_csv(rows, ["k", "i", "j", "u", "v", "gain"], args.gain_map)
        print(f"wrote {args.gain_map}")
    return EXIT_OK


def cmd_sense(args) -> int:
    config = load_config(args.config)
    if args.trials > 1:
        seeds = range(args.seed, args.seed + args.trials)
        results = harness.run_trials(config, seeds, workers=args.workers)
        payload = [r.to_report() for r in results]
        failures = sum(1 for r in results if r.failure)
        frac = failures / len(results)
    elif args.targets > 1:
        results = harness.run_multi_trial(config, args.seed, args.targets)
        payload = [r.to_report() for r in results]
        frac = (0.0 if results and all(r.failure is None for r in results) else 1.0)
    else:
        artifacts = {} if (args.dump_trace or args.dump_echo) else None
        result = harness.run_trial(config, args.seed, artifacts=artifacts)
        payload = result.to_report()
        frac = 0.0 if result.failure is None else 1.0
        if args.dump_trace:
            with open(args.dump_trace, "w") as fh:
                json.dump(artifacts["trace"].to_dict(), fh, indent=2)
            print(f"wrote {args.dump_trace}", file=sys.stderr)
        if args.dump_echo:
            grid = artifacts["fgs_grid"]
            rows = [{"n": n, "l": int(grid.symbol_indices[col]),
                     "re": grid.y[n, col].real, "im": grid.y[n, col].imag}
                    for col in range(grid.y.shape[1])
                    for n in range(grid.y.shape[0])]
            harness.rows_to_csv(rows, ["n", "l", "re", "im"], args.dump_echo)
            print(f"wrote {args.dump_echo}", file=sys.stderr)
    out = {"config": config.resolved(), "results": payload}
    _emit(out, args.out, "json")
    return EXIT_PARTIAL if frac > args.fail_threshold else EXIT_OK


def cmd_sweep(args) -> int:
    config = load_config(args.config)
    schemes = tuple(s.strip() for s in args.schemes.split(",") if s.strip())
    values = _parse_values(args.values)
    rows = harness.sweep(config, args.axis, values, trials=args.trials,
                         schemes=schemes, workers=args.workers)
    cols = harness.sweep_columns(schemes)
    if args.format == "csv":
        harness.rows_to_csv(rows, cols, args.out or sys.stdout)
    else:
        _emit(rows, args.out, "json")
    total = sum(r[f"trials_{s}"] for r in rows for s in schemes)
    failed = sum(r[f"failures_{s}"] for r in rows for s in schemes)
    return EXIT_PARTIAL if total and failed / total > args.fail_threshold else EXIT_OK


def cmd_detect_roc(args) -> int:
    config = load_config(args.config)
    if args.n_sc:
        kw = {"n_sc": args.n_sc}
        if config.n_q == config.n_sc:
            kw["n_q"] = args.n_sc
        config = config.replace(**kw)
    far_values = _parse_values(args.far_values)
    rows = harness.detect_roc(config, far_values, args.trials, args.seed)
    cols = ["far_target", "empirical_far", "empirical_detection_rate", "snr_db"]
    if args.format == "csv":
        harness.rows_to_csv(rows, cols, args.out or sys.stdout)
    else:
        _emit(rows, args.out, "json")
    return EXIT_OK


def cmd_crlb(args) -> int:
    config = load_config(args.config)
    name, _, spec = args.sweep.partition("=")
    if name.strip().lower() != "snr":
        raise ConfigError(f"unsupported CRLB sweep variable {name!r}")
    rows = harness.crlb_sweep(config, _parse_range(spec), args.seed)
    cols = ["snr_db", "crlb_range_m2", "crlb_vel_mps2", "crlb_u", "crlb_v"]
    if args.format == "csv":
        harness.rows_to_csv(rows, cols, args.out or sys.stdout)
    else:
        _emit(rows, args.out, "json")
    return EXIT_OK


def _emit(payload, out, fmt):
    if fmt == "json":
        if out:
            with open(out, "w") as fh:
                json.dump(payload, fh, indent=2)
                fh.write("\n")
        else:
            json.dump(payload, sys.stdout, indent=2)
            sys.stdout.write("\n")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="irs-sense",
                                description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("codebook", help="dump a hierarchical codebook")
    pc.add_argument("--m", type=int, required=True)
    pc.add_argument("--out", required=True)
    pc.add_argument("--gain-map", default=None,
                    help="also write a CSV gain scan of one layer")
    pc.add_argument("--layer", type=int, default=1)
    pc.add_argument("--grid", type=int, default=64)
    pc.set_defaults(func=cmd_codebook)

    ps = sub.add_parser("sense", help="run end-to-end sensing episodes")
    ps.add_argument("--config", default=None)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--trials", type=int, default=1)
    ps.add_argument("--targets", type=int, default=1)
    ps.add_argument("--workers", type=int, default=None)
    ps.add_argument("--out", default=None)
    ps.add_argument("--fail-threshold", type=float, default=0.05)
    ps.add_argument("--dump-trace", default=None,
                    help="write the training trace of a single trial as JSON")
    ps.add_argument("--dump-echo", default=None,
                    help="write the fine-grained echo grid as CSV (n, l, re, im)")
    ps.set_defaults(func=cmd_sense)

    pw = sub.add_parser("sweep", help="aggregate metrics along one parameter")
    pw.add_argument("--config", default=None)
    pw.add_argument("--axis", required=True)
    pw.add_argument("--values", required=True, help="comma separated")
    pw.add_argument("--trials", type=int, default=None)
    pw.add_argument("--schemes", default="dsp", help="comma separated: dsp,rss")
    pw.add_argument("--workers", type=int, default=None)
    pw.add_argument("--out", default=None)
    pw.add_argument("--format", choices=("csv", "json"), default="csv")
    pw.add_argument("--fail-threshold", type=float, default=0.05)
    pw.set_defaults(func=cmd_sweep)

    pr = sub.add_parser("detect-roc", help="false-alarm and detection curves")
    pr.add_argument("--config", default=None)
    pr.add_argument("--n-sc", type=int, default=None)
    pr.add_argument("--trials", type=int, default=1000)
    pr.add_argument("--seed", type=int, default=0)
    pr.add_argument("--far-values", default="0.001,0.01,0.05,0.1")
    pr.add_argument("--out", default=None)
    pr.add_argument("--format", choices=("csv", "json"), default="csv")
    pr.set_defaults(func=cmd_detect_roc)

    pb = sub.add_parser("crlb", help="closed-form bound curves")
    pb.add_argument("--config", default=None)
    pb.add_argument("--sweep", default="snr=-10:40:5")
    pb.add_argument("--seed", type=int, default=0)
    pb.add_argument("--out", default=None)
    pb.add_argument("--format", choices=("csv", "json"), default="csv")
    pb.set_defaults(func=cmd_crlb)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
