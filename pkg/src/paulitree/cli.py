"""Experiment runner CLI: build benchmark programs, run either engine,
sweep pruning thresholds, and compare accuracy/runtime across engines.

Subcommands::

    paulitree run      one program, one threshold setting, one or both engines
    paulitree sweep    Cartesian grid of thresholds, analytical engine
    paulitree compare  both engines at matched accuracy, reports the speedup

Reports are CSV (RFC-4180, stable column set) or JSON (field-for-field
mirror), one row per engine run.  Rows record every input needed to
reproduce them: thresholds, seed, shard count, and a SHA-256 hash of the
elaborated program's event stream, which is identical for the analytical
and Monte Carlo rows of the same invocation.  When ``--output`` is a
bare file name it is placed under ``$PAULITREE_OUTPUT_DIR`` if set.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .engine import run_analytical
from .errormap import MergeMode, Thresholds
from .montecarlo import run_mc_parallel
from .noise import ConfigError, NoiseParams, load_params
from .program import (
    Program,
    build_basic_program,
    build_scaling_program,
    elaborate,
    program_hash,
)

COLUMNS = [
    "program",
    "n",
    "engine",
    "event_threshold",
    "merge_threshold",
    "merge_mode",
    "survival",
    "crash",
    "discarded_mass",
    "peak_map_entries",
    "wall_time_ms",
    "mc_iterations",
    "mc_ci95",
    "seed",
    "shards",
    "program_hash",
    "inaccuracy",
    "speedup",
    "error",
]


def _load_noise(args) -> NoiseParams:
    if args.params:
        with open(args.params) as fh:
            params = load_params(fh.read())
    else:
        params = NoiseParams()
    if args.scale != 1.0:
        params = params.with_scale(args.scale)
    return params


def _build_program(args, params: NoiseParams) -> Program:
    if args.program == "basic":
        prog = build_basic_program(params)
    else:
        prog = build_scaling_program(args.n, params)
    return elaborate(prog)


def _thresholds(event: float, merge: float, mode: str) -> Thresholds:
    return Thresholds(event_branch=event, merge=merge, merge_mode=MergeMode(mode))


def _base_row(args, prog: Program) -> dict:
    return {
        "program": args.program,
        "n": prog.num_logical,
        "program_hash": program_hash(prog),
    }


def _analytical_row(args, prog: Program, th: Thresholds) -> dict:
    row = _base_row(args, prog)
    row.update(
        engine="analytical",
        event_threshold=th.event_branch,
        merge_threshold=th.merge,
        merge_mode=th.merge_mode.value,
    )
    try:
        rep = run_analytical(prog, th)
    except MemoryError:
        row["error"] = "out of memory"
        return row
    row.update(
        survival=rep.survival_probability,
        crash=rep.crash_probability,
        discarded_mass=rep.discarded_mass,
        peak_map_entries=rep.peak_error_map_entries,
        wall_time_ms=rep.wall_time_s * 1e3,
    )
    return row


def _mc_row(args, prog: Program) -> dict:
    row = _base_row(args, prog)
    row["engine"] = "montecarlo"
    try:
        rep = run_mc_parallel(prog, args.mc_iterations, args.seed, args.shards,
                              jobs=args.jobs)
    except MemoryError:
        row["error"] = "out of memory"
        return row
    row.update(
        survival=1.0 - rep.crash_rate,
        crash=rep.crash_rate,
        mc_iterations=rep.iterations,
        mc_ci95=rep.ci95_halfwidth,
        seed=rep.seed,
        shards=rep.shards,
        wall_time_ms=rep.wall_time_s * 1e3,
    )
    return row


def _write_rows(rows: list[dict], args) -> None:
    path = args.output
    if path and not os.path.isabs(path) and os.sep not in path:
        outdir = os.environ.get("PAULITREE_OUTPUT_DIR", "")
        if outdir:
            path = os.path.join(outdir, path)
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=COLUMNS, restval="",
                                extrasaction="raise")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
        text = buf.getvalue()
    else:
        full = [{col: row.get(col) for col in COLUMNS} for row in rows]
        text = json.dumps(full, indent=2) + "\n"
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _positive_floats(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok]


def cmd_run(args) -> int:
    params = _load_noise(args)
    prog = _build_program(args, params)
    rows = []
    if args.mode in ("analytical", "both"):
        th = _thresholds(args.event_th, args.merge_th, args.merge_mode)
        rows.append(_analytical_row(args, prog, th))
    if args.mode in ("montecarlo", "both"):
        rows.append(_mc_row(args, prog))
    _write_rows(rows, args)
    return 0


def _sweep_point(job: tuple) -> dict:
    args, prog, th = job
    return _analytical_row(args, prog, th)


def cmd_sweep(args) -> int:
    params = _load_noise(args)
    prog = _build_program(args, params)
    grid = [
        _thresholds(e, m, mode)
        for e in args.event_th
        for m in args.merge_th
        for mode in args.merge_mode
    ]
    if not grid:
        raise SystemExit("sweep: empty threshold grid")
    jobs = [(args, prog, th) for th in grid]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(job) for job in jobs]
    # baseline = the finest grid point: smallest thresholds, preferring
    # preservation merging; inaccuracy is the relative crash-rate deviation
    def fineness(row):
        return (
            row.get("event_threshold", 0.0),
            row.get("merge_threshold", 0.0),
            row.get("merge_mode") != "preservation",
        )

    clean = [r for r in rows if "error" not in r and "crash" in r]
    if clean:
        base = min(clean, key=fineness)["crash"]
        for row in clean:
            if base > 0.0:
                row["inaccuracy"] = abs(row["crash"] - base) / base
            else:
                row["inaccuracy"] = abs(row["crash"] - base)
    _write_rows(rows, args)
    return 0


def cmd_compare(args) -> int:
    if args.mode == "analytical":
        raise SystemExit("compare: requires both engines (--mode both)")
    args.mode = "both"
    params = _load_noise(args)
    prog = _build_program(args, params)
    th = _thresholds(args.event_th, args.merge_th, args.merge_mode)
    a_row = _analytical_row(args, prog, th)
    m_row = _mc_row(args, prog)
    if "error" not in a_row and "error" not in m_row and a_row["wall_time_ms"] > 0:
        m_row["speedup"] = m_row["wall_time_ms"] / a_row["wall_time_ms"]
    _write_rows([a_row, m_row], args)
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--program", choices=["basic", "scaling"], default="basic")
    p.add_argument("--n", type=int, default=2,
                   help="logical qubits for the scaling program")
    p.add_argument("--params", help="noise config file (key = value lines)")
    p.add_argument("--scale", type=float, default=1.0,
                   help="global noise scale multiplier")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker processes for sweep points / MC shards")
    p.add_argument("--output", help="report path (default: stdout)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")


def _add_single_thresholds(p: argparse.ArgumentParser) -> None:
    p.add_argument("--event-th", type=float, default=0.0)
    p.add_argument("--merge-th", type=float, default=0.0)
    p.add_argument("--merge-mode", choices=["preservation", "lossy"],
                   default="preservation")


def _add_mc(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mc-iterations", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shards", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paulitree",
        description="Crash-rate estimation for error-corrected programs: "
        "analytical probability-tree model vs Monte Carlo sampling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single run of one or both engines")
    _add_common(p_run)
    p_run.add_argument("--mode", choices=["analytical", "montecarlo", "both"],
                       default="analytical")
    _add_single_thresholds(p_run)
    _add_mc(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="analytical threshold grid sweep")
    _add_common(p_sweep)
    p_sweep.add_argument("--event-th", type=_positive_floats,
                         default=[1e-5, 1e-6, 1e-7],
                         help="comma-separated event branch thresholds")
    p_sweep.add_argument("--merge-th", type=_positive_floats,
                         default=[1e-10, 1e-12, 1e-14, 1e-16],
                         help="comma-separated merge thresholds")
    p_sweep.add_argument("--merge-mode", type=lambda s: s.split(","),
                         default=["preservation", "lossy"],
                         help="comma-separated merge modes")
    p_sweep.set_defaults(func=cmd_sweep)

    p_cmp = sub.add_parser("compare", help="accuracy/runtime comparison of "
                           "the two engines on the same event stream")
    _add_common(p_cmp)
    p_cmp.add_argument("--mode", choices=["both", "analytical", "montecarlo"],
                       default="both", help=argparse.SUPPRESS)
    _add_single_thresholds(p_cmp)
    _add_mc(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError, ValueError) as exc:
        print("paulitree: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
