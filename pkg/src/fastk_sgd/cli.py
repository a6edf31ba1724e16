"""Command line entry point: ``fastk {gen-data,theory,simulate,summarize}``."""
from __future__ import annotations

import argparse
import logging
import re
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np
import yaml

from .data import gen_synthetic, save_dataset_csv
from .experiments import run_experiment
from .manifest import ConfigError, load_manifest
from .reports import crossover_rows, emit_theory, read_trace, schedule_rows, summarize, write_rows, write_summary
from .theory import EXAMPLE_PARAMS, SystemParams

log = logging.getLogger("fastk")

_PARAM_FIELDS = {f.name for f in fields(SystemParams)}


def load_params(path) -> SystemParams:
    with open(path) as f:
        raw = yaml.safe_load(f)
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a mapping of system parameters")
    unknown = set(raw) - _PARAM_FIELDS
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    return SystemParams(**raw)


def cmd_gen_data(args):
    data, w_bar = gen_synthetic(args.m, args.d, np.random.default_rng(args.seed), args.noise_sd)
    save_dataset_csv(args.out, data)
    if args.w_out:
        write_rows(args.w_out, ["w_bar"], ([v] for v in w_bar))
    print(f"wrote {data.m}x{data.d} dataset to {args.out}")


def cmd_theory(args):
    params = load_params(args.params) if args.params else EXAMPLE_PARAMS
    out = Path(args.out_dir)
    table, schedule = emit_theory(params, args.t_max, args.points)
    table.write(out / "curves.csv")
    sched = list(schedule_rows(params, schedule))
    write_rows(out / "schedule.csv", ["k_from", "k_to", "switch_time", "gap_at_switch", "clamped", "reported_time"], sched)
    cross = list(crossover_rows(params, args.crossover_t_max or args.t_max))
    write_rows(out / "crossovers.csv", ["k_from", "k_to", "time", "reported_time"], cross)
    print("adaptive switch times (computed | reported):")
    for k_from, k_to, t, gap, _, rep in sched:
        print(f"  {k_from}->{k_to}: {t:.6g} | {'-' if rep is None else f'{rep:g}'}   gap={gap:.6g}")
    print("fixed-k crossovers (computed | reported):")
    for k_from, k_to, t, rep in cross:
        print(f"  {k_from}->{k_to}: {t:.6g} | {'-' if rep is None else f'{rep:g}'}")


def cmd_simulate(args):
    manifest = load_manifest(args.manifest)
    base = Path(args.base_dir) if args.base_dir else Path(args.manifest).resolve().parent
    paths = run_experiment(manifest, base, jobs=args.jobs)
    print(f"wrote {len(paths['traces'])} traces and {paths['summary']}")


_TRACE_NAME = re.compile(r"^(?P<arm>.+)_seed(?P<seed>-?\d+)$")


def _parse_target(s: str):
    if s.startswith("stationary:"):
        return s
    try:
        return float(s)
    except ValueError:
        raise ConfigError(f"target {s!r} must be a number or 'stationary:<arm>'") from None


def cmd_summarize(args):
    traces = {}
    for path in args.traces:
        stem = Path(path).stem
        m = _TRACE_NAME.match(stem)
        key = (m["arm"], int(m["seed"])) if m else (stem, 0)
        if key in traces:
            raise ConfigError(f"duplicate trace for arm {key[0]!r} seed {key[1]}")
        traces[key] = read_trace(path)
    targets = [_parse_target(t) for t in args.target]
    for t in targets:
        if isinstance(t, str) and not any(arm == t.split(":", 1)[1] for arm, _ in traces):
            raise ConfigError(f"target {t!r} names no loaded arm")
    rows = summarize(traces, targets)
    write_summary(args.out or sys.stdout, rows)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fastk", description="Fastest-k SGD simulator and theory tables.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="write a planted linear-regression dataset as CSV")
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--noise-sd", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--w-out", help="also write the planted weights")
    g.set_defaults(func=cmd_gen_data)

    t = sub.add_parser("theory", help="emit bound curves, switching times and fixed-k crossovers")
    t.add_argument("--params", help="YAML file of system parameters (default: the worked n=5 example)")
    t.add_argument("--t-max", type=float, default=30000.0)
    t.add_argument("--points", type=int, default=3001)
    t.add_argument("--crossover-t-max", type=float, help="search horizon for fixed-k crossovers (default: --t-max)")
    t.add_argument("--out-dir", required=True)
    t.set_defaults(func=cmd_theory)

    s = sub.add_parser("simulate", help="run every arm and seed of a manifest")
    s.add_argument("manifest")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--base-dir", help="resolve relative manifest paths here (default: manifest's directory)")
    s.set_defaults(func=cmd_simulate)

    m = sub.add_parser("summarize", help="time and communication needed to reach loss targets")
    m.add_argument("traces", nargs="+")
    m.add_argument("--target", action="append", required=True, help="loss value or stationary:<arm>")
    m.add_argument("--out")
    m.set_defaults(func=cmd_summarize)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
