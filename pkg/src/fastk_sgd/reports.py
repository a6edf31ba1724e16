"""Delimited-text serialization of traces, theory curves and summaries.

Floats are written with ``repr`` so every value parses back bit-for-bit.
Missing values (loss at non-evaluation iterations, unreached targets) are
empty fields.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .engine import TraceRecord, comm_to_target, stationary_level, time_to_target
from .theory import (
    EXAMPLE_PARAMS,
    REPORTED_FIRST_SWITCH,
    REPORTED_FIXED_CROSSOVERS,
    PolicySchedule,
    SystemParams,
    adaptive_bound_curve,
    adaptive_k_of_t,
    best_fixed_k,
    error_bound_time,
    fixed_k_crossovers,
    switching_times,
)

TRACE_HEADER = ["j", "t", "k", "loss", "download", "upload"]
SUMMARY_HEADER = ["arm", "seed", "target", "time", "download", "total"]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_rows(path, header, rows):
    """Write a header and rows to ``path``; an open text stream is written to directly."""
    if hasattr(path, "write"):
        _write_csv(path, header, rows)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        _write_csv(f, header, rows)


def _write_csv(f, header, rows):
    w = csv.writer(f, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])


def write_trace(path, trace):
    write_rows(path, TRACE_HEADER, ([r.j, r.t, r.k, r.loss, r.download, r.upload] for r in trace))


def read_trace(path) -> list[TraceRecord]:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != TRACE_HEADER:
            raise ValueError(f"{path}: expected header {TRACE_HEADER}, got {header}")
        return [
            TraceRecord(int(j), float(t), int(k), float(loss) if loss else None, int(dl), int(ul))
            for j, t, k, loss, dl, ul in reader
        ]


@dataclass
class CurveTable:
    header: list
    rows: np.ndarray

    def write(self, path):
        ints = {"best_fixed_k", "adaptive_k"}
        idx = [i for i, h in enumerate(self.header) if h in ints]
        rows = []
        for r in self.rows:
            r = list(r)
            for i in idx:
                r[i] = int(r[i])
            rows.append(r)
        write_rows(path, self.header, rows)


def _is_example(p: SystemParams) -> bool:
    return replace(p, mg=EXAMPLE_PARAMS.mg, eps=EXAMPLE_PARAMS.eps) == EXAMPLE_PARAMS


def emit_theory(params: SystemParams, t_max: float, points: int):
    """Per-k bound curves, both staircases and the adaptive curve on ``linspace(0, t_max, points)``.

    Returns:
        ``(CurveTable, PolicySchedule)``
    """
    if not t_max > 0 or points < 2:
        raise ValueError("need t_max > 0 and at least two grid points")
    t = np.linspace(0.0, t_max, points)
    schedule = switching_times(params)
    cols = [t] + [error_bound_time(t, k, params) for k in range(1, params.n + 1)]
    cols += [best_fixed_k(t, params), adaptive_k_of_t(t, schedule), adaptive_bound_curve(t, params, schedule)]
    header = ["t"] + [f"k{k}" for k in range(1, params.n + 1)] + ["best_fixed_k", "adaptive_k", "adaptive"]
    return CurveTable(header, np.column_stack(cols)), schedule


def schedule_rows(params: SystemParams, schedule: PolicySchedule):
    """Rows of ``k_from, k_to, switch_time, gap_at_switch, clamped, reported_time``."""
    reported = {1: REPORTED_FIRST_SWITCH} if _is_example(params) else {}
    for k, (t, gap, cl) in enumerate(zip(schedule.switch_times, schedule.gaps_at_switch, schedule.clamped), start=1):
        yield [k, k + 1, t, gap, bool(cl), reported.get(k)]


def crossover_rows(params: SystemParams, t_max: float):
    """Rows of ``k_from, k_to, time, reported_time`` for the fixed-k staircase."""
    crossings = fixed_k_crossovers(params, t_max)
    example = _is_example(params)
    prev = 1
    for i, (t, k) in enumerate(crossings):
        rep = None
        if example and i == 0:
            rep = REPORTED_FIXED_CROSSOVERS[0]
        elif example and k == params.n:
            rep = REPORTED_FIXED_CROSSOVERS[1]
        yield [prev, k, t, rep]
        prev = k


def summarize(traces: dict, targets) -> list[list]:
    """One row per (arm, seed, target): time, download and total units at first hit.

    ``traces`` maps ``(arm, seed)`` to a trace. A string target
    ``"stationary:<arm>"`` resolves per seed to that arm's stationary level.
    """
    rows = []
    for (arm, seed), trace in sorted(traces.items()):
        for target in targets:
            if isinstance(target, str):
                ref = target.split(":", 1)[1]
                value = stationary_level(traces[(ref, seed)])
            else:
                value = float(target)
            comm = comm_to_target(trace, value)
            rows.append([arm, seed, value, time_to_target(trace, value), *(comm or (None, None))])
    return rows


def write_summary(path, rows):
    write_rows(path, SUMMARY_HEADER, rows)
