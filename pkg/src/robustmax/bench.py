"""Benchmark runner and CSV reports in the layout of the reference results table."""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Iterable, List, Optional

from .exceptions import InputError, InstanceFormatError, RobustMaxError
from .g2b2 import DEFAULT_EPS, solve_g2b2
from .gb2 import solve_gb2
from .instances import Instance, generate_instance, load_fixture, load_instance, table1_spec
from .warmstart import WalkConfig, random_walk

logger = logging.getLogger(__name__)

CSV_HEADER = ["id", "dim", "k", "rw_time_s", "rw_lb", "obj", "gap_pct", "cpu_s", "sep_time_pct", "nodes"]
NA = "NA"
DESK_TIME_LIMIT = 60.0
DESK_WARM_PROPOSALS = 2000
ALGORITHMS = ("gb2", "g2b2")


@dataclass
class RunReport:
    """One benchmark row.  ``None`` means not available (written as NA).

    ``gap_pct`` is None whenever the upper bound is not certified;
    ``cpu_s`` covers the warm start plus the solver.
    """

    id: str
    dim: int
    k: int
    rw_time_s: Optional[float] = None
    rw_lb: Optional[float] = None
    obj: Optional[float] = None
    gap_pct: Optional[float] = None
    cpu_s: Optional[float] = None
    sep_time_pct: Optional[float] = None
    nodes: Optional[int] = None


def _cell(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return NA
    return repr(v) if isinstance(v, float) else str(v)


def _parse(text: str, kind):
    if text == NA:
        return None
    return kind(text)


def write_csv(reports: Iterable[RunReport], out=None) -> str:
    """Write reports (header first) to ``out`` (path or file) and return the text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in reports:
        w.writerow([_cell(v) for v in astuple(r)])
    text = buf.getvalue()
    if isinstance(out, (str, Path)):
        Path(out).write_text(text)
    elif out is not None:
        out.write(text)
    return text


def read_csv(source) -> List[RunReport]:
    """Parse CSV text or a path written by :func:`write_csv`."""
    text = Path(source).read_text() if isinstance(source, Path) or (
        isinstance(source, str) and "\n" not in source and Path(source).is_file()) else source
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != CSV_HEADER:
        raise InstanceFormatError(f"line 1: expected header {','.join(CSV_HEADER)}")
    kinds = [str, int, int, float, float, float, float, float, float, int]
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(CSV_HEADER):
            raise InstanceFormatError(f"line {lineno}: expected {len(CSV_HEADER)} fields, got {len(row)}")
        try:
            vals = [row[0]] + [_parse(t, k) for t, k in zip(row[1:], kinds[1:])]
        except ValueError as e:
            raise InstanceFormatError(f"line {lineno}: {e}") from None
        out.append(RunReport(*vals))
    return out


def load_spec(spec) -> list:
    """Resolve a benchmark spec into a list of ``(id, n, K)`` tuples and Instances.

    ``spec`` may be ``"table1"``, a list of tuples/Instances, or a path to a
    text file with one entry per line: ``id n K`` (random instance, seed =
    id), ``fixture:NAME``, or a path to an instance file (relative paths are
    resolved against the spec file).  ``#`` starts a comment.
    """
    if isinstance(spec, str) and spec == "table1":
        return table1_spec()
    if not isinstance(spec, (str, Path)):
        return list(spec)
    path = Path(spec)
    out = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) == 3 and all(p.lstrip("-").isdigit() for p in parts):
            out.append(tuple(int(p) for p in parts))
        elif line.startswith("fixture:"):
            out.append(load_fixture(line[len("fixture:"):]))
        elif len(parts) == 1:
            p = Path(line)
            out.append(load_instance(p if p.is_absolute() else path.parent / p))
        else:
            raise InstanceFormatError(f"{path}: line {lineno}: expected 'id n K', 'fixture:NAME' or a path")
    return out


def run_instance(inst: Instance, algorithm: str = "g2b2", oracle: str = "box", *,
                 time_limit: float = DESK_TIME_LIMIT, epsilon: float = DEFAULT_EPS,
                 warm: Optional[WalkConfig] = None, seed: int = 0, policy: str = "random"):
    """Warm start plus solve; returns ``(RunReport, SolveResult)``."""
    if algorithm not in ALGORITHMS:
        raise InputError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
    F, X = inst.objective, inst.feasible_set
    start = time.perf_counter()
    warm = warm if warm is not None else WalkConfig(proposals=DESK_WARM_PROPOSALS, seed=seed)
    walk = random_walk(F, X, warm)
    remaining = None if time_limit is None else max(time_limit - walk.wall_time, 0.0)
    if algorithm == "gb2":
        res = solve_gb2(F, X, tol=epsilon, policy=policy, seed=seed, time_limit=remaining,
                        initial_lower=walk.value, initial_point=walk.point)
    else:
        res = solve_g2b2(F, X, epsilon, oracle, initial_planes=inst.initial_planes, time_limit=remaining,
                         seed=seed, initial_lower=walk.value, initial_point=walk.point)
    total = time.perf_counter() - start
    sep_pct = 100.0 * res.separation_time / res.wall_time if res.wall_time > 0 else 0.0
    report = RunReport(inst.id, inst.dim, inst.K, walk.wall_time, walk.value, res.value,
                       res.gap_pct, total, sep_pct, res.nodes)
    return report, res


def run_benchmark(spec, algorithm: str = "g2b2", oracle: str = "box", *,
                  time_limit: float = DESK_TIME_LIMIT, epsilon: float = DEFAULT_EPS,
                  warm_proposals: Optional[int] = DESK_WARM_PROPOSALS, warm_time: Optional[float] = None,
                  seed: Optional[int] = None, dims=None, out=None) -> List[RunReport]:
    """Run every spec entry and collect one report each.

    Random entries ``(id, n, K)`` use seed ``id`` unless ``seed`` is given.
    A failing entry yields a row with NA results; the run goes on.
    """
    reports = []
    for entry in load_spec(spec):
        if isinstance(entry, Instance):
            inst, s = entry, seed or 0
        else:
            i, n, K = entry
            if dims is not None and n not in dims:
                continue
            s = i if seed is None else seed
            inst = generate_instance(n, K, s)
            inst.id = str(i)
        if dims is not None and inst.dim not in dims:
            continue
        warm = WalkConfig(proposals=warm_proposals, budget=warm_time, seed=s)
        try:
            report, res = run_instance(inst, algorithm, oracle, time_limit=time_limit, epsilon=epsilon,
                                       warm=warm, seed=s)
            logger.info("%s: obj=%.6g status=%s nodes=%d", inst.id, res.value, res.status, res.nodes)
        except RobustMaxError as e:
            logger.error("%s failed: %s", inst.id, e)
            report = RunReport(inst.id, inst.dim, inst.K)
        reports.append(report)
    if out is not None:
        write_csv(reports, out)
    return reports


__all__ = ["CSV_HEADER", "RunReport", "load_spec", "read_csv", "run_benchmark", "run_instance", "write_csv"]
