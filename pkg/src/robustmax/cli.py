"""Command-line interface: ``robustmax {generate,solve,bench,maximin}``.

Exit codes: 0 solved to tolerance, 2 budget exhausted or bound not
certified (best-effort result still printed), 1 error.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import bench
from .exceptions import RobustMaxError
from .g2b2 import DEFAULT_EPS
from .instances import generate_instance, generate_maximin_instance, load_instance, save_instance
from .oracles import ORACLE_NAMES
from .warmstart import WalkConfig

EXIT_OK, EXIT_ERROR, EXIT_BUDGET = 0, 1, 2


def _box(text: str) -> np.ndarray:
    """``lo,hi[;lo,hi...]`` or ``lo,hi`` with ``--dim`` broadcast later."""
    try:
        return np.array([[float(v) for v in part.split(",")] for part in text.split(";")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad box {text!r}; expected 'lo,hi;lo,hi;...'") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="robustmax", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random quadratic instance")
    g.add_argument("--dim", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    s = sub.add_parser("solve", help="solve an instance file")
    s.add_argument("file")
    s.add_argument("--algorithm", choices=bench.ALGORITHMS, default=None,
                   help="default: gb2 for piecewise-linear instances, g2b2 otherwise")
    s.add_argument("--oracle", choices=ORACLE_NAMES, default="box")
    s.add_argument("--epsilon", type=float, default=DEFAULT_EPS)
    s.add_argument("--time-limit", type=float, default=bench.DESK_TIME_LIMIT)
    s.add_argument("--warmstart-proposals", type=int, default=bench.DESK_WARM_PROPOSALS)
    s.add_argument("--warmstart-time", type=float, default=None)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--report", choices=("text", "csv"), default="text")

    b = sub.add_parser("bench", help="run a benchmark spec and write CSV")
    b.add_argument("--spec", default="table1", help="'table1' or a spec file")
    b.add_argument("--algorithm", choices=bench.ALGORITHMS, default="g2b2")
    b.add_argument("--oracle", choices=ORACLE_NAMES, default="box")
    b.add_argument("--epsilon", type=float, default=DEFAULT_EPS)
    b.add_argument("--time-limit", type=float, default=bench.DESK_TIME_LIMIT)
    b.add_argument("--warmstart-proposals", type=int, default=bench.DESK_WARM_PROPOSALS)
    b.add_argument("--warmstart-time", type=float, default=None)
    b.add_argument("--dims", type=int, nargs="+", default=None, help="keep only these dimensions")
    b.add_argument("--out", default="-")

    m = sub.add_parser("maximin", help="build a maximin-distance instance")
    m.add_argument("--points", required=True, help="text file, one point per line")
    m.add_argument("--p", choices=("1", "inf"), required=True)
    m.add_argument("--box", type=_box, required=True, help="'lo,hi' (all coordinates) or 'lo,hi;lo,hi;...'")
    m.add_argument("--out", required=True)
    return p


def _cmd_generate(args) -> int:
    save_instance(generate_instance(args.dim, args.k, args.seed), args.out)
    return EXIT_OK


def _cmd_solve(args) -> int:
    inst = load_instance(args.file)
    algorithm = args.algorithm or ("gb2" if inst.objective.all_piecewise_linear else "g2b2")
    warm = WalkConfig(proposals=None if args.warmstart_time is not None else args.warmstart_proposals,
                      budget=args.warmstart_time, seed=args.seed)
    report, res = bench.run_instance(inst, algorithm, args.oracle, time_limit=args.time_limit,
                                     epsilon=args.epsilon, warm=warm, seed=args.seed)
    if args.report == "csv":
        bench.write_csv([report], sys.stdout)
    else:
        gap = "NA (upper bound not certified)" if res.gap is None else f"{res.gap:.6g} ({res.gap_pct:.4g}%)"
        print(f"instance   {inst.id}")
        print(f"algorithm  {algorithm}" + (f" / {args.oracle}" if algorithm == "g2b2" else ""))
        print(f"status     {res.status}")
        print(f"objective  {res.value:.10g}")
        print(f"point      {np.array2string(np.asarray(res.point), precision=8)}")
        print(f"upper      {res.upper:.10g}" + ("" if res.certified else " (heuristic)"))
        print(f"gap        {gap}")
        print(f"nodes      {res.nodes}   iterations {res.iterations}   time {report.cpu_s:.3f}s")
    return EXIT_OK if res.solved and res.certified else EXIT_BUDGET


def _cmd_bench(args) -> int:
    reports = bench.run_benchmark(args.spec, args.algorithm, args.oracle, time_limit=args.time_limit,
                                  epsilon=args.epsilon, warm_proposals=args.warmstart_proposals,
                                  warm_time=args.warmstart_time, dims=args.dims)
    bench.write_csv(reports, sys.stdout if args.out == "-" else args.out)
    return EXIT_OK


def _cmd_maximin(args) -> int:
    D = np.loadtxt(args.points, ndmin=2, delimiter=None if "," not in open(args.points).read() else ",")
    box = args.box
    if box.shape[0] == 1 and D.shape[1] > 1:
        box = np.repeat(box, D.shape[1], axis=0)
    inst = generate_maximin_instance(D, np.inf if args.p == "inf" else 1, box)
    save_instance(inst, args.out)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")
    handler = {"generate": _cmd_generate, "solve": _cmd_solve, "bench": _cmd_bench, "maximin": _cmd_maximin}
    try:
        return handler[args.command](args)
    except (RobustMaxError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
