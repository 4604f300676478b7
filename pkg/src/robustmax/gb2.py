"""Exact geometric branch-and-bound for piecewise-linear candidates.

Each node is labeled by ``(candidate, piece)`` pairs; its polytope is the
feasible set intersected with the dominance regions of those pieces.  On
such a node every labeled candidate is affine, so

    max theta  s.t.  theta <= a_ki . x + b_ki  for (k, i) in the label,  x in P

gives an upper bound ``U``, and the robust objective at the LP argmax gives
a lower bound ``L``.  Once a node's label covers every candidate the two
coincide.
"""

from __future__ import annotations

import heapq
import logging
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .exceptions import EmptyPolytopeError, InputError
from .functions import PiecewiseLinearConvex, RobustObjective, dominance_region
from .geometry import Polytope, as_polytope
from .lp import LinearProgram, LpStatus, solve_lp
from .results import ITERATION_LIMIT, SOLVED, TIME_LIMIT, NodeRecord, SolveResult, SolveTrace

logger = logging.getLogger(__name__)

POLICIES = ("random", "minmax", "ordered")


@dataclass
class GbNode:
    id: int
    label: tuple
    polytope: Polytope
    upper: float = np.inf
    lower: float = -np.inf
    point: Optional[np.ndarray] = field(default=None, repr=False)
    parent: Optional[int] = None

    @property
    def used(self) -> frozenset:
        return frozenset(k for k, _ in self.label)


def node_lp(label: Sequence[tuple], polytope: Polytope, F: RobustObjective) -> LinearProgram:
    """LP over ``(x, theta)`` capping theta by every labeled piece."""
    n = polytope.dim
    rows = [np.hstack([polytope.A, np.zeros((polytope.A.shape[0], 1))])]
    rhs = [polytope.b]
    for k, i in label:
        piece = F[k].pieces[i]
        rows.append(np.r_[-piece.a, 1.0][None, :])
        rhs.append([piece.b])
    obj = np.zeros(n + 1)
    obj[-1] = 1.0
    bounds = list(zip(polytope.lo, polytope.hi)) + [(None, None)]
    return LinearProgram(obj, np.vstack(rows), np.concatenate(rhs), bounds)


def node_bounds(node: GbNode, F: RobustObjective):
    """``(L, U, x)`` for ``node``, or None when its polytope is empty.

    The root (empty label) has an unbounded LP; it gets ``(-inf, inf, None)``.
    """
    if not node.label:
        if node.polytope.is_empty:
            return None
        return -np.inf, np.inf, None
    out = solve_lp(node_lp(node.label, node.polytope, F))
    if out.status is LpStatus.INFEASIBLE:
        return None
    if out.status is LpStatus.UNBOUNDED:
        raise RuntimeError("node LP unbounded with a nonempty label")
    x = out.point[:-1]
    return F(x), out.value, x


def select_leaf(leaves) -> GbNode:
    """Leaf with the largest U; ties go to the oldest node."""
    return min(leaves, key=lambda nd: (-nd.upper, nd.id))


def function_maxima(F: RobustObjective, X: Polytope) -> np.ndarray:
    """``max_{x in X} f_k(x)`` for each PL candidate, one LP per piece."""
    out = []
    for g in F:
        best = -np.inf
        for piece in g.pieces:
            res = X.maximize(piece.a)
            if res is None:
                raise EmptyPolytopeError("feasible set is empty")
            best = max(best, res[0] + piece.b)
        out.append(best)
    return np.array(out)


def select_function(node: GbNode, F: RobustObjective, policy: str = "random",
                    rng: Optional[np.random.Generator] = None, maxima=None) -> int:
    """Pick the next candidate to branch on among those not in the label.

    ``random`` draws uniformly (seeded ``rng``), ``minmax`` takes the
    candidate with the smallest maximum over the feasible set (``maxima``),
    ``ordered`` takes the smallest unused index.
    """
    free = [k for k in range(F.K) if k not in node.used]
    if not free:
        raise InputError("every candidate is already in the node label")
    if len(free) == 1 or policy == "ordered":
        return free[0]
    if policy == "random":
        rng = rng if rng is not None else np.random.default_rng(0)
        return free[int(rng.integers(len(free)))]
    if policy == "minmax":
        if maxima is None:
            raise InputError("minmax policy needs precomputed candidate maxima")
        return min(free, key=lambda k: (maxima[k], k))
    raise InputError(f"unknown function-selection policy {policy!r}")


def branch_gb(node: GbNode, k: int, F: RobustObjective, next_id=None) -> list:
    """Children ``P ∩ Q^{ki}`` for every piece ``i`` of candidate ``k``.

    Empty children are dropped; survivors come back with their bounds set.
    ``next_id`` is a callable handing out fresh node ids.
    """
    if k in node.used:
        raise InputError(f"candidate {k} already branched on this path")
    if next_id is None:
        counter = iter(range(node.id + 1, node.id + 1 + F[k].num_pieces))
        next_id = lambda: next(counter)
    children = []
    for i in range(F[k].num_pieces):
        child = GbNode(-1, node.label + ((k, i),), dominance_region(F[k], i, node.polytope), parent=node.id)
        bounds = node_bounds(child, F)
        if bounds is None:
            continue
        child.lower, child.upper, child.point = bounds
        child.id = next_id()
        children.append(child)
    return children


def solve_gb2(F: RobustObjective, X, *, tol: float = 1e-6, policy: str = "random", seed: int = 0,
              time_limit: Optional[float] = None, max_iterations: Optional[int] = None,
              initial_lower: Optional[float] = None, initial_point=None, prune: bool = True,
              trace: bool = False) -> SolveResult:
    """Maximize ``min_k f_k`` over ``X`` for piecewise-linear ``f_k``.

    Parameters
    ----------
    F : RobustObjective
        Every candidate must be :class:`PiecewiseLinearConvex`.
    X : Polytope, Box or sequence of (lo, hi)
    tol : float
        Stop once ``U - L <= tol``.
    policy : {"random", "minmax", "ordered"}
        Candidate selection rule at branching.
    initial_lower, initial_point : optional
        Warm-start incumbent (e.g. from a random walk).
    prune : bool
        Drop leaves with ``U <= L``.  Disabling it only costs time.
    trace : bool
        Keep a :class:`SolveTrace` of every node and iteration.

    Returns
    -------
    SolveResult
        ``value``/``point`` is the incumbent; ``status`` is ``"solved"``
        unless a time or iteration budget ran out first.
    """
    if not F.all_piecewise_linear:
        raise InputError("solve_gb2 needs piecewise-linear candidates")
    if policy not in POLICIES:
        raise InputError(f"unknown function-selection policy {policy!r}")
    X = as_polytope(X)
    if X.dim != F.dim:
        raise InputError(f"feasible set has dim {X.dim}, candidates have dim {F.dim}")
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    maxima = function_maxima(F, X) if policy == "minmax" else None

    root = GbNode(0, (), X)
    if node_bounds(root, F) is None:
        raise EmptyPolytopeError("feasible set is empty")
    ids = iter(range(1, 1 << 62))
    next_id = lambda: next(ids)
    leaves = {0: root}
    heap = [(-root.upper, 0)]
    lower = -np.inf if initial_lower is None else float(initial_lower)
    best = None if initial_point is None else np.asarray(initial_point, dtype=float)
    created = 1
    tr = SolveTrace() if trace else None
    if tr is not None:
        tr.add_node(NodeRecord(0, None, X, np.inf, -np.inf, None, 0, ()))

    def top_upper():
        while heap and heap[0][1] not in leaves:
            heapq.heappop(heap)
        return -heap[0][0] if heap else -np.inf

    iteration = 0
    status = SOLVED
    while leaves:
        upper = top_upper()
        if upper - lower <= tol:
            break
        if max_iterations is not None and iteration >= max_iterations:
            status = ITERATION_LIMIT
            break
        if time_limit is not None and time.perf_counter() - start > time_limit:
            status = TIME_LIMIT
            break
        node = leaves[heap[0][1]]
        del leaves[node.id]
        iteration += 1
        if len(node.used) == F.K:
            # full label: L == U, nothing left to split
            if tr is not None:
                tr.pruned.append(node.id)
            continue
        k = select_function(node, F, policy, rng, maxima)
        children = branch_gb(node, k, F, next_id)
        created += len(children)
        for child in children:
            leaves[child.id] = child
            heapq.heappush(heap, (-child.upper, child.id))
            if child.lower > lower:
                lower, best = child.lower, child.point
            if tr is not None:
                tr.add_node(NodeRecord(child.id, node.id, child.polytope, child.upper,
                                       child.lower, child.point, iteration, child.label))
        if prune:
            for nid in [i for i, nd in leaves.items() if nd.upper <= lower]:
                del leaves[nid]
                if tr is not None:
                    tr.pruned.append(nid)
        if tr is not None:
            tr.close_iteration(lower, max(top_upper(), lower), leaves)
        logger.debug("iter %d: L=%.6g U=%.6g leaves=%d", iteration, lower, top_upper(), len(leaves))

    upper = max(top_upper(), lower)
    return SolveResult(
        value=lower, point=best, lower=lower, upper=upper, status=status, certified=True,
        iterations=iteration, nodes=created, wall_time=time.perf_counter() - start, trace=tr,
    )
