"""Generalized geometric branch-and-bound for convex candidates.

Every node carries one affine underestimator per candidate.  A separation
oracle measures how far each candidate rises above its plane on the node
(``v_k``); candidates with ``v_k <= eps`` are *accurate*.  The node LP

    max theta  s.t.  theta <= a_k . x + b_k + v_k + eps   (inaccurate k)
                     theta <= a_k . x + b_k + eps         (accurate k)
                     x in P

bounds ``max_P min_k f_k`` from above; the robust objective at its argmax
is a lower bound.  Branching takes the least accurate candidate, adds the
tangent plane at its separation point, and splits the node by which of the
old plane and the tangent is larger.
"""

from __future__ import annotations

import heapq
import logging
import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .exceptions import EmptyPolytopeError, InputError
from .functions import AffinePiece, RobustObjective, tangent_plane
from .geometry import MEMBERSHIP_TOL, Polytope, as_polytope
from .lp import LinearProgram, LpStatus, solve_lp
from .oracles import Oracle, SeparationResult, SeparationTask, resolve_oracle
from .results import ITERATION_LIMIT, SOLVED, TIME_LIMIT, UNCERTIFIED, NodeRecord, SolveResult, SolveTrace

logger = logging.getLogger(__name__)

DEFAULT_EPS = 1e-4
MAX_ITERATIONS = 10**5


@dataclass
class G2Node:
    id: int
    polytope: Polytope
    approx: tuple
    parent: Optional[int] = None
    parent_upper: float = np.inf
    sep: List[SeparationResult] = field(default_factory=list, repr=False)
    accurate: frozenset = frozenset()
    theta: float = np.inf
    upper: float = np.inf
    lower: float = -np.inf
    point: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def inaccurate(self) -> list:
        return [k for k in range(len(self.approx)) if k not in self.accurate]


def _seed(base: int, node_id: int, k: int) -> int:
    return int(np.random.SeedSequence([base, node_id, k]).generate_state(1)[0])


def node_separation(polytope: Polytope, candidate, approx: AffinePiece, oracle, seed: int = 0) -> SeparationResult:
    """Run ``oracle`` on ``max_{x in P} candidate(x) - approx(x)``."""
    return resolve_oracle(oracle)(SeparationTask(polytope, candidate, approx), seed)


def node_lp(polytope: Polytope, approx: Sequence[AffinePiece], sep_values, accurate, eps: float):
    """Solve the node LP; returns ``(x, theta)`` or None if P is empty."""
    n = polytope.dim
    K = len(approx)
    rows = np.zeros((polytope.A.shape[0] + K, n + 1))
    rhs = np.empty(polytope.A.shape[0] + K)
    m = polytope.A.shape[0]
    rows[:m, :n] = polytope.A
    rhs[:m] = polytope.b
    for k, plane in enumerate(approx):
        rows[m + k, :n] = -plane.a
        rows[m + k, n] = 1.0
        slack = eps if k in accurate else sep_values[k] + eps
        rhs[m + k] = plane.b + slack
    obj = np.zeros(n + 1)
    obj[n] = 1.0
    lp = LinearProgram(obj, rows, rhs, list(zip(polytope.lo, polytope.hi)) + [(None, None)])
    out = solve_lp(lp)
    if out.status is LpStatus.INFEASIBLE:
        return None
    if out.status is LpStatus.UNBOUNDED:
        raise RuntimeError("node LP unbounded over a bounded polytope")
    return out.point[:n], out.value


def evaluate_node(node: G2Node, F: RobustObjective, oracle: Oracle, eps: float, seed: int = 0) -> bool:
    """Separate every candidate, then bound the node.  False if P is empty.

    ``upper`` is capped by the parent's bound, which is valid because the
    child polytope is contained in the parent's.
    """
    if node.polytope.is_empty:
        return False
    node.sep = [node_separation(node.polytope, F[k], node.approx[k], oracle, _seed(seed, node.id, k))
                for k in range(F.K)]
    node.accurate = frozenset(k for k, r in enumerate(node.sep) if r.value <= eps)
    solved = node_lp(node.polytope, node.approx, [r.value for r in node.sep], node.accurate, eps)
    if solved is None:
        return False
    node.point, node.theta = solved
    node.upper = min(node.theta, node.parent_upper)
    node.lower = F(node.point)
    return True


def pick_refinement_target(node: G2Node) -> int:
    """Inaccurate candidate with the largest separation value (ties: smallest index)."""
    free = node.inaccurate
    if not free:
        raise InputError("every candidate is eps-accurate on this node")
    return max(free, key=lambda k: (node.sep[k].value, -k))


def _range_over(P: Polytope, a: np.ndarray, b: float):
    """``(min, max)`` of ``a . x + b`` over P."""
    top = P.maximize(a)
    bot = P.maximize(-a)
    if top is None or bot is None:
        raise EmptyPolytopeError("node polytope is empty")
    return -bot[0] + b, top[0] + b


def _bisect(P: Polytope) -> list:
    """Halve P across the longest edge of its bounding box."""
    box = P.bounding_box
    i = int(np.argmax(np.asarray(box.hi) - np.asarray(box.lo)))
    mid = 0.5 * (box.lo[i] + box.hi[i])
    e = np.zeros(P.dim)
    e[i] = 1.0
    return [P.with_rows(e[None], [mid]), P.with_rows(-e[None], [-mid])]


OUTSIDE_RULES = ("bisect", "cut")


def branch_g2(node: G2Node, k: int, F: RobustObjective, outside: str = "bisect"):
    """Split ``node`` with the tangent of candidate ``k`` at its separation point.

    When the separation point lies outside the node (box oracle) and
    ``outside == "bisect"``, the node is bisected instead: its bounding box
    is what makes the box oracle loose, and cuts anchored at far corners
    tend to leave long slivers whose boxes never shrink.

    Returns ``(kind, children, cut)`` where ``children`` is a list of
    ``(polytope, approx)`` pairs and ``kind`` is one of

    * ``"split"``: both sides of the cut carry volume;
    * ``"replace"``: the tangent dominates the old plane on all of P, so the
      node is kept whole with the improved plane;
    * ``"bisect"``: the tangent lies below the old plane on all of P (this
      only happens with an anchor outside P), or the anchor is outside P
      under the ``"bisect"`` rule; the node is halved across its longest
      bounding-box edge;
    * ``"converged"``: the tangent equals the current plane.
    """
    if outside not in OUTSIDE_RULES:
        raise InputError(f"unknown outside-anchor rule {outside!r}")
    P = node.polytope
    old = node.approx[k]
    anchor = node.sep[k].point
    cut = tangent_plane(F[k], anchor)
    if outside == "bisect" and not P.contains(anchor):
        return "bisect", [(h, node.approx) for h in _bisect(P)], cut
    da = cut.a - old.a
    db = cut.b - old.b
    if np.linalg.norm(da) <= 1e-9 and abs(db) <= 1e-9:
        return "converged", [], cut
    with_cut = node.approx[:k] + (cut,) + node.approx[k + 1:]
    norm = np.linalg.norm(da)
    if norm <= 1e-12:
        lo = hi = db
        scale = 1.0
    else:
        lo, hi = _range_over(P, da, db)
        scale = norm
    if hi <= MEMBERSHIP_TOL * scale:
        return "bisect", [(h, node.approx) for h in _bisect(P)], cut
    if lo >= -MEMBERSHIP_TOL * scale:
        return "replace", [(P, with_cut)], cut
    keep_old = P.with_rows(da[None], [-db])
    take_cut = P.with_rows(-da[None], [db])
    return "split", [(keep_old, node.approx), (take_cut, with_cut)], cut


def initial_planes_at(F: RobustObjective, anchor) -> tuple:
    return tuple(tangent_plane(g, anchor) for g in F)


def solve_g2b2(F: RobustObjective, X, eps: float = DEFAULT_EPS, oracle="box", *,
               initial_planes: Optional[Sequence[AffinePiece]] = None, anchor=None,
               time_limit: Optional[float] = None, max_iterations: Optional[int] = MAX_ITERATIONS,
               seed: int = 0, initial_lower: Optional[float] = None, initial_point=None,
               outside: str = "bisect", trace: bool = False) -> SolveResult:
    """Find an eps-optimal point of ``max_{x in X} min_k f_k(x)``.

    Parameters
    ----------
    F : RobustObjective
        Convex candidates exposing ``value``/``values``/``subgradient``.
    X : Polytope, Box or sequence of (lo, hi)
    eps : float
        Accuracy target; also the stopping gap.
    oracle : {"box", "lc1", "lc2", "exact"} or Oracle
        Separation oracle.  With ``lc1``/``lc2`` the upper bound is heuristic:
        the gap test is skipped and the run goes until the tree is exhausted
        or a budget hits; the result is flagged uncertified.
    initial_planes : sequence of AffinePiece, optional
        One starting plane per candidate.  Defaults to tangents at
        ``anchor`` (default: center of the bounding box of X).
    initial_lower, initial_point : optional
        Warm-start incumbent.
    outside : {"bisect", "cut"}
        What to do when the separation point lies outside the node (only
        the box oracle does that): bisect the node, or cut with the tangent
        there anyway.
    """
    if eps <= 0:
        raise InputError("eps must be positive")
    if outside not in OUTSIDE_RULES:
        raise InputError(f"unknown outside-anchor rule {outside!r}")
    X = as_polytope(X)
    if X.dim != F.dim:
        raise InputError(f"feasible set has dim {X.dim}, candidates have dim {F.dim}")
    if X.is_empty:
        raise EmptyPolytopeError("feasible set is empty")
    oracle = resolve_oracle(oracle)
    start = time.perf_counter()
    if initial_planes is None:
        anchor = X.bounding_box.center if anchor is None else np.asarray(anchor, dtype=float)
        initial_planes = initial_planes_at(F, anchor)
    approx = tuple(initial_planes)
    if len(approx) != F.K:
        raise InputError(f"{len(approx)} initial planes for {F.K} candidates")

    sep_time = 0.0
    tangents = [0] * F.K
    tr = SolveTrace() if trace else None

    def evaluate(node):
        nonlocal sep_time
        t0 = time.perf_counter()
        ok = evaluate_node(node, F, oracle, eps, seed)
        sep_time += time.perf_counter() - t0
        return ok

    root = G2Node(0, X, approx)
    if not evaluate(root):
        raise EmptyPolytopeError("feasible set is empty")
    leaves = {0: root}
    heap = [(-root.upper, 0)]
    lower, best = root.lower, root.point
    if initial_lower is not None and initial_lower > lower:
        lower, best = float(initial_lower), np.asarray(initial_point, dtype=float)
    fathomed_upper = -np.inf
    created = 1
    next_id = 1
    if tr is not None:
        tr.add_node(NodeRecord(0, None, X, root.upper, root.lower, root.point, 0))
        tr.close_iteration(lower, root.upper, [0])

    def top_upper():
        while heap and heap[0][1] not in leaves:
            heapq.heappop(heap)
        return -heap[0][0] if heap else -np.inf

    iteration = 0
    status = SOLVED if oracle.certified else UNCERTIFIED
    while leaves:
        upper = top_upper()
        if oracle.certified and max(upper, fathomed_upper) - lower <= eps:
            break
        if max_iterations is not None and iteration >= max_iterations:
            status = ITERATION_LIMIT
            break
        if time_limit is not None and time.perf_counter() - start > time_limit:
            status = TIME_LIMIT
            break
        node = leaves.pop(heap[0][1])
        iteration += 1
        if not node.inaccurate:
            fathomed_upper = max(fathomed_upper, node.upper)
            if tr is not None:
                tr.pruned.append(node.id)
                tr.close_iteration(lower, max(top_upper(), fathomed_upper, lower), leaves)
            continue
        k = pick_refinement_target(node)
        kind, specs, cut = branch_g2(node, k, F, outside)
        if kind == "converged":
            node.accurate = node.accurate | {k}
            solved = node_lp(node.polytope, node.approx, [r.value for r in node.sep], node.accurate, eps)
            if solved is not None:
                node.point, node.theta = solved
                node.upper = min(node.theta, node.upper)
                leaves[node.id] = node
                heapq.heappush(heap, (-node.upper, node.id))
            continue
        if kind != "bisect":
            tangents[k] += 1
            if tr is not None:
                tr.cuts.append((k, cut))
        for poly, planes in specs:
            child = G2Node(next_id, poly, planes, parent=node.id, parent_upper=node.upper)
            next_id += 1
            if not evaluate(child):
                continue
            created += 1
            leaves[child.id] = child
            heapq.heappush(heap, (-child.upper, child.id))
            if child.lower > lower:
                lower, best = child.lower, child.point
            if tr is not None:
                tr.add_node(NodeRecord(child.id, node.id, poly, child.upper, child.lower,
                                       child.point, iteration))
        for nid in [i for i, nd in leaves.items() if nd.upper <= lower]:
            del leaves[nid]
            if tr is not None:
                tr.pruned.append(nid)
        if tr is not None:
            tr.close_iteration(lower, max(top_upper(), fathomed_upper, lower), leaves)
        if iteration % 500 == 0:
            logger.info("iter %d: L=%.6g U=%.6g leaves=%d", iteration, lower, top_upper(), len(leaves))

    upper = max(top_upper(), fathomed_upper, lower)
    return SolveResult(
        value=lower, point=best, lower=lower, upper=upper, status=status,
        certified=oracle.certified, iterations=iteration, nodes=created,
        wall_time=time.perf_counter() - start, separation_time=sep_time,
        tangent_planes=tangents, trace=tr,
    )
