"""Oracles for ``max_{x in P} f(x) - (a . x + b)`` with ``f`` convex.

The maximum of a convex function over a polytope sits at a vertex, which
gives two certified oracles (``box``: all corners of the circumscribed box,
an upper bound; ``exact``: all vertices of P, small dimension only) and two
heuristics built on linearization ascent (``lc1`` single start, ``lc2``
multistart).  Heuristic values are lower bounds on the true maximum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Optional

import numpy as np

from .exceptions import InputError
from .functions import AffinePiece, CandidateFunction
from .geometry import BOX_VERTEX_CAP, EXACT_VERTEX_DIM_CAP, Polytope, enumerate_vertices, iter_box_vertex_chunks

ASCENT_TOL = 1e-9
ASCENT_STEPS = 100
BURN_IN = 50


@dataclass
class SeparationTask:
    polytope: Polytope
    candidate: CandidateFunction
    affine: AffinePiece

    def objective(self, x) -> float:
        return self.candidate.value(x) - self.affine(x)

    def objectives(self, X) -> np.ndarray:
        return self.candidate.values(X) - self.affine.values(X)

    def gradient(self, x) -> np.ndarray:
        return self.candidate.subgradient(x) - self.affine.a


@dataclass
class SeparationResult:
    point: np.ndarray
    value: float
    certified_upper: bool


def oracle_box(task: SeparationTask, cap: int = BOX_VERTEX_CAP) -> SeparationResult:
    """Best corner of the circumscribed box of P (2n LPs + 2^n evaluations).

    The returned point may lie outside P; the value bounds the true max.
    """
    box = task.polytope.bounding_box
    best_val, best_pt = -np.inf, None
    for chunk in iter_box_vertex_chunks(box, cap=cap):
        vals = task.objectives(chunk)
        j = int(np.argmax(vals))
        if vals[j] > best_val:
            best_val, best_pt = float(vals[j]), chunk[j].copy()
    return SeparationResult(best_pt, best_val, True)


def oracle_exact(task: SeparationTask, dim_cap: int = EXACT_VERTEX_DIM_CAP) -> SeparationResult:
    """Best vertex of P itself; exact, for ``dim <= dim_cap``."""
    V = enumerate_vertices(task.polytope, dim_cap=dim_cap)
    vals = task.objectives(V)
    j = int(np.argmax(vals))
    return SeparationResult(V[j].copy(), float(vals[j]), True)


def ascent_path(task: SeparationTask, start, max_steps: int = ASCENT_STEPS,
                tol: float = ASCENT_TOL) -> Iterator[tuple]:
    """Yield ``(x, objective)`` along conditional-gradient ascent from ``start``.

    Each step moves to ``argmax_{y in P} s . y`` for a subgradient ``s`` of
    the objective at the current point.  Convexity makes the objective
    sequence non-decreasing.
    """
    P = task.polytope
    x = np.asarray(start, dtype=float)
    val = task.objective(x)
    yield x, val
    for _ in range(max_steps):
        s = task.gradient(x)
        res = P.maximize(s)
        if res is None:
            return
        lp_val, y = res
        if lp_val - s @ x <= tol:
            return
        y_val = task.objective(y)
        if y_val < val:
            return
        x, val = y, y_val
        yield x, val


def oracle_linearization_ascent(task: SeparationTask, start, max_steps: int = ASCENT_STEPS) -> SeparationResult:
    x, val = None, -np.inf
    for x, val in ascent_path(task, start, max_steps):
        pass
    return SeparationResult(np.array(x), float(val), False)


def hit_and_run(P: Polytope, count: int, rng: np.random.Generator, burn_in: int = BURN_IN,
                start=None) -> np.ndarray:
    """``count`` successive hit-and-run points of P after ``burn_in`` steps.

    The chain starts at ``start`` (default: the Chebyshev center).
    """
    G, h = P.constraints()
    x = P.chebyshev_center if start is None else np.asarray(start, dtype=float)
    n = P.dim
    out = np.empty((count, n))
    for step in range(burn_in + count):
        for _ in range(100):
            u = rng.normal(size=n)
            u /= np.linalg.norm(u)
            gu = G @ u
            slack = np.maximum(h - G @ x, 0.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                t = slack / gu
            hi = np.min(t[gu > 1e-12], initial=np.inf)
            lo = np.max(t[gu < -1e-12], initial=-np.inf)
            y = x + rng.uniform(lo, hi) * u if np.isfinite(lo) and np.isfinite(hi) and hi > lo else x
            if P.contains(y):
                x = y
                break
        if step >= burn_in:
            out[step - burn_in] = x
    return out


def oracle_multistart(task: SeparationTask, n_starts: int = 100, seed: int = 0) -> SeparationResult:
    """Best linearization ascent over ``n_starts`` hit-and-run starts in P."""
    if n_starts < 1:
        raise InputError("n_starts must be >= 1")
    rng = np.random.default_rng(seed)
    starts = hit_and_run(task.polytope, n_starts, rng)
    best = None
    for s in starts:
        res = oracle_linearization_ascent(task, s)
        if best is None or res.value > best.value:
            best = res
    return best


@dataclass(frozen=True)
class Oracle:
    """Named oracle; call as ``oracle(task, seed)``."""

    name: str
    certified: bool
    fn: Callable

    def __call__(self, task: SeparationTask, seed: int = 0) -> SeparationResult:
        return self.fn(task, seed)


ORACLE_NAMES = ("box", "lc1", "lc2", "exact")


def make_oracle(name: str, n_starts: int = 100, box_cap: int = BOX_VERTEX_CAP,
                exact_cap: int = EXACT_VERTEX_DIM_CAP) -> Oracle:
    if name == "box":
        return Oracle(name, True, lambda task, seed: oracle_box(task, box_cap))
    if name == "exact":
        return Oracle(name, True, lambda task, seed: oracle_exact(task, exact_cap))
    if name == "lc1":
        return Oracle(name, False, lambda task, seed: oracle_multistart(task, 1, seed))
    if name == "lc2":
        return Oracle(name, False, lambda task, seed: oracle_multistart(task, n_starts, seed))
    raise InputError(f"unknown oracle {name!r}; expected one of {ORACLE_NAMES}")


def resolve_oracle(oracle) -> Oracle:
    return oracle if isinstance(oracle, Oracle) else make_oracle(oracle)
