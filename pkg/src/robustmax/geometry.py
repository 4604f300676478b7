"""Halfspace-represented polytopes inside a bounding box.

A :class:`Polytope` is ``{x : lo <= x <= hi, A x <= b}``.  Instances are
immutable; derived quantities (emptiness, circumscribed box, vertices) are
computed on first use and cached.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Optional, Sequence

import numpy as np

from .exceptions import CapabilityError, EmptyPolytopeError, InputError
from .lp import LinearProgram, LpStatus, solve_lp

MEMBERSHIP_TOL = 1e-7
DEDUP_TOL = 1e-6
BOX_VERTEX_CAP = 20
EXACT_VERTEX_DIM_CAP = 4


@dataclass(frozen=True)
class Halfspace:
    """``{x : normal . x <= offset}``."""

    normal: tuple
    offset: float

    def __init__(self, normal, offset):
        object.__setattr__(self, "normal", tuple(float(v) for v in np.ravel(normal)))
        object.__setattr__(self, "offset", float(offset))

    @property
    def dim(self) -> int:
        return len(self.normal)

    def holds(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        return float(np.dot(self.normal, x)) <= self.offset + tol


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __init__(self, lo, hi):
        lo = tuple(float(v) for v in np.ravel(lo))
        hi = tuple(float(v) for v in np.ravel(hi))
        if len(lo) != len(hi) or not lo:
            raise InputError("box bounds must be nonempty and of equal length")
        if any(l > h for l, h in zip(lo, hi)):
            raise InputError(f"box has lo > hi: {lo} vs {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def bounds(self):
        return list(zip(self.lo, self.hi))

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (np.array(self.lo) + np.array(self.hi))

    @property
    def diagonal(self) -> float:
        return float(np.linalg.norm(np.array(self.hi) - np.array(self.lo)))

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= np.array(self.lo) - tol) and np.all(x <= np.array(self.hi) + tol))


class Polytope:
    """Box-bounded H-polytope.

    Parameters
    ----------
    lo, hi : array_like
        Box bounds, ``lo <= hi`` componentwise.
    A, b : array_like, optional
        Extra rows ``A x <= b``.  Rows with a zero normal are dropped when
        ``b >= 0`` and make the polytope empty otherwise.
    """

    def __init__(self, lo, hi, A=None, b=None):
        self.box = Box(lo, hi)
        n = self.box.dim
        if A is None or np.size(A) == 0:
            A = np.zeros((0, n))
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[1] != n:
            raise InputError(f"halfspace normals have shape {A.shape}, expected (m, {n})")
        b = np.zeros(0) if b is None else np.asarray(b, dtype=float).ravel()
        if A.shape[0] != b.size:
            raise InputError(f"{A.shape[0]} halfspace normals but {b.size} offsets")
        norms = np.linalg.norm(A, axis=1)
        zero = norms <= 1e-14
        self._contradiction = bool(np.any(b[zero] < 0))
        A, b, norms = A[~zero], b[~zero], norms[~zero]
        # unit normals keep MEMBERSHIP_TOL a distance
        self.A = A / norms[:, None]
        self.b = b / norms
        self.A.setflags(write=False)
        self.b.setflags(write=False)
        self.lo = np.array(self.box.lo)
        self.hi = np.array(self.box.hi)
        self.lo.setflags(write=False)
        self.hi.setflags(write=False)

    @classmethod
    def from_box(cls, box: Box) -> "Polytope":
        return cls(box.lo, box.hi)

    @property
    def dim(self) -> int:
        return self.box.dim

    @property
    def halfspaces(self) -> list:
        return [Halfspace(a, c) for a, c in zip(self.A, self.b)]

    def __repr__(self):
        return f"Polytope(dim={self.dim}, halfspaces={self.A.shape[0]})"

    def constraints(self):
        """All rows ``G x <= h`` including the box."""
        n = self.dim
        eye = np.eye(n)
        G = np.vstack([self.A, eye, -eye])
        h = np.concatenate([self.b, self.hi, -self.lo])
        return G, h

    def residual(self, x) -> float:
        """Largest constraint violation at ``x`` (<= 0 means inside)."""
        x = np.asarray(x, dtype=float)
        r = max(float(np.max(x - self.hi)), float(np.max(self.lo - x)))
        if self.A.shape[0]:
            r = max(r, float(np.max(self.A @ x - self.b)))
        return r

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        return self.residual(x) <= tol

    def contains_many(self, X, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        ok = np.all(X <= self.hi + tol, axis=1) & np.all(X >= self.lo - tol, axis=1)
        if self.A.shape[0]:
            ok &= np.all(X @ self.A.T <= self.b + tol, axis=1)
        return ok

    def intersect(self, h) -> "Polytope":
        if isinstance(h, Halfspace):
            normal, offset = np.array(h.normal), h.offset
        else:
            normal, offset = np.asarray(h[0], dtype=float), float(h[1])
        if normal.size != self.dim:
            raise InputError(f"halfspace of dimension {normal.size} on a {self.dim}-dimensional polytope")
        return self.with_rows(normal[None, :], np.array([offset]))

    def with_rows(self, A, b) -> "Polytope":
        P = Polytope(self.lo, self.hi, np.vstack([self.A, A]), np.concatenate([self.b, b]))
        P._contradiction = P._contradiction or self._contradiction
        return P

    def lp(self, objective, extra_A=None, extra_b=None) -> LinearProgram:
        """LP over this polytope with the box as variable bounds."""
        A, b = self.A, self.b
        if extra_A is not None:
            A = np.vstack([A, extra_A])
            b = np.concatenate([b, extra_b])
        return LinearProgram(objective, A, b, list(zip(self.lo, self.hi)))

    def maximize(self, direction):
        """``(value, point)`` of ``max direction . x`` over P, or None if empty."""
        out = solve_lp(self.lp(direction))
        if out.status is LpStatus.INFEASIBLE:
            return None
        return out.value, out.point

    @cached_property
    def is_empty(self) -> bool:
        if self._contradiction:
            return True
        if self.A.shape[0] == 0:
            return False
        return solve_lp(self.lp(np.zeros(self.dim))).status is LpStatus.INFEASIBLE

    @cached_property
    def bounding_box(self) -> Box:
        if self.is_empty:
            raise EmptyPolytopeError("bounding box of an empty polytope")
        if self.A.shape[0] == 0:
            return self.box
        lo, hi = self.lo.copy(), self.hi.copy()
        for k in range(self.dim):
            e = np.zeros(self.dim)
            e[k] = 1.0
            top = self.maximize(e)
            bot = self.maximize(-e)
            if top is None or bot is None:
                raise EmptyPolytopeError("polytope became infeasible during box computation")
            hi[k] = min(top[0], self.hi[k])
            lo[k] = max(-bot[0], self.lo[k])
            if lo[k] > hi[k]:
                lo[k] = hi[k] = 0.5 * (lo[k] + hi[k])
        return Box(lo, hi)

    @cached_property
    def vertices(self) -> np.ndarray:
        return _enumerate_vertices(self)

    @cached_property
    def chebyshev_center(self) -> np.ndarray:
        """Center of the largest inscribed ball (a well-interior point)."""
        G, h = self.constraints()
        n = self.dim
        norms = np.linalg.norm(G, axis=1)
        A = np.hstack([G, norms[:, None]])
        out = solve_lp(LinearProgram(np.r_[np.zeros(n), 1.0], A, h, [(None, None)] * n + [(0, None)]))
        if not out.optimal:
            raise EmptyPolytopeError("no interior point: polytope is empty")
        return out.point[:n]


def intersect(P: Polytope, h) -> Polytope:
    return P.intersect(h)


def is_empty(P: Polytope) -> bool:
    return P.is_empty


def bounding_box(P: Polytope) -> Box:
    return P.bounding_box


def enumerate_box_vertices(B: Box, cap: int = BOX_VERTEX_CAP) -> np.ndarray:
    """All ``2**dim`` corners of ``B`` (duplicates kept for collapsed sides).

    Row ``j`` takes ``hi`` in coordinate ``i`` when bit ``dim-1-i`` of ``j``
    is set, so row 0 is ``lo`` and the last row is ``hi``.
    """
    n = B.dim
    if n > cap:
        raise CapabilityError(f"box vertex enumeration capped at dim {cap}, got {n}")
    bits = ((np.arange(2**n)[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(bool)
    return np.where(bits, np.array(B.hi), np.array(B.lo))


def iter_box_vertex_chunks(B: Box, chunk: int = 1 << 16, cap: int = BOX_VERTEX_CAP) -> Iterator[np.ndarray]:
    """Same order as :func:`enumerate_box_vertices`, in memory-bounded chunks."""
    n = B.dim
    if n > cap:
        raise CapabilityError(f"box vertex enumeration capped at dim {cap}, got {n}")
    lo, hi = np.array(B.lo), np.array(B.hi)
    shifts = np.arange(n - 1, -1, -1)
    for start in range(0, 2**n, chunk):
        idx = np.arange(start, min(start + chunk, 2**n))
        bits = ((idx[:, None] >> shifts) & 1).astype(bool)
        yield np.where(bits, hi, lo)


def enumerate_vertices(P: Polytope, dim_cap: int = EXACT_VERTEX_DIM_CAP) -> np.ndarray:
    if P.dim > dim_cap:
        raise CapabilityError(f"exact vertex enumeration capped at dim {dim_cap}, got {P.dim}")
    return P.vertices


def _enumerate_vertices(P: Polytope) -> np.ndarray:
    n = P.dim
    if n > EXACT_VERTEX_DIM_CAP:
        raise CapabilityError(f"exact vertex enumeration capped at dim {EXACT_VERTEX_DIM_CAP}, got {n}")
    if P.is_empty:
        return np.zeros((0, n))
    G, h = P.constraints()
    m = G.shape[0]
    combos = np.array(list(itertools.combinations(range(m), n)), dtype=int)
    mats = G[combos]
    rhs = h[combos]
    dets = np.linalg.det(mats)
    ok = np.abs(dets) > 1e-10
    if not np.any(ok):
        return np.zeros((0, n))
    pts = np.linalg.solve(mats[ok], rhs[ok][..., None])[..., 0]
    feasible = np.all(pts @ G.T <= h + MEMBERSHIP_TOL, axis=1)
    pts = pts[feasible]
    return _dedup(pts)


def _dedup(pts: np.ndarray, tol: float = DEDUP_TOL) -> np.ndarray:
    kept = []
    for p in pts:
        if not kept or np.min(np.linalg.norm(np.asarray(kept) - p, axis=1)) > tol:
            kept.append(p)
    return np.asarray(kept).reshape(-1, pts.shape[1])


def sample_box(box: Box, count: int, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(np.array(box.lo), np.array(box.hi), size=(count, box.dim))


def rejection_sample(P: Polytope, count: int, rng: np.random.Generator, max_draws: Optional[int] = None) -> np.ndarray:
    """Uniform points of P by rejection from its circumscribed box.

    May return fewer than ``count`` points for very thin polytopes.
    """
    if P.is_empty:
        return np.zeros((0, P.dim))
    box = P.bounding_box
    max_draws = max_draws or 50 * count
    got = []
    drawn = 0
    while sum(len(g) for g in got) < count and drawn < max_draws:
        batch = sample_box(box, count, rng)
        drawn += count
        got.append(batch[P.contains_many(batch, tol=0.0)])
    pts = np.vstack(got) if got else np.zeros((0, P.dim))
    return pts[:count]


def as_polytope(region: "Polytope | Box | Sequence") -> Polytope:
    if isinstance(region, Polytope):
        return region
    if isinstance(region, Box):
        return Polytope.from_box(region)
    lo, hi = zip(*region)
    return Polytope(lo, hi)
