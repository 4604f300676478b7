"""Convex candidate functions and the robust objective ``min_k f_k``.

Two closed forms are supported: piecewise-linear convex functions (max of
affine pieces) and convex quadratics ``x'Mx + b'x + c``.  Both expose
``value``, vectorized ``values`` and a canonical ``subgradient``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .exceptions import InputError
from .geometry import Polytope

PSD_TOL = 1e-8


@dataclass(frozen=True)
class AffinePiece:
    """``a . x + b``."""

    a: np.ndarray
    b: float

    def __init__(self, a, b):
        a = np.array(a, dtype=float).ravel()
        if not np.all(np.isfinite(a)) or not np.isfinite(b):
            raise InputError("affine piece must have finite coefficients")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", float(b))

    @property
    def dim(self) -> int:
        return self.a.size

    def __call__(self, x) -> float:
        return float(self.a @ np.asarray(x, dtype=float) + self.b)

    def values(self, X) -> np.ndarray:
        return np.atleast_2d(X) @ self.a + self.b

    def __eq__(self, other):
        return isinstance(other, AffinePiece) and self.b == other.b and np.array_equal(self.a, other.a)

    def __hash__(self):
        return hash((self.a.tobytes(), self.b))


class PiecewiseLinearConvex:
    """``max_i (a_i . x + b_i)`` over a nonempty list of pieces."""

    kind = "pl"

    def __init__(self, pieces: Sequence[AffinePiece]):
        pieces = [p if isinstance(p, AffinePiece) else AffinePiece(p[:-1], p[-1]) for p in pieces]
        if not pieces:
            raise InputError("piecewise-linear function needs at least one piece")
        n = pieces[0].dim
        if any(p.dim != n for p in pieces):
            raise InputError("pieces disagree on dimension")
        self.pieces = tuple(pieces)
        self.A = np.array([p.a for p in pieces])
        self.b = np.array([p.b for p in pieces])
        self.A.setflags(write=False)
        self.b.setflags(write=False)

    @classmethod
    def from_arrays(cls, A, b) -> "PiecewiseLinearConvex":
        return cls([AffinePiece(a, c) for a, c in zip(np.atleast_2d(A), np.ravel(b))])

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    @property
    def num_pieces(self) -> int:
        return len(self.pieces)

    def piece_values(self, x) -> np.ndarray:
        return self.A @ np.asarray(x, dtype=float) + self.b

    def value(self, x) -> float:
        return float(np.max(self.piece_values(x)))

    def values(self, X) -> np.ndarray:
        return np.max(np.atleast_2d(X) @ self.A.T + self.b, axis=1)

    def active_piece(self, x) -> int:
        """Smallest index among the maximizing pieces."""
        return int(np.argmax(self.piece_values(x)))

    def subgradient(self, x) -> np.ndarray:
        return self.A[self.active_piece(x)].copy()

    def tangent(self, x) -> AffinePiece:
        return self.pieces[self.active_piece(x)]

    def __repr__(self):
        return f"PiecewiseLinearConvex(dim={self.dim}, pieces={self.num_pieces})"


class ConvexQuadratic:
    """``x'Mx + b'x + c`` with ``M`` symmetric positive semidefinite.

    ``M`` is symmetrized on construction; a minimum eigenvalue below
    ``-PSD_TOL * max(1, ||M||)`` is rejected.
    """

    kind = "quadratic"

    def __init__(self, M, b, c):
        M = np.array(M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise InputError(f"quadratic term must be square, got shape {M.shape}")
        M = 0.5 * (M + M.T)
        b = np.array(b, dtype=float).ravel()
        if b.size != M.shape[0]:
            raise InputError("linear term length does not match the quadratic term")
        scale = max(1.0, float(np.abs(M).max()) if M.size else 1.0)
        if M.size and np.linalg.eigvalsh(M).min() < -PSD_TOL * scale:
            raise InputError("quadratic term is not positive semidefinite")
        for arr in (M, b):
            arr.setflags(write=False)
        self.M, self.b, self.c = M, b, float(c)

    @classmethod
    def from_factor(cls, Q, b, c) -> "ConvexQuadratic":
        Q = np.asarray(Q, dtype=float)
        return cls(Q.T @ Q, b, c)

    @property
    def dim(self) -> int:
        return self.b.size

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(x @ self.M @ x + self.b @ x + self.c)

    def values(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        return np.einsum("ij,jk,ik->i", X, self.M, X) + X @ self.b + self.c

    def subgradient(self, x) -> np.ndarray:
        return 2.0 * self.M @ np.asarray(x, dtype=float) + self.b

    def tangent(self, x) -> AffinePiece:
        x = np.asarray(x, dtype=float)
        g = self.subgradient(x)
        return AffinePiece(g, self.value(x) - g @ x)

    def __repr__(self):
        return f"ConvexQuadratic(dim={self.dim})"


CandidateFunction = Union[PiecewiseLinearConvex, ConvexQuadratic]


def value(g: CandidateFunction, x) -> float:
    return g.value(x)


def subgradient(g: CandidateFunction, x) -> np.ndarray:
    return g.subgradient(x)


def tangent_plane(g: CandidateFunction, x) -> AffinePiece:
    """Affine global underestimator of ``g`` touching it at ``x``."""
    x = np.asarray(x, dtype=float)
    s = g.subgradient(x)
    return AffinePiece(s, g.value(x) - s @ x)


class RobustObjective:
    """``f(x) = min_k f_k(x)`` over ``K >= 1`` candidates of common dimension."""

    def __init__(self, candidates: Sequence[CandidateFunction]):
        candidates = list(candidates)
        if not candidates:
            raise InputError("robust objective needs at least one candidate")
        n = candidates[0].dim
        if any(g.dim != n for g in candidates):
            raise InputError("candidates disagree on dimension")
        self.candidates = candidates

    @property
    def K(self) -> int:
        return len(self.candidates)

    @property
    def dim(self) -> int:
        return self.candidates[0].dim

    @property
    def all_piecewise_linear(self) -> bool:
        return all(isinstance(g, PiecewiseLinearConvex) for g in self.candidates)

    def __len__(self):
        return self.K

    def __getitem__(self, k):
        return self.candidates[k]

    def __iter__(self):
        return iter(self.candidates)

    def robust_value(self, x):
        """``(min_k f_k(x), k)`` with ties resolved to the smallest ``k``."""
        x = np.asarray(x, dtype=float)
        if x.size != self.dim:
            raise InputError(f"point of length {x.size} for a {self.dim}-dimensional objective")
        vals = [g.value(x) for g in self.candidates]
        k = int(np.argmin(vals))
        return vals[k], k

    def __call__(self, x) -> float:
        return self.robust_value(x)[0]

    def values(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = self.candidates[0].values(X)
        for g in self.candidates[1:]:
            out = np.minimum(out, g.values(X))
        return out


def robust_value(F: RobustObjective, x):
    return F.robust_value(x)


def dominance_region(fk: PiecewiseLinearConvex, i: int, X: Polytope) -> Polytope:
    """Part of ``X`` where piece ``i`` attains the max of ``fk``.

    Adds ``(a_j - a_i) . x <= b_i - b_j`` for every ``j != i``.
    """
    if not 0 <= i < fk.num_pieces:
        raise InputError(f"piece index {i} out of range for {fk.num_pieces} pieces")
    others = [j for j in range(fk.num_pieces) if j != i]
    if not others:
        return X
    A = fk.A[others] - fk.A[i]
    b = fk.b[i] - fk.b[others]
    return X.with_rows(A, b)
