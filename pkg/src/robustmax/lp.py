"""Dense two-phase simplex for the small LPs used throughout the solvers.

Problems are stated as::

    maximize    c . y
    subject to  A y <= b
                lo_j <= y_j <= hi_j      (either side may be infinite)

Variables are mapped to a nonnegative standard form internally (shifts for
finite lower bounds, reflections for upper-bounded-only variables, and
splitting for free variables).  The default pivot rule is Bland's, which
cannot cycle.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .exceptions import InputError, LpNumericalError

logger = logging.getLogger(__name__)

FEAS_TOL = 1e-7
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
MAX_PIVOTS = 10**6


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LinearProgram:
    """``max c.y  s.t.  A y <= b`` with optional per-variable bounds.

    ``bounds`` defaults to every variable free.  ``None`` or an infinite
    value on either side of a bound pair means unbounded on that side.
    """

    objective: np.ndarray
    A: np.ndarray
    b: np.ndarray
    bounds: Optional[Sequence[tuple]] = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).ravel()
        n = self.objective.size
        A = np.asarray(self.A, dtype=float)
        if A.size == 0:
            A = np.zeros((0, n))
        if A.ndim != 2 or A.shape[1] != n:
            raise InputError(f"constraint matrix has shape {A.shape}, expected (m, {n})")
        b = np.asarray(self.b, dtype=float).ravel()
        if b.size != A.shape[0]:
            raise InputError(f"{A.shape[0]} constraint rows but {b.size} offsets")
        self.A, self.b = A, b
        if self.bounds is None:
            self.bounds = [(None, None)] * n
        if len(self.bounds) != n:
            raise InputError(f"{len(self.bounds)} bound pairs for {n} variables")

    @property
    def num_vars(self) -> int:
        return self.objective.size


@dataclass
class LpOutcome:
    status: LpStatus
    point: Optional[np.ndarray] = None
    value: Optional[float] = None
    basis: Optional[tuple] = field(default=None, repr=False)
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def _bound(v, default):
    if v is None:
        return default
    return float(v)


class _StandardForm:
    """``y = shift + S z`` with ``z >= 0``; rows ``Az z <= bz``."""

    def __init__(self, lp: LinearProgram):
        n = lp.num_vars
        cols = []
        shift = np.zeros(n)
        upper_rows = []
        self.trivially_infeasible = False
        for j, pair in enumerate(lp.bounds):
            lo = _bound(pair[0], -np.inf)
            hi = _bound(pair[1], np.inf)
            if lo > hi + FEAS_TOL:
                self.trivially_infeasible = True
            if np.isfinite(lo):
                shift[j] = lo
                cols.append((j, 1.0))
                if np.isfinite(hi):
                    upper_rows.append((len(cols) - 1, max(hi - lo, 0.0)))
            elif np.isfinite(hi):
                shift[j] = hi
                cols.append((j, -1.0))
            else:
                cols.append((j, 1.0))
                cols.append((j, -1.0))
        nz = len(cols)
        S = np.zeros((n, nz))
        for idx, (j, sign) in enumerate(cols):
            S[j, idx] = sign
        Az = lp.A @ S
        bz = lp.b - lp.A @ shift
        if upper_rows:
            U = np.zeros((len(upper_rows), nz))
            for r, (idx, cap) in enumerate(upper_rows):
                U[r, idx] = 1.0
            Az = np.vstack([Az, U])
            bz = np.concatenate([bz, [cap for _, cap in upper_rows]])
        self.S, self.shift = S, shift
        self.Az, self.bz = Az, bz
        self.cz = lp.objective @ S
        self.nz = nz
        self.m = Az.shape[0]


class _Tableau:
    """Row-reduced tableau with the reduced-cost row stored last."""

    def __init__(self, T: np.ndarray, basis: list, rule: str):
        self.T = T
        self.m = T.shape[0] - 1
        self.N = T.shape[1] - 1
        self.basis = basis
        self.rule = rule
        self.pivots = 0

    def price(self, cost: np.ndarray):
        m, N = self.m, self.N
        cb = cost[self.basis]
        self.T[m, :N] = cost - cb @ self.T[:m, :N]
        self.T[m, N] = -(cb @ self.T[:m, N])

    def pivot(self, r: int, e: int):
        T = self.T
        T[r] /= T[r, e]
        col = T[:, e].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[:, e] = 0.0
        T[r, e] = 1.0
        self.basis[r] = e
        self.pivots += 1
        if self.pivots > MAX_PIVOTS:
            raise LpNumericalError(f"simplex exceeded {MAX_PIVOTS} pivots")

    def run(self, allowed: np.ndarray) -> LpStatus:
        m, N = self.m, self.N
        T = self.T
        degenerate_run = 0
        while True:
            reduced = np.where(allowed, T[m, :N], 0.0)
            improving = np.flatnonzero(reduced > OPT_TOL)
            if improving.size == 0:
                return LpStatus.OPTIMAL
            if self.rule == "dantzig" and degenerate_run < 50:
                e = int(improving[np.argmax(reduced[improving])])
            else:
                e = int(improving[0])
            column = T[:m, e]
            rows = np.flatnonzero(column > PIVOT_TOL)
            if rows.size == 0:
                return LpStatus.UNBOUNDED
            ratios = T[rows, N] / column[rows]
            best = ratios.min()
            tied = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
            r = int(min(tied, key=lambda i: self.basis[i]))
            degenerate_run = degenerate_run + 1 if T[r, N] <= 1e-12 else 0
            self.pivot(r, e)


def _warm_tableau(sf: _StandardForm, basis) -> Optional[_Tableau]:
    m, nz = sf.m, sf.nz
    basis = list(basis)
    if len(basis) != m or len(set(basis)) != m or any(not 0 <= j < nz + m for j in basis):
        return None
    E = np.hstack([sf.Az, np.eye(m), sf.bz[:, None]])
    B = E[:, basis]
    try:
        if np.linalg.cond(B) > 1e10:
            return None
        T = np.linalg.solve(B, E)
    except np.linalg.LinAlgError:
        return None
    if np.any(T[:, -1] < -FEAS_TOL):
        return None
    T[:, -1] = np.maximum(T[:, -1], 0.0)
    return _Tableau(np.vstack([T, np.zeros(T.shape[1])]), basis, "bland")


def solve_lp(lp: LinearProgram, rule: str = "bland", basis=None) -> LpOutcome:
    """Solve ``lp`` and return a certified :class:`LpOutcome`.

    Parameters
    ----------
    lp : LinearProgram
    rule : {"bland", "dantzig"}
        Entering-variable rule.  ``"dantzig"`` falls back to Bland after a
        run of degenerate pivots.
    basis : sequence of int, optional
        Basis returned by an earlier solve of an LP with the same shape.
        Used to skip phase one when it is still primal feasible; ignored
        otherwise.
    """
    if rule not in ("bland", "dantzig"):
        raise InputError(f"unknown pivot rule {rule!r}")
    sf = _StandardForm(lp)
    if sf.trivially_infeasible:
        return LpOutcome(LpStatus.INFEASIBLE)
    m, nz = sf.m, sf.nz
    if m == 0:
        if np.any(sf.cz > OPT_TOL):
            return LpOutcome(LpStatus.UNBOUNDED)
        y = sf.shift.copy()
        return LpOutcome(LpStatus.OPTIMAL, y, float(lp.objective @ y), (), 0)

    tab = _warm_tableau(sf, basis) if basis is not None else None
    rows_kept = np.arange(m)
    if tab is None:
        neg = sf.bz < 0
        n_art = int(neg.sum())
        N = nz + m + n_art
        T = np.zeros((m + 1, N + 1))
        T[:m, :nz] = sf.Az
        T[:m, nz:nz + m] = np.eye(m)
        T[:m, N] = sf.bz
        T[:m][neg] *= -1.0
        art_rows = np.flatnonzero(neg)
        start = [nz + r for r in range(m)]
        for a, r in enumerate(art_rows):
            T[r, nz + m + a] = 1.0
            start[r] = nz + m + a
        tab = _Tableau(T, start, rule)
        if n_art:
            cost1 = np.zeros(N)
            cost1[nz + m:] = -1.0
            tab.price(cost1)
            tab.run(np.ones(N, dtype=bool))
            if -tab.T[m, N] < -FEAS_TOL:
                return LpOutcome(LpStatus.INFEASIBLE, pivots=tab.pivots)
            # pivot zero-level artificials out; drop rows that are redundant
            drop = []
            for r in range(m):
                if tab.basis[r] >= nz + m:
                    cand = np.flatnonzero(np.abs(tab.T[r, :nz + m]) > PIVOT_TOL)
                    if cand.size:
                        tab.pivot(r, int(cand[0]))
                    else:
                        drop.append(r)
            keep = [r for r in range(m) if r not in drop]
            rows_kept = np.asarray(keep, dtype=int)
            T = np.vstack([tab.T[keep][:, list(range(nz + m)) + [N]], np.zeros((1, nz + m + 1))])
            phase1_pivots = tab.pivots
            tab = _Tableau(T, [tab.basis[r] for r in keep], rule)
            tab.pivots = phase1_pivots

    N = tab.N
    cost2 = np.zeros(N)
    cost2[:nz] = sf.cz
    tab.price(cost2)
    status = tab.run(np.ones(N, dtype=bool))
    if status is LpStatus.UNBOUNDED:
        return LpOutcome(LpStatus.UNBOUNDED, pivots=tab.pivots)

    z = np.zeros(N)
    z[tab.basis] = tab.T[:-1, N]
    # polish the basic solution against the original equality system
    E = np.hstack([sf.Az, np.eye(m)])[rows_kept]
    rhs = sf.bz[rows_kept]
    try:
        zb = np.linalg.solve(E[:, tab.basis], rhs)
        if np.all(zb >= -FEAS_TOL):
            z = np.zeros(N)
            z[tab.basis] = zb
    except np.linalg.LinAlgError:
        pass
    z = np.maximum(z, 0.0)
    y = sf.shift + sf.S @ z[:nz]
    _certify(lp, y)
    basis_out = tuple(tab.basis) if rows_kept.size == m else None
    return LpOutcome(LpStatus.OPTIMAL, y, float(lp.objective @ y), basis_out, tab.pivots)


def _certify(lp: LinearProgram, y: np.ndarray):
    viol = 0.0
    if lp.A.shape[0]:
        scale = np.maximum(1.0, np.abs(lp.b))
        viol = float(np.max((lp.A @ y - lp.b) / scale))
    for j, pair in enumerate(lp.bounds):
        lo = _bound(pair[0], -np.inf)
        hi = _bound(pair[1], np.inf)
        viol = max(viol, lo - y[j], y[j] - hi)
    if viol > 1e-6:
        raise LpNumericalError(f"simplex point violates constraints by {viol:.3g}")
    if viol > FEAS_TOL:
        logger.debug("LP point violates constraints by %.3g", viol)


def constraint_residual(lp: LinearProgram, y) -> float:
    """Largest violation of ``A y <= b`` and the variable bounds (0 if feasible)."""
    y = np.asarray(y, dtype=float)
    viol = 0.0
    if lp.A.shape[0]:
        viol = max(viol, float(np.max(lp.A @ y - lp.b)))
    for j, pair in enumerate(lp.bounds):
        viol = max(viol, _bound(pair[0], -np.inf) - y[j], y[j] - _bound(pair[1], np.inf))
    return viol
