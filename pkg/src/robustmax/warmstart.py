"""Random-walk lower bound used to seed the branch-and-bound incumbent."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import EmptyPolytopeError, InputError
from .functions import RobustObjective
from .geometry import Polytope, as_polytope

SECONDS_PER_DIM = 180.0


@dataclass
class WalkConfig:
    """Random-walk budget and step law.

    Exactly one of ``proposals`` (total across restarts) and ``budget``
    (wall-clock seconds) drives the walk; proposals win if both are set.
    """

    proposals: Optional[int] = None
    budget: Optional[float] = None
    restarts: int = 10
    step_scale: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise InputError("restarts must be >= 1")
        if self.proposals is not None and self.proposals < 0:
            raise InputError("proposals must be >= 0")
        if self.budget is not None and self.budget < 0:
            raise InputError("budget must be >= 0")
        if self.step_scale <= 0:
            raise InputError("step_scale must be positive")

    @classmethod
    def for_dimension(cls, n: int, **kw) -> "WalkConfig":
        """Time budget proportional to the dimension."""
        return cls(budget=SECONDS_PER_DIM * n, **kw)


@dataclass
class WalkResult:
    value: float
    point: np.ndarray
    proposals: int
    accepted: int
    wall_time: float


def initial_point(X: Polytope) -> np.ndarray:
    """Center of the box if feasible, else the Chebyshev center of X."""
    c = X.bounding_box.center if X.A.shape[0] else 0.5 * (X.lo + X.hi)
    return c if X.contains(c) else X.chebyshev_center


def random_walk(F: RobustObjective, X, cfg: WalkConfig = None) -> WalkResult:
    """Best robust value seen by a feasible random walk.

    Each restart begins at :func:`initial_point` and proposes
    ``x + r u`` with ``u`` uniform on the sphere and ``r`` uniform on
    ``(0, step_scale * diag]``; infeasible proposals are discarded.
    Restart ``j`` draws from its own stream, so a larger proposal budget
    only extends every restart's path.
    """
    cfg = cfg or WalkConfig(proposals=0)
    X = as_polytope(X)
    if X.is_empty:
        raise EmptyPolytopeError("feasible set is empty")
    start = time.perf_counter()
    x0 = initial_point(X)
    best_val, best_pt = F(x0), x0.copy()
    rmax = cfg.step_scale * max(float(np.linalg.norm(X.hi - X.lo)), 1e-12)
    streams = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    proposals = accepted = 0
    by_count = cfg.proposals is not None or cfg.budget is None
    total = (cfg.proposals or 0) if by_count else None
    for j, ss in enumerate(streams):
        rng = np.random.default_rng(ss)
        if by_count:
            quota = total // cfg.restarts + (1 if j < total % cfg.restarts else 0)
            deadline = None
        else:
            quota = None
            deadline = start + cfg.budget * (j + 1) / cfg.restarts
        x = x0.copy()
        done = 0
        while (quota is not None and done < quota) or (deadline is not None and time.perf_counter() < deadline):
            u = rng.normal(size=X.dim)
            u /= np.linalg.norm(u)
            r = rmax * (1.0 - rng.random())
            y = x + r * u
            done += 1
            if not X.contains(y):
                continue
            x = y
            accepted += 1
            val = F(x)
            if val > best_val:
                best_val, best_pt = val, x.copy()
        proposals += done
    return WalkResult(float(best_val), best_pt, proposals, accepted, time.perf_counter() - start)
