"""Solver result container and optional iteration trace."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .geometry import Polytope

SOLVED = "solved"
TIME_LIMIT = "time_limit"
ITERATION_LIMIT = "iteration_limit"
UNCERTIFIED = "uncertified"


@dataclass
class NodeRecord:
    id: int
    parent: Optional[int]
    polytope: Polytope
    upper: float
    lower: float
    point: Optional[np.ndarray]
    iteration: int
    label: Optional[tuple] = None


@dataclass
class SolveTrace:
    """Everything needed to re-check bound validity after a run.

    ``frontier[t]`` lists the node ids that partition the feasible set at
    the end of iteration ``t``: the open leaves plus every node fathomed so
    far (pruned, exact, or all-accurate).
    """

    nodes: Dict[int, NodeRecord] = field(default_factory=dict)
    lower: List[float] = field(default_factory=list)
    upper: List[float] = field(default_factory=list)
    frontier: List[List[int]] = field(default_factory=list)
    pruned: List[int] = field(default_factory=list)
    cuts: List[tuple] = field(default_factory=list)

    def add_node(self, rec: NodeRecord):
        self.nodes[rec.id] = rec

    def close_iteration(self, lower: float, upper: float, open_ids):
        self.lower.append(float(lower))
        self.upper.append(float(upper))
        self.frontier.append(sorted(set(open_ids) | set(self.pruned)))

    def frontier_polytopes(self, t: int = -1) -> List[Polytope]:
        return [self.nodes[i].polytope for i in self.frontier[t]]


@dataclass
class SolveResult:
    value: float
    point: Optional[np.ndarray]
    lower: float
    upper: float
    status: str
    certified: bool
    iterations: int = 0
    nodes: int = 0
    wall_time: float = 0.0
    separation_time: float = 0.0
    tangent_planes: Optional[List[int]] = None
    trace: Optional[SolveTrace] = field(default=None, repr=False)

    @property
    def gap(self) -> Optional[float]:
        """Certified absolute gap ``U - L``, or None when U is heuristic."""
        if not self.certified:
            return None
        return max(self.upper - self.lower, 0.0)

    @property
    def gap_pct(self) -> Optional[float]:
        if not self.certified:
            return None
        return self.gap / max(abs(self.upper), 1.0) * 100.0

    @property
    def solved(self) -> bool:
        return self.status == SOLVED
