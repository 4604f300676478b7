"""Robust maximization of ``min_k f_k(x)`` over box-bounded polytopes.

``solve_gb2`` handles piecewise-linear convex candidates exactly;
``solve_g2b2`` handles general convex candidates through tangent-plane
refinement with a pluggable separation oracle.
"""

from .exceptions import (CapabilityError, EmptyPolytopeError, InputError, InstanceFormatError,
                         LpNumericalError, RobustMaxError)
from .functions import AffinePiece, ConvexQuadratic, PiecewiseLinearConvex, RobustObjective
from .g2b2 import solve_g2b2
from .gb2 import solve_gb2
from .geometry import Box, Halfspace, Polytope
from .instances import (Instance, generate_instance, generate_maximin_instance, load_fixture,
                        load_instance, save_instance)
from .lp import LinearProgram, LpStatus, solve_lp
from .oracles import make_oracle
from .results import SolveResult
from .warmstart import WalkConfig, random_walk

__all__ = [
    "AffinePiece", "Box", "CapabilityError", "ConvexQuadratic", "EmptyPolytopeError", "Halfspace",
    "InputError", "Instance", "InstanceFormatError", "LinearProgram", "LpNumericalError", "LpStatus",
    "PiecewiseLinearConvex", "Polytope", "RobustMaxError", "RobustObjective", "SolveResult",
    "WalkConfig", "generate_instance", "generate_maximin_instance", "load_fixture", "load_instance",
    "make_oracle", "random_walk", "save_instance", "solve_g2b2", "solve_gb2", "solve_lp",
]
