"""
Dense semidefinite programming over Hermitian blocks.

SdpProblem collects variables and linear equality constraints, solve() runs
presolve and a primal-dual interior-point method, and programs holds the
coarse-graining programs built on top.
"""

from .embedding import complex_to_real, real_to_complex
from .problem import SdpProblem, SdpSolution, SolverStatus
from .programs import (
    cg_robustness,
    closest_state_independent,
    compatibilize,
    diamond_norm,
    feasibility_emergent,
    gamma_threshold,
)
from .solver import InteriorPointSolver, solve

__all__ = [
    "complex_to_real",
    "real_to_complex",
    "SdpProblem",
    "SdpSolution",
    "SolverStatus",
    "InteriorPointSolver",
    "solve",
    "cg_robustness",
    "closest_state_independent",
    "compatibilize",
    "diamond_norm",
    "feasibility_emergent",
    "gamma_threshold",
]
