"""
quantum-coarse-grain - Emergent dynamics of coarse-grained quantum systems.

Conditional-state channel algebra, quantum Bayes inversion and Petz recovery,
a catalog of two-qubit coarse-graining scenarios, and a small embedded SDP
solver for diamond-norm and compatibility programs.

Example Usage:
    >>> from coarse_grain import get_scenario, make_generator, petz_emergent
    >>>
    >>> sc = get_scenario(2)
    >>> gen = make_generator("MM")
    >>> gamma = petz_emergent(sc.unitary(1.0), sc.cg, gen)
"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("quantum-coarse-grain")
except PackageNotFoundError:
    __version__ = "0.0.0.dev"

__license__ = "MIT"

from .core import *  # noqa: F401,F403
from .core import __all__ as _core_all
from .experiments import (
    BenchmarkRecord,
    ExperimentConfig,
    run_commutativity,
    run_cross_generator_matrix,
    run_sdp_tables,
    run_time_sweep,
    run_werner_sweep,
)
from .sdp import (
    SdpProblem,
    SdpSolution,
    SolverStatus,
    cg_robustness,
    closest_state_independent,
    compatibilize,
    diamond_norm,
    feasibility_emergent,
    gamma_threshold,
    solve,
)

__all__ = list(_core_all) + [
    "__version__",
    "BenchmarkRecord",
    "ExperimentConfig",
    "run_commutativity",
    "run_cross_generator_matrix",
    "run_sdp_tables",
    "run_time_sweep",
    "run_werner_sweep",
    "SdpProblem",
    "SdpSolution",
    "SolverStatus",
    "cg_robustness",
    "closest_state_independent",
    "compatibilize",
    "diamond_norm",
    "feasibility_emergent",
    "gamma_threshold",
    "solve",
]
