"""
Core module for quantum-coarse-grain.

Provides configuration, errors, linear algebra, channels, Bayes inversion,
the scenario catalog and the evaluation pool.
"""

from .bayes import (
    Direction,
    Generator,
    bayes_invert,
    classical_bayes,
    classical_emergent,
    commutation_residual,
    hybrid_measurement_emergent,
    hybrid_preparation_emergent,
    joint_state,
    mp_emergent,
    petz_emergent,
    petz_map,
    star_product,
)
from .bloch import LabSpace, bloch_to_rho, rho_to_bloch
from .channels import (
    ConditionalForm,
    ConditionalState,
    KrausChannel,
    apply_via_choi,
    apply_via_jam,
    choi_to_kraus,
    compose_via_choi,
    is_cptp,
    kraus_to_choi,
)
from .config import CoarseGrainConfig, Profile, get_config, set_config
from .errors import CoarseGrainError, InfeasibleError, SolverFailureError
from .exporters import CompositeExporter
from .interfaces import RecordExporter, RecordSampler
from .linalg import BipartiteDims, Subsystem, partial_trace, partial_transpose, tensor_product
from .queue import EvaluationPool
from .scenarios import Scenario, analytic_emergent, get_scenario, make_generator

__all__ = [
    # Configuration
    "CoarseGrainConfig",
    "Profile",
    "get_config",
    "set_config",
    # Errors
    "CoarseGrainError",
    "InfeasibleError",
    "SolverFailureError",
    # Linear algebra
    "BipartiteDims",
    "Subsystem",
    "partial_trace",
    "partial_transpose",
    "tensor_product",
    "LabSpace",
    "bloch_to_rho",
    "rho_to_bloch",
    # Channels
    "ConditionalForm",
    "ConditionalState",
    "KrausChannel",
    "apply_via_choi",
    "apply_via_jam",
    "choi_to_kraus",
    "compose_via_choi",
    "is_cptp",
    "kraus_to_choi",
    # Bayes
    "Direction",
    "Generator",
    "bayes_invert",
    "classical_bayes",
    "classical_emergent",
    "commutation_residual",
    "hybrid_measurement_emergent",
    "hybrid_preparation_emergent",
    "joint_state",
    "mp_emergent",
    "petz_emergent",
    "petz_map",
    "star_product",
    # Scenarios
    "Scenario",
    "analytic_emergent",
    "get_scenario",
    "make_generator",
    # Harness plumbing
    "CompositeExporter",
    "EvaluationPool",
    "RecordExporter",
    "RecordSampler",
]
