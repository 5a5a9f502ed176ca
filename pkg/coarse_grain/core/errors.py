"""
Exception hierarchy for quantum-coarse-grain.

Every error raised by the library derives from CoarseGrainError, which is
itself a ValueError so that callers validating inputs can catch either.
"""

from typing import Any, Optional


class CoarseGrainError(ValueError):
    """Base class for all library errors."""


class DimensionMismatchError(CoarseGrainError):
    """Operand shapes do not agree with the declared dimensions."""


class NotHermitianError(CoarseGrainError):
    """A matrix required to be Hermitian is not."""


class NotPSDError(CoarseGrainError):
    """A matrix required to be positive semidefinite has a negative eigenvalue."""


class ZeroMatrixError(CoarseGrainError):
    """Every eigenvalue of a matrix fell below the rank threshold."""


class InvalidStateError(CoarseGrainError):
    """A density operator is not PSD or does not have unit trace."""


class InvalidPrepError(InvalidStateError):
    """A preparation in a measure-and-prepare or ensemble instrument is not a state."""


class POVMIncompleteError(CoarseGrainError):
    """POVM elements are not PSD or do not sum to the identity."""


class NotCPTPError(CoarseGrainError):
    """A map is not completely positive and trace preserving."""


class ZeroMarginalError(CoarseGrainError):
    """A marginal used as a Bayes denominator has no support on some outcome."""


class DegenerateGeneratorError(CoarseGrainError):
    """The coarse-grained image of a generator has rank zero."""


class OutOfRangeError(CoarseGrainError):
    """A scalar parameter lies outside its admissible interval."""


class UnsupportedScenarioError(CoarseGrainError):
    """A scenario id outside the catalog, or an operation the scenario lacks."""


class BaseIncompatibleError(CoarseGrainError):
    """The noiseless unitary already admits no emergent channel."""


class SdpDefinitionError(CoarseGrainError):
    """An SdpProblem references unknown variables or has malformed terms."""


class ProgramStatusError(CoarseGrainError):
    """A program wrapper could not return a value; carries the solver output."""

    def __init__(self, message: str, solution: Optional[Any] = None):
        super().__init__(message)
        self.solution = solution


class InfeasibleError(ProgramStatusError):
    """The program is infeasible. For feasibility programs this is a valid answer."""


class SolverFailureError(ProgramStatusError):
    """The solver stopped at MaxIterations or NumericalFailure."""
