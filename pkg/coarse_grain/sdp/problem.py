"""
Standard-form semidefinite programs over Hermitian blocks.

A problem declares named variables (Hermitian PSD blocks, nonnegative or free
real scalars), linear equality constraints whose terms are linear maps of single
variables, and a linear objective. compile() turns this into real data
(A, b, c) in hvec coordinates for the solver.
"""

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.errors import SdpDefinitionError
from ..core.linalg import as_matrix, is_hermitian
from .embedding import hermitian_basis, hvec

logger = logging.getLogger(__name__)

Value = Union[np.ndarray, float]
LinearOp = Callable[[Any], Any]
Term = Tuple[str, LinearOp]


class VariableKind(str, Enum):
    HERMITIAN = "hermitian"
    NONNEG = "nonneg"
    FREE = "free"


class SolverStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    MAX_ITERATIONS = "MaxIterations"
    NUMERICAL_FAILURE = "NumericalFailure"


class Sense(str, Enum):
    MIN = "min"
    MAX = "max"


@dataclass(frozen=True)
class Variable:
    name: str
    kind: VariableKind
    dim: int = 1

    @property
    def size(self) -> int:
        """Number of real coordinates."""
        return self.dim * self.dim if self.kind is VariableKind.HERMITIAN else 1


@dataclass
class Constraint:
    """sum over terms of op(variable) == rhs."""

    name: str
    terms: List[Term]
    rhs: Value

    @property
    def is_matrix(self) -> bool:
        return isinstance(self.rhs, np.ndarray)

    @property
    def rows(self) -> int:
        return self.rhs.shape[0] ** 2 if self.is_matrix else 1

    def target_vector(self) -> np.ndarray:
        if self.is_matrix:
            return hvec(self.rhs)
        return np.array([float(np.real(self.rhs))])


def _image_vector(value, constraint: Constraint) -> np.ndarray:
    if constraint.is_matrix:
        m = as_matrix(value)
        if m.shape != constraint.rhs.shape:
            raise SdpDefinitionError(
                f"constraint {constraint.name}: term image of shape {m.shape}, "
                f"target of shape {constraint.rhs.shape}"
            )
        return hvec(m)
    return np.array([float(np.real(value))])


@dataclass
class CompiledProblem:
    """Real data of a problem: minimize c.x subject to A x = b, x in the cones."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    columns: Dict[str, slice]
    rows: Dict[str, slice]
    sign: float


@dataclass
class SolutionResiduals:
    primal: float = float("inf")
    dual: float = float("inf")
    gap: float = float("inf")

    def to_dict(self) -> Dict[str, float]:
        return {"primal": self.primal, "dual": self.dual, "gap": self.gap}


@dataclass
class SdpSolution:
    """Solver output; assignments hold Hermitian matrices or floats by variable name."""

    status: SolverStatus
    objective_value: float = float("nan")
    assignments: Dict[str, Value] = field(default_factory=dict)
    residuals: SolutionResiduals = field(default_factory=SolutionResiduals)
    iterations: int = 0
    certificate: Optional[Dict[str, Any]] = None
    info: Dict[str, Any] = field(default_factory=dict)

    @property
    def is_optimal(self) -> bool:
        return self.status is SolverStatus.OPTIMAL

    @property
    def is_infeasible(self) -> bool:
        return self.status is SolverStatus.INFEASIBLE

    def near_optimal(self, feas_tol: float, gap_tol: float, slack: float = 1e3) -> bool:
        """Optimal, or stopped with residuals within slack times the tolerances."""
        if self.is_optimal:
            return True
        return (
            self.status is SolverStatus.MAX_ITERATIONS
            and self.residuals.primal <= slack * feas_tol
            and self.residuals.dual <= slack * feas_tol
            and self.residuals.gap <= slack * gap_tol
        )

    def to_dict(self) -> Dict[str, Any]:
        def encode(value):
            if isinstance(value, np.ndarray):
                return {"real_part": value.real.tolist(), "imag_part": value.imag.tolist()}
            return float(value)

        certificate = None
        if self.certificate is not None:
            certificate = {
                k: (v.tolist() if isinstance(v, np.ndarray) else v)
                for k, v in self.certificate.items()
            }
        return {
            "status": self.status.value,
            "objective_value": self.objective_value,
            "iterations": self.iterations,
            "residuals": self.residuals.to_dict(),
            "assignments": {k: encode(v) for k, v in self.assignments.items()},
            "certificate": certificate,
            "info": self.info,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=str)


class SdpProblem:
    """
    Builder for a semidefinite program.

    Example:
        >>> p = SdpProblem("max-eig")
        >>> p.add_scalar("t")
        >>> p.add_hermitian("S", 2)
        >>> p.add_constraint("shift", [("t", lambda x: x * np.eye(2)), ("S", lambda s: -s)],
        ...                  np.diag([1.0, 2.0]).astype(complex))
        >>> p.set_objective({"t": 1.0})
    """

    def __init__(self, name: str = "sdp"):
        self.name = name
        self.variables: Dict[str, Variable] = {}
        self.constraints: List[Constraint] = []
        self.objective: Dict[str, Value] = {}
        self.sense = Sense.MIN

    def _declare(self, var: Variable) -> str:
        if var.name in self.variables:
            raise SdpDefinitionError(f"variable {var.name} declared twice")
        if var.dim < 1:
            raise SdpDefinitionError(f"variable {var.name} needs a positive dimension")
        self.variables[var.name] = var
        return var.name

    def add_hermitian(self, name: str, dim: int) -> str:
        """Declare a d x d Hermitian PSD block."""
        return self._declare(Variable(name, VariableKind.HERMITIAN, dim))

    def add_scalar(self, name: str, nonneg: bool = True) -> str:
        kind = VariableKind.NONNEG if nonneg else VariableKind.FREE
        return self._declare(Variable(name, kind))

    def add_constraint(self, name: str, terms: Sequence[Term], rhs) -> None:
        """Add sum_k op_k(var_k) == rhs; rhs is a Hermitian matrix or a scalar."""
        for var_name, op in terms:
            if var_name not in self.variables:
                raise SdpDefinitionError(
                    f"constraint {name} references unknown variable {var_name}"
                )
            if not callable(op):
                raise SdpDefinitionError(f"constraint {name}: term for {var_name} is not callable")
        if np.ndim(rhs) == 0:
            target: Value = float(np.real(rhs))
        else:
            target = as_matrix(rhs)
            if target.shape[0] != target.shape[1] or not is_hermitian(target, 1e-12):
                raise SdpDefinitionError(f"constraint {name}: target is not a Hermitian matrix")
        self.constraints.append(Constraint(name, list(terms), target))

    def set_objective(self, coefficients: Dict[str, Value], sense: str = "min") -> None:
        """Linear objective sum Re Tr(C_v v) over blocks plus c_v v over scalars."""
        for var_name, coeff in coefficients.items():
            if var_name not in self.variables:
                raise SdpDefinitionError(f"objective references unknown variable {var_name}")
            var = self.variables[var_name]
            if var.kind is VariableKind.HERMITIAN:
                if as_matrix(coeff).shape != (var.dim, var.dim):
                    raise SdpDefinitionError(
                        f"objective coefficient for {var_name} has wrong shape"
                    )
        self.objective = dict(coefficients)
        self.sense = Sense(sense)

    def compile(self) -> CompiledProblem:
        """Real matrix data in hvec coordinates, objective always minimized."""
        columns: Dict[str, slice] = {}
        offset = 0
        for name, var in self.variables.items():
            columns[name] = slice(offset, offset + var.size)
            offset += var.size
        rows: Dict[str, slice] = {}
        row = 0
        for con in self.constraints:
            rows[con.name] = slice(row, row + con.rows)
            row += con.rows

        A = np.zeros((row, offset))
        b = np.zeros(row)
        for con in self.constraints:
            rs = rows[con.name]
            b[rs] = con.target_vector()
            for var_name, op in con.terms:
                var = self.variables[var_name]
                cols = columns[var_name]
                if var.kind is VariableKind.HERMITIAN:
                    images = [_image_vector(op(e), con) for e in hermitian_basis(var.dim)]
                    A[rs, cols] += np.column_stack(images)
                else:
                    A[rs, cols] += _image_vector(op(1.0), con)[:, None]

        sign = 1.0 if self.sense is Sense.MIN else -1.0
        c = np.zeros(offset)
        for var_name, coeff in self.objective.items():
            var = self.variables[var_name]
            if var.kind is VariableKind.HERMITIAN:
                c[columns[var_name]] = sign * hvec(as_matrix(coeff))
            else:
                c[columns[var_name]] = sign * float(np.real(coeff))
        return CompiledProblem(A, b, c, columns, rows, sign)

    def constraint_violations(self, assignments: Dict[str, Value]) -> Dict[str, Value]:
        """LHS minus RHS per constraint, evaluated through the term maps."""
        out: Dict[str, Value] = {}
        for con in self.constraints:
            total: Any = 0.0
            for var_name, op in con.terms:
                total = total + op(assignments[var_name])
            out[con.name] = total - con.rhs
        return out

    def primal_residual(self, assignments: Dict[str, Value]) -> float:
        """Euclidean norm of all equality violations relative to 1 + |b|."""
        violations = self.constraint_violations(assignments)
        sq = sum(float(np.sum(np.abs(v) ** 2)) for v in violations.values())
        b_sq = sum(float(np.sum(np.abs(con.rhs) ** 2)) for con in self.constraints)
        return float(np.sqrt(sq) / (1.0 + np.sqrt(b_sq)))

    def objective_value(self, assignments: Dict[str, Value]) -> float:
        total = 0.0
        for var_name, coeff in self.objective.items():
            value = assignments[var_name]
            if isinstance(value, np.ndarray):
                total += float(np.real(np.trace(as_matrix(coeff) @ value)))
            else:
                total += float(np.real(coeff)) * float(value)
        return total

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "sense": self.sense.value,
            "variables": [
                {"name": v.name, "kind": v.kind.value, "dim": v.dim}
                for v in self.variables.values()
            ],
            "constraints": [
                {
                    "name": con.name,
                    "variables": [var_name for var_name, _ in con.terms],
                    "rows": con.rows,
                }
                for con in self.constraints
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)
