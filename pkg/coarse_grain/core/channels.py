"""
Quantum channels as Kraus families and as conditional states.

Conventions:
- Choi form (acausal): J = sum_ij |i><j| (x) E(|i><j|), conditioning (input)
  space first. The maximally entangled vector is unnormalized, so a CPTP map
  has Tr_B J = I_A.
- Jamiolkowski form (causal): the partial transpose of J on the conditioning
  factor. Stored on its own; the Choi partner is produced on demand.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np

from .errors import DimensionMismatchError, NotCPTPError, OutOfRangeError
from .linalg import (
    BipartiteDims,
    Subsystem,
    as_matrix,
    hermitian_eigh,
    partial_trace,
    partial_transpose,
)

logger = logging.getLogger(__name__)

CPTP_TOL = 1e-9
KRAUS_DROP_TOL = 1e-10


class ConditionalForm(str, Enum):
    """Tag distinguishing the two isomorphic encodings of a channel."""

    CHOI = "choi"
    JAMIOLKOWSKI = "jamiolkowski"


def _matrix_to_dict(m: np.ndarray) -> Dict[str, Any]:
    return {"real_part": m.real.tolist(), "imag_part": m.imag.tolist()}


def _matrix_from_dict(data: Dict[str, Any]) -> np.ndarray:
    real = np.asarray(data["real_part"], dtype=float)
    imag = np.asarray(data["imag_part"], dtype=float)
    return real + 1j * imag


@dataclass
class KrausChannel:
    """
    A linear map X -> sum_i K_i X K_i^dagger.

    Attributes:
        kraus: Kraus operators, each dim_out x dim_in.
        dim_in: Input dimension.
        dim_out: Output dimension.
        strict: When True, trace preservation is enforced at construction.
        metadata: Free-form annotations (support dimension of a recovery map, labels).
    """

    kraus: List[np.ndarray]
    dim_in: int = 0
    dim_out: int = 0
    strict: bool = True
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        ops = [as_matrix(k) for k in self.kraus]
        if not ops:
            raise NotCPTPError("a channel needs at least one Kraus operator")
        if not self.dim_in:
            self.dim_in = ops[0].shape[1]
        if not self.dim_out:
            self.dim_out = ops[0].shape[0]
        for k in ops:
            if k.shape != (self.dim_out, self.dim_in):
                raise DimensionMismatchError(
                    f"Kraus operator of shape {k.shape} in a "
                    f"{self.dim_in}->{self.dim_out} channel"
                )
        self.kraus = ops
        if self.strict:
            residual = self.trace_preservation_residual()
            if residual > CPTP_TOL:
                raise NotCPTPError(f"sum K^dagger K deviates from identity by {residual:.3e}")

    def trace_preservation_residual(self) -> float:
        total = sum(k.conj().T @ k for k in self.kraus)
        return float(np.linalg.norm(total - np.eye(self.dim_in)))

    @property
    def is_trace_preserving(self) -> bool:
        return self.trace_preservation_residual() <= CPTP_TOL

    def apply(self, rho) -> np.ndarray:
        m = as_matrix(rho)
        if m.shape != (self.dim_in, self.dim_in):
            raise DimensionMismatchError(
                f"input of shape {m.shape} for a channel on dimension {self.dim_in}"
            )
        return sum(k @ m @ k.conj().T for k in self.kraus)

    def __call__(self, rho) -> np.ndarray:
        return self.apply(rho)

    def then(self, outer: "KrausChannel") -> "KrausChannel":
        """Sequential composition: outer after self."""
        if outer.dim_in != self.dim_out:
            raise DimensionMismatchError(
                f"cannot feed a {self.dim_out}-dimensional output into a "
                f"{outer.dim_in}-dimensional input"
            )
        ops = [b @ a for b in outer.kraus for a in self.kraus]
        return KrausChannel(
            ops, self.dim_in, outer.dim_out, strict=self.strict and outer.strict
        )

    def choi(self) -> "ConditionalState":
        return kraus_to_choi(self)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dim_in": self.dim_in,
            "dim_out": self.dim_out,
            "kraus": [_matrix_to_dict(k) for k in self.kraus],
            "metadata": dict(self.metadata),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], strict: bool = True) -> "KrausChannel":
        return cls(
            [_matrix_from_dict(k) for k in data["kraus"]],
            int(data["dim_in"]),
            int(data["dim_out"]),
            strict=strict,
            metadata=dict(data.get("metadata", {})),
        )


@dataclass(frozen=True)
class ConditionalState:
    """An operator on a bipartite space, tagged with its channel encoding."""

    dims: BipartiteDims
    form: ConditionalForm
    matrix: np.ndarray

    def __post_init__(self):
        dims = BipartiteDims(*self.dims)
        m = as_matrix(self.matrix)
        if m.shape != (dims.total, dims.total):
            raise DimensionMismatchError(
                f"conditional state of shape {m.shape} does not match dims {tuple(dims)}"
            )
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "form", ConditionalForm(self.form))
        object.__setattr__(self, "matrix", m)

    def to_choi(self) -> "ConditionalState":
        if self.form is ConditionalForm.CHOI:
            return self
        return ConditionalState(
            self.dims,
            ConditionalForm.CHOI,
            partial_transpose(self.matrix, self.dims, Subsystem.A),
        )

    def to_jamiolkowski(self) -> "ConditionalState":
        if self.form is ConditionalForm.JAMIOLKOWSKI:
            return self
        return ConditionalState(
            self.dims,
            ConditionalForm.JAMIOLKOWSKI,
            partial_transpose(self.matrix, self.dims, Subsystem.A),
        )

    def __sub__(self, other: "ConditionalState") -> "ConditionalState":
        if tuple(other.dims) != tuple(self.dims):
            raise DimensionMismatchError("conditional states live on different spaces")
        return ConditionalState(
            self.dims, ConditionalForm.CHOI, self.to_choi().matrix - other.to_choi().matrix
        )

    def to_dict(self) -> Dict[str, Any]:
        payload = {"dims": list(self.dims), "form": self.form.value}
        payload.update(_matrix_to_dict(self.matrix))
        return payload

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ConditionalState":
        return cls(
            BipartiteDims(*data["dims"]),
            ConditionalForm(data["form"]),
            _matrix_from_dict(data),
        )


@dataclass(frozen=True)
class CptpReport:
    """Outcome of a CPTP check with its diagnostics."""

    valid: bool
    min_eigenvalue: float
    marginal_residual: float

    def __bool__(self) -> bool:
        return self.valid


def kraus_to_choi(ch: KrausChannel) -> ConditionalState:
    """(id (x) ch) applied to the unnormalized maximally entangled projector."""
    vecs = np.array([k.T.reshape(-1) for k in ch.kraus])
    matrix = vecs.T @ vecs.conj()
    return ConditionalState(BipartiteDims(ch.dim_in, ch.dim_out), ConditionalForm.CHOI, matrix)


def _require_form(cs: ConditionalState, form: ConditionalForm) -> None:
    if cs.form is not form:
        raise DimensionMismatchError(f"expected a {form.value} state, got {cs.form.value}")


def apply_choi_matrix(choi, dim_in: int, dim_out: int, sigma) -> np.ndarray:
    """Tr_A[J (sigma^T (x) I_B)] on raw arrays."""
    j4 = as_matrix(choi).reshape(dim_in, dim_out, dim_in, dim_out)
    return np.einsum("ibjc,ij->bc", j4, as_matrix(sigma))


def apply_via_choi(cs: ConditionalState, sigma) -> np.ndarray:
    """Action of a channel from its Choi state."""
    _require_form(cs, ConditionalForm.CHOI)
    s = as_matrix(sigma)
    if s.shape != (cs.dims.dim_a, cs.dims.dim_a):
        raise DimensionMismatchError(f"input of shape {s.shape} for dims {tuple(cs.dims)}")
    return apply_choi_matrix(cs.matrix, cs.dims.dim_a, cs.dims.dim_b, s)


def apply_via_jam(cs: ConditionalState, rho) -> np.ndarray:
    """Belief propagation Tr_A[rho_{B|A} (rho_A (x) I_B)]."""
    _require_form(cs, ConditionalForm.JAMIOLKOWSKI)
    r = as_matrix(rho)
    da, db = cs.dims
    if r.shape != (da, da):
        raise DimensionMismatchError(f"input of shape {r.shape} for dims {tuple(cs.dims)}")
    m4 = cs.matrix.reshape(da, db, da, db)
    return np.einsum("ibjc,ji->bc", m4, r)


def choi_to_kraus(
    cs: ConditionalState,
    tol: float = CPTP_TOL,
    require_cptp: bool = True,
) -> KrausChannel:
    """Kraus family from the eigendecomposition of a Choi state."""
    choi = cs.to_choi()
    if require_cptp:
        report = is_cptp(choi, tol)
        if not report.valid:
            raise NotCPTPError(
                f"Choi state is not CPTP (min eigenvalue {report.min_eigenvalue:.3e}, "
                f"marginal residual {report.marginal_residual:.3e})"
            )
    da, db = choi.dims
    vals, vecs = hermitian_eigh(choi.matrix)
    ops = [
        np.sqrt(val) * vecs[:, idx].reshape(da, db).T
        for idx, val in enumerate(vals)
        if val > KRAUS_DROP_TOL
    ]
    if not ops:
        raise NotCPTPError("Choi state has no eigenvalue above the drop threshold")
    return KrausChannel(ops, da, db, strict=require_cptp)


def is_cptp(cs: ConditionalState, tol: float = CPTP_TOL) -> CptpReport:
    """Choi positivity and unit marginal on the conditioning factor."""
    choi = cs.to_choi()
    vals, _ = hermitian_eigh(choi.matrix)
    min_eig = float(vals[0])
    marginal = partial_trace(choi.matrix, choi.dims, Subsystem.A)
    residual = float(np.linalg.norm(marginal - np.eye(choi.dims.dim_a)))
    return CptpReport(min_eig >= -tol and residual <= tol, min_eig, residual)


def compose_choi_matrices(outer, inner, dim_a: int, dim_b: int, dim_c: int) -> np.ndarray:
    """Choi matrix of (outer after inner) for raw arrays, inner: A->B, outer: B->C."""
    j_ba = as_matrix(inner).reshape(dim_a, dim_b, dim_a, dim_b)
    j_cb = as_matrix(outer).reshape(dim_b, dim_c, dim_b, dim_c)
    out = np.einsum("xbyk,bckd->xcyd", j_ba, j_cb)
    return out.reshape(dim_a * dim_c, dim_a * dim_c)


def compose_via_choi(cs_cb: ConditionalState, cs_ba: ConditionalState) -> ConditionalState:
    """rho_{C|A} = Tr_B[(I_A (x) rho_{C|B})(rho_{B|A}^{T_B} (x) I_C)]."""
    outer = cs_cb.to_choi()
    inner = cs_ba.to_choi()
    if outer.dims.dim_a != inner.dims.dim_b:
        raise DimensionMismatchError(
            f"inner output dimension {inner.dims.dim_b} does not match outer input "
            f"dimension {outer.dims.dim_a}"
        )
    da, db = inner.dims
    dc = outer.dims.dim_b
    matrix = compose_choi_matrices(outer.matrix, inner.matrix, da, db, dc)
    return ConditionalState(BipartiteDims(da, dc), ConditionalForm.CHOI, matrix)


def adjoint_channel(ch: KrausChannel) -> KrausChannel:
    """X -> sum_i K_i^dagger X K_i; unital when ch is trace preserving."""
    return KrausChannel(
        [k.conj().T for k in ch.kraus],
        ch.dim_out,
        ch.dim_in,
        strict=False,
        metadata={"adjoint": True},
    )


def unitary_channel(u, label: Optional[str] = None) -> KrausChannel:
    meta = {"label": label} if label else {}
    return KrausChannel([as_matrix(u)], strict=True, metadata=meta)


def identity_channel(dim: int) -> KrausChannel:
    return unitary_channel(np.eye(dim), label="identity")


def depolarizing_channel(p: float, dim: int = 2) -> KrausChannel:
    """rho -> (1 - p) rho + p Tr(rho) I/dim."""
    if not 0.0 <= p <= 1.0:
        raise OutOfRangeError(f"depolarizing probability must be in [0, 1], got {p}")
    ops = [np.sqrt(1.0 - p) * np.eye(dim, dtype=complex)] if p < 1.0 else []
    for i in range(dim):
        for j in range(dim):
            op = np.zeros((dim, dim), dtype=complex)
            op[j, i] = np.sqrt(p / dim)
            ops.append(op)
    return KrausChannel(ops, dim, dim, metadata={"label": f"depolarizing({p})"})


def choi_difference(a: KrausChannel, b: KrausChannel) -> ConditionalState:
    """Choi operator of a - b for two channels on the same spaces."""
    return kraus_to_choi(a) - kraus_to_choi(b)

