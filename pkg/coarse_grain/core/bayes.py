"""
Star product, quantum Bayes inversion, Petz recovery and emergent dynamics.

Stochastic matrices are column-stochastic: P[out, in] = P(out | in).
Measure-and-prepare data are (povm, preps) pairs of equal length.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from .channels import (
    ConditionalForm,
    ConditionalState,
    KrausChannel,
    adjoint_channel,
    apply_via_jam,
    choi_to_kraus,
    compose_via_choi,
    kraus_to_choi,
)
from .errors import (
    DegenerateGeneratorError,
    DimensionMismatchError,
    InvalidPrepError,
    InvalidStateError,
    NotPSDError,
    POVMIncompleteError,
    ZeroMarginalError,
    ZeroMatrixError,
)
from .linalg import (
    PSD_TOL,
    RANK_TOL,
    BipartiteDims,
    as_matrix,
    is_hermitian,
    matrix_sqrt_psd,
    min_eigenvalue,
    pinv_sqrt_psd,
    support_rank,
    swap_factors,
    trace_norm,
)

logger = logging.getLogger(__name__)

STOCHASTIC_TOL = 1e-10


class Direction(str, Enum):
    """Orientation of a hybrid emergent map."""

    LR = "LR"
    RL = "RL"


@dataclass(frozen=True)
class Generator:
    """Prior state on the microscopic input region."""

    rho: np.ndarray
    label: str = "custom"
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        m = as_matrix(self.rho)
        if not is_hermitian(m, tol=1e-10):
            raise InvalidStateError(f"generator {self.label} is not Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-10:
            raise InvalidStateError(
                f"generator {self.label} has trace {np.trace(m).real:.12f}, expected 1"
            )
        if min_eigenvalue(m) < -PSD_TOL:
            raise NotPSDError(f"generator {self.label} is not positive semidefinite")
        object.__setattr__(self, "rho", (m + m.conj().T) / 2)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def rank(self) -> int:
        return support_rank(self.rho)

    @property
    def full_rank(self) -> bool:
        return self.rank == self.dim


def star_product(m_ab, n_a, dims: BipartiteDims) -> np.ndarray:
    """(N_A^{1/2} (x) I_B) M_AB (N_A^{1/2} (x) I_B)."""
    m = as_matrix(m_ab)
    n = as_matrix(n_a)
    if m.shape != (dims.total, dims.total) or n.shape != (dims.dim_a, dims.dim_a):
        raise DimensionMismatchError(
            f"star product of {m.shape} with weight {n.shape} on dims {tuple(dims)}"
        )
    root = np.kron(matrix_sqrt_psd(n), np.eye(dims.dim_b))
    return root @ m @ root


def joint_state(cs: ConditionalState, rho_a) -> np.ndarray:
    """rho_{B|A} * rho_A, the joint operator of a conditional state and its prior."""
    return star_product(cs.matrix, rho_a, cs.dims)


def bayes_invert(
    cs_ba: ConditionalState, rho_a, rank_tol: float = RANK_TOL
) -> ConditionalState:
    """
    Quantum Bayes inversion in the Jamiolkowski picture.

    Returns sigma_{A|B} = sigma_{B|A} * (rho_A (x) rho_B^{-1}), with the inverse
    taken on the support of rho_B, as a Jamiolkowski state with B as the
    conditioning factor. In the fully quantum case the result need not be
    a valid conditional state.
    """
    jam = cs_ba.to_jamiolkowski()
    da, db = jam.dims
    prior = as_matrix(rho_a)
    if prior.shape != (da, da):
        raise DimensionMismatchError(f"prior of shape {prior.shape} for dims {tuple(jam.dims)}")
    rho_b = apply_via_jam(jam, prior)
    try:
        inv_root_b = pinv_sqrt_psd(rho_b, rank_tol)
    except ZeroMatrixError as e:
        raise ZeroMarginalError(f"propagated marginal has no support: {e}")
    weight_root = np.kron(matrix_sqrt_psd(prior), inv_root_b)
    weighted = weight_root @ jam.matrix @ weight_root
    return ConditionalState(
        jam.dims.swapped(),
        ConditionalForm.JAMIOLKOWSKI,
        swap_factors(weighted, jam.dims),
    )


def petz_map(cg: KrausChannel, rho_a, rank_tol: float = RANK_TOL) -> KrausChannel:
    """
    Petz recovery channel of cg with respect to rho_a.

    Kraus family {rho_A^{1/2} K_i^dagger rho_C^{-1/2}}. When rho_C is rank
    deficient the map is trace preserving only on its support, recorded in
    metadata["full_support"].
    """
    prior = as_matrix(rho_a)
    rho_c = cg.apply(prior)
    rank = support_rank(rho_c, rank_tol)
    if rank == 0:
        raise DegenerateGeneratorError("coarse-grained generator has rank zero")
    root_a = matrix_sqrt_psd(prior)
    inv_root_c = pinv_sqrt_psd(rho_c, rank_tol)
    ops = [root_a @ k for k in adjoint_channel(cg).kraus]
    ops = [op @ inv_root_c for op in ops]
    full = rank == cg.dim_out
    if not full:
        logger.debug("Petz map built on a %d-dimensional support of %d", rank, cg.dim_out)
    return KrausChannel(
        ops,
        cg.dim_out,
        cg.dim_in,
        strict=full,
        metadata={"support_dim": rank, "full_support": full},
    )


def _canonical(ch: KrausChannel) -> KrausChannel:
    """Minimal Kraus family of ch, keeping its metadata."""
    out = choi_to_kraus(kraus_to_choi(ch), require_cptp=ch.strict)
    out.metadata = dict(ch.metadata)
    return out


def petz_emergent(
    u: KrausChannel, cg: KrausChannel, gen: Generator, rank_tol: float = RANK_TOL
) -> KrausChannel:
    """Gamma = cg o u o R with R the Petz recovery of cg at the generator."""
    recovery = petz_map(cg, gen.rho, rank_tol)
    gamma = recovery.then(u).then(cg)
    gamma.metadata = {
        "generator": gen.label,
        "support_dim": recovery.metadata["support_dim"],
        "full_support": recovery.metadata["full_support"],
    }
    return _canonical(gamma)


def commutation_residual(gamma: KrausChannel, cg: KrausChannel, u: KrausChannel, rho) -> float:
    """|| Gamma(cg(rho)) - cg(u(rho)) ||_1."""
    return trace_norm(gamma.apply(cg.apply(rho)) - cg.apply(u.apply(rho)))


def _check_stochastic(p, name: str) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"{name} must be a matrix, got shape {arr.shape}")
    if np.any(arr < -STOCHASTIC_TOL) or np.max(np.abs(arr.sum(axis=0) - 1.0)) > 1e-9:
        raise InvalidStateError(f"{name} is not column stochastic")
    return arr


def _check_distribution(p, name: str) -> np.ndarray:
    arr = np.asarray(p, dtype=float).reshape(-1)
    if np.any(arr < -STOCHASTIC_TOL) or abs(arr.sum() - 1.0) > 1e-9:
        raise InvalidStateError(f"{name} is not a probability vector")
    return arr


def classical_bayes(p_x_given_r, prior_r) -> np.ndarray:
    """P(R|X) from P(X|R) and P(R); raises ZeroMarginal when some P(x) = 0."""
    likelihood = _check_stochastic(p_x_given_r, "P(X|R)")
    prior = _check_distribution(prior_r, "prior")
    marginal = likelihood @ prior
    if np.any(marginal <= STOCHASTIC_TOL):
        raise ZeroMarginalError(f"outcome with zero marginal probability: P(X) = {marginal}")
    return (likelihood * prior[None, :]).T / marginal[None, :]


def classical_emergent(p_s_given_r, p_x_given_r, p_y_given_s, prior_r) -> np.ndarray:
    """P(Y|X) = sum_{r,s} P(Y|s) P(s|r) P(r|X)."""
    p_s_r = _check_stochastic(p_s_given_r, "P(S|R)")
    p_y_s = _check_stochastic(p_y_given_s, "P(Y|S)")
    p_r_x = classical_bayes(p_x_given_r, prior_r)
    return p_y_s @ p_s_r @ p_r_x


def stochastic_to_state(p) -> ConditionalState:
    """Diagonal Jamiolkowski state sum_{x,y} P(y|x) |x><x| (x) |y><y|."""
    arr = np.asarray(p, dtype=float)
    n_out, n_in = arr.shape
    return ConditionalState(
        BipartiteDims(n_in, n_out),
        ConditionalForm.JAMIOLKOWSKI,
        np.diag(arr.T.reshape(-1)).astype(complex),
    )


def state_to_stochastic(cs: ConditionalState) -> np.ndarray:
    """Inverse of stochastic_to_state; reads the diagonal."""
    n_in, n_out = cs.dims
    return np.real(np.diag(cs.matrix)).reshape(n_in, n_out).T


def _check_povm(povm: Sequence, tol: float = 1e-10) -> List[np.ndarray]:
    elements = [as_matrix(e) for e in povm]
    if not elements:
        raise POVMIncompleteError("POVM is empty")
    dim = elements[0].shape[0]
    for e in elements:
        if e.shape != (dim, dim) or not is_hermitian(e, tol) or min_eigenvalue(e) < -tol:
            raise POVMIncompleteError("POVM element is not a PSD matrix of the common dimension")
    deficit = float(np.linalg.norm(sum(elements) - np.eye(dim)))
    if deficit > tol:
        raise POVMIncompleteError(f"POVM elements sum to identity only within {deficit:.3e}")
    return elements


def _check_preps(preps: Sequence, tol: float = 1e-10) -> List[np.ndarray]:
    states = [as_matrix(p) for p in preps]
    if not states:
        raise InvalidPrepError("no preparations given")
    dim = states[0].shape[0]
    for p in states:
        if (
            p.shape != (dim, dim)
            or not is_hermitian(p, tol)
            or abs(np.trace(p).real - 1.0) > tol
            or min_eigenvalue(p) < -tol
        ):
            raise InvalidPrepError("preparation is not a density matrix of the common dimension")
    return states


def measure_prepare_state(povm: Sequence, preps: Sequence) -> ConditionalState:
    """Jamiolkowski state sum_x E_x (x) rho_x of a measure-and-prepare channel."""
    elements = _check_povm(povm)
    states = _check_preps(preps)
    if len(elements) != len(states):
        raise DimensionMismatchError(
            f"{len(elements)} POVM elements but {len(states)} preparations"
        )
    matrix = sum(np.kron(e, p) for e, p in zip(elements, states))
    return ConditionalState(
        BipartiteDims(elements[0].shape[0], states[0].shape[0]),
        ConditionalForm.JAMIOLKOWSKI,
        matrix,
    )


def measure_prepare_channel(povm: Sequence, preps: Sequence) -> KrausChannel:
    """Kraus form of X -> sum_x Tr(E_x X) rho_x."""
    return choi_to_kraus(measure_prepare_state(povm, preps))


def mp_emergent(
    mp_ca: Tuple[Sequence, Sequence],
    mp_db: Tuple[Sequence, Sequence],
    u: KrausChannel,
    gen: Generator,
) -> KrausChannel:
    """Gamma = E_{D|B} o U o E_{A|C} with E_{A|C} the Bayes inverse of E_{C|A}."""
    left = measure_prepare_state(*mp_ca)
    right = measure_prepare_state(*mp_db)
    inverse = bayes_invert(left, gen.rho)
    rho_c = apply_via_jam(left, gen.rho)
    full = support_rank(rho_c) == rho_c.shape[0]
    chain = compose_via_choi(right.to_choi(), compose_via_choi(kraus_to_choi(u), inverse.to_choi()))
    gamma = choi_to_kraus(chain, require_cptp=full)
    gamma.metadata = {"generator": gen.label, "full_support": full}
    return gamma


def _sandwich(rho, element) -> np.ndarray:
    root = matrix_sqrt_psd(rho)
    return root @ as_matrix(element) @ root


def hybrid_measurement_emergent(
    m_xa: Sequence,
    m_yb: Sequence,
    u: KrausChannel,
    gen: Generator,
    direction: Direction = Direction.LR,
) -> np.ndarray:
    """
    Classical emergent channel between two measured quantum regions.

    LR: P(y|x) = Tr(F_y U(rho^{1/2} E_x rho^{1/2})) / Tr(E_x rho) with gen the
    prior on the input of u (A -> B). RL swaps the roles: u is the reversed
    unitary channel B -> A, gen is the prior on B and the result is P(x|y).
    """
    direction = Direction(direction)
    povm_in, povm_out = (m_xa, m_yb) if direction is Direction.LR else (m_yb, m_xa)
    inputs = _check_povm(povm_in)
    outputs = _check_povm(povm_out)
    if inputs[0].shape[0] != u.dim_in or outputs[0].shape[0] != u.dim_out:
        raise DimensionMismatchError("POVM dimensions do not match the unitary channel")
    result = np.zeros((len(outputs), len(inputs)))
    for col, element in enumerate(inputs):
        weight = float(np.trace(element @ gen.rho).real)
        if weight <= STOCHASTIC_TOL:
            raise ZeroMarginalError(f"outcome {col} has zero probability under the generator")
        evolved = u.apply(_sandwich(gen.rho, element) / weight)
        for row, f in enumerate(outputs):
            result[row, col] = float(np.trace(f @ evolved).real)
    return result


def pretty_good_measurement(preps: Sequence, prior) -> List[np.ndarray]:
    """E_x = p_x rho^{-1/2} rho_x rho^{-1/2} with rho = sum_x p_x rho_x."""
    states = _check_preps(preps)
    weights = _check_distribution(prior, "prior")
    if len(states) != weights.size:
        raise DimensionMismatchError(f"{len(states)} preparations but {weights.size} priors")
    average = sum(p * s for p, s in zip(weights, states))
    if support_rank(average) < average.shape[0]:
        raise ZeroMarginalError("ensemble average has no full support; measurement incomplete")
    inv_root = pinv_sqrt_psd(average)
    return [p * inv_root @ s @ inv_root for p, s in zip(weights, states)]


def hybrid_preparation_emergent(
    prep_ax: Sequence,
    prep_by: Sequence,
    u_yx,
    prior_x,
    direction: Direction = Direction.LR,
) -> KrausChannel:
    """
    Quantum emergent channel between two ensemble-prepared regions.

    LR acts A -> B: pretty-good measurement of the A ensemble, classical u,
    re-preparation on B. RL acts B -> A, inverting u classically with P(Y).
    """
    direction = Direction(direction)
    stochastic = _check_stochastic(u_yx, "U(Y|X)")
    prior = _check_distribution(prior_x, "prior")
    if direction is Direction.LR:
        povm = pretty_good_measurement(prep_ax, prior)
        targets = _check_preps(prep_by)
        transfer = stochastic
    else:
        prior_y = stochastic @ prior
        if np.any(prior_y <= STOCHASTIC_TOL):
            raise ZeroMarginalError(f"outcome with zero marginal probability: P(Y) = {prior_y}")
        povm = pretty_good_measurement(prep_by, prior_y)
        targets = _check_preps(prep_ax)
        transfer = classical_bayes(stochastic, prior)
    if transfer.shape != (len(targets), len(povm)):
        raise DimensionMismatchError(
            f"stochastic map of shape {transfer.shape} between {len(povm)} and "
            f"{len(targets)} classical outcomes"
        )
    preps = [
        sum(transfer[y, x] * targets[y] for y in range(len(targets))) for x in range(len(povm))
    ]
    channel = measure_prepare_channel(povm, preps)
    channel.metadata = {"direction": direction.value}
    return channel
