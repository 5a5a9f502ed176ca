"""
Benchmark coarse-graining scenarios on two qubits (4 -> 2).

Catalog:
    1: blurred-and-saturated detector with SWAP
    2: blurred-and-saturated detector with the z-interaction
    3: partial trace over the second qubit with SWAP
    4: partial trace over the second qubit with the z-interaction

Times are in seconds and the coupling J in s^-1; phases are always J*t.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Union

import numpy as np
from scipy.stats import unitary_group

from .bayes import Generator
from .bloch import IDENTITY2, SIGMA_Z, LabSpace, rho_to_bloch
from .channels import KrausChannel, identity_channel, unitary_channel
from .errors import OutOfRangeError, UnsupportedScenarioError
from .linalg import ket, projector

logger = logging.getLogger(__name__)

SQRT3 = np.sqrt(3.0)
DEFAULT_COUPLING = 1.0
EXISTENCE_TOL = 1e-9

SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]],
    dtype=complex,
)
CONTROLLED_Z = np.diag([1, 1, 1, -1]).astype(complex)
Z_ON_FIRST = np.kron(SIGMA_Z, IDENTITY2)

RngLike = Union[None, int, np.random.Generator]


def bns_channel() -> KrausChannel:
    """Blurred-and-saturated detector: |00> is resolved, the rest collapse to |1>."""
    k1 = np.array([[1, 0, 0, 0], [0, 1 / SQRT3, 1 / SQRT3, 1 / SQRT3]], dtype=complex)
    k2 = np.array([[0, 0, 0, 0], [0, 1, 0, -1]], dtype=complex) / SQRT3
    k3 = np.array([[0, 0, 0, 0], [0, 1, -1, 0]], dtype=complex) / SQRT3
    k4 = np.array([[0, 0, 0, 0], [0, 0, 1, -1]], dtype=complex) / SQRT3
    return KrausChannel([k1, k2, k3, k4], 4, 2, metadata={"label": "bns"})


def ptrace_channel() -> KrausChannel:
    """Discard the second qubit: {I (x) <0|, I (x) <1|}."""
    ops = [np.kron(IDENTITY2, ket(k).reshape(1, 2)) for k in (0, 1)]
    return KrausChannel(ops, 4, 2, metadata={"label": "ptrace"})


def swap_channel() -> KrausChannel:
    return unitary_channel(SWAP, label="swap")


def z_unitary(t: float, coupling: float = DEFAULT_COUPLING) -> np.ndarray:
    """exp(i J t sz (x) sz)."""
    phase = np.exp(1j * coupling * t)
    return np.diag([phase, phase.conjugate(), phase.conjugate(), phase])


def z_channel(t: float, coupling: float = DEFAULT_COUPLING) -> KrausChannel:
    return unitary_channel(z_unitary(t, coupling), label=f"z({t})")


@dataclass(frozen=True, eq=False)
class Scenario:
    """A coarse-graining paired with a microscopic unitary."""

    id: int
    cg: KrausChannel = field(repr=False)
    name: str
    coupling: float = DEFAULT_COUPLING

    @property
    def time_dependent(self) -> bool:
        return self.id in (2, 4)

    def unitary(self, t: float = 0.0) -> KrausChannel:
        if self.time_dependent:
            return z_channel(t, self.coupling)
        return swap_channel()


_CATALOG = {
    1: ("bns", "swap"),
    2: ("bns", "z"),
    3: ("ptrace", "swap"),
    4: ("ptrace", "z"),
}


def get_scenario(scenario_id: int, coupling: float = DEFAULT_COUPLING) -> Scenario:
    """Look up a catalog entry by id."""
    try:
        cg_name, u_name = _CATALOG[int(scenario_id)]
    except (KeyError, ValueError, TypeError):
        raise UnsupportedScenarioError(
            f"unknown scenario {scenario_id!r}, expected one of {sorted(_CATALOG)}"
        )
    if coupling <= 0:
        raise OutOfRangeError(f"coupling must be positive, got {coupling}")
    cg = bns_channel() if cg_name == "bns" else ptrace_channel()
    return Scenario(int(scenario_id), cg, f"{cg_name}+{u_name}", coupling)


def cg_bloch_bns(lab: LabSpace) -> np.ndarray:
    """Bloch vector of the detector output for a two-qubit lab triple."""
    r, s, t = lab.r, lab.s, lab.t
    return np.array(
        [
            (r[0] + s[0] + t(3, 1) + t(1, 3) + t(1, 1) - t(2, 2)) / (2 * SQRT3),
            (r[1] + s[1] + t(3, 2) + t(2, 3) + t(1, 2) + t(2, 1)) / (2 * SQRT3),
            (r[2] + s[2] + t(3, 3) - 1.0) / 2,
        ]
    )


def decompose_Ra_Rb(lab: LabSpace):
    """Split the detector output into the part rotated by the z-interaction and the rest."""
    r_b = np.array(
        [
            (lab.t(1, 1) - lab.t(2, 2)) / (2 * SQRT3),
            (lab.t(1, 2) + lab.t(2, 1)) / (2 * SQRT3),
            0.0,
        ]
    )
    return cg_bloch_bns(lab) - r_b, r_b


def z_rotation(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])


def scenario_lab_map(sc: Scenario, lab: LabSpace, t: float = 0.0) -> np.ndarray:
    """
    Bloch vector of the coarse-grained evolved state, computed in lab space.

    Scenario 2 rotates R_a about z by 2Jt and leaves R_b fixed. Scenario 4
    contracts the transverse part of r by cos(2Jt) and feeds in the
    correlations (t23, -t13, 0) with weight sin(2Jt). For the SWAP scenarios t
    is ignored: the detector is SWAP invariant and the partial trace returns s.
    """
    angle = 2 * sc.coupling * t
    if sc.id == 1:
        return cg_bloch_bns(lab)
    if sc.id == 2:
        r_a, r_b = decompose_Ra_Rb(lab)
        return z_rotation(angle) @ r_a + r_b
    if sc.id == 3:
        return lab.s.copy()
    if sc.id == 4:
        tau = np.array([lab.t(2, 3), -lab.t(1, 3), 0.0])
        return np.diag([np.cos(angle), np.cos(angle), 1.0]) @ lab.r + np.sin(angle) * tau
    raise UnsupportedScenarioError(f"no lab map for scenario {sc.id}")


@dataclass(frozen=True)
class AnalyticVerdict:
    """Whether a closed-form emergent channel exists for a state, and which."""

    exists: bool
    emergent: Optional[KrausChannel]
    condition_residual: float

    def to_dict(self) -> Dict[str, object]:
        return {
            "exists": self.exists,
            "condition_residual": self.condition_residual,
            "emergent": self.emergent.to_dict() if self.emergent else None,
        }


def condition_residual(sc: Scenario, lab: LabSpace) -> float:
    """Distance of a lab triple from the scenario's existence condition."""
    if sc.id == 1:
        return 0.0
    if sc.id == 2:
        return float(np.linalg.norm(decompose_Ra_Rb(lab)[1]))
    if sc.id == 3:
        return float(np.linalg.norm(lab.r - lab.s))
    if sc.id == 4:
        return float(max(abs(lab.t(1, 3)), abs(lab.t(2, 3))))
    raise UnsupportedScenarioError(f"no existence condition for scenario {sc.id}")


def _explicit_emergent(sc: Scenario, t: float) -> KrausChannel:
    phase = sc.coupling * t
    if sc.id == 2:
        u = np.diag([np.exp(1j * phase), np.exp(-1j * phase)])
        return unitary_channel(u, label=f"z-rotation({t})")
    if sc.id == 4:
        return KrausChannel(
            [np.cos(phase) * IDENTITY2, np.sin(phase) * SIGMA_Z],
            metadata={"label": f"phase-flip({t})"},
        )
    return identity_channel(2)


def analytic_emergent(
    sc: Scenario, lab: LabSpace, t: float = 0.0, tol: float = EXISTENCE_TOL
) -> AnalyticVerdict:
    """Closed-form emergent dynamics where the scenario admits one for this state."""
    residual = condition_residual(sc, lab)
    if residual > tol:
        return AnalyticVerdict(False, None, residual)
    return AnalyticVerdict(True, _explicit_emergent(sc, t), residual)


def analytic_emergent_for_state(sc: Scenario, rho, t: float = 0.0, tol: float = EXISTENCE_TOL):
    return analytic_emergent(sc, rho_to_bloch(rho), t, tol)


def project_to_condition(sc: Scenario, rho) -> np.ndarray:
    """
    Twirl a state onto the scenario's existence condition.

    Scenario 2 averages with its controlled-Z conjugate, which removes the
    |00><11| coherence and so R_b. Scenario 3 symmetrizes under SWAP, giving
    r = s. Scenario 4 averages with the (Z (x) I) conjugate, zeroing t13 and t23.
    Scenario 1 has no condition and returns the state unchanged.
    """
    m = np.asarray(rho, dtype=complex)
    ops = {2: CONTROLLED_Z, 3: SWAP, 4: Z_ON_FIRST}
    if sc.id == 1:
        return m.copy()
    if sc.id not in ops:
        raise UnsupportedScenarioError(f"no condition projection for scenario {sc.id}")
    op = ops[sc.id]
    return (m + op @ m @ op.conj().T) / 2


PSI_MINUS = (ket(0, 1) - ket(1, 0)) / np.sqrt(2)
PHI_PLUS = (ket(0, 0) + ket(1, 1)) / np.sqrt(2)


def werner_state(lam: float) -> np.ndarray:
    """lam |Psi-><Psi-| + (1 - lam) I/4; separable for lam <= 1/3."""
    if not -1 / 3 - 1e-12 <= lam <= 1 + 1e-12:
        raise OutOfRangeError(f"Werner parameter must be in [-1/3, 1], got {lam}")
    return lam * projector(PSI_MINUS) + (1 - lam) * np.eye(4, dtype=complex) / 4


def _rng(seed: RngLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_density(dim: int, seed: RngLike = None) -> np.ndarray:
    """Hilbert-Schmidt random state GG^dagger / Tr(GG^dagger) from a Ginibre matrix."""
    rng = _rng(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(dim: int, seed: RngLike = None) -> np.ndarray:
    """Haar random unitary."""
    return np.asarray(unitary_group.rvs(dim, random_state=_rng(seed)), dtype=complex)


def sample_state(seed: int, index: int, dim: int = 4) -> np.ndarray:
    """The index-th state of a seeded stream, independent of evaluation order."""
    return random_density(dim, np.random.default_rng([int(seed), int(index)]))


def make_generator(
    kind: str, lam: Optional[float] = None, seed: RngLike = None
) -> Generator:
    """
    Named generator states on two qubits.

    ME is the normalized |Phi+><Phi+| (rank one), MM the maximally mixed state,
    RAND a Hilbert-Schmidt sample and WERNER the Werner state at lam.
    """
    key = kind.upper()
    if key == "ME":
        return Generator(projector(PHI_PLUS), "ME")
    if key == "MM":
        return Generator(np.eye(4, dtype=complex) / 4, "MM")
    if key == "RAND":
        return Generator(random_density(4, seed), "RAND")
    if key in ("W", "WERNER"):
        if lam is None:
            raise OutOfRangeError("the Werner generator needs a lambda value")
        return Generator(werner_state(lam), f"W({lam:g})", {"lambda": lam})
    raise OutOfRangeError(f"unknown generator {kind!r}, expected ME, MM, RAND or WERNER")
