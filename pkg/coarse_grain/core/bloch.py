"""
Two-qubit lab space: the Bloch triple {r, s, T}.

rho = (1/4) (I(x)I + sum_i r_i s_i(x)I + sum_j s_j I(x)s_j + sum_ij T_ij s_i(x)s_j)
with s_i the Pauli matrices.
"""

from dataclasses import dataclass, field
from typing import Dict, Sequence

import numpy as np

from .errors import DimensionMismatchError
from .linalg import as_matrix

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def _vector(values: Sequence[float], name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise DimensionMismatchError(f"{name} must have 3 components, got {arr.shape}")
    return arr


@dataclass(frozen=True)
class LabSpace:
    """Bloch representation of a two-qubit operator."""

    r: np.ndarray = field(default_factory=lambda: np.zeros(3))
    s: np.ndarray = field(default_factory=lambda: np.zeros(3))
    T: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))

    def __post_init__(self):
        object.__setattr__(self, "r", _vector(self.r, "r"))
        object.__setattr__(self, "s", _vector(self.s, "s"))
        corr = np.asarray(self.T, dtype=float)
        if corr.shape != (3, 3):
            raise DimensionMismatchError(f"T must be 3x3, got {corr.shape}")
        object.__setattr__(self, "T", corr)

    def t(self, i: int, j: int) -> float:
        """Correlation entry t_ij with one-based indices."""
        return float(self.T[i - 1, j - 1])

    def swapped(self) -> "LabSpace":
        """Lab-space action of SWAP: {r, s, T} -> {s, r, T^T}."""
        return LabSpace(self.s.copy(), self.r.copy(), self.T.T.copy())

    def to_dict(self) -> Dict[str, list]:
        return {"r": self.r.tolist(), "s": self.s.tolist(), "T": self.T.tolist()}


def bloch_to_rho(lab: LabSpace) -> np.ndarray:
    """Build the 4x4 Hermitian unit-trace operator of a lab triple (positivity not implied)."""
    rho = np.kron(IDENTITY2, IDENTITY2)
    for i, sigma in enumerate(PAULIS):
        rho = rho + lab.r[i] * np.kron(sigma, IDENTITY2)
        rho = rho + lab.s[i] * np.kron(IDENTITY2, sigma)
        for j, tau in enumerate(PAULIS):
            rho = rho + lab.T[i, j] * np.kron(sigma, tau)
    return rho / 4


def rho_to_bloch(rho) -> LabSpace:
    """Read r, s and T off a 4x4 operator by Pauli expectation values."""
    m = as_matrix(rho)
    if m.shape != (4, 4):
        raise DimensionMismatchError(f"expected a 4x4 two-qubit operator, got {m.shape}")
    r = [np.trace(m @ np.kron(sigma, IDENTITY2)).real for sigma in PAULIS]
    s = [np.trace(m @ np.kron(IDENTITY2, sigma)).real for sigma in PAULIS]
    corr = [[np.trace(m @ np.kron(sigma, tau)).real for tau in PAULIS] for sigma in PAULIS]
    return LabSpace(np.array(r), np.array(s), np.array(corr))


def qubit_bloch_vector(rho) -> np.ndarray:
    """Bloch vector of a single-qubit operator: R_i = Tr(rho s_i)."""
    m = as_matrix(rho)
    if m.shape != (2, 2):
        raise DimensionMismatchError(f"expected a 2x2 operator, got {m.shape}")
    return np.array([np.trace(m @ sigma).real for sigma in PAULIS])
