"""
Dense complex linear algebra for conditional states.

Matrices are plain numpy arrays of dtype complex128. Bipartite operators use
the conditioning-space-first ordering A (x) B with the computational basis
|00>, |01>, |10>, |11> for two qubits.

Every spectral quantity (square roots, pseudo-inverses, trace norms of
Hermitian inputs) goes through hermitian_eigh.
"""

import logging
from enum import Enum
from typing import NamedTuple, Tuple

import numpy as np
import scipy.linalg

from .errors import DimensionMismatchError, NotHermitianError, NotPSDError, ZeroMatrixError

logger = logging.getLogger(__name__)

PSD_TOL = 1e-10
RANK_TOL = 1e-12
HERMITIAN_TOL = 1e-12


class Subsystem(str, Enum):
    """Selects one factor of a bipartite space."""

    A = "A"
    B = "B"


class BipartiteDims(NamedTuple):
    """Dimensions of a bipartite space, conditioning factor first."""

    dim_a: int
    dim_b: int

    @property
    def total(self) -> int:
        return self.dim_a * self.dim_b

    def swapped(self) -> "BipartiteDims":
        return BipartiteDims(self.dim_b, self.dim_a)


def as_matrix(m) -> np.ndarray:
    """Coerce to a 2-D complex array."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"expected a matrix, got array with shape {arr.shape}")
    return arr


def _square(m) -> np.ndarray:
    arr = as_matrix(m)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def _bipartite(m, dims: BipartiteDims) -> np.ndarray:
    arr = _square(m)
    if arr.shape[0] != dims.total:
        raise DimensionMismatchError(
            f"matrix side {arr.shape[0]} does not match dims {dims.dim_a}x{dims.dim_b}"
        )
    return arr.reshape(dims.dim_a, dims.dim_b, dims.dim_a, dims.dim_b)


def dagger(m) -> np.ndarray:
    return np.conj(as_matrix(m)).T


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    arr = _square(m)
    return float(np.max(np.abs(arr - arr.conj().T), initial=0.0)) <= tol


def check_hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return the Hermitian part of m, raising if m is farther than tol from it."""
    arr = _square(m)
    deviation = float(np.max(np.abs(arr - arr.conj().T), initial=0.0))
    if deviation > tol * max(1.0, float(np.max(np.abs(arr), initial=0.0))):
        raise NotHermitianError(f"matrix deviates from Hermitian by {deviation:.3e}")
    return (arr + arr.conj().T) / 2


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product a (x) b."""
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace(m, dims: BipartiteDims, keep: Subsystem = Subsystem.A) -> np.ndarray:
    """Trace out one factor of a bipartite operator, returning the kept factor."""
    m4 = _bipartite(m, dims)
    if Subsystem(keep) is Subsystem.A:
        return np.einsum("ijkj->ik", m4)
    return np.einsum("ijil->jl", m4)


def partial_transpose(m, dims: BipartiteDims, which: Subsystem = Subsystem.A) -> np.ndarray:
    """Transpose one factor of a bipartite operator; an involution."""
    m4 = _bipartite(m, dims)
    if Subsystem(which) is Subsystem.A:
        out = m4.transpose(2, 1, 0, 3)
    else:
        out = m4.transpose(0, 3, 2, 1)
    return out.reshape(dims.total, dims.total)


def swap_factors(m, dims: BipartiteDims) -> np.ndarray:
    """Reorder A (x) B to B (x) A."""
    m4 = _bipartite(m, dims)
    d = dims.total
    return m4.transpose(1, 0, 3, 2).reshape(d, d)


def hermitian_eigh(m) -> Tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of the Hermitian part of m (ascending eigenvalues)."""
    arr = _square(m)
    herm = (arr + arr.conj().T) / 2
    return scipy.linalg.eigh(herm)


def min_eigenvalue(m) -> float:
    return float(hermitian_eigh(m)[0][0])


def _clamped_spectrum(m, tol: float) -> Tuple[np.ndarray, np.ndarray]:
    vals, vecs = hermitian_eigh(m)
    if vals.size and vals[0] < -tol:
        raise NotPSDError(f"matrix has eigenvalue {vals[0]:.3e} below -{tol:.0e}")
    return np.clip(vals, 0.0, None), vecs


def matrix_sqrt_psd(m, tol: float = PSD_TOL) -> np.ndarray:
    """Principal square root of a PSD matrix."""
    vals, vecs = _clamped_spectrum(m, tol)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def _support(vals: np.ndarray, rank_tol: float) -> np.ndarray:
    top = float(np.max(np.abs(vals), initial=0.0))
    if top == 0.0:
        raise ZeroMatrixError("matrix is zero")
    mask = vals > rank_tol * top
    if not np.any(mask):
        raise ZeroMatrixError("all eigenvalues are below the rank threshold")
    return mask


def pinv_psd(m, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Moore-Penrose inverse of a PSD matrix restricted to its support."""
    vals, vecs = hermitian_eigh(m)
    mask = _support(vals, rank_tol)
    inv = np.zeros_like(vals)
    inv[mask] = 1.0 / vals[mask]
    return (vecs * inv) @ vecs.conj().T


def pinv_sqrt_psd(m, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Support-restricted inverse square root of a PSD matrix."""
    vals, vecs = hermitian_eigh(m)
    mask = _support(vals, rank_tol)
    inv = np.zeros_like(vals)
    inv[mask] = 1.0 / np.sqrt(vals[mask])
    return (vecs * inv) @ vecs.conj().T


def support_rank(m, rank_tol: float = RANK_TOL) -> int:
    vals, _ = hermitian_eigh(m)
    top = float(np.max(np.abs(vals), initial=0.0))
    if top == 0.0:
        return 0
    return int(np.sum(vals > rank_tol * top))


def trace_norm(m) -> float:
    """Sum of singular values."""
    arr = _square(m)
    if is_hermitian(arr, tol=1e-12 * max(1.0, float(np.max(np.abs(arr), initial=0.0)))):
        return float(np.sum(np.abs(hermitian_eigh(arr)[0])))
    return float(np.sum(scipy.linalg.svdvals(arr)))


def is_density(m, tol: float = PSD_TOL) -> bool:
    """True when m is Hermitian PSD with unit trace, all within tol."""
    arr = _square(m)
    if not is_hermitian(arr, tol=max(tol, HERMITIAN_TOL)):
        return False
    if abs(np.trace(arr) - 1.0) > tol:
        return False
    return min_eigenvalue(arr) >= -tol


def ket(*bits: int) -> np.ndarray:
    """Computational basis column vector for a qubit string."""
    index = 0
    for bit in bits:
        index = 2 * index + int(bit)
    vec = np.zeros(2 ** len(bits), dtype=complex)
    vec[index] = 1.0
    return vec


def projector(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())
