"""
Real coordinates for complex Hermitian matrices.

Two encodings are used:

- complex_to_real: the symmetric embedding [[Re h, -Im h], [Im h, Re h]], used for
  the interior-point cone blocks.
- hvec / hmat: coordinates in an orthonormal Hermitian basis (diagonal entries,
  then symmetric pairs, then antisymmetric pairs), used to write linear
  constraints as real matrices. For Hermitian G, H: hvec(G) . hvec(H) = Re Tr(G H).
"""

from typing import List

import numpy as np

from ..core.linalg import check_hermitian

SQRT2 = np.sqrt(2.0)


def complex_to_real(h) -> np.ndarray:
    """Real symmetric embedding; PSD exactly when h is, with doubled spectrum."""
    herm = check_hermitian(h)
    re, im = herm.real, herm.imag
    return np.block([[re, -im], [im, re]])


def real_to_complex(y: np.ndarray) -> np.ndarray:
    """Hermitian matrix whose embedding is closest to a symmetric 2d x 2d block."""
    d = y.shape[0] // 2
    y11, y12 = y[:d, :d], y[:d, d:]
    y21, y22 = y[d:, :d], y[d:, d:]
    return (y11 + y22) / 2 + 1j * (y21 - y12) / 2


def hvec(m) -> np.ndarray:
    """Coordinates of a Hermitian matrix in the orthonormal Hermitian basis."""
    arr = np.asarray(m, dtype=complex)
    d = arr.shape[0]
    iu, ju = np.triu_indices(d, 1)
    upper, lower = arr[iu, ju], arr[ju, iu]
    return np.concatenate(
        [
            np.real(np.diag(arr)),
            (upper.real + lower.real) / SQRT2,
            (upper.imag - lower.imag) / SQRT2,
        ]
    )


def hmat(v, d: int) -> np.ndarray:
    """Inverse of hvec for a d x d Hermitian matrix."""
    vec = np.asarray(v, dtype=float)
    n_off = d * (d - 1) // 2
    m = np.diag(vec[:d]).astype(complex)
    iu, ju = np.triu_indices(d, 1)
    off = (vec[d : d + n_off] + 1j * vec[d + n_off :]) / SQRT2
    m[iu, ju] = off
    m[ju, iu] = off.conj()
    return m


def hermitian_basis(d: int) -> List[np.ndarray]:
    """Orthonormal basis of d x d Hermitian matrices, in hvec order."""
    return [hmat(e, d) for e in np.eye(d * d)]

