"""
Tests for dense linear algebra helpers.

Covers partial trace and transpose, spectral functions, trace norm and
basis vectors.
"""

import numpy as np
import pytest

from coarse_grain.core.errors import (
    DimensionMismatchError,
    NotHermitianError,
    NotPSDError,
    ZeroMatrixError,
)
from coarse_grain.core.linalg import (
    BipartiteDims,
    Subsystem,
    check_hermitian,
    is_density,
    ket,
    matrix_sqrt_psd,
    partial_trace,
    partial_transpose,
    pinv_psd,
    pinv_sqrt_psd,
    projector,
    support_rank,
    swap_factors,
    tensor_product,
    trace_norm,
)
from coarse_grain.core.scenarios import random_density

DIMS = BipartiteDims(2, 3)


def _random_matrix(rng, d):
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


class TestPartialOperations:
    """Partial trace, partial transpose and factor swap."""

    def test_partial_trace_of_product(self):
        """Tracing out a factor of a (x) b leaves the other times its trace."""
        rng = np.random.default_rng(1)
        a, b = _random_matrix(rng, 2), _random_matrix(rng, 3)
        ab = tensor_product(a, b)
        np.testing.assert_allclose(partial_trace(ab, DIMS, Subsystem.A), a * np.trace(b))
        np.testing.assert_allclose(partial_trace(ab, DIMS, Subsystem.B), b * np.trace(a))

    def test_partial_transpose_is_involution(self):
        rng = np.random.default_rng(2)
        m = _random_matrix(rng, 6)
        for which in (Subsystem.A, Subsystem.B):
            twice = partial_transpose(partial_transpose(m, DIMS, which), DIMS, which)
            np.testing.assert_allclose(twice, m)

    def test_partial_transpose_of_product(self):
        rng = np.random.default_rng(3)
        a, b = _random_matrix(rng, 2), _random_matrix(rng, 3)
        np.testing.assert_allclose(
            partial_transpose(tensor_product(a, b), DIMS, Subsystem.A), np.kron(a.T, b)
        )

    def test_swap_factors(self):
        rng = np.random.default_rng(4)
        a, b = _random_matrix(rng, 2), _random_matrix(rng, 3)
        np.testing.assert_allclose(swap_factors(np.kron(a, b), DIMS), np.kron(b, a))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            partial_trace(np.eye(5), DIMS)
        with pytest.raises(DimensionMismatchError):
            partial_trace(np.ones(4), BipartiteDims(2, 2))


class TestSpectralFunctions:
    """Square roots, support-restricted inverses and ranks."""

    def test_sqrt_squares_back(self):
        rho = random_density(4, seed=5)
        root = matrix_sqrt_psd(rho)
        np.testing.assert_allclose(root @ root, rho, atol=1e-12)

    def test_sqrt_rejects_negative_spectrum(self):
        with pytest.raises(NotPSDError):
            matrix_sqrt_psd(np.diag([1.0, -0.1]))

    def test_small_negative_eigenvalues_are_clamped(self):
        root = matrix_sqrt_psd(np.diag([1.0, -1e-12]))
        np.testing.assert_allclose(root, np.diag([1.0, 0.0]), atol=1e-15)

    def test_pinv_on_support(self):
        m = np.diag([2.0, 0.0, 0.5])
        np.testing.assert_allclose(pinv_psd(m), np.diag([0.5, 0.0, 2.0]))
        np.testing.assert_allclose(pinv_sqrt_psd(m), np.diag([1 / np.sqrt(2), 0.0, np.sqrt(2)]))
        assert support_rank(m) == 2

    def test_pinv_of_zero_matrix(self):
        with pytest.raises(ZeroMatrixError):
            pinv_psd(np.zeros((2, 2)))
        assert support_rank(np.zeros((2, 2))) == 0


class TestNormsAndStates:
    def test_trace_norm_hermitian(self):
        assert trace_norm(np.diag([1.0, -2.0, 0.5])) == pytest.approx(3.5)

    def test_trace_norm_non_hermitian(self):
        assert trace_norm(np.array([[0, 2], [0, 0]])) == pytest.approx(2.0)

    def test_check_hermitian(self):
        with pytest.raises(NotHermitianError):
            check_hermitian(np.array([[0, 1], [0, 0]]))
        h = check_hermitian(np.array([[1, 1j], [-1j, 1]]))
        np.testing.assert_allclose(h, h.conj().T)

    def test_is_density(self):
        assert is_density(random_density(3, seed=6))
        assert not is_density(np.eye(2))
        assert not is_density(np.diag([1.5, -0.5]))

    def test_ket_and_projector(self):
        v = ket(1, 0)
        np.testing.assert_allclose(v, [0, 0, 1, 0])
        p = projector(v)
        assert p[2, 2] == 1 and np.trace(p) == 1
