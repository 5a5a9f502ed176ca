"""
Tests for Kraus channels and their conditional-state encodings.
"""

import numpy as np
import pytest

from coarse_grain.core.channels import (
    ConditionalForm,
    ConditionalState,
    KrausChannel,
    adjoint_channel,
    apply_via_choi,
    apply_via_jam,
    choi_difference,
    choi_to_kraus,
    compose_via_choi,
    depolarizing_channel,
    identity_channel,
    is_cptp,
    kraus_to_choi,
)
from coarse_grain.core.errors import DimensionMismatchError, NotCPTPError, OutOfRangeError
from coarse_grain.core.linalg import BipartiteDims
from coarse_grain.core.scenarios import random_density


def random_channel(rng, dim_in, dim_out, n_kraus=3):
    """Kraus blocks of a random isometry dim_in -> n_kraus * dim_out."""
    g = rng.standard_normal((n_kraus * dim_out, dim_in)) + 1j * rng.standard_normal(
        (n_kraus * dim_out, dim_in)
    )
    v, _ = np.linalg.qr(g)
    ops = [v[k * dim_out : (k + 1) * dim_out, :] for k in range(n_kraus)]
    return KrausChannel(ops, dim_in, dim_out)


class TestApplication:
    """A channel acts the same through Kraus, Choi and Jamiolkowski forms."""

    def test_choi_action_matches_kraus(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            ch = random_channel(rng, 2, 3)
            rho = random_density(2, rng)
            np.testing.assert_allclose(apply_via_choi(ch.choi(), rho), ch(rho), atol=1e-12)

    def test_jamiolkowski_action_matches_kraus(self):
        rng = np.random.default_rng(22)
        for _ in range(50):
            ch = random_channel(rng, 3, 2)
            rho = random_density(3, rng)
            jam = ch.choi().to_jamiolkowski()
            assert jam.form is ConditionalForm.JAMIOLKOWSKI
            np.testing.assert_allclose(apply_via_jam(jam, rho), ch(rho), atol=1e-12)

    def test_form_mismatch(self):
        choi = identity_channel(2).choi()
        with pytest.raises(DimensionMismatchError):
            apply_via_jam(choi, np.eye(2) / 2)
        with pytest.raises(DimensionMismatchError):
            apply_via_choi(choi, np.eye(3) / 3)

    def test_forms_are_involutive(self):
        choi = random_channel(np.random.default_rng(23), 2, 2).choi()
        np.testing.assert_allclose(choi.to_jamiolkowski().to_choi().matrix, choi.matrix)

    def test_depolarizing(self):
        rho = random_density(2, seed=24)
        out = depolarizing_channel(0.4)(rho)
        np.testing.assert_allclose(out, 0.6 * rho + 0.4 * np.eye(2) / 2, atol=1e-12)
        with pytest.raises(OutOfRangeError):
            depolarizing_channel(1.5)


class TestCptp:
    def test_random_channel_is_cptp(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            report = is_cptp(random_channel(rng, 2, 2).choi())
            assert report.valid
            assert report.min_eigenvalue > -1e-10

    def test_scaled_channel_is_not_trace_preserving(self):
        ch = identity_channel(2)
        lossy = KrausChannel([0.9 * ch.kraus[0]], strict=False)
        report = is_cptp(lossy.choi())
        assert not report
        assert report.marginal_residual > 0.1

    def test_non_positive_choi_is_rejected(self):
        choi = identity_channel(2).choi()
        flipped = ConditionalState(choi.dims, ConditionalForm.CHOI, np.eye(4) - choi.matrix)
        assert is_cptp(flipped).min_eigenvalue < 0
        assert not is_cptp(flipped).valid

    def test_strict_construction_rejects_non_tp(self):
        with pytest.raises(NotCPTPError):
            KrausChannel([np.diag([1.0, 0.5])])

    def test_choi_to_kraus_preserves_action(self):
        rng = np.random.default_rng(32)
        ch = random_channel(rng, 2, 2, n_kraus=2)
        rebuilt = choi_to_kraus(ch.choi())
        assert len(rebuilt.kraus) <= 4
        rho = random_density(2, rng)
        np.testing.assert_allclose(rebuilt(rho), ch(rho), atol=1e-10)

    def test_choi_to_kraus_rejects_invalid(self):
        bad = ConditionalState(BipartiteDims(2, 2), ConditionalForm.CHOI, np.eye(4))
        with pytest.raises(NotCPTPError):
            choi_to_kraus(bad)

    def test_adjoint_is_unital(self):
        ch = random_channel(np.random.default_rng(33), 3, 2)
        np.testing.assert_allclose(adjoint_channel(ch)(np.eye(2)), np.eye(3), atol=1e-12)


class TestComposition:
    def test_choi_composition_matches_kraus_composition(self):
        """Link-product composition agrees with sequential Kraus composition."""
        rng = np.random.default_rng(41)
        for _ in range(50):
            inner = random_channel(rng, 2, 3)
            outer = random_channel(rng, 3, 2)
            composed = compose_via_choi(outer.choi(), inner.choi())
            expected = kraus_to_choi(inner.then(outer))
            assert tuple(composed.dims) == (2, 2)
            np.testing.assert_allclose(composed.matrix, expected.matrix, atol=1e-11)

    def test_composition_accepts_jamiolkowski_inputs(self):
        rng = np.random.default_rng(42)
        inner, outer = random_channel(rng, 2, 2), random_channel(rng, 2, 2)
        a = compose_via_choi(outer.choi().to_jamiolkowski(), inner.choi().to_jamiolkowski())
        b = compose_via_choi(outer.choi(), inner.choi())
        np.testing.assert_allclose(a.matrix, b.matrix, atol=1e-12)

    def test_dimension_mismatch(self):
        rng = np.random.default_rng(43)
        with pytest.raises(DimensionMismatchError):
            compose_via_choi(random_channel(rng, 2, 2).choi(), random_channel(rng, 2, 3).choi())
        with pytest.raises(DimensionMismatchError):
            random_channel(rng, 2, 3).then(random_channel(rng, 2, 2))

    def test_difference_of_equal_channels_is_zero(self):
        ch = depolarizing_channel(0.2)
        assert np.allclose(choi_difference(ch, ch).matrix, 0)


class TestSerialization:
    def test_kraus_channel_dict(self):
        ch = random_channel(np.random.default_rng(51), 2, 2)
        ch.metadata["label"] = "random"
        data = ch.to_dict()
        assert data["dim_in"] == 2 and data["metadata"] == {"label": "random"}
        rebuilt = KrausChannel.from_dict(data)
        for a, b in zip(rebuilt.kraus, ch.kraus):
            np.testing.assert_allclose(a, b)

    def test_conditional_state_dict(self):
        jam = depolarizing_channel(0.3).choi().to_jamiolkowski()
        rebuilt = ConditionalState.from_dict(jam.to_dict())
        assert rebuilt.form is ConditionalForm.JAMIOLKOWSKI
        assert tuple(rebuilt.dims) == (2, 2)
        np.testing.assert_allclose(rebuilt.matrix, jam.matrix)

    def test_shape_validation(self):
        with pytest.raises(DimensionMismatchError):
            ConditionalState(BipartiteDims(2, 2), ConditionalForm.CHOI, np.eye(3))
