"""
Tests for the coarse-graining semidefinite programs.

Threshold searches run dozens of solves and are marked slow.
"""

import numpy as np
import pytest

from coarse_grain.core.bayes import commutation_residual, petz_emergent
from coarse_grain.core.bloch import SIGMA_Z
from coarse_grain.core.channels import (
    choi_difference,
    choi_to_kraus,
    depolarizing_channel,
    identity_channel,
    is_cptp,
    kraus_to_choi,
    unitary_channel,
)
from coarse_grain.core.errors import (
    BaseIncompatibleError,
    DimensionMismatchError,
    InfeasibleError,
    OutOfRangeError,
    ProgramStatusError,
)
from coarse_grain.core.linalg import BipartiteDims, ket, trace_norm
from coarse_grain.core.scenarios import (
    get_scenario,
    make_generator,
    random_unitary,
    sample_state,
    swap_channel,
    z_channel,
)
from coarse_grain.sdp import (
    cg_robustness,
    closest_state_independent,
    compatibilize,
    diamond_norm,
    feasibility_emergent,
    gamma_threshold,
)

QUBIT = BipartiteDims(2, 2)
IDENTITY_CHOI = kraus_to_choi(identity_channel(2)).matrix


def _extended(ch, psi):
    """(ch (x) id) applied to |psi><psi|, the channel acting on the first qubit."""
    rho = np.outer(psi, psi.conj())
    ops = [np.kron(k, np.eye(2)) for k in ch.kraus]
    return sum(op @ rho @ op.conj().T for op in ops)


class TestDiamondNorm:
    def test_zero_difference(self):
        ch = depolarizing_channel(0.2)
        assert diamond_norm(choi_difference(ch, ch)) == pytest.approx(0.0, abs=1e-6)

    def test_orthogonal_unitaries(self):
        delta = choi_difference(identity_channel(2), unitary_channel(SIGMA_Z))
        assert diamond_norm(delta) == pytest.approx(2.0, abs=1e-6)

    def test_depolarizing_distance_matches_grid_search(self):
        """
        Brute force over pure inputs extended by a qubit ancilla.

        Both channels commute with every unitary, so the Schmidt angle of the
        input is the only free parameter.
        """
        ident, depol = identity_channel(2), depolarizing_channel(0.4)
        best = 0.0
        for theta in np.linspace(0.0, np.pi / 2, 2001):
            psi = np.cos(theta) * ket(0, 0) + np.sin(theta) * ket(1, 1)
            gap = _extended(ident, psi) - _extended(depol, psi)
            best = max(best, trace_norm(gap))
        assert diamond_norm(choi_difference(ident, depol)) == pytest.approx(best, abs=1e-3)

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_primal_and_dual_agree(self, seed):
        u = unitary_channel(random_unitary(2, seed=seed))
        delta = choi_difference(u, depolarizing_channel(0.3))
        dual = diamond_norm(delta, formulation="dual")
        primal = diamond_norm(delta, formulation="primal")
        assert 0.0 <= dual <= 2.0 + 1e-6
        assert primal == pytest.approx(dual, abs=1e-5)

    def test_raw_matrix_needs_dims(self):
        delta = choi_difference(identity_channel(2), unitary_channel(SIGMA_Z)).matrix
        assert diamond_norm(delta, QUBIT) == pytest.approx(2.0, abs=1e-6)
        with pytest.raises(DimensionMismatchError):
            diamond_norm(delta)
        with pytest.raises(DimensionMismatchError):
            diamond_norm(delta, BipartiteDims(2, 3))

    def test_unknown_formulation(self):
        delta = choi_difference(identity_channel(2), depolarizing_channel(0.1))
        with pytest.raises(ValueError):
            diamond_norm(delta, formulation="watrous")

    def test_independent_implementation(self):
        """The dual program agrees with a generic conic solver on the primal form."""
        cp = pytest.importorskip("cvxpy")
        u = unitary_channel(random_unitary(2, seed=4))
        delta = choi_difference(u, depolarizing_channel(0.25)).matrix
        eye_b = np.eye(2)
        rho0 = cp.Variable((2, 2), hermitian=True)
        rho1 = cp.Variable((2, 2), hermitian=True)
        block = cp.Variable((8, 8), hermitian=True)
        constraints = [
            block >> 0,
            rho0 >> 0,
            rho1 >> 0,
            cp.real(cp.trace(rho0)) == 1,
            cp.real(cp.trace(rho1)) == 1,
            block[:4, :4] == cp.kron(rho0, eye_b),
            block[4:, 4:] == cp.kron(rho1, eye_b),
        ]
        objective = cp.Maximize(cp.real(cp.trace(delta @ block[4:, :4])))
        reference = cp.Problem(objective, constraints).solve()
        assert diamond_norm(delta, QUBIT) == pytest.approx(reference, abs=2e-3)


class TestFeasibility:
    def test_swap_invariant_detector_admits_identity(self):
        choi = feasibility_emergent(get_scenario(1))
        assert np.max(np.abs(choi.matrix - IDENTITY_CHOI)) <= 1e-6

    def test_feasible_channel_commutes_on_random_states(self):
        sc = get_scenario(1)
        gamma = choi_to_kraus(feasibility_emergent(sc))
        u = sc.unitary()
        for index in range(200):
            assert commutation_residual(gamma, sc.cg, u, sample_state(5, index)) < 1e-6

    @pytest.mark.parametrize("scenario_id", [2, 3, 4])
    def test_other_scenarios_are_infeasible(self, scenario_id):
        with pytest.raises(InfeasibleError) as excinfo:
            feasibility_emergent(get_scenario(scenario_id), t=1.0)
        assert excinfo.value.solution.is_infeasible
        assert excinfo.value.solution.certificate is not None


class TestClosestStateIndependent:
    @pytest.mark.parametrize(
        "kind,lam,expected",
        [("MM", None, 0.42), ("WERNER", 1 / 3, 0.55), ("ME", None, 1.66)],
    )
    def test_optimal_distances(self, kind, lam, expected):
        sc = get_scenario(1)
        petz = petz_emergent(sc.unitary(), sc.cg, make_generator(kind, lam))
        eps, choi = closest_state_independent(petz, sc)
        assert eps == pytest.approx(expected, abs=0.02)
        assert is_cptp(choi, tol=1e-7)

    def test_optimal_value_matches_remeasured_distance(self):
        sc = get_scenario(1)
        petz = petz_emergent(sc.unitary(), sc.cg, make_generator("MM"))
        eps, choi = closest_state_independent(petz, sc)
        remeasured = diamond_norm(kraus_to_choi(petz).matrix - choi.matrix, QUBIT)
        assert remeasured == pytest.approx(eps, abs=1e-5)

    @pytest.mark.parametrize("scenario_id", [2, 3, 4])
    def test_time_dependent_and_trace_scenarios_are_infeasible(self, scenario_id):
        sc = get_scenario(scenario_id)
        petz = petz_emergent(sc.unitary(1.0), sc.cg, make_generator("MM"))
        with pytest.raises(InfeasibleError):
            closest_state_independent(petz, sc, t=1.0)

    def test_dimension_check(self):
        with pytest.raises(DimensionMismatchError):
            closest_state_independent(identity_channel(4), get_scenario(1))


class TestRobustness:
    def test_z_interaction_noise(self):
        assert cg_robustness(get_scenario(1), z_channel(1.0)) <= 1e-6

    def test_random_unitary_noise(self):
        noise = unitary_channel(random_unitary(4, seed=7))
        assert cg_robustness(get_scenario(1), noise) <= 1e-6

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_random_product_unitary_noise(self, seed):
        rng = np.random.default_rng(seed)
        product = np.kron(random_unitary(2, rng), random_unitary(2, rng))
        assert cg_robustness(get_scenario(1), unitary_channel(product), 1.0) <= 1e-6

    def test_compatible_noise_is_fully_robust(self):
        assert cg_robustness(get_scenario(1), swap_channel()) == pytest.approx(1.0, abs=1e-6)

    def test_incompatible_base(self):
        with pytest.raises(BaseIncompatibleError):
            cg_robustness(get_scenario(3), swap_channel())

    def test_noise_dimension(self):
        with pytest.raises(DimensionMismatchError):
            cg_robustness(get_scenario(1), depolarizing_channel(0.1))


class TestCompatibilize:
    @pytest.mark.parametrize("scenario_id", [1, 2, 3, 4])
    def test_zero_gamma_is_feasible(self, scenario_id):
        psi, theta = compatibilize(get_scenario(scenario_id), 1.0, 0.0)
        assert tuple(psi.dims) == (4, 4)
        assert tuple(theta.dims) == (2, 2)
        assert is_cptp(psi, tol=1e-7)
        assert is_cptp(theta, tol=1e-7)

    def test_full_gamma_scenario_one(self):
        _, theta = compatibilize(get_scenario(1), 0.0, 1.0)
        assert np.max(np.abs(theta.matrix - IDENTITY_CHOI)) <= 1e-6

    @pytest.mark.parametrize("gamma", [-0.1, 1.5])
    def test_gamma_range(self, gamma):
        with pytest.raises(OutOfRangeError):
            compatibilize(get_scenario(2), 1.0, gamma)

    def test_swap_scenario_threshold_is_one(self):
        assert gamma_threshold(get_scenario(1)) == 1.0

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            gamma_threshold(get_scenario(2), method="grid")


@pytest.mark.slow
class TestGammaThreshold:
    """Feasibility boundaries at t = 1."""

    @pytest.mark.parametrize("scenario_id,expected", [(2, 0.557), (3, 0.249), (4, 0.524)])
    def test_bisection(self, scenario_id, expected):
        assert gamma_threshold(get_scenario(scenario_id), 1.0) == pytest.approx(
            expected, abs=0.01
        )

    @pytest.mark.parametrize("scenario_id", [2, 3, 4])
    def test_direct_matches_bisection(self, scenario_id):
        sc = get_scenario(scenario_id)
        bisection = gamma_threshold(sc, 1.0, tol=1e-3)
        assert gamma_threshold(sc, 1.0, method="direct") == pytest.approx(bisection, abs=5e-3)

    def test_feasibility_is_monotone(self):
        sc = get_scenario(3)
        threshold = gamma_threshold(sc, 1.0)
        for gamma in (0.25 * threshold, 0.5 * threshold, 0.75 * threshold):
            compatibilize(sc, 1.0, gamma)
        with pytest.raises(ProgramStatusError):
            compatibilize(sc, 1.0, min(1.0, threshold + 0.05))
