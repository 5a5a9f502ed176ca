"""
Tests for the dense SDP layer: embedding, problem builder and solver.
"""

import json

import numpy as np
import pytest

from coarse_grain.core.errors import NotHermitianError, SdpDefinitionError
from coarse_grain.sdp import SdpProblem, SolverStatus, complex_to_real, real_to_complex, solve
from coarse_grain.sdp.embedding import hmat, hvec


def _random_hermitian(rng, d):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (g + g.conj().T) / 2


def max_eigenvalue_problem(diag=(1.0, 2.0)):
    p = SdpProblem("max-eig")
    p.add_scalar("t", nonneg=False)
    p.add_hermitian("S", 2)
    p.add_constraint(
        "shift",
        [("t", lambda x: x * np.eye(2)), ("S", lambda s: -s)],
        np.diag(diag).astype(complex),
    )
    p.set_objective({"t": 1.0})
    return p


class TestEmbedding:
    def test_real_symmetric_input_is_block_diagonal(self):
        h = np.array([[2.0, 1.0], [1.0, -1.0]])
        expected = np.block([[h, np.zeros((2, 2))], [np.zeros((2, 2)), h]])
        np.testing.assert_allclose(complex_to_real(h), expected)

    def test_spectrum_is_doubled(self):
        y = complex_to_real(np.array([[0, 1j], [-1j, 0]]))
        np.testing.assert_allclose(np.linalg.eigvalsh(y), [-1, -1, 1, 1], atol=1e-12)

    def test_psd_equivalence(self):
        rng = np.random.default_rng(91)
        for _ in range(50):
            h = _random_hermitian(rng, 3)
            min_h = np.linalg.eigvalsh(h)[0]
            min_y = np.linalg.eigvalsh(complex_to_real(h))[0]
            assert min_h == pytest.approx(min_y, abs=1e-10)

    def test_real_to_complex_inverts(self):
        h = _random_hermitian(np.random.default_rng(92), 4)
        np.testing.assert_allclose(real_to_complex(complex_to_real(h)), h)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            complex_to_real(np.array([[0, 1], [0, 0]]))

    def test_hvec_is_an_isometry(self):
        rng = np.random.default_rng(93)
        g, h = _random_hermitian(rng, 3), _random_hermitian(rng, 3)
        assert hvec(g) @ hvec(h) == pytest.approx(np.trace(g @ h).real)
        np.testing.assert_allclose(hmat(hvec(g), 3), g)


class TestProblemBuilder:
    def test_unknown_variable(self):
        p = SdpProblem()
        with pytest.raises(SdpDefinitionError):
            p.add_constraint("c", [("X", lambda x: x)], 1.0)
        with pytest.raises(SdpDefinitionError):
            p.set_objective({"X": 1.0})

    def test_duplicate_variable(self):
        p = SdpProblem()
        p.add_hermitian("X", 2)
        with pytest.raises(SdpDefinitionError):
            p.add_scalar("X")

    def test_non_hermitian_target(self):
        p = SdpProblem()
        p.add_hermitian("X", 2)
        with pytest.raises(SdpDefinitionError):
            p.add_constraint("c", [("X", lambda x: x)], np.array([[0, 1], [0, 0]]))

    def test_json_dump(self):
        data = json.loads(max_eigenvalue_problem().to_json())
        assert data["name"] == "max-eig"
        assert data["constraints"] == [{"name": "shift", "variables": ["t", "S"], "rows": 4}]
        assert {v["name"] for v in data["variables"]} == {"t", "S"}


class TestSolver:
    """Status, objective and residual behaviour of solve()."""

    def test_max_eigenvalue(self):
        solution = solve(max_eigenvalue_problem())
        assert solution.status is SolverStatus.OPTIMAL
        assert solution.objective_value == pytest.approx(2.0, abs=1e-6)
        assert solution.assignments["t"] == pytest.approx(2.0, abs=1e-6)
        assert solution.residuals.gap <= 1e-8

    def test_maximization(self):
        p = SdpProblem("max-trace")
        p.add_hermitian("X", 2)
        p.add_constraint("unit_trace", [("X", np.trace)], 1.0)
        p.set_objective({"X": np.diag([0.5, 3.0]).astype(complex)}, "max")
        solution = solve(p)
        assert solution.is_optimal
        assert solution.objective_value == pytest.approx(3.0, abs=1e-6)

    def test_residuals_match_recomputed_violations(self):
        p = max_eigenvalue_problem((0.3, -1.2))
        solution = solve(p)
        assert solution.is_optimal
        recomputed = p.primal_residual(solution.assignments)
        assert recomputed == pytest.approx(solution.residuals.primal, abs=1e-10)
        assert p.objective_value(solution.assignments) == pytest.approx(
            solution.objective_value, abs=1e-10
        )

    def test_pinned_negative_diagonal_is_infeasible(self):
        p = SdpProblem("bound-violation")
        p.add_hermitian("X", 2)
        p.add_constraint("unit_trace", [("X", np.trace)], 1.0)
        p.add_constraint(
            "weighted", [("X", lambda x: np.trace(np.diag([1.0, -1.0]) @ x))], 3.0
        )
        solution = solve(p)
        assert solution.status is SolverStatus.INFEASIBLE
        assert solution.certificate["kind"] == "pinned_diagonal_negative"

    def test_inconsistent_equalities(self):
        p = SdpProblem("inconsistent")
        p.add_hermitian("X", 2)
        p.add_constraint("one", [("X", np.trace)], 1.0)
        p.add_constraint("two", [("X", np.trace)], 2.0)
        solution = solve(p)
        assert solution.is_infeasible
        certificate = solution.certificate
        assert certificate["kind"] == "inconsistent_equalities"
        assert certificate["b_dot_y"] > 0

    def test_pinned_variable_outside_cone(self):
        p = SdpProblem("pinned")
        p.add_hermitian("X", 2)
        p.add_constraint("fix", [("X", lambda x: x)], np.diag([1.0, -0.5]).astype(complex))
        solution = solve(p)
        assert solution.is_infeasible
        assert solution.certificate["kind"] in (
            "pinned_diagonal_negative",
            "fixed_variable_outside_cone",
        )

    def test_fully_pinned_problem_is_solved_in_presolve(self):
        p = SdpProblem("pinned")
        p.add_hermitian("X", 2)
        target = np.array([[0.5, 0.25j], [-0.25j, 0.5]])
        p.add_constraint("fix", [("X", lambda x: x)], target)
        solution = solve(p)
        assert solution.is_optimal
        assert solution.info["stage"] == "presolve"
        np.testing.assert_allclose(solution.assignments["X"], target, atol=1e-12)

    def test_off_diagonal_infeasibility_is_not_optimal(self):
        """Tr X = 1 with Re X01 = 2 violates |X01| <= sqrt(X00 X11)."""
        p = SdpProblem("coherence")
        p.add_hermitian("X", 2)
        p.add_constraint("unit_trace", [("X", np.trace)], 1.0)
        p.add_constraint("coherence", [("X", lambda x: np.real(x[0, 1]))], 2.0)
        solution = solve(p, max_iter=100)
        assert solution.status is not SolverStatus.OPTIMAL
        if solution.is_infeasible:
            assert solution.certificate is not None

    def test_solution_json(self):
        data = json.loads(solve(max_eigenvalue_problem()).to_json())
        assert data["status"] == "Optimal"
        assert set(data["residuals"]) == {"primal", "dual", "gap"}
        assert "real_part" in data["assignments"]["S"]
