"""
Coarse-graining semidefinite programs.

All channel data enter as Choi matrices with the input space first. The
commutation requirement Gamma o CG = CG o U is imposed in Choi form:

    compose(rho_DC, J_CA) == compose(J_DB, J_BA)

where J_CA = J_DB is the Choi matrix of the coarse-graining and J_BA that of
the microscopic dynamics.
"""

import logging
from typing import Any, Dict, Tuple, Union

import numpy as np

from ..core.channels import (
    ConditionalForm,
    ConditionalState,
    KrausChannel,
    compose_choi_matrices,
    kraus_to_choi,
)
from ..core.errors import (
    BaseIncompatibleError,
    DimensionMismatchError,
    InfeasibleError,
    OutOfRangeError,
    SolverFailureError,
)
from ..core.linalg import BipartiteDims, Subsystem, as_matrix, partial_trace, tensor_product
from ..core.scenarios import Scenario
from .problem import SdpProblem, SdpSolution
from .solver import FEAS_TOL, GAP_TOL, solve

logger = logging.getLogger(__name__)

DIAMOND_FORMULATIONS = ("dual", "primal")


def _choi(matrix, dim_in: int, dim_out: int) -> ConditionalState:
    return ConditionalState(BipartiteDims(dim_in, dim_out), ConditionalForm.CHOI, matrix)


def _require(solution: SdpSolution, what: str, options: Dict[str, Any]) -> SdpSolution:
    if solution.is_infeasible:
        raise InfeasibleError(f"{what}: infeasible", solution)
    feas_tol = options.get("feas_tol", FEAS_TOL)
    gap_tol = options.get("gap_tol", GAP_TOL)
    if not solution.near_optimal(feas_tol, gap_tol):
        raise SolverFailureError(
            f"{what}: solver stopped with status {solution.status.value}", solution
        )
    if not solution.is_optimal:
        logger.warning(
            f"{what}: accepting {solution.status.value} iterate "
            f"(residuals {solution.residuals.to_dict()})"
        )
    return solution


class _ScenarioData:
    """Choi matrices of one scenario at one time."""

    def __init__(self, sc: Scenario, t: float):
        self.sc = sc
        self.dim_a = sc.cg.dim_in
        self.dim_c = sc.cg.dim_out
        self.j_ca = kraus_to_choi(sc.cg).matrix
        self.j_db = self.j_ca
        self.j_ba = kraus_to_choi(sc.unitary(t)).matrix

    def after_cg(self, emergent):
        """Choi matrix of emergent o CG (A -> D)."""
        return compose_choi_matrices(emergent, self.j_ca, self.dim_a, self.dim_c, self.dim_c)

    def cg_after(self, micro):
        """Choi matrix of CG o micro (A -> D)."""
        return compose_choi_matrices(self.j_db, micro, self.dim_a, self.dim_a, self.dim_c)

    def trace_out(self, m, dim_in: int, dim_out: int):
        return partial_trace(m, BipartiteDims(dim_in, dim_out), Subsystem.A)


def _add_diamond_bound(p: SdpProblem, dims: BipartiteDims, lhs_terms, rhs) -> None:
    """Z, X psd with lhs + Z - X = rhs and eps I - Tr_B(Z + X) = W psd; minimize eps."""
    tr_b = lambda m: partial_trace(m, dims, Subsystem.A)  # noqa: E731
    eye_a = np.eye(dims.dim_a)
    p.add_hermitian("Z", dims.total)
    p.add_hermitian("X", dims.total)
    p.add_hermitian("W", dims.dim_a)
    p.add_scalar("eps")
    p.add_constraint("difference", list(lhs_terms) + [("Z", lambda z: z), ("X", lambda x: -x)], rhs)
    p.add_constraint(
        "trace_bound",
        [
            ("eps", lambda e: e * eye_a),
            ("Z", lambda z: -tr_b(z)),
            ("X", lambda x: -tr_b(x)),
            ("W", lambda w: -w),
        ],
        np.zeros((dims.dim_a, dims.dim_a)),
    )
    p.set_objective({"eps": 1.0}, "min")


def diamond_norm_problem(delta, dims: BipartiteDims, formulation: str = "dual") -> SdpProblem:
    """The diamond-norm program for a Hermitian Choi difference."""
    m = as_matrix(delta)
    dims = BipartiteDims(*dims)
    if m.shape != (dims.total, dims.total):
        raise DimensionMismatchError(f"Choi difference of shape {m.shape} for dims {tuple(dims)}")
    if formulation == "dual":
        p = SdpProblem("diamond_norm")
        _add_diamond_bound(p, dims, [], m)
        return p
    if formulation == "primal":
        eye_b = np.eye(dims.dim_b)
        p = SdpProblem("diamond_norm_primal")
        p.add_hermitian("rho", dims.dim_a)
        p.add_hermitian("P", dims.total)
        p.add_hermitian("Q", dims.total)
        p.add_constraint(
            "split",
            [
                ("P", lambda x: x),
                ("Q", lambda x: x),
                ("rho", lambda r: -2 * tensor_product(r, eye_b)),
            ],
            np.zeros((dims.total, dims.total)),
        )
        p.add_constraint("unit_trace", [("rho", lambda r: np.trace(r))], 1.0)
        p.set_objective({"Q": m / 2, "P": -m / 2}, "max")
        return p
    raise ValueError(f"formulation must be one of {DIAMOND_FORMULATIONS}, got {formulation!r}")


def diamond_norm(
    delta_choi: Union[ConditionalState, np.ndarray],
    dims: BipartiteDims = None,
    formulation: str = "dual",
    **solver_options,
) -> float:
    """
    Diamond norm of the Hermiticity-preserving map with the given Choi matrix.

    For a difference of two channels the value lies in [0, 2].
    """
    if isinstance(delta_choi, ConditionalState):
        dims = delta_choi.dims
        delta = delta_choi.to_choi().matrix
    else:
        if dims is None:
            raise DimensionMismatchError("dims are required for a raw Choi matrix")
        delta = as_matrix(delta_choi)
    problem = diamond_norm_problem(delta, dims, formulation)
    solution = _require(solve(problem, **solver_options), problem.name, solver_options)
    return float(solution.objective_value)


def _add_emergent_variable(p: SdpProblem, data: _ScenarioData, name: str = "rho_DC") -> None:
    """CPTP emergent channel C -> D commuting with the scenario."""
    dc = data.dim_c
    p.add_hermitian(name, dc * dc)
    p.add_constraint(
        "trace_preserving",
        [(name, lambda r: data.trace_out(r, dc, dc))],
        np.eye(dc),
    )
    p.add_constraint(
        "commutation",
        [(name, lambda r: data.after_cg(r))],
        data.cg_after(data.j_ba),
    )


def closest_state_independent(
    petz: KrausChannel, sc: Scenario, t: float = 0.0, **solver_options
) -> Tuple[float, ConditionalState]:
    """
    Closest state-independent emergent channel to a Petz emergent channel.

    Minimizes eps subject to exact commutation, CPTP and the diamond-norm
    bound |Gamma_petz - Gamma| <= eps.

    Raises:
        InfeasibleError: When no state-independent emergent channel exists.
    """
    data = _ScenarioData(sc, t)
    dc = data.dim_c
    if (petz.dim_in, petz.dim_out) != (dc, dc):
        raise DimensionMismatchError(
            f"Petz channel acts {petz.dim_in}->{petz.dim_out}, expected {dc}->{dc}"
        )
    p = SdpProblem(f"closest_state_independent[s{sc.id}]")
    _add_emergent_variable(p, data)
    _add_diamond_bound(
        p, BipartiteDims(dc, dc), [("rho_DC", lambda r: r)], kraus_to_choi(petz).matrix
    )
    solution = _require(solve(p, **solver_options), p.name, solver_options)
    return float(solution.objective_value), _choi(solution.assignments["rho_DC"], dc, dc)


def feasibility_emergent(sc: Scenario, t: float = 0.0, **solver_options) -> ConditionalState:
    """
    Any CPTP emergent channel commuting with the scenario at all inputs.

    Raises:
        InfeasibleError: When the scenario admits none.
    """
    data = _ScenarioData(sc, t)
    p = SdpProblem(f"feasibility_emergent[s{sc.id}]")
    _add_emergent_variable(p, data)
    solution = _require(solve(p, **solver_options), p.name, solver_options)
    return _choi(solution.assignments["rho_DC"], data.dim_c, data.dim_c)


def cg_robustness(sc: Scenario, noise: KrausChannel, t: float = 0.0, **solver_options) -> float:
    """
    CG-compatibility robustness of the scenario's unitary against a noise channel.

    Returns 1 - min gamma over mixtures gamma U + (1 - gamma) noise that still
    admit an emergent channel.

    Raises:
        BaseIncompatibleError: When the unmixed unitary admits no emergent channel.
    """
    data = _ScenarioData(sc, t)
    if (noise.dim_in, noise.dim_out) != (data.dim_a, data.dim_a):
        raise DimensionMismatchError(
            f"noise acts {noise.dim_in}->{noise.dim_out}, expected {data.dim_a}->{data.dim_a}"
        )
    try:
        feasibility_emergent(sc, t, **solver_options)
    except InfeasibleError as e:
        raise BaseIncompatibleError(
            f"scenario {sc.id} at t={t} admits no emergent channel: {e}"
        ) from e

    k_base = data.cg_after(data.j_ba)
    k_noise = data.cg_after(kraus_to_choi(noise).matrix)
    dc = data.dim_c
    p = SdpProblem(f"cg_robustness[s{sc.id}]")
    p.add_hermitian("omega", dc * dc)
    p.add_scalar("gamma")
    p.add_scalar("slack")
    p.add_constraint(
        "trace_preserving", [("omega", lambda w: data.trace_out(w, dc, dc))], np.eye(dc)
    )
    p.add_constraint("mixture", [("gamma", lambda g: g), ("slack", lambda s: s)], 1.0)
    p.add_constraint(
        "commutation",
        [("omega", data.after_cg), ("gamma", lambda g: -g * (k_base - k_noise))],
        k_noise,
    )
    p.set_objective({"gamma": 1.0}, "min")
    solution = _require(solve(p, **solver_options), p.name, solver_options)
    gamma = float(np.clip(solution.assignments["gamma"], 0.0, 1.0))
    return 1.0 - gamma


def _compatibilize_problem(data: _ScenarioData, gamma: float) -> SdpProblem:
    da, dc = data.dim_a, data.dim_c
    p = SdpProblem(f"compatibilize[s{data.sc.id},gamma={gamma:.6f}]")
    p.add_hermitian("psi", da * da)
    p.add_hermitian("theta", dc * dc)
    p.add_constraint(
        "psi_trace_preserving", [("psi", lambda s: data.trace_out(s, da, da))], np.eye(da)
    )
    p.add_constraint(
        "theta_trace_preserving", [("theta", lambda s: data.trace_out(s, dc, dc))], np.eye(dc)
    )
    p.add_constraint(
        "commutation",
        [
            ("theta", data.after_cg),
            ("psi", lambda s: -(1.0 - gamma) * data.cg_after(s)),
        ],
        gamma * data.cg_after(data.j_ba),
    )
    return p


def compatibilize(
    sc: Scenario, t: float, gamma: float, **solver_options
) -> Tuple[ConditionalState, ConditionalState]:
    """
    Noise psi making gamma U + (1 - gamma) psi compatible, with its emergent theta.

    Raises:
        InfeasibleError: When no such pair exists at this gamma.
    """
    if not 0.0 <= gamma <= 1.0:
        raise OutOfRangeError(f"gamma must be in [0, 1], got {gamma}")
    data = _ScenarioData(sc, t)
    p = _compatibilize_problem(data, gamma)
    solution = _require(solve(p, **solver_options), p.name, solver_options)
    da, dc = data.dim_a, data.dim_c
    return _choi(solution.assignments["psi"], da, da), _choi(solution.assignments["theta"], dc, dc)


def _gamma_direct(data: _ScenarioData, solver_options: Dict[str, Any]) -> float:
    """max gamma with psi' = (1 - gamma) psi, which makes the program jointly linear."""
    da, dc = data.dim_a, data.dim_c
    eye_a = np.eye(da)
    k_u = data.cg_after(data.j_ba)
    p = SdpProblem(f"gamma_threshold[s{data.sc.id}]")
    p.add_hermitian("psi_scaled", da * da)
    p.add_hermitian("theta", dc * dc)
    p.add_scalar("gamma")
    p.add_scalar("slack")
    p.add_constraint(
        "psi_trace",
        [("psi_scaled", lambda s: data.trace_out(s, da, da)), ("gamma", lambda g: g * eye_a)],
        eye_a,
    )
    p.add_constraint(
        "theta_trace_preserving", [("theta", lambda s: data.trace_out(s, dc, dc))], np.eye(dc)
    )
    p.add_constraint(
        "commutation",
        [
            ("theta", data.after_cg),
            ("psi_scaled", lambda s: -data.cg_after(s)),
            ("gamma", lambda g: -g * k_u),
        ],
        np.zeros_like(k_u),
    )
    p.add_constraint("mixture", [("gamma", lambda g: g), ("slack", lambda s: s)], 1.0)
    p.set_objective({"gamma": 1.0}, "max")
    solution = _require(solve(p, **solver_options), p.name, solver_options)
    return float(np.clip(solution.assignments["gamma"], 0.0, 1.0))


def gamma_threshold(
    sc: Scenario,
    t: float = 1.0,
    tol: float = 1e-3,
    method: str = "bisection",
    **solver_options,
) -> float:
    """
    Largest gamma for which compatibilize is feasible.

    Bisection counts a trial gamma as feasible only when the solver reports Optimal.
    method="direct" solves the single jointly linear program instead.
    """
    data = _ScenarioData(sc, t)
    if method == "direct":
        return _gamma_direct(data, solver_options)
    if method != "bisection":
        raise ValueError(f"method must be 'bisection' or 'direct', got {method!r}")

    def feasible(gamma: float) -> bool:
        solution = solve(_compatibilize_problem(data, gamma), **solver_options)
        logger.debug(f"gamma trial {gamma:.6f}: {solution.status.value}")
        return solution.is_optimal

    if not feasible(0.0):
        raise InfeasibleError(f"scenario {sc.id}: compatibilize is infeasible even at gamma = 0")
    if feasible(1.0):
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    logger.info(f"scenario {sc.id}: gamma threshold in [{lo:.6f}, {hi:.6f}]")
    return lo
