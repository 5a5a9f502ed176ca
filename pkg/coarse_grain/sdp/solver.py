"""
Dense primal-dual interior-point solver for SdpProblem.

Pipeline:
    1. compile the problem to real data in hvec coordinates;
    2. presolve: reject inconsistent equalities (with a certificate), drop
       dependent rows, and substitute variables the equalities pin completely;
    3. run an infeasible-start HKM predictor-corrector method on the remaining
       variables, each Hermitian block held in its real symmetric embedding;
    4. decode the iterate back to Hermitian assignments.

Primal:  min <C, X>  s.t.  <A_i, X> = b_i,  X psd (block diagonal)
Dual:    max b.y     s.t.  sum_i y_i A_i + S = C,  S psd
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg

from .embedding import complex_to_real, hmat, hvec, real_to_complex
from .problem import (
    CompiledProblem,
    SdpProblem,
    SdpSolution,
    SolutionResiduals,
    SolverStatus,
    Value,
    Variable,
    VariableKind,
)

logger = logging.getLogger(__name__)

FEAS_TOL = 1e-8
GAP_TOL = 1e-8
MAX_ITER = 200
PRESOLVE_TOL = 1e-10
INFEASIBILITY_MARGIN = 1e-8
PIN_TOL = 1e-9
STEP_FACTOR = 0.95
DIVERGENCE_BOUND = 1e12


@dataclass
class PresolveResult:
    """Reduced problem data after affine reasoning on the equalities."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    columns: Dict[str, slice]
    fixed: Dict[str, np.ndarray] = field(default_factory=dict)
    constant: float = 0.0
    status: Optional[SolverStatus] = None
    certificate: Optional[Dict[str, Any]] = None
    rows_removed: int = 0


def independent_rows(A: np.ndarray, tol: float = PRESOLVE_TOL) -> np.ndarray:
    """Indices of a maximal linearly independent row subset, by pivoted QR of A^T."""
    if A.size == 0:
        return np.zeros(0, dtype=int)
    _, r, perm = scipy.linalg.qr(A.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        return np.zeros(0, dtype=int)
    rank = int(np.sum(diag > tol * diag[0]))
    return np.sort(perm[:rank])


def _cone_violation(var: Variable, value: np.ndarray, feas_tol: float) -> Optional[float]:
    if var.kind is VariableKind.HERMITIAN:
        h = hmat(value, var.dim)
        lam = float(scipy.linalg.eigvalsh(h)[0])
        if lam < -feas_tol * max(1.0, float(np.linalg.norm(h))):
            return lam
    elif var.kind is VariableKind.NONNEG and value[0] < -feas_tol:
        return float(value[0])
    return None


def presolve(
    compiled: CompiledProblem,
    variables: Dict[str, Variable],
    feas_tol: float = FEAS_TOL,
    presolve_tol: float = PRESOLVE_TOL,
) -> PresolveResult:
    """
    Affine presolve of the equality system A x = b.

    Inconsistent systems yield Infeasible with a Farkas vector y (A^T y = 0,
    b.y > 0). Variables whose every coordinate is determined by the equalities
    are cone-checked and substituted. Remaining rows are reduced to an
    independent set.
    """
    A, b, c = compiled.A, compiled.b, compiled.c
    n = A.shape[1]
    if A.shape[0] == 0:
        return PresolveResult(A, b, c, dict(compiled.columns))

    x_ls = scipy.linalg.lstsq(A, b)[0]
    residual = b - A @ x_ls
    res_norm = float(np.linalg.norm(residual))
    if res_norm > feas_tol * (1.0 + float(np.linalg.norm(b))):
        logger.info(f"Presolve: equality system inconsistent (residual {res_norm:.3e})")
        return PresolveResult(
            A,
            b,
            c,
            dict(compiled.columns),
            status=SolverStatus.INFEASIBLE,
            certificate={
                "kind": "inconsistent_equalities",
                "y": residual,
                "residual": res_norm,
                "b_dot_y": float(b @ residual),
            },
        )

    rows = independent_rows(A, presolve_tol)
    A1, b1 = A[rows], b[rows]
    if A1.shape[0] == 0:
        pinned = np.zeros(n, dtype=bool)
    else:
        nulls = scipy.linalg.null_space(A1, rcond=presolve_tol)
        if nulls.shape[1] == 0:
            pinned = np.ones(n, dtype=bool)
        else:
            pinned = np.linalg.norm(nulls, axis=1) <= PIN_TOL

    fixed: Dict[str, np.ndarray] = {}
    for name, var in variables.items():
        cols = compiled.columns[name]
        if not np.all(pinned[cols]):
            if var.kind is VariableKind.HERMITIAN:
                diag = np.arange(cols.start, cols.start + var.dim)
                bad = diag[pinned[diag] & (x_ls[diag] < -feas_tol)]
                if bad.size:
                    logger.info(f"Presolve: {name} has a diagonal entry pinned below zero")
                    return PresolveResult(
                        A,
                        b,
                        c,
                        dict(compiled.columns),
                        status=SolverStatus.INFEASIBLE,
                        certificate={
                            "kind": "pinned_diagonal_negative",
                            "variable": name,
                            "value": float(x_ls[bad[0]]),
                        },
                    )
            continue
        value = x_ls[cols]
        violation = _cone_violation(var, value, feas_tol)
        if violation is not None:
            logger.info(f"Presolve: {name} is pinned outside its cone ({violation:.3e})")
            return PresolveResult(
                A,
                b,
                c,
                dict(compiled.columns),
                status=SolverStatus.INFEASIBLE,
                certificate={
                    "kind": "fixed_variable_outside_cone",
                    "variable": name,
                    "min_eigenvalue": violation,
                },
            )
        fixed[name] = value

    keep: List[int] = []
    columns: Dict[str, slice] = {}
    fixed_cols: List[int] = []
    for name in variables:
        cols = list(range(n))[compiled.columns[name]]
        if name in fixed:
            fixed_cols.extend(cols)
        else:
            columns[name] = slice(len(keep), len(keep) + len(cols))
            keep.extend(cols)

    x_fixed = x_ls[fixed_cols]
    b2 = b1 - A1[:, fixed_cols] @ x_fixed
    A2 = A1[:, keep]
    rows2 = independent_rows(A2, presolve_tol)
    constant = float(c[fixed_cols] @ x_fixed)
    result = PresolveResult(
        A2[rows2],
        b2[rows2],
        c[keep],
        columns,
        fixed=fixed,
        constant=constant,
        rows_removed=A.shape[0] - len(rows2),
    )
    if not keep:
        result.status = SolverStatus.OPTIMAL
    logger.debug(
        f"Presolve: {len(fixed)} variable(s) pinned, {result.rows_removed} row(s) removed, "
        f"{len(keep)} coordinate(s) left"
    )
    return result


@dataclass
class _Block:
    var: str
    kind: VariableKind
    A: np.ndarray
    C: np.ndarray
    sign: float = 1.0

    @property
    def n(self) -> int:
        return self.C.shape[0]

    @property
    def A_flat(self) -> np.ndarray:
        return self.A.reshape(self.A.shape[0], -1)


def _build_blocks(pre: PresolveResult, variables: Dict[str, Variable]) -> List[_Block]:
    blocks: List[_Block] = []
    m = pre.A.shape[0]
    for name, cols in pre.columns.items():
        var = variables[name]
        a_cols, c_cols = pre.A[:, cols], pre.c[cols]
        if var.kind is VariableKind.HERMITIAN:
            d = var.dim
            A = np.array([complex_to_real(hmat(a_cols[i], d)) / 2 for i in range(m)])
            A = A.reshape(m, 2 * d, 2 * d)
            blocks.append(_Block(name, var.kind, A, complex_to_real(hmat(c_cols, d)) / 2))
        elif var.kind is VariableKind.NONNEG:
            blocks.append(_Block(name, var.kind, a_cols.reshape(m, 1, 1), c_cols.reshape(1, 1)))
        else:
            for sign in (1.0, -1.0):
                blocks.append(
                    _Block(
                        name,
                        var.kind,
                        sign * a_cols.reshape(m, 1, 1),
                        sign * c_cols.reshape(1, 1),
                        sign,
                    )
                )
    return blocks


def _inner(xs: List[np.ndarray], ys: List[np.ndarray]) -> float:
    return float(sum(np.sum(x * y) for x, y in zip(xs, ys)))


def _apply_A(blocks: List[_Block], xs: List[np.ndarray], m: int) -> np.ndarray:
    out = np.zeros(m)
    for blk, x in zip(blocks, xs):
        out += blk.A_flat @ x.reshape(-1)
    return out


def _apply_At(blocks: List[_Block], y: np.ndarray) -> List[np.ndarray]:
    return [np.tensordot(y, blk.A, axes=1) for blk in blocks]


def _max_step(x: np.ndarray, dx: np.ndarray) -> float:
    """Largest alpha with x + alpha dx psd, for x positive definite."""
    try:
        lower = scipy.linalg.cholesky(x, lower=True)
    except np.linalg.LinAlgError:
        return 0.0
    t = scipy.linalg.solve_triangular(lower, dx, lower=True)
    t = scipy.linalg.solve_triangular(lower, t.T, lower=True)
    lam = float(scipy.linalg.eigvalsh((t + t.T) / 2)[0])
    return np.inf if lam >= 0 else -1.0 / lam


def _step_length(xs: List[np.ndarray], dxs: List[np.ndarray]) -> float:
    alpha = min((_max_step(x, dx) for x, dx in zip(xs, dxs)), default=np.inf)
    return min(1.0, STEP_FACTOR * alpha)


class InteriorPointSolver:
    """
    HKM primal-dual path-following method with Mehrotra predictor-corrector.

    Attributes:
        feas_tol: Relative primal and dual infeasibility accepted as Optimal.
        gap_tol: Relative duality gap accepted as Optimal.
        max_iter: Iteration cap.
        presolve_tol: Rank tolerance of the presolve.
        infeasibility_margin: Margin for accepting a dual improving ray.
    """

    def __init__(
        self,
        feas_tol: float = FEAS_TOL,
        gap_tol: float = GAP_TOL,
        max_iter: int = MAX_ITER,
        presolve_tol: float = PRESOLVE_TOL,
        infeasibility_margin: float = INFEASIBILITY_MARGIN,
    ):
        self.feas_tol = feas_tol
        self.gap_tol = gap_tol
        self.max_iter = max_iter
        self.presolve_tol = presolve_tol
        self.infeasibility_margin = infeasibility_margin

    def solve(self, problem: SdpProblem) -> SdpSolution:
        compiled = problem.compile()
        pre = presolve(compiled, problem.variables, self.feas_tol, self.presolve_tol)
        info: Dict[str, Any] = {
            "problem": problem.name,
            "rows": int(compiled.A.shape[0]),
            "coordinates": int(compiled.A.shape[1]),
            "pinned_variables": sorted(pre.fixed),
            "rows_after_presolve": int(pre.A.shape[0]),
        }

        if pre.status is SolverStatus.INFEASIBLE:
            info["stage"] = "presolve"
            solution = SdpSolution(SolverStatus.INFEASIBLE, certificate=pre.certificate, info=info)
            self._log(solution)
            return solution

        if pre.status is SolverStatus.OPTIMAL:
            info["stage"] = "presolve"
            return self._finish(problem, compiled, pre, {}, None, SolverStatus.OPTIMAL, 0, info)

        blocks = _build_blocks(pre, problem.variables)
        if pre.A.shape[0] == 0:
            info["stage"] = "presolve"
            status = SolverStatus.OPTIMAL
            if any(scipy.linalg.eigvalsh(blk.C)[0] < -self.feas_tol for blk in blocks):
                status = SolverStatus.NUMERICAL_FAILURE
                info["reason"] = "unbounded: no constraints and an improving cone direction"
            xs = [np.zeros_like(blk.C) for blk in blocks]
            decoded = self._decode(blocks, xs)
            return self._finish(problem, compiled, pre, decoded, None, status, 0, info)

        return self._interior_point(problem, compiled, pre, blocks, info)

    def _decode(self, blocks: List[_Block], xs: List[np.ndarray]) -> Dict[str, np.ndarray]:
        coords: Dict[str, np.ndarray] = {}
        for blk, x in zip(blocks, xs):
            if blk.kind is VariableKind.HERMITIAN:
                coords[blk.var] = hvec(real_to_complex(x))
            else:
                coords[blk.var] = coords.get(blk.var, np.zeros(1)) + blk.sign * np.array([x[0, 0]])
        return coords

    def _full_vector(
        self, compiled: CompiledProblem, pre: PresolveResult, coords: Dict[str, np.ndarray]
    ) -> np.ndarray:
        x = np.zeros(compiled.A.shape[1])
        for name, cols in compiled.columns.items():
            if name in pre.fixed:
                x[cols] = pre.fixed[name]
            elif name in coords:
                x[cols] = coords[name]
        return x

    def _interior_point(
        self,
        problem: SdpProblem,
        compiled: CompiledProblem,
        pre: PresolveResult,
        blocks: List[_Block],
        info: Dict[str, Any],
    ) -> SdpSolution:
        m = pre.A.shape[0]
        b = pre.b
        n_total = sum(blk.n for blk in blocks)
        b_full_norm = float(np.linalg.norm(compiled.b))
        c_norm = float(np.sqrt(sum(np.sum(blk.C**2) for blk in blocks)))

        xs, ss = [], []
        for blk in blocks:
            a_norms = np.linalg.norm(blk.A_flat, axis=1)
            n = blk.n
            xi = max(10.0, np.sqrt(n), n * float(np.max((1 + np.abs(b)) / (1 + a_norms))))
            eta = max(10.0, np.sqrt(n), float(np.max(a_norms)), float(np.linalg.norm(blk.C)))
            xs.append(xi * np.eye(n))
            ss.append(eta * np.eye(n))
        y = np.zeros(m)

        history: List[Dict[str, float]] = []
        status = SolverStatus.MAX_ITERATIONS
        residuals = SolutionResiduals()
        stalls = 0
        it = 0
        for it in range(1, self.max_iter + 1):
            rp = b - _apply_A(blocks, xs, m)
            aty = _apply_At(blocks, y)
            rd = [blk.C - s - a for blk, s, a in zip(blocks, ss, aty)]
            xs_dot = _inner(xs, ss)
            mu = xs_dot / n_total
            pobj = _inner([blk.C for blk in blocks], xs) + pre.constant
            dobj = float(b @ y) + pre.constant

            x_full = self._full_vector(compiled, pre, self._decode(blocks, xs))
            pinf = float(np.linalg.norm(compiled.A @ x_full - compiled.b)) / (1.0 + b_full_norm)
            dinf = float(np.sqrt(sum(np.sum(r**2) for r in rd))) / (1.0 + c_norm)
            gap = xs_dot / (1.0 + abs(pobj) + abs(dobj))
            residuals = SolutionResiduals(pinf, dinf, gap)
            history.append(
                {"iter": it, "pobj": pobj, "dobj": dobj, "pinf": pinf, "dinf": dinf, "gap": gap}
            )
            logger.debug(
                f"it {it:3d} pobj {pobj:+.8e} dobj {dobj:+.8e} "
                f"pinf {pinf:.2e} dinf {dinf:.2e} gap {gap:.2e}"
            )

            if pinf <= self.feas_tol and dinf <= self.feas_tol and gap <= self.gap_tol:
                status = SolverStatus.OPTIMAL
                break

            certificate = self._primal_infeasibility(blocks, y, b)
            if certificate is not None:
                status = SolverStatus.INFEASIBLE
                info["certificate"] = certificate
                break

            if max(np.linalg.norm(x) for x in xs) > DIVERGENCE_BOUND or np.linalg.norm(y) > (
                DIVERGENCE_BOUND * 100
            ):
                status = SolverStatus.NUMERICAL_FAILURE
                info["reason"] = "iterates diverged"
                break

            try:
                direction = self._newton(blocks, xs, ss, rp, rd, mu, m)
            except np.linalg.LinAlgError as e:
                status = SolverStatus.NUMERICAL_FAILURE
                info["reason"] = f"factorization failed: {e}"
                break
            dxs, dy, dss, alpha_p, alpha_d = direction

            xs = [x + alpha_p * dx for x, dx in zip(xs, dxs)]
            y = y + alpha_d * dy
            ss = [s + alpha_d * ds for s, ds in zip(ss, dss)]
            history[-1].update({"alpha_p": alpha_p, "alpha_d": alpha_d})

            if alpha_p < 1e-10 and alpha_d < 1e-10:
                stalls += 1
                if stalls >= 5:
                    info["reason"] = "stalled"
                    break
            else:
                stalls = 0

        info["stage"] = "interior_point"
        info["history"] = history
        certificate = info.pop("certificate", None)
        if status is SolverStatus.INFEASIBLE:
            solution = SdpSolution(
                status, residuals=residuals, iterations=it, certificate=certificate, info=info
            )
            self._log(solution)
            return solution
        return self._finish(
            problem, compiled, pre, self._decode(blocks, xs), residuals, status, it, info
        )

    def _newton(
        self,
        blocks: List[_Block],
        xs: List[np.ndarray],
        ss: List[np.ndarray],
        rp: np.ndarray,
        rd: List[np.ndarray],
        mu: float,
        m: int,
    ) -> Tuple[List[np.ndarray], np.ndarray, List[np.ndarray], float, float]:
        s_invs = [
            scipy.linalg.cho_solve(scipy.linalg.cho_factor(s), np.eye(s.shape[0])) for s in ss
        ]

        schur = np.zeros((m, m))
        for blk, x, s_inv in zip(blocks, xs, s_invs):
            p = x @ blk.A @ s_inv
            schur += blk.A_flat @ p.reshape(m, -1).T
        schur = (schur + schur.T) / 2
        try:
            factor = scipy.linalg.cho_factor(schur)
        except np.linalg.LinAlgError:
            shift = 1e-12 * max(1.0, float(np.max(np.diag(schur))))
            factor = scipy.linalg.cho_factor(schur + shift * np.eye(m))

        def direction(sigma_mu: float, corr: Optional[List[np.ndarray]]):
            ks = []
            for k, (x, s_inv) in enumerate(zip(xs, s_invs)):
                target = sigma_mu * s_inv - x
                if corr is not None:
                    target = target - corr[k] @ s_inv
                ks.append(target)
            gs = [k - x @ r @ s_inv for k, x, r, s_inv in zip(ks, xs, rd, s_invs)]
            dy = scipy.linalg.cho_solve(factor, rp - _apply_A(blocks, gs, m))
            atdy = _apply_At(blocks, dy)
            dss = [r - a for r, a in zip(rd, atdy)]
            dxs = []
            for k, x, ds, s_inv in zip(ks, xs, dss, s_invs):
                dx = k - x @ ds @ s_inv
                dxs.append((dx + dx.T) / 2)
            return dxs, dy, dss

        dxs_a, _, dss_a = direction(0.0, None)
        ap = _step_length(xs, dxs_a)
        ad = _step_length(ss, dss_a)
        n_total = sum(x.shape[0] for x in xs)
        mu_aff = _inner(
            [x + ap * dx for x, dx in zip(xs, dxs_a)],
            [s + ad * ds for s, ds in zip(ss, dss_a)],
        ) / n_total
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3 if mu > 0 else 0.0

        corr = [dx @ ds for dx, ds in zip(dxs_a, dss_a)]
        dxs, dy, dss = direction(sigma * mu, corr)
        return dxs, dy, dss, _step_length(xs, dxs), _step_length(ss, dss)

    def _primal_infeasibility(
        self, blocks: List[_Block], y: np.ndarray, b: np.ndarray
    ) -> Optional[Dict[str, Any]]:
        """A dual improving ray: b.y > 0 with sum y_i A_i negative semidefinite up to margin."""
        by = float(b @ y)
        if by <= 0.0:
            return None
        y_norm = float(np.linalg.norm(y))
        if by < np.sqrt(self.infeasibility_margin) * float(np.linalg.norm(b)) * y_norm:
            return None
        lam = min(float(scipy.linalg.eigvalsh(-a)[0]) for a in _apply_At(blocks, y))
        if lam / by < -self.infeasibility_margin:
            return None
        return {"kind": "dual_improving_ray", "y": y / by, "min_eigenvalue": lam / by}

    def _finish(
        self,
        problem: SdpProblem,
        compiled: CompiledProblem,
        pre: PresolveResult,
        coords: Dict[str, np.ndarray],
        residuals: Optional[SolutionResiduals],
        status: SolverStatus,
        iterations: int,
        info: Dict[str, Any],
    ) -> SdpSolution:
        x = self._full_vector(compiled, pre, coords)
        assignments: Dict[str, Value] = {}
        for name, var in problem.variables.items():
            cols = x[compiled.columns[name]]
            if var.kind is VariableKind.HERMITIAN:
                assignments[name] = hmat(cols, var.dim)
            else:
                assignments[name] = float(cols[0])
        if residuals is None:
            pinf = float(np.linalg.norm(compiled.A @ x - compiled.b)) / (
                1.0 + float(np.linalg.norm(compiled.b))
            )
            residuals = SolutionResiduals(pinf, 0.0, 0.0)
        objective = compiled.sign * float(compiled.c @ x)
        solution = SdpSolution(
            status,
            objective_value=objective,
            assignments=assignments,
            residuals=residuals,
            iterations=iterations,
            info=info,
        )
        self._log(solution)
        return solution

    def _log(self, solution: SdpSolution):
        logger.info(
            f"SDP {solution.info.get('problem', '?')}: {solution.status.value} after "
            f"{solution.iterations} iteration(s) ({solution.info.get('stage', '?')})"
        )


def solve(
    problem: SdpProblem,
    feas_tol: float = FEAS_TOL,
    gap_tol: float = GAP_TOL,
    max_iter: int = MAX_ITER,
    presolve_tol: float = PRESOLVE_TOL,
    infeasibility_margin: float = INFEASIBILITY_MARGIN,
) -> SdpSolution:
    """Solve an SdpProblem; numerical trouble is reported through the status, never raised."""
    solver = InteriorPointSolver(feas_tol, gap_tol, max_iter, presolve_tol, infeasibility_margin)
    try:
        return solver.solve(problem)
    except (np.linalg.LinAlgError, FloatingPointError) as e:
        logger.exception(f"SDP {problem.name}: numerical failure: {e}")
        return SdpSolution(
            SolverStatus.NUMERICAL_FAILURE, info={"problem": problem.name, "reason": str(e)}
        )
