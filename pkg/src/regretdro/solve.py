"""Solver backends behind one dispatch surface.

Polyhedral problems (vertex polytopes and boxes with a polyhedral dual
norm) compile to LPs and run on the in-package dense simplex. Norm-ball
feasible sets run a projected subgradient method on the exact nonsmooth
objective. Reported objectives are always on the regret/cost scale of the
original problem, including the constant nominal best-cost term, so they
can be compared directly against the evaluation functions in `regret`.

Every solve is single-threaded, allocation-light and deterministic:
identical inputs (and seed) reproduce bitwise-identical reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _simplex
from .errors import UnsupportedCombination
from .geometry import (
    Box,
    FeasibleSet,
    NormBall,
    NormTag,
    VPolytope,
    min_cost,
    project,
    support_function,
    vector_norm,
)
from .regret import (
    AmbiguitySet,
    DiscreteDistribution,
    _risk,
    sorted_tail_weights,
    worst_case_cvar_regret,
    worst_case_expected_regret,
)
from .reformulate import (
    CompiledProblem,
    LinearProgram,
    build_dro,
    build_support_reform,
    build_vrep,
    build_wcvar,
)


class SolveMethod(Enum):
    SIMPLEX = "simplex"
    SUBGRADIENT = "subgradient"


class SolveStatus(Enum):
    OPTIMAL = "optimal"
    ITERATION_LIMIT = "iteration_limit"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True, eq=False)
class SolveReport:
    """Outcome of one solve: decision, objective, regularizer value, metadata."""

    x_star: np.ndarray
    objective: float
    lambda_star: float
    method: SolveMethod
    iterations: int
    residuals: float
    status: SolveStatus

    def __post_init__(self):
        x = np.array(self.x_star, dtype=float).reshape(-1)
        x.setflags(write=False)
        object.__setattr__(self, "x_star", x)


@dataclass(frozen=True)
class SubgradientParams:
    """Projected-subgradient knobs.

    The step at iteration k is step_c / sqrt(k) applied to the unit-norm
    subgradient direction, so step_c is a length scale in decision space.
    A run stops early once the best objective has not improved by more than
    stall_tol for stall_window consecutive iterations. seed=None starts from
    the projected nominal mean; an integer seed draws a random feasible
    start instead.
    """

    max_iter: int = 50000
    step_c: float = 1.0
    stall_window: int = 500
    stall_tol: float = 1e-9
    seed: int | None = None

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.step_c <= 0.0:
            raise ValueError("step_c must be positive")
        if self.stall_window < 1:
            raise ValueError("stall_window must be at least 1")


_STATUS_FROM_KERNEL = {
    _simplex.OPTIMAL: SolveStatus.OPTIMAL,
    _simplex.INFEASIBLE: SolveStatus.INFEASIBLE,
    _simplex.UNBOUNDED: SolveStatus.UNBOUNDED,
}


def _lp_residual(lp: LinearProgram, z: np.ndarray) -> float:
    res = 0.0
    if lp.ineq_matrix.shape[0]:
        res = max(res, float(np.max(lp.ineq_matrix @ z - lp.ineq_rhs)))
    if lp.eq_matrix.shape[0]:
        res = max(res, float(np.max(np.abs(lp.eq_matrix @ z - lp.eq_rhs))))
    for zj, (lo, hi) in zip(z, lp.bounds):
        res = max(res, lo - zj, zj - hi)
    return max(res, 0.0)


def simplex_solve(lp: LinearProgram) -> SolveReport:
    """Solve an emitted LP with the two-phase dense simplex.

    x_star carries the full variable vector; callers slice decisions out.
    Raises NumericalBreakdown on unusable pivots.
    """
    status, z, value, pivots = _simplex.solve_bounded(
        lp.objective, lp.ineq_matrix, lp.ineq_rhs, lp.eq_matrix, lp.eq_rhs, lp.bounds
    )
    if status is not _simplex.OPTIMAL:
        nan = float("nan")
        return SolveReport(
            x_star=np.full(lp.n_vars, nan),
            objective=nan,
            lambda_star=nan,
            method=SolveMethod.SIMPLEX,
            iterations=pivots,
            residuals=nan,
            status=_STATUS_FROM_KERNEL[status],
        )
    return SolveReport(
        x_star=z,
        objective=value,
        lambda_star=float("nan"),
        method=SolveMethod.SIMPLEX,
        iterations=pivots,
        residuals=_lp_residual(lp, z),
        status=SolveStatus.OPTIMAL,
    )


@dataclass(frozen=True, eq=False)
class SubgradientObjective:
    """Composite nonsmooth objective for the projected subgradient method.

    mean_cost drives the linear term (expected problems); for CVaR problems
    the atom matrix/weights/offsets replace it with the exact tail value.
    rho multiplies the regularizer: the farthest-point distance for regret
    problems, the plain dual norm of x for cost-robust problems.
    """

    mean_cost: np.ndarray
    rho: float
    dual: NormTag
    regularizer: str  # "farthest" | "dual_norm"
    alpha: float | None = None
    atom_matrix: np.ndarray | None = None
    atom_weights: np.ndarray | None = None
    atom_offsets: np.ndarray | None = None

    @classmethod
    def expected_regret(cls, nominal: DiscreteDistribution, r: float, dual: NormTag):
        return cls(mean_cost=nominal.mean(), rho=r, dual=dual, regularizer="farthest")

    @classmethod
    def expected_cost(cls, nominal: DiscreteDistribution, r: float, dual: NormTag):
        return cls(mean_cost=nominal.mean(), rho=r, dual=dual, regularizer="dual_norm")

    @classmethod
    def cvar_regret(cls, set_: FeasibleSet, nominal: DiscreteDistribution, r: float, alpha: float, dual: NormTag):
        offsets = np.array([min_cost(set_, wj) for wj in nominal.points])
        return cls(
            mean_cost=nominal.mean(),
            rho=r / (1.0 - alpha),
            dual=dual,
            regularizer="farthest",
            alpha=alpha,
            atom_matrix=nominal.points,
            atom_weights=nominal.weights,
            atom_offsets=offsets,
        )


def _farthest_evaluator(set_: FeasibleSet, dual: NormTag):
    """Closed-form farthest-distance value/subgradient for the hot loop.

    The 2n support values entering the sup-norm decomposition do not depend
    on x, so they are computed once up front. Returns f(x) -> (value, sub).
    """
    n = set_.dim
    if dual is NormTag.LINF:
        sigma_up = np.empty(n)
        sigma_dn = np.empty(n)
        for i in range(n):
            e = np.zeros(n)
            e[i] = 1.0
            sigma_up[i] = support_function(set_, e)
            sigma_dn[i] = support_function(set_, -e)

        def eval_linf(x):
            rows = np.empty(2 * n)
            rows[0::2] = sigma_up - x
            rows[1::2] = sigma_dn + x
            idx = int(np.argmax(rows))
            sub = np.zeros(n)
            sub[idx // 2] = -1.0 if idx % 2 == 0 else 1.0
            return float(rows[idx]), sub

        return eval_linf
    if isinstance(set_, NormBall) and set_.ball_norm is NormTag.L2 and dual is NormTag.L2:
        center = set_.center
        radius = set_.radius

        def eval_l2(x):
            diff = x - center
            dist = math.sqrt(float(diff @ diff))
            sub = diff / dist if dist > 0.0 else np.zeros_like(diff)
            return dist + radius, sub

        return eval_l2
    raise UnsupportedCombination(
        f"farthest-point subgradient for {type(set_).__name__} with "
        f"{dual.value}-norm has no exact route"
    )


def _dual_norm_evaluator(dual: NormTag):
    def eval_norm(x):
        if dual is NormTag.LINF:
            i = int(np.argmax(np.abs(x)))
            sub = np.zeros_like(x)
            if x[i] != 0.0:
                sub[i] = 1.0 if x[i] > 0.0 else -1.0
            return float(abs(x[i])), sub
        if dual is NormTag.L1:
            return float(np.sum(np.abs(x))), np.sign(x)
        nrm = math.sqrt(float(x @ x))
        return nrm, (x / nrm if nrm > 0.0 else np.zeros_like(x))

    return eval_norm


def _random_feasible(set_: FeasibleSet, rng: np.random.Generator) -> np.ndarray:
    if isinstance(set_, Box):
        return rng.uniform(set_.lower, set_.upper)
    if isinstance(set_, NormBall) and set_.ball_norm is NormTag.L2:
        direction = rng.standard_normal(set_.dim)
        nrm = float(np.linalg.norm(direction))
        if nrm == 0.0:
            return set_.center.copy()
        scale = set_.radius * rng.uniform() ** (1.0 / set_.dim)
        return set_.center + direction * (scale / nrm)
    raise UnsupportedCombination("random feasible start needs a projectable set")


def subgradient_solve(set_: FeasibleSet, objective: SubgradientObjective, params: SubgradientParams | None = None) -> SolveReport:
    """Projected subgradient descent with best-iterate tracking.

    Requires a projectable set (box or L2 ball). The regularizer
    subgradient follows the farthest witness: the signed active coordinate
    for the sup norm (lowest index on ties), the radial direction for the
    L2 norm. CVaR objectives contribute the tail-averaged atom subgradient
    under the same sorted-tail rule as the exact evaluator.
    """
    params = params or SubgradientParams()
    if not (isinstance(set_, Box) or (isinstance(set_, NormBall) and set_.ball_norm is NormTag.L2)):
        raise UnsupportedCombination(
            f"subgradient solver needs a projectable set, got {type(set_).__name__}"
        )
    if objective.regularizer == "farthest":
        reg_eval = _farthest_evaluator(set_, objective.dual)
    else:
        reg_eval = _dual_norm_evaluator(objective.dual)

    cvar = objective.atom_matrix is not None
    if cvar:
        W = objective.atom_matrix
        weights = objective.atom_weights
        offsets = objective.atom_offsets
        one_minus = 1.0 - objective.alpha
    mean = objective.mean_cost
    rho = objective.rho

    if params.seed is not None:
        x = project(set_, _random_feasible(set_, np.random.default_rng(params.seed)))
    else:
        x = project(set_, mean)

    best_f = math.inf
    best_x = x.copy()
    since_improve = 0
    stalled = False
    k = 0
    while k < params.max_iter:
        k += 1
        reg_value, sub = reg_eval(x)
        sub = rho * sub
        if cvar:
            atom_values = W @ x - offsets
            take = sorted_tail_weights(atom_values, weights, objective.alpha)
            f = float(take @ atom_values) / one_minus + rho * reg_value
            sub += (take @ W) / one_minus
        else:
            f = float(mean @ x) + rho * reg_value
            sub += mean

        if f < best_f - params.stall_tol:
            best_f = f
            best_x = x.copy()
            since_improve = 0
        else:
            if f < best_f:
                best_f = f
                best_x = x.copy()
            since_improve += 1
            if since_improve >= params.stall_window:
                stalled = True
                break

        nrm = math.sqrt(float(sub @ sub))
        if nrm == 0.0:
            best_f = min(best_f, f)
            best_x = x.copy()
            stalled = True
            break
        x = project(set_, x - (params.step_c / math.sqrt(k) / nrm) * sub)

    reg_value_best, _ = reg_eval(best_x)
    return SolveReport(
        x_star=best_x,
        objective=float(best_f),
        lambda_star=float(reg_value_best),
        method=SolveMethod.SUBGRADIENT,
        iterations=k,
        residuals=0.0,
        status=SolveStatus.OPTIMAL if stalled else SolveStatus.ITERATION_LIMIT,
    )


def _lp_route_available(set_: FeasibleSet, dual: NormTag) -> bool:
    if isinstance(set_, VPolytope):
        return dual in (NormTag.L1, NormTag.LINF)
    if isinstance(set_, Box):
        return dual is NormTag.LINF
    return False


def _subgradient_route_available(set_: FeasibleSet, dual: NormTag) -> bool:
    if isinstance(set_, Box):
        return dual is NormTag.LINF
    if isinstance(set_, NormBall) and set_.ball_norm is NormTag.L2:
        return dual in (NormTag.LINF, NormTag.L2)
    return False


def supported_matrix_text() -> str:
    """Human-readable table of supported (set, ground norm) pairs."""
    rows = [
        "set            ground=l1  ground=l2  ground=linf",
        "vpolytope      simplex    -          simplex",
        "box            simplex    -          -",
        "normball (l2)  subgrad    subgrad    -",
    ]
    return "\n".join(rows)


def _route(set_: FeasibleSet, dual: NormTag, method: str) -> str:
    lp_ok = _lp_route_available(set_, dual)
    sg_ok = _subgradient_route_available(set_, dual)
    if method == "auto":
        if lp_ok:
            return "simplex"
        if sg_ok:
            return "subgradient"
    elif method == "simplex":
        if lp_ok:
            return "simplex"
    elif method == "subgradient":
        if sg_ok:
            return "subgradient"
    else:
        raise ValueError(f"unknown method {method!r}")
    raise UnsupportedCombination(
        f"no {method} route for {type(set_).__name__} with dual "
        f"{dual.value}-norm; supported matrix:\n" + supported_matrix_text()
    )


def _simplex_with_restated_objective(set_, problem: CompiledProblem, restate):
    report = simplex_solve(problem.lp)
    if report.status is not SolveStatus.OPTIMAL:
        return SolveReport(
            x_star=np.full(len(problem.decision_slice), float("nan")),
            objective=float("nan"),
            lambda_star=float("nan"),
            method=SolveMethod.SIMPLEX,
            iterations=report.iterations,
            residuals=float("nan"),
            status=report.status,
        )
    x = report.x_star[list(problem.decision_slice)]
    lam = float(report.x_star[problem.lambda_index])
    return SolveReport(
        x_star=x,
        objective=float(restate(x)),
        lambda_star=lam,
        method=SolveMethod.SIMPLEX,
        iterations=report.iterations,
        residuals=report.residuals,
        status=SolveStatus.OPTIMAL,
    )


def _subgradient_with_restated_objective(set_, objective, params, restate):
    report = subgradient_solve(set_, objective, params)
    return SolveReport(
        x_star=report.x_star,
        objective=float(restate(report.x_star)),
        lambda_star=report.lambda_star,
        method=report.method,
        iterations=report.iterations,
        residuals=report.residuals,
        status=report.status,
    )


def solve_drro(set_: FeasibleSet, nominal: DiscreteDistribution, radius: float, ground_norm: NormTag, *, method: str = "auto", params: SubgradientParams | None = None) -> SolveReport:
    """Minimize the worst-case expected regret over the Wasserstein ball.

    The reported objective is the worst-case expected regret at x_star
    (constant nominal best-cost term included).
    """
    amb = AmbiguitySet(nominal, radius, ground_norm)
    dual = ground_norm.dual
    route = _route(set_, dual, method)
    restate = lambda x: worst_case_expected_regret(set_, x, amb)
    if route == "simplex":
        if isinstance(set_, VPolytope):
            problem = build_vrep(set_, nominal, radius, dual)
        else:
            problem = build_support_reform(set_, nominal, radius)
        return _simplex_with_restated_objective(set_, problem, restate)
    objective = SubgradientObjective.expected_regret(nominal, radius, dual)
    return _subgradient_with_restated_objective(set_, objective, params, restate)


def solve_dro(set_: FeasibleSet, nominal: DiscreteDistribution, radius: float, ground_norm: NormTag, *, method: str = "auto", params: SubgradientParams | None = None) -> SolveReport:
    """Minimize the worst-case expected cost (dual-norm regularization)."""
    AmbiguitySet(nominal, radius, ground_norm)  # validates radius
    dual = ground_norm.dual
    route = _route(set_, dual, method)
    g = nominal.mean()

    def restate(x):
        return float(g @ x) + radius * vector_norm(x, dual)

    if route == "simplex":
        problem = build_dro(set_, nominal, radius, dual)
        return _simplex_with_restated_objective(set_, problem, restate)
    objective = SubgradientObjective.expected_cost(nominal, radius, dual)
    return _subgradient_with_restated_objective(set_, objective, params, restate)


def solve_wcvar(set_: FeasibleSet, nominal: DiscreteDistribution, radius: float, alpha, ground_norm: NormTag, *, method: str = "auto", params: SubgradientParams | None = None) -> SolveReport:
    """Minimize the worst-case CVaR of regret over the Wasserstein ball."""
    level = _risk(alpha)
    amb = AmbiguitySet(nominal, radius, ground_norm)
    dual = ground_norm.dual
    route = _route(set_, dual, method)
    restate = lambda x: worst_case_cvar_regret(set_, x, amb, level)
    if route == "simplex":
        problem = build_wcvar(set_, nominal, radius, level, dual)
        return _simplex_with_restated_objective(set_, problem, restate)
    objective = SubgradientObjective.cvar_regret(set_, nominal, radius, level.alpha, dual)
    return _subgradient_with_restated_objective(set_, objective, params, restate)
