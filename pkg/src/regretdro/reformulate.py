"""Compile regret/cost minimization problems into explicit linear programs.

Four builders: the vertex-polytope program (per-vertex dual-norm epigraph
rows), the support-function program for the sup-norm regularizer, the
dual-norm-penalized cost program, and the CVaR-of-regret program. Emitted
programs are plain dense data; the solver module executes them.

Row ordering is fixed (vertex-major, coordinate-minor; "above" before
"below") so exported LP text is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .errors import DimensionMismatch, UnsupportedCombination
from .geometry import Box, FeasibleSet, NormTag, VPolytope, min_cost, support_function
from .regret import DiscreteDistribution, _risk

_INF = float("inf")

DUPLICATE_ROW_TOL = 1e-12
CONDITION_WARN_RATIO = 1e8


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """Solver-agnostic dense LP: min objective@z, ineq rows <=, eq rows =.

    Bounds are per-variable [lo, hi] with +-inf allowed; names label the
    columns (decision coordinates first, then auxiliaries).
    """

    objective: np.ndarray
    ineq_matrix: np.ndarray
    ineq_rhs: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    bounds: Tuple[Tuple[float, float], ...]
    names: Tuple[str, ...]

    def __post_init__(self):
        c = np.array(self.objective, dtype=float).reshape(-1)
        n = c.size
        if n < 1:
            raise ValueError("a linear program needs at least one variable")
        A = np.array(self.ineq_matrix, dtype=float).reshape(-1, n)
        b = np.array(self.ineq_rhs, dtype=float).reshape(-1)
        E = np.array(self.eq_matrix, dtype=float).reshape(-1, n)
        d = np.array(self.eq_rhs, dtype=float).reshape(-1)
        if A.shape[0] != b.size or E.shape[0] != d.size:
            raise ValueError("constraint matrix/rhs row counts differ")
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(d))):
            raise ValueError("constraint right-hand sides must be finite")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(E)) and np.all(np.isfinite(c))):
            raise ValueError("coefficients must be finite")
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        names = tuple(self.names)
        if len(bounds) != n or len(names) != n:
            raise ValueError("bounds/names length must match variable count")
        for arr in (c, A, b, E, d):
            arr.setflags(write=False)
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "ineq_matrix", A)
        object.__setattr__(self, "ineq_rhs", b)
        object.__setattr__(self, "eq_matrix", E)
        object.__setattr__(self, "eq_rhs", d)
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "names", names)

    @property
    def n_vars(self) -> int:
        return self.objective.size


@dataclass(frozen=True, eq=False)
class CompiledProblem:
    """An emitted LP plus the bookkeeping to read a decision back out.

    `objective_offset` carries constant terms dropped from the LP objective
    (the precomputed nominal best-cost expectation for regret problems), so
    lp value + offset is on the reported scale.
    """

    lp: LinearProgram
    decision_slice: Tuple[int, ...]
    objective_offset: float
    lambda_index: int | None = None

    def __post_init__(self):
        idx = tuple(int(i) for i in self.decision_slice)
        if len(set(idx)) != len(idx) or any(i < 0 or i >= self.lp.n_vars for i in idx):
            raise ValueError("decision indices must be distinct and in range")
        object.__setattr__(self, "decision_slice", idx)


class _Builder:
    """Accumulates variables and sparse rows; materializes a CompiledProblem."""

    def __init__(self, n_decision: int):
        self.names: List[str] = [f"x{k + 1}" for k in range(n_decision)]
        self.bounds: List[Tuple[float, float]] = [(-_INF, _INF)] * n_decision
        self.ineq: List[Tuple[dict, float]] = []
        self.eq: List[Tuple[dict, float]] = []
        self.n_decision = n_decision

    def new_var(self, name: str, lo: float = -_INF, hi: float = _INF) -> int:
        self.names.append(name)
        self.bounds.append((lo, hi))
        return len(self.names) - 1

    def add_ineq(self, coeffs: dict, rhs: float):
        self.ineq.append((dict(coeffs), float(rhs)))

    def add_eq(self, coeffs: dict, rhs: float):
        self.eq.append((dict(coeffs), float(rhs)))

    @staticmethod
    def _materialize(entries, n):
        A = np.zeros((len(entries), n))
        rhs = np.zeros(len(entries))
        for i, (coeffs, r) in enumerate(entries):
            for j, v in coeffs.items():
                A[i, j] = v
            rhs[i] = r
        return A, rhs

    def finish(self, objective: dict, offset: float, lambda_index: int) -> CompiledProblem:
        n = len(self.names)
        c = np.zeros(n)
        for j, v in objective.items():
            c[j] = v
        A, b = self._materialize(self.ineq, n)
        E, d = self._materialize(self.eq, n)
        lp = LinearProgram(
            objective=c,
            ineq_matrix=A,
            ineq_rhs=b,
            eq_matrix=E,
            eq_rhs=d,
            bounds=tuple(self.bounds),
            names=tuple(self.names),
        )
        return CompiledProblem(
            lp=lp,
            decision_slice=tuple(range(self.n_decision)),
            objective_offset=offset,
            lambda_index=lambda_index,
        )


def _check_problem(set_: FeasibleSet, nominal: DiscreteDistribution, r: float):
    if nominal.dim != set_.dim:
        raise DimensionMismatch(
            f"distribution dimension {nominal.dim} != set dimension {set_.dim}"
        )
    if r < 0.0:
        raise ValueError("radius must be nonnegative")


def _require_polyhedral(dual: NormTag):
    if dual not in (NormTag.L1, NormTag.LINF):
        raise UnsupportedCombination(
            "the L2 dual norm is not polyhedral; use the subgradient solver"
        )


def _offset(set_: FeasibleSet, nominal: DiscreteDistribution) -> float:
    best = np.array([min_cost(set_, wj) for wj in nominal.points])
    return -float(nominal.weights @ best)


def _membership_block(b: _Builder, set_: FeasibleSet):
    """Encode x in the set: bounds for boxes, convex multipliers for polytopes."""
    n = set_.dim
    if isinstance(set_, Box):
        for k in range(n):
            b.bounds[k] = (float(set_.lower[k]), float(set_.upper[k]))
        return
    if isinstance(set_, VPolytope):
        m = set_.vertices.shape[0]
        theta = [b.new_var(f"theta{i + 1}", 0.0, _INF) for i in range(m)]
        for k in range(n):
            coeffs = {k: 1.0}
            for i in range(m):
                coeffs[theta[i]] = -float(set_.vertices[i, k])
            b.add_eq(coeffs, 0.0)
        b.add_eq({t: 1.0 for t in theta}, 1.0)
        return
    raise UnsupportedCombination(
        f"{type(set_).__name__} membership is not LP-representable; "
        "use the subgradient solver"
    )


def _vertex_epigraph_block(b: _Builder, set_: VPolytope, dual: NormTag, lam: int):
    """Per-vertex rows bounding ||x - v_i|| (dual norm) by lambda."""
    V = set_.vertices
    m, n = V.shape
    if dual is NormTag.LINF:
        for i in range(m):
            for k in range(n):
                b.add_ineq({k: 1.0, lam: -1.0}, V[i, k])
                b.add_ineq({k: -1.0, lam: -1.0}, -V[i, k])
    else:  # L1: absolute-value splitting auxiliaries per (vertex, coordinate)
        t = [
            [b.new_var(f"t{i + 1}_{k + 1}", 0.0, _INF) for k in range(n)]
            for i in range(m)
        ]
        for i in range(m):
            for k in range(n):
                b.add_ineq({k: 1.0, t[i][k]: -1.0}, V[i, k])
                b.add_ineq({k: -1.0, t[i][k]: -1.0}, -V[i, k])
            b.add_ineq({**{t[i][k]: 1.0 for k in range(n)}, lam: -1.0}, 0.0)


def _support_epigraph_block(b: _Builder, set_: FeasibleSet, lam: int):
    """Componentwise support rows bounding the farthest sup-norm distance."""
    n = set_.dim
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        b.add_ineq({i: -1.0, lam: -1.0}, -support_function(set_, e))
        b.add_ineq({i: 1.0, lam: -1.0}, -support_function(set_, -e))


def build_vrep(set_: FeasibleSet, nominal: DiscreteDistribution, r: float, dual: NormTag) -> CompiledProblem:
    """Vertex-polytope program: mean cost plus r * max vertex distance.

    Variables are (x, lambda, theta[, t]); membership is encoded with convex
    multipliers and the regularizer with per-vertex dual-norm epigraph rows.
    """
    _check_problem(set_, nominal, r)
    if not isinstance(set_, VPolytope):
        raise UnsupportedCombination("build_vrep requires a vertex polytope")
    _require_polyhedral(dual)
    n = set_.dim
    b = _Builder(n)
    lam = b.new_var("lambda")
    _membership_block(b, set_)
    _vertex_epigraph_block(b, set_, dual, lam)
    g = nominal.mean()
    objective = {k: float(g[k]) for k in range(n)}
    objective[lam] = r
    return b.finish(objective, _offset(set_, nominal), lam)


def build_support_reform(set_: FeasibleSet, nominal: DiscreteDistribution, r: float) -> CompiledProblem:
    """Support-function program for the sup-norm regularizer.

    Valid for any compact set; emitted only when membership is
    LP-representable (vertex polytope or box). The 2n support values are
    precomputed by the geometry module.
    """
    _check_problem(set_, nominal, r)
    if not isinstance(set_, (VPolytope, Box)):
        raise UnsupportedCombination(
            "support-function program needs LP-representable membership; "
            "norm balls go through the subgradient solver"
        )
    n = set_.dim
    b = _Builder(n)
    lam = b.new_var("lambda")
    _membership_block(b, set_)
    _support_epigraph_block(b, set_, lam)
    g = nominal.mean()
    objective = {k: float(g[k]) for k in range(n)}
    objective[lam] = r
    return b.finish(objective, _offset(set_, nominal), lam)


def build_dro(set_: FeasibleSet, nominal: DiscreteDistribution, r: float, dual: NormTag) -> CompiledProblem:
    """Cost-robust program: mean cost plus r times the dual norm of x."""
    _check_problem(set_, nominal, r)
    if not isinstance(set_, (VPolytope, Box)):
        raise UnsupportedCombination("norm balls go through the subgradient solver")
    _require_polyhedral(dual)
    n = set_.dim
    b = _Builder(n)
    mu = b.new_var("mu")
    _membership_block(b, set_)
    if dual is NormTag.LINF:
        for k in range(n):
            b.add_ineq({k: 1.0, mu: -1.0}, 0.0)
            b.add_ineq({k: -1.0, mu: -1.0}, 0.0)
    else:
        t = [b.new_var(f"t{k + 1}", 0.0, _INF) for k in range(n)]
        for k in range(n):
            b.add_ineq({k: 1.0, t[k]: -1.0}, 0.0)
            b.add_ineq({k: -1.0, t[k]: -1.0}, 0.0)
        b.add_ineq({**{tk: 1.0 for tk in t}, mu: -1.0}, 0.0)
    g = nominal.mean()
    objective = {k: float(g[k]) for k in range(n)}
    objective[mu] = r
    return b.finish(objective, 0.0, mu)


def build_wcvar(set_: FeasibleSet, nominal: DiscreteDistribution, r: float, alpha, dual: NormTag) -> CompiledProblem:
    """CVaR-of-regret program over (x, lambda, tau, u).

    Objective tau + sum_j p_j u_j / (1-alpha) + r lambda / (1-alpha) with
    tail rows u_j >= (cost_j @ x - best_cost_j) - tau. The per-atom best
    costs are precomputed constants in the rows, so the LP value is already
    on the regret scale (offset zero).
    """
    _check_problem(set_, nominal, r)
    level = _risk(alpha)
    if not isinstance(set_, (VPolytope, Box)):
        raise UnsupportedCombination("norm balls go through the subgradient solver")
    _require_polyhedral(dual)
    if isinstance(set_, Box) and dual is not NormTag.LINF:
        raise UnsupportedCombination(
            "box regularizer rows exist only for the sup norm"
        )
    n = set_.dim
    m_atoms = nominal.size
    one_minus = 1.0 - level.alpha

    b = _Builder(n)
    lam = b.new_var("lambda")
    tau = b.new_var("tau")
    u = [b.new_var(f"u{j + 1}", 0.0, _INF) for j in range(m_atoms)]

    _membership_block(b, set_)
    if isinstance(set_, VPolytope):
        _vertex_epigraph_block(b, set_, dual, lam)
    else:
        _support_epigraph_block(b, set_, lam)
    for j in range(m_atoms):
        kappa = min_cost(set_, nominal.points[j])
        coeffs = {k: float(nominal.points[j, k]) for k in range(n)}
        coeffs[tau] = -1.0
        coeffs[u[j]] = -1.0
        b.add_ineq(coeffs, kappa)

    objective = {tau: 1.0, lam: r / one_minus}
    for j in range(m_atoms):
        objective[u[j]] = float(nominal.weights[j]) / one_minus
    return b.finish(objective, 0.0, lam)


@dataclass(frozen=True)
class LPDiagnostics:
    """Shape report plus duplicate-row and conditioning checks."""

    variable_count: int
    inequality_count: int
    equality_count: int
    duplicate_inequalities: Tuple[Tuple[int, int], ...]
    warnings: Tuple[str, ...] = field(default_factory=tuple)


def lp_degeneracy_report(problem: CompiledProblem) -> LPDiagnostics:
    lp = problem.lp
    A = lp.ineq_matrix
    rhs = lp.ineq_rhs
    dupes = []
    for i in range(A.shape[0]):
        for j in range(i + 1, A.shape[0]):
            if abs(rhs[i] - rhs[j]) <= DUPLICATE_ROW_TOL and np.all(
                np.abs(A[i] - A[j]) <= DUPLICATE_ROW_TOL
            ):
                dupes.append((i, j))
    warnings = []
    coeffs = np.abs(np.concatenate([A.ravel(), lp.eq_matrix.ravel(), lp.objective]))
    nonzero = coeffs[coeffs > 0.0]
    if nonzero.size:
        ratio = float(nonzero.max() / nonzero.min())
        if ratio > CONDITION_WARN_RATIO:
            warnings.append(f"coefficient magnitudes span a ratio of {ratio:.3e}")
    return LPDiagnostics(
        variable_count=lp.n_vars,
        inequality_count=A.shape[0],
        equality_count=lp.eq_matrix.shape[0],
        duplicate_inequalities=tuple(dupes),
        warnings=tuple(warnings),
    )


def _fmt(value: float) -> str:
    if value == _INF:
        return "inf"
    if value == -_INF:
        return "-inf"
    return format(float(value), ".17g")


def render_lp_text(lp: LinearProgram) -> str:
    """Fixed plain-text rendering: objective line, then one line per row.

    Inequalities use `<=`, equalities `=`, then one `bnd lo hi` line per
    variable and a final `vars` line with the column names. Numbers carry
    17 significant digits; the format is byte-stable for golden tests.
    """
    lines = ["min " + " ".join(_fmt(v) for v in lp.objective)]
    for row, rhs in zip(lp.ineq_matrix, lp.ineq_rhs):
        lines.append(" ".join(_fmt(v) for v in row) + " <= " + _fmt(rhs))
    for row, rhs in zip(lp.eq_matrix, lp.eq_rhs):
        lines.append(" ".join(_fmt(v) for v in row) + " = " + _fmt(rhs))
    for lo, hi in lp.bounds:
        lines.append(f"bnd {_fmt(lo)} {_fmt(hi)}")
    lines.append("vars " + " ".join(lp.names))
    return "\n".join(lines) + "\n"
