"""Regret, expected regret, CVaR of regret, and their worst-case counterparts.

Worst-case quantities over a Wasserstein ball reduce to the nominal
quantity plus the ball radius times the farthest-point regularizer (scaled
by 1/(1-alpha) for CVaR). Nominal distributions are finitely supported;
CVaR is computed exactly by sorting, not by an LP.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatch, InvalidAlpha, NotInFeasibleSet
from .geometry import (
    MEMBERSHIP_TOL,
    FeasibleSet,
    NormTag,
    contains,
    farthest_distance,
    min_cost,
)

WEIGHT_SUM_SLACK = 1e-6


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Finitely supported distribution: atom points (m, n) and weights (m,).

    Weights must be nonnegative; a total mass within 1e-6 of one is
    rescaled exactly to one at construction, anything further off is
    rejected. Duplicate atoms are permitted and never merged.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(1, -1)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError("atom points must form a nonempty (m, n) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("atom points must be finite")
        w = np.array(self.weights, dtype=float).reshape(-1)
        if w.size != pts.shape[0]:
            raise ValueError("weights length must match the number of atoms")
        if np.any(w < -1e-12):
            raise ValueError("weights must be nonnegative")
        w = np.maximum(w, 0.0)
        total = float(w.sum())
        if abs(total - 1.0) > WEIGHT_SUM_SLACK:
            raise ValueError(f"weights sum to {total!r}, expected 1")
        w = w / total
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_atoms(cls, atoms: Iterable[Tuple[Sequence[float], float]]):
        pairs = list(atoms)
        if not pairs:
            raise ValueError("at least one atom is required")
        return cls(
            np.array([p for p, _ in pairs], dtype=float),
            np.array([w for _, w in pairs], dtype=float),
        )

    @classmethod
    def dirac(cls, point: Sequence[float]):
        return cls(np.atleast_2d(np.asarray(point, dtype=float)), np.array([1.0]))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def atoms(self):
        return [(self.points[j], float(self.weights[j])) for j in range(self.size)]

    def mean(self) -> np.ndarray:
        return self.weights @ self.points


@dataclass(frozen=True, eq=False)
class AmbiguitySet:
    """Wasserstein ball of distributions around a nominal one.

    `radius` is measured in transport cost under `ground_norm`; the
    regularizers below live in its dual norm.
    """

    nominal: DiscreteDistribution
    radius: float
    ground_norm: NormTag

    def __post_init__(self):
        r = float(self.radius)
        if not np.isfinite(r) or r < 0.0:
            raise ValueError("ambiguity radius must be finite and nonnegative")
        object.__setattr__(self, "radius", r)


@dataclass(frozen=True)
class RiskLevel:
    """CVaR confidence level alpha in [0, 1)."""

    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not np.isfinite(a) or a < 0.0 or a >= 1.0:
            raise InvalidAlpha(f"alpha must lie in [0, 1), got {self.alpha!r}")
        object.__setattr__(self, "alpha", a)


def _risk(alpha) -> RiskLevel:
    return alpha if isinstance(alpha, RiskLevel) else RiskLevel(float(alpha))


def _check_nominal(set_: FeasibleSet, nominal: DiscreteDistribution):
    if nominal.dim != set_.dim:
        raise DimensionMismatch(
            f"distribution dimension {nominal.dim} != set dimension {set_.dim}"
        )


def _require_member(set_: FeasibleSet, x):
    if not contains(set_, x, MEMBERSHIP_TOL):
        raise NotInFeasibleSet(
            "worst-case regret is defined for decisions inside the feasible set"
        )


def regret(set_: FeasibleSet, x, w) -> float:
    """Realized cost of x under w minus the best achievable cost under w."""
    x = np.asarray(x, dtype=float).reshape(-1)
    w = np.asarray(w, dtype=float).reshape(-1)
    if x.size != w.size:
        raise DimensionMismatch("decision and cost vector dimensions differ")
    return float(w @ x) - min_cost(set_, w)


def expected_regret(set_: FeasibleSet, x, nominal: DiscreteDistribution) -> float:
    _check_nominal(set_, nominal)
    values = _atom_regrets(set_, x, nominal)
    return float(nominal.weights @ values)


def _atom_regrets(set_: FeasibleSet, x, nominal: DiscreteDistribution) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    return np.array([regret(set_, x, wj) for wj in nominal.points])


def worst_case_expected_regret(set_: FeasibleSet, x, amb: AmbiguitySet) -> float:
    """Nominal expected regret plus radius times the farthest-point term."""
    _check_nominal(set_, amb.nominal)
    _require_member(set_, x)
    slope = farthest_distance(set_, x, amb.ground_norm.dual).value
    return expected_regret(set_, x, amb.nominal) + amb.radius * slope


def sorted_tail_weights(values: np.ndarray, weights: np.ndarray, alpha: float) -> np.ndarray:
    """Per-atom share of the worst (1 - alpha) probability mass.

    Sort descending (stable), fill until the tail mass is exhausted; the
    boundary atom enters fractionally. The result sums to 1 - alpha.
    """
    order = np.argsort(-values, kind="stable")
    tail = 1.0 - alpha
    take = np.zeros_like(weights)
    acc = 0.0
    for idx in order:
        room = tail - acc
        if room <= 0.0:
            break
        t = min(float(weights[idx]), room)
        take[idx] = t
        acc += t
    return take


def value_at_risk(values: np.ndarray, weights: np.ndarray, alpha: float) -> float:
    """The (1 - alpha)-tail threshold: smallest value receiving tail mass."""
    take = sorted_tail_weights(values, weights, alpha)
    included = values[take > 0.0]
    return float(included.min()) if included.size else float(values.max())


def cvar_from_samples(values: np.ndarray, weights: np.ndarray, alpha: float) -> float:
    """Exact CVaR of a finite weighted sample; O(m log m)."""
    take = sorted_tail_weights(values, weights, alpha)
    return float(take @ values) / (1.0 - alpha)


def cvar_regret_nominal(set_: FeasibleSet, x, nominal: DiscreteDistribution, alpha) -> float:
    """CVaR of the regret sample under the nominal distribution."""
    _check_nominal(set_, nominal)
    level = _risk(alpha)
    values = _atom_regrets(set_, x, nominal)
    return cvar_from_samples(values, nominal.weights, level.alpha)


def worst_case_cvar_regret(set_: FeasibleSet, x, amb: AmbiguitySet, alpha) -> float:
    """Nominal CVaR of regret plus (radius / (1 - alpha)) times the farthest term."""
    _check_nominal(set_, amb.nominal)
    level = _risk(alpha)
    _require_member(set_, x)
    slope = farthest_distance(set_, x, amb.ground_norm.dual).value
    base = cvar_regret_nominal(set_, x, amb.nominal, level)
    return base + (amb.radius / (1.0 - level.alpha)) * slope


def robust_regret_unit_ball(set_: FeasibleSet, x, ground_norm: NormTag) -> float:
    """Worst regret over unit-norm cost vectors; equals the farthest-point term."""
    return farthest_distance(set_, x, ground_norm.dual).value
