"""Feasible-set geometry: support functions, farthest points, membership, projection.

Three compact representations are supported: vertex-list polytopes,
axis-aligned boxes, and norm balls. Every operation is closed form except
vertex-polytope membership, which solves a small feasibility LP. The
supported (set, dual norm) matrix for farthest-point queries is explicit
and closed; anything else raises UnsupportedCombination because general
norm maximization over a compact set is intractable.

All values are immutable after construction and every operation is a pure
function, so concurrent use needs no synchronization.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from . import _simplex
from .errors import DimensionMismatch, UnsupportedCombination

ABS_TOL = 1e-9
MEMBERSHIP_TOL = 1e-7


class NormTag(Enum):
    """Ground/dual norm selector. dual(L1)=LINF, dual(LINF)=L1, dual(L2)=L2."""

    L1 = "l1"
    L2 = "l2"
    LINF = "linf"

    @property
    def dual(self) -> "NormTag":
        return _DUALS[self]


_DUALS = {NormTag.L1: NormTag.LINF, NormTag.LINF: NormTag.L1, NormTag.L2: NormTag.L2}


def vector_norm(v: np.ndarray, tag: NormTag) -> float:
    """Evaluate the tagged norm of a vector."""
    if tag is NormTag.L1:
        return float(np.sum(np.abs(v)))
    if tag is NormTag.L2:
        return float(np.sqrt(np.dot(v, v)))
    return float(np.max(np.abs(v)))


def dual_unit_maximizer(y: np.ndarray, tag: NormTag) -> np.ndarray:
    """A maximizer u of y@u over the unit ball of the tagged norm.

    Satisfies y@u = dual_norm(y). Ties resolve deterministically (lowest
    coordinate index); y = 0 returns the zero vector.
    """
    if tag is NormTag.L2:
        nrm = float(np.sqrt(np.dot(y, y)))
        return y / nrm if nrm > 0.0 else np.zeros_like(y)
    if tag is NormTag.L1:
        u = np.zeros_like(y)
        i = int(np.argmax(np.abs(y)))
        if y[i] != 0.0:
            u[i] = 1.0 if y[i] > 0.0 else -1.0
        return u
    # LINF ball: componentwise signs; zero components stay zero.
    return np.sign(y)


def _frozen_vector(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    if arr.size == 0:
        raise ValueError(f"{name} must have at least one coordinate")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


class FeasibleSet:
    """Marker base class; concrete variants are VPolytope, Box, NormBall."""

    @property
    def dim(self) -> int:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class VPolytope(FeasibleSet):
    """Convex hull of an explicit, nonempty vertex list (rows of `vertices`)."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError("vertices must form a nonempty (m, n) array")
        if not np.all(np.isfinite(v)):
            raise ValueError("vertices must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]


@dataclass(frozen=True, eq=False)
class Box(FeasibleSet):
    """Axis-aligned box {x : lower <= x <= upper}."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = _frozen_vector(self.lower, "lower")
        hi = _frozen_vector(self.upper, "upper")
        if lo.size != hi.size:
            raise ValueError("lower and upper must share a dimension")
        if np.any(lo > hi):
            raise ValueError("box requires lower <= upper componentwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.size


@dataclass(frozen=True, eq=False)
class NormBall(FeasibleSet):
    """Norm ball {x : ||x - center||_ball_norm <= radius}."""

    center: np.ndarray
    radius: float
    ball_norm: NormTag = NormTag.L2

    def __post_init__(self):
        c = _frozen_vector(self.center, "center")
        r = float(self.radius)
        if not np.isfinite(r) or r < 0.0:
            raise ValueError("radius must be finite and nonnegative")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", r)

    @property
    def dim(self) -> int:
        return self.center.size


class FarthestPoint(NamedTuple):
    value: float
    witness: np.ndarray


def _check_point(set_: FeasibleSet, x, name: str = "point") -> np.ndarray:
    arr = np.asarray(x, dtype=float).reshape(-1)
    if arr.size != set_.dim:
        raise DimensionMismatch(
            f"{name} has dimension {arr.size}, set has dimension {set_.dim}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def support_function(set_: FeasibleSet, y) -> float:
    """sup of x@y over the set, in closed form per variant."""
    y = _check_point(set_, y, "direction")
    if isinstance(set_, VPolytope):
        return float(np.max(set_.vertices @ y))
    if isinstance(set_, Box):
        return float(np.maximum(y, 0.0) @ set_.upper + np.minimum(y, 0.0) @ set_.lower)
    if isinstance(set_, NormBall):
        return float(set_.center @ y) + set_.radius * vector_norm(y, set_.ball_norm.dual)
    raise TypeError(f"unknown feasible set type {type(set_).__name__}")


def support_argmax(set_: FeasibleSet, y) -> np.ndarray:
    """A point attaining support_function(set_, y); vertex ties -> lowest index."""
    y = _check_point(set_, y, "direction")
    if isinstance(set_, VPolytope):
        i = int(np.argmax(set_.vertices @ y))
        return set_.vertices[i].copy()
    if isinstance(set_, Box):
        return np.where(y > 0.0, set_.upper, set_.lower).astype(float)
    if isinstance(set_, NormBall):
        u = dual_unit_maximizer(y, set_.ball_norm.dual)
        return set_.center + set_.radius * u
    raise TypeError(f"unknown feasible set type {type(set_).__name__}")


def min_cost(set_: FeasibleSet, w) -> float:
    """inf of y@w over the set (= -support_function at -w)."""
    w = _check_point(set_, w, "cost vector")
    return -support_function(set_, -w)


def _farthest_linf(set_: FeasibleSet, x: np.ndarray) -> FarthestPoint:
    """Farthest point in the sup-norm via componentwise support calls.

    Evaluates, per coordinate, how far the set extends above and below x;
    the winning row (lowest index on ties, "above" before "below") yields
    the witness through support_argmax.
    """
    n = x.size
    best = -np.inf
    best_dir = None
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        above = support_function(set_, e) - x[i]
        if above > best:
            best = above
            best_dir = e
        below = support_function(set_, -e) + x[i]
        if below > best:
            best = below
            best_dir = -e
    witness = support_argmax(set_, best_dir)
    return FarthestPoint(float(best), witness)


def farthest_distance(set_: FeasibleSet, x, dual: NormTag) -> FarthestPoint:
    """sup over v in the set of ||x - v|| in the dual norm, with a witness.

    Dispatch: vertex polytopes take the vertex maximum for any norm; the
    sup-norm decomposes componentwise for any set; an L2 ball has the radial
    closed form for the L2 norm. Everything else raises
    UnsupportedCombination.
    """
    x = _check_point(set_, x)
    if isinstance(set_, VPolytope):
        diffs = set_.vertices - x
        if dual is NormTag.L1:
            vals = np.abs(diffs).sum(axis=1)
        elif dual is NormTag.L2:
            vals = np.sqrt((diffs * diffs).sum(axis=1))
        else:
            vals = np.abs(diffs).max(axis=1)
        i = int(np.argmax(vals))
        return FarthestPoint(float(vals[i]), set_.vertices[i].copy())
    if dual is NormTag.LINF:
        return _farthest_linf(set_, x)
    if (
        isinstance(set_, NormBall)
        and set_.ball_norm is NormTag.L2
        and dual is NormTag.L2
    ):
        diff = x - set_.center
        dist = float(np.sqrt(np.dot(diff, diff)))
        if dist > 0.0:
            u = diff / dist
        else:
            u = np.zeros_like(diff)
            u[0] = 1.0
        return FarthestPoint(dist + set_.radius, set_.center - set_.radius * u)
    raise UnsupportedCombination(
        f"farthest-point query for {type(set_).__name__} with "
        f"{dual.value}-norm has no exact closed route"
    )


def _vpolytope_residual(set_: VPolytope, x: np.ndarray) -> float:
    """Minimum L1 residual of a convex combination of vertices hitting x."""
    m, n = set_.vertices.shape
    # variables: theta (m), s_plus (n), s_minus (n); all >= 0
    n_var = m + 2 * n
    A = np.zeros((n + 1, n_var))
    A[:n, :m] = set_.vertices.T
    A[:n, m : m + n] = np.eye(n)
    A[:n, m + n :] = -np.eye(n)
    A[n, :m] = 1.0
    b = np.concatenate([x, [1.0]])
    c = np.concatenate([np.zeros(m), np.ones(2 * n)])
    status, _, value, _ = _simplex.solve_standard(c, A, b)
    if status is not _simplex.OPTIMAL:
        raise RuntimeError("membership LP unexpectedly failed")
    return float(value)


def contains(set_: FeasibleSet, x, tol: float = MEMBERSHIP_TOL) -> bool:
    """Membership test; vertex polytopes solve a feasibility LP."""
    if tol < 0.0:
        raise ValueError("tolerance must be nonnegative")
    x = _check_point(set_, x)
    if isinstance(set_, Box):
        return bool(np.all(x >= set_.lower - tol) and np.all(x <= set_.upper + tol))
    if isinstance(set_, NormBall):
        return vector_norm(x - set_.center, set_.ball_norm) <= set_.radius + tol
    if isinstance(set_, VPolytope):
        return _vpolytope_residual(set_, x) <= tol
    raise TypeError(f"unknown feasible set type {type(set_).__name__}")


def project(set_: FeasibleSet, x) -> np.ndarray:
    """Euclidean projection; offered for boxes and L2 balls only."""
    x = _check_point(set_, x)
    if isinstance(set_, Box):
        return np.clip(x, set_.lower, set_.upper)
    if isinstance(set_, NormBall) and set_.ball_norm is NormTag.L2:
        diff = x - set_.center
        dist = float(np.sqrt(np.dot(diff, diff)))
        if dist <= set_.radius:
            return x.copy()
        return set_.center + diff * (set_.radius / dist)
    raise UnsupportedCombination(
        f"projection onto {type(set_).__name__} is not offered"
        + (
            f" for {set_.ball_norm.value} balls"
            if isinstance(set_, NormBall)
            else " (use the LP solve path)"
        )
    )
