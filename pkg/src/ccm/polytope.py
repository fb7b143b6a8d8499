"""Comprehensive convex polytopes in payoff space.

A bargaining set is stored by its generator vertices only; the set it
denotes is the smallest convex and comprehensive superset of them (all
points between the componentwise minimum of the generators and the convex
hull).  Membership, efficiency, and the set-domination order are decided
by small LPs over the generator weights; affine images of the unit
simplex ("simplex games") get closed forms.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lp
from .tolerances import DEDUP_SIG_DIGITS, EPS_GEOM

# Points are plain float vectors.
Point = np.ndarray


class DegenerateSetError(ValueError):
    """The operation needs a full-dimensional set and the input is flat."""


def as_point(x, dim: int | None = None) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValueError("a point must be a 1-d vector")
    if not np.isfinite(v).all():
        raise ValueError("point coordinates must be finite")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {v.shape[0]}")
    return v


def _round_sig(a: np.ndarray, digits: int = DEDUP_SIG_DIGITS) -> np.ndarray:
    out = a.copy()
    nz = out != 0
    if nz.any():
        mag = np.floor(np.log10(np.abs(out[nz])))
        factor = 10.0 ** (digits - 1 - mag)
        out[nz] = np.round(out[nz] * factor) / factor
    return out


@dataclass(frozen=True)
class Polytope:
    """coco of the generator rows: comp(conv(generators))."""

    generators: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.generators, dtype=float)
        if g.ndim != 2 or g.shape[0] < 1 or g.shape[1] < 1:
            raise ValueError("generators must be a nonempty (m, n) array")
        if not np.isfinite(g).all():
            raise ValueError("generators must be finite")
        g = g.copy()
        g.setflags(write=False)
        object.__setattr__(self, "generators", g)

    @property
    def dim(self) -> int:
        return self.generators.shape[1]

    @property
    def disagreement(self) -> np.ndarray:
        return self.generators.min(axis=0)

    @property
    def bliss(self) -> np.ndarray:
        return self.generators.max(axis=0)

    @property
    def full_dimensional(self) -> bool:
        return bool(np.all(self.bliss - self.disagreement > EPS_GEOM))


def coco_hull(points) -> Polytope:
    """Comprehensive convex hull of the given points.

    Generators are deduplicated after rounding to 12 significant digits so
    that certificates reproduce across platforms.  Degenerate (flat) inputs
    are accepted; the `full_dimensional` flag reports them.
    """
    pts = np.atleast_2d(np.asarray(list(points), dtype=float))
    if pts.size == 0:
        raise ValueError("coco_hull needs at least one point")
    if pts.ndim != 2:
        raise ValueError("points must share one dimension")
    rounded = _round_sig(pts)
    _, idx = np.unique(rounded, axis=0, return_index=True)
    return Polytope(pts[np.sort(idx)])


def domination_slack(B: Polytope, x) -> float:
    """max t such that some convex combination of generators covers x + t.

    Nonnegative iff x is below the convex hull of the generators; the
    magnitude is a margin usable against tolerances.
    """
    x = as_point(x, B.dim)
    G = B.generators
    m, n = G.shape
    # Variables (lambda, t+, t-): maximize t+ - t-.
    A = np.zeros((n + 2, m + 2))
    A[:n, :m] = -G.T
    A[:n, m] = 1.0
    A[:n, m + 1] = -1.0
    A[n, :m] = 1.0
    A[n + 1, :m] = -1.0
    b = np.concatenate([-x, [1.0, -1.0]])
    c = np.zeros(m + 2)
    c[m] = 1.0
    c[m + 1] = -1.0
    sol = lp.solve_arrays(c, A, b)
    if sol.status != lp.OPTIMAL:  # pragma: no cover - simplex-bounded by construction
        raise lp.LpError(f"domination LP reported {sol.status}")
    return float(sol.objective_value)


def contains(B: Polytope, x, tol: float = EPS_GEOM) -> bool:
    """True iff x lies in the comprehensive convex hull."""
    x = as_point(x, B.dim)
    if np.any(x < B.disagreement - tol):
        return False
    return domination_slack(B, x) >= -tol


def is_pareto_efficient(B: Polytope, x, tol: float = EPS_GEOM) -> bool:
    """True iff no point of B weakly dominates x with strict improvement.

    Decided by one LP: the maximal coordinate sum over {y in B, y >= x}
    must not exceed the coordinate sum of x.
    """
    x = as_point(x, B.dim)
    if not contains(B, x, tol):
        raise ValueError("x must be a member of B")
    G = B.generators
    m, n = G.shape
    A = np.zeros((n + 2, m))
    A[:n] = -G.T
    A[n] = 1.0
    A[n + 1] = -1.0
    b = np.concatenate([-x, [1.0, -1.0]])
    sol = lp.solve_arrays(G.sum(axis=1), A, b)
    if sol.status != lp.OPTIMAL:
        raise lp.LpError(f"efficiency LP reported {sol.status}")
    gap = sol.objective_value - float(x.sum())
    return gap <= tol * (1.0 + abs(float(x.sum())))


def dominates(A: Polytope, B: Polytope, tol: float = EPS_GEOM) -> bool:
    """The set-domination order A >= B.

    Checks (i) every generator of B is weakly dominated by a point of A and
    (ii) the disagreement point of A is at least B's.  Comprehensiveness
    makes (ii) equivalent to "every point of A dominates some point of B".
    """
    if A.dim != B.dim:
        raise ValueError("dimension mismatch")
    if np.any(A.disagreement < B.disagreement - tol):
        return False
    return all(domination_slack(A, y) >= -tol for y in B.generators)


@dataclass(frozen=True)
class SimplexGame:
    """The affine simplex image coco{d, d + n*a_1 e^1, ..., d + n*a_n e^n}."""

    scale: np.ndarray  # a, strictly positive
    base: np.ndarray  # d

    def __post_init__(self):
        a = as_point(self.scale)
        d = as_point(self.base, a.shape[0])
        if np.any(a <= 0):
            raise ValueError("simplex game scale must be strictly positive")
        a = a.copy()
        d = d.copy()
        a.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "scale", a)
        object.__setattr__(self, "base", d)

    @property
    def dim(self) -> int:
        return self.scale.shape[0]

    def as_polytope(self) -> Polytope:
        n = self.dim
        gens = np.vstack([self.base, self.base + n * np.diag(self.scale)])
        return Polytope(gens)


def fair_outcome(A: SimplexGame) -> np.ndarray:
    """The equal-division image a + d (the center of the frontier face)."""
    return A.scale + A.base


def as_simplex_game(B: Polytope, tol: float = EPS_GEOM) -> SimplexGame | None:
    """Recognize B as a simplex game, or return None.

    B equals coco{d + s_i e^i} with s = bliss - disagreement iff every
    generator lies under that simplex and every apex lies in B.
    """
    d = B.disagreement
    s = B.bliss - d
    if np.any(s <= tol):
        return None
    shifted = B.generators - d
    loads = (shifted / s).sum(axis=1)
    if loads.max() > 1.0 + tol:
        return None
    n = B.dim
    for i in range(n):
        apex = d + s[i] * np.eye(n)[i]
        if not contains(B, apex, tol):
            return None
    return SimplexGame(s / n, d)


def simplex_dominates(A: SimplexGame, B: Polytope, tol: float = EPS_GEOM) -> bool:
    """Closed-form domination test for a simplex game dominator.

    Equivalent to dominates(A.as_polytope(), B): the positive part of each
    generator, measured in apex units above A's base, must fit under the
    unit simplex, and A's base must sit above B's disagreement point.
    """
    if A.dim != B.dim:
        raise ValueError("dimension mismatch")
    if np.any(A.base < B.disagreement - tol):
        return False
    n = A.dim
    loads = np.maximum(B.generators - A.base, 0.0) / (n * A.scale)
    return bool(loads.sum(axis=1).max() <= 1.0 + tol)
