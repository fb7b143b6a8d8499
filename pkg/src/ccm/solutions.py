"""Bargaining solution concepts over comprehensive polytopes.

The equitable set of a bargaining polytope B collects the points that are
the fair outcome of some simplex game dominating B.  Membership is
decided exactly: writing the candidate witness as A = n*(x-c) (x) Delta + c
and substituting t_i = 1/(x_i - c_i) turns witness existence into a
piecewise-linear feasibility problem, solved here by one LP.  For two
agents the frontier characterization (Pareto efficiency plus midpoint
domination) is used instead and doubles as an independent cross-check.

Also provided: the Nash bargaining point (log-welfare maximizer), the
supporting simplex at that point, Nash sustainability (which coincides
with equitability), and a property harness for the solution axioms.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import lp
from ._logmax import maximize_log_sum
from .polytope import (
    DegenerateSetError,
    Polytope,
    SimplexGame,
    as_point,
    contains,
    dominates,
    fair_outcome,
    is_pareto_efficient,
    simplex_dominates,
)
from .tolerances import EPS_GEOM, EPS_OPT

MEMBER = "member_with_certificate"
NON_MEMBER = "non_member_certified"
AT_RESOLUTION = "non_member_at_resolution"


@dataclass(frozen=True)
class EquitabilityCertificate:
    witness: SimplexGame
    fair_point: np.ndarray
    domination_checked: bool


@dataclass(frozen=True)
class EquitableVerdict:
    status: str
    certificate: EquitabilityCertificate | None
    resolution: int  # 0 means the decision procedure was exact

    @property
    def is_member(self) -> bool:
        return self.status == MEMBER


def random_dictator_point(B: Polytope) -> np.ndarray:
    """Expected payoff when a uniformly random agent dictates: d + (b - d)/n.

    For two agents this is the midpoint benchmark d + (b - d)/2.
    """
    n = B.dim
    return B.disagreement + (B.bliss - B.disagreement) / n


def _require_full_dimensional(B: Polytope):
    if not B.full_dimensional:
        raise DegenerateSetError("operation needs a full-dimensional bargaining set")


def nash_solution(B: Polytope, tol: float = EPS_OPT) -> np.ndarray:
    """The payoff vector maximizing sum_i log(x_i - d_i) over B."""
    _require_full_dimensional(B)
    d = B.disagreement
    lam, _, _ = maximize_log_sum((B.generators - d).T, tol=max(tol, 1e-12))
    return B.generators.T @ lam


def supporting_simplex(B: Polytope, tol: float = EPS_GEOM) -> SimplexGame:
    """The simplex game touching B at its Nash point with the gradient normal.

    With x the Nash point and d the disagreement point, the game is
    coco{d, d + n (x_i - d_i) e^i}; it dominates B and has x as its fair
    outcome.
    """
    _require_full_dimensional(B)
    x = nash_solution(B)
    A = SimplexGame(x - B.disagreement, B.disagreement)
    if not simplex_dominates(A, B, max(tol, 1e-7)):
        raise lp.LpError("supporting simplex failed its domination postcondition")
    if not contains(A.as_polytope(), x, max(tol, 1e-7)):
        raise lp.LpError("supporting simplex does not contain the Nash point")
    return A


def _supporting_normal(B: Polytope, x: np.ndarray) -> np.ndarray:
    """A strictly positive normal a with a.x >= a.y - tol for all y in B."""
    G = B.generators
    m, n = G.shape
    slack = EPS_GEOM * (1.0 + np.abs(G).max())
    # Variables (a, s): maximize s subject to a.(g - x) <= slack, sum a = 1, s <= a_i.
    A = np.zeros((m + 2 + n, n + 1))
    A[:m, :n] = G - x
    A[m, :n] = 1.0
    A[m + 1, :n] = -1.0
    for i in range(n):
        A[m + 2 + i, i] = -1.0
        A[m + 2 + i, n] = 1.0
    b = np.concatenate([np.full(m, slack), [1.0, -1.0], np.zeros(n)])
    c = np.zeros(n + 1)
    c[n] = 1.0
    sol = lp.solve_arrays(c, A, b)
    if sol.status != lp.OPTIMAL or sol.objective_value <= EPS_GEOM:
        raise lp.LpError("no strictly positive supporting normal; point is not efficient")
    return sol.primal[:n]


def _two_agent_witness(B: Polytope, x: np.ndarray) -> SimplexGame:
    """Witness construction for n = 2 members (efficient + midpoint dominating).

    Put the witness frontier on a supporting line at x: with normal a, the
    translation c = x - s*/a with s* = min_i a_i (x_i - d_i) keeps c >= d,
    and midpoint domination guarantees set domination.
    """
    d = B.disagreement
    a = _supporting_normal(B, x)
    s_star = float(np.min(a * (x - d)))
    c = x - s_star / a
    c = np.maximum(c, d)  # clip float dust; exact at the binding coordinate
    return SimplexGame(x - c, c)


def _witness_lp(B: Polytope, x: np.ndarray, tol: float):
    """Exact witness feasibility via t_i = 1/(x_i - c_i).

    A dominating simplex game with fair point x exists iff there are
    t_i >= 1/(x_i - d_i) with, for every generator y,
    sum_i max((y_i - x_i) t_i + 1, 0) <= n.  Minimizing the worst
    violation is one LP; the optimum decides membership exactly and its
    t recovers the witness translation c = x - 1/t.
    """
    G = B.generators
    m, n = G.shape
    d = B.disagreement
    tmin = 1.0 / (x - d)
    # Variables: (t' (n), s (m*n), v): minimize v == maximize -v.
    nv = n + m * n + 1
    rows = []
    rhs = []
    for g_idx in range(m):
        y = G[g_idx]
        for i in range(n):
            row = np.zeros(nv)
            row[i] = y[i] - x[i]
            row[n + g_idx * n + i] = -1.0
            rows.append(row)
            rhs.append(-1.0 - (y[i] - x[i]) * tmin[i])
        row = np.zeros(nv)
        row[n + g_idx * n : n + (g_idx + 1) * n] = 1.0
        row[-1] = -1.0
        rows.append(row)
        rhs.append(float(n))
    c_obj = np.zeros(nv)
    c_obj[-1] = -1.0
    sol = lp.solve_arrays(c_obj, np.vstack(rows), np.array(rhs))
    if sol.status != lp.OPTIMAL:  # pragma: no cover - always feasible and bounded
        raise lp.LpError(f"witness LP reported {sol.status}")
    violation = float(sol.primal[-1])
    t = tmin + sol.primal[:n]
    c = x - 1.0 / t
    return violation <= tol * n, np.maximum(c, d), violation


def equitable_contains(
    B: Polytope, x, grid_steps: int = 64, tol: float = EPS_GEOM
) -> EquitableVerdict:
    """Decide whether x is a fair outcome of some simplex game dominating B.

    The decision is exact (resolution 0); `grid_steps` is accepted for
    interface compatibility but no grid search is needed.  Members come
    with a certificate that re-validates through independent code paths.
    """
    x = as_point(x, B.dim)
    _require_full_dimensional(B)
    if not contains(B, x, tol):
        raise ValueError("x lies outside the bargaining set")
    d = B.disagreement
    n = B.dim

    # Necessary conditions with direct certificates.
    if np.any(x - d <= tol):
        return EquitableVerdict(NON_MEMBER, None, 0)
    if np.any(x < random_dictator_point(B) - tol):
        return EquitableVerdict(NON_MEMBER, None, 0)
    if not is_pareto_efficient(B, x, tol):
        return EquitableVerdict(NON_MEMBER, None, 0)

    if n == 2:
        # Efficiency plus midpoint domination already checked above: member.
        witness = _two_agent_witness(B, x)
        cert = _certify(B, x, witness, tol)
        return EquitableVerdict(MEMBER, cert, 0)

    feasible, c, _ = _witness_lp(B, x, tol)
    if not feasible:
        return EquitableVerdict(NON_MEMBER, None, 0)
    witness = SimplexGame(x - c, c)
    cert = _certify(B, x, witness, tol)
    return EquitableVerdict(MEMBER, cert, 0)


def _certify(B, x, witness, tol) -> EquitabilityCertificate:
    check_tol = max(tol, 1e-7)
    ok = simplex_dominates(witness, B, check_tol) and dominates(
        witness.as_polytope(), B, check_tol
    )
    if not ok or np.abs(fair_outcome(witness) - x).max() > check_tol:
        raise lp.LpError("equitability witness failed re-validation")
    return EquitabilityCertificate(witness, fair_outcome(witness), True)


def validate_certificate(B: Polytope, x, cert: EquitabilityCertificate, tol: float = 1e-7) -> bool:
    """Re-validate a certificate by paths independent of its construction."""
    x = as_point(x, B.dim)
    if np.abs(fair_outcome(cert.witness) - x).max() > tol:
        return False
    if not contains(B, x, tol):
        return False
    poly = cert.witness.as_polytope()
    return dominates(poly, B, tol) and simplex_dominates(cert.witness, B, tol)


def nash_sustainable_contains(
    B: Polytope, x, grid_steps: int = 64, tol: float = EPS_GEOM
) -> EquitableVerdict:
    """Membership in the Nash-sustainable set (equal to the equitable set).

    Delegates to the equitable test; for members the witness is re-checked
    as a Nash witness by solving for the witness game's own Nash point,
    which must coincide with x.
    """
    verdict = equitable_contains(B, x, grid_steps=grid_steps, tol=tol)
    if verdict.is_member:
        eta = nash_solution(verdict.certificate.witness.as_polytope())
        if np.abs(eta - as_point(x, B.dim)).max() > 1e-6 * (1.0 + np.abs(eta).max()):
            raise lp.LpError("witness Nash point does not match the queried payoff")
    return verdict


def equitable_set_2d(B: Polytope, tol: float = EPS_GEOM):
    """The equitable set for two agents, as segments of the Pareto frontier.

    Intersects the efficient frontier polyline with the box above the
    midpoint benchmark; returns a list of (start, end) pairs ordered by
    the first coordinate.  A single point comes back as a degenerate
    segment.
    """
    if B.dim != 2:
        raise ValueError("equitable_set_2d needs a two-agent set")
    _require_full_dimensional(B)
    chain = _frontier_chain(B, tol)
    lo = random_dictator_point(B)
    clipped = _clip_chain(chain, lo, tol)
    if clipped is None:
        return []
    return [(clipped[i], clipped[i + 1]) for i in range(len(clipped) - 1)] or [
        (clipped[0], clipped[0])
    ]


def _frontier_chain(B: Polytope, tol: float):
    G = B.generators
    keep = []
    for i, g in enumerate(G):
        dominated = False
        for j, h in enumerate(G):
            if j != i and np.all(h >= g - 1e-15) and np.any(h > g + 1e-12):
                dominated = True
                break
        if not dominated:
            keep.append(g)
    pts = sorted(keep, key=lambda p: (p[0], -p[1]))
    dedup = []
    for p in pts:
        if dedup and abs(p[0] - dedup[-1][0]) <= 1e-12:
            continue
        dedup.append(np.array(p))
    # Upper concave chain; interior and collinear middle points are dropped.
    chain: list[np.ndarray] = []
    for p in dedup:
        while len(chain) >= 2:
            a, b = chain[-2], chain[-1]
            cross = (p[0] - a[0]) * (b[1] - a[1]) - (b[0] - a[0]) * (p[1] - a[1])
            if cross <= tol * (1.0 + np.abs(p).max()):
                chain.pop()
            else:
                break
        chain.append(p)
    return chain


def _clip_chain(chain, lo, tol):
    def interp(p, q, axis, level):
        t = (level - p[axis]) / (q[axis] - p[axis])
        return p + t * (q - p)

    pts = [p.copy() for p in chain]
    # Clip the front by x1 >= lo[0] (first coordinate is increasing).
    while len(pts) >= 2 and pts[1][0] <= lo[0]:
        pts.pop(0)
    if pts and pts[0][0] < lo[0] - tol:
        if len(pts) >= 2:
            pts[0] = interp(pts[0], pts[1], 0, lo[0])
        else:
            return None
    # Clip the back by x2 >= lo[1] (second coordinate is decreasing).
    while len(pts) >= 2 and pts[-2][1] <= lo[1]:
        pts.pop()
    if pts and pts[-1][1] < lo[1] - tol:
        if len(pts) >= 2:
            pts[-1] = interp(pts[-2], pts[-1], 1, lo[1])
        else:
            return None
    if not pts:
        return None
    if pts[0][0] < lo[0] - tol or pts[-1][1] < lo[1] - tol:
        return None
    return pts


@dataclass(frozen=True)
class AxiomCheck:
    name: str
    detail: dict
    ok: bool


@dataclass(frozen=True)
class AxiomReport:
    checks: list[AxiomCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)


def axiom_suite(B: Polytope, sample_points, transforms, tol: float = EPS_GEOM) -> AxiomReport:
    """Property-test the solution axioms on B.

    Scale invariance: membership verdicts commute with the supplied
    positive-affine transforms.  Symmetry: on the unit simplex only the
    equal split is a member.  Consistency: the fair point of a dominating
    simplex game that lies in B is a member of B's equitable set.
    Justifiability: every member's certificate validates independently.
    """
    checks: list[AxiomCheck] = []
    samples = [as_point(p, B.dim) for p in sample_points]

    for a, z in transforms:
        a = as_point(a, B.dim)
        z = as_point(z, B.dim)
        if np.any(a <= 0):
            raise ValueError("transform scale must be strictly positive")
        mapped = Polytope(B.generators * a + z)
        for x in samples:
            s0 = equitable_contains(B, x, tol=tol).status
            s1 = equitable_contains(mapped, a * x + z, tol=tol).status
            checks.append(
                AxiomCheck(
                    "scale_invariance",
                    {"x": x.tolist(), "a": a.tolist(), "z": z.tolist(), "base": s0, "mapped": s1},
                    s0 == s1,
                )
            )

    n = B.dim
    gens = B.generators
    is_unit_simplex = (
        np.abs(B.disagreement).max() <= tol
        and np.abs(B.bliss - 1.0).max() <= tol
        and all(contains(Polytope(np.vstack([np.zeros(n), np.eye(n)])), g, tol) for g in gens)
    )
    if is_unit_simplex:
        center = np.full(n, 1.0 / n)
        ok = equitable_contains(B, center, tol=tol).is_member
        vertex_ok = all(
            equitable_contains(B, v, tol=tol).status == NON_MEMBER for v in np.eye(n)
        )
        checks.append(AxiomCheck("symmetry", {"center_member": ok}, ok and vertex_ok))

    A_sup = supporting_simplex(B)
    x_sup = fair_outcome(A_sup)
    verdict = equitable_contains(B, x_sup, tol=tol)
    checks.append(
        AxiomCheck("consistency", {"x": x_sup.tolist(), "status": verdict.status}, verdict.is_member)
    )

    for x in samples:
        v = equitable_contains(B, x, tol=tol)
        if v.is_member:
            checks.append(
                AxiomCheck(
                    "justifiability",
                    {"x": x.tolist()},
                    validate_certificate(B, x, v.certificate),
                )
            )
    return AxiomReport(checks)
