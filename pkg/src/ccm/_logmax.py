"""Concave log-welfare maximization over the probability simplex.

Solves, for a batch of problems at once,

    maximize  sum_i log((C lam)_i)   over  lam in the unit simplex,

with C nonnegative and every row of C nonzero.  Offsets (disagreement
points) are handled by the callers, who subtract them from every column;
on the simplex that is the same objective.

The method is a damped multiplicative-ascent warm start (iterates stay in
the relative interior) followed by Newton steps restricted to the active
support, with cells grouped by support pattern so the Newton systems
solve as one stacked call.  Because sum_j lam_j phi_j == n identically
(phi is the gradient), the optimality condition is simply phi_j <= n for
all j with equality on the support, which doubles as the reported KKT
residual.
"""
from __future__ import annotations

import numpy as np

_SUPP_EPS = 1e-10


class ConvergenceError(RuntimeError):
    pass


def _objective(C, lam):
    x = np.einsum("bnm,bm->bn", C, lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.where(x > 0, np.log(np.maximum(x, 1e-300)), -np.inf).sum(axis=1)
    return x, f


def _gradients(C, x):
    return np.einsum("bnm,bn->bm", C, 1.0 / x)


def _residuals(C, lam, x):
    n = C.shape[1]
    phi = _gradients(C, x)
    over = phi.max(axis=1) - n
    dev = np.abs(np.where(lam > _SUPP_EPS, phi - n, 0.0)).max(axis=1)
    return np.maximum(over, dev) / n, phi


def _warm_start(C, lam, iters):
    n = C.shape[1]
    x, f = _objective(C, lam)
    beta = np.ones(C.shape[0])
    for it in range(iters):
        phi = _gradients(C, x)
        ratio = phi / n
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(ratio > 0, ratio, 1.0) ** beta[:, None]
        step = np.where(ratio > 0, step, 0.0)
        cand = lam * step
        tot = cand.sum(axis=1, keepdims=True)
        cand = np.where(tot > 0, cand / np.where(tot > 0, tot, 1.0), lam)
        xc, fc = _objective(C, cand)
        accept = fc >= f - 1e-14 * np.abs(f)
        lam = np.where(accept[:, None], cand, lam)
        x = np.where(accept[:, None], xc, x)
        gain = np.where(accept, fc - f, 0.0)
        f = np.where(accept, fc, f)
        beta = np.where(accept, np.minimum(1.0, beta * 1.2), np.maximum(beta * 0.5, 1e-4))
        if it % 16 == 15 and gain.max() <= 1e-13 * (1.0 + np.abs(f).max()):
            break
    return lam, x, f


def _newton_group(Cg, lamS, f, iters):
    b, n, s = Cg.shape
    eye = np.eye(s)
    x = np.einsum("bns,bs->bn", Cg, lamS)
    for _ in range(iters):
        inv = 1.0 / x
        g = np.einsum("bns,bn->bs", Cg, inv)
        H = np.einsum("bns,bn,bnt->bst", Cg, inv * inv, Cg)
        tr = np.einsum("bss->b", H)
        M = np.zeros((b, s + 1, s + 1))
        M[:, :s, :s] = H + (1e-13 * (tr / s + 1.0))[:, None, None] * eye
        M[:, :s, s] = 1.0
        M[:, s, :s] = 1.0
        rhs = np.zeros((b, s + 1))
        rhs[:, :s] = g - n
        try:
            sol = np.linalg.solve(M, rhs[:, :, None])[:, :, 0]
        except np.linalg.LinAlgError:  # pragma: no cover - ridge keeps M regular
            sol = np.stack(
                [np.linalg.lstsq(M[i], rhs[i], rcond=None)[0] for i in range(b)]
            )
        delta = sol[:, :s]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(delta < 0, -lamS / np.where(delta < 0, delta, -1.0), np.inf)
        alpha = np.minimum(1.0, ratios.min(axis=1))
        moved = np.abs(delta).max(axis=1) * alpha > 1e-15
        if not moved.any():
            break
        for _ in range(45):
            cand = np.maximum(lamS + alpha[:, None] * delta, 0.0)
            cand /= cand.sum(axis=1, keepdims=True)
            xc = np.einsum("bns,bs->bn", Cg, cand)
            with np.errstate(divide="ignore", invalid="ignore"):
                fc = np.where(xc > 0, np.log(np.maximum(xc, 1e-300)), -np.inf).sum(axis=1)
            worse = moved & (fc < f - 1e-14 * np.abs(f))
            if not worse.any():
                break
            alpha = np.where(worse, alpha * 0.5, alpha)
            moved &= alpha > 1e-18
        lamS = np.where(moved[:, None], cand, lamS)
        x = np.where(moved[:, None], xc, x)
        f = np.where(moved, fc, f)
    return lamS, f


def maximize_log_sum_batch(C, tol=1e-11, warm_iters=300, support_rounds=10):
    """Batched solve.  C has shape (cells, n, m), nonnegative, nonzero rows.

    Returns (lam, value, residual) with lam of shape (cells, m).  Raises
    ConvergenceError if any cell misses the KKT tolerance after retries.
    """
    C = np.asarray(C, dtype=float)
    if C.ndim != 3:
        raise ValueError("C must have shape (cells, n, m)")
    b, n, m = C.shape
    if C.min() < 0:
        raise ValueError("columns must be nonnegative")
    if np.any(C.max(axis=2) <= 0):
        raise ValueError("every agent row needs a positive entry")
    if m == 1:
        lam = np.ones((b, 1))
        _, f = _objective(C, lam)
        return lam, f, np.zeros(b)

    lam, x, f = _warm_start(C, np.full((b, m), 1.0 / m), warm_iters)

    for _ in range(support_rounds):
        resid, phi = _residuals(C, lam, x)
        todo = resid > tol
        if not todo.any():
            break
        supp = (lam > _SUPP_EPS) | (phi > n * (1.0 + 1e-12))
        keys = {}
        for cell in np.nonzero(todo)[0]:
            keys.setdefault(supp[cell].tobytes(), []).append(cell)
        for key in sorted(keys):
            cells = np.array(keys[key])
            S = np.nonzero(np.frombuffer(key, dtype=bool))[0]
            lamS = lam[np.ix_(cells, S)]
            tot = lamS.sum(axis=1, keepdims=True)
            lamS = np.where(tot > 0, lamS / np.where(tot > 0, tot, 1.0), 1.0 / S.size)
            Cg = C[np.ix_(cells, np.arange(n), S)]
            _, f0 = _objective(Cg, lamS)
            lamS, _ = _newton_group(Cg, lamS, f0, iters=40)
            block = np.zeros((cells.size, m))
            block[:, S] = lamS
            lam[cells] = block
        x, f = _objective(C, lam)

    resid, _ = _residuals(C, lam, x)
    bad = np.nonzero(resid > tol)[0]
    if bad.size:
        # Slow path: rerun stragglers with a long warm start.
        lam2, f2, r2 = maximize_log_sum_batch(
            C[bad], tol=tol, warm_iters=max(4000, 10 * warm_iters), support_rounds=support_rounds
        ) if warm_iters < 4000 else (None, None, None)
        if lam2 is None or (r2 > tol).any():
            raise ConvergenceError(
                f"log-welfare maximizer missed tolerance {tol} on {bad.size} cell(s)"
            )
        lam[bad] = lam2
        f[bad] = f2
        resid[bad] = r2
    return lam, f, resid


def maximize_log_sum(C, tol=1e-11):
    """Single-problem convenience wrapper; C has shape (n, m)."""
    C = np.asarray(C, dtype=float)
    lam, value, resid = maximize_log_sum_batch(C[None], tol=tol)
    return lam[0], float(value[0]), float(resid[0])
