"""Independent reference implementations used to pin expected test values.

The elastic-net oracle minimizes the penalized objective by projected
accelerated gradient on the nonnegative split w = u - v (u, v >= 0), which
shares no code path with the package's coordinate-descent solver.
"""

from __future__ import annotations

import numpy as np


def penalized_objective(w, b, X, y, lam, alpha) -> float:
    r = y - X @ w - b
    pen = alpha * np.abs(w).sum() + (1.0 - alpha) * float(w @ w)
    return float(0.5 * float(r @ r) + 0.5 * lam * pen)


def elastic_net_oracle(X, y, lam, alpha, iters=30000, patience=500):
    """Projected accelerated gradient on the split formulation.

    Returns (w, b, objective) at the best iterate found. Step size is 1/L
    with L an upper bound on the smooth curvature; momentum restarts on
    objective increase keep the sequence monotone. Stops early once the best
    objective has not improved materially for ``patience`` iterations.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    T, F = X.shape
    sigma = np.linalg.norm(X, 2) if F else 0.0
    L = 2.0 * sigma * sigma + T + 2.0 * lam * (1.0 - alpha) + 1e-12
    eta = 1.0 / L
    half_l1 = 0.5 * lam * alpha
    ridge = lam * (1.0 - alpha)

    u = np.zeros(F)
    v = np.zeros(F)
    b = 0.0
    mu, mv, mb = u.copy(), v.copy(), b  # momentum point
    t_k = 1.0

    best_obj = penalized_objective(u - v, b, X, y, lam, alpha)
    best = (u.copy(), v.copy(), b)
    prev_obj = best_obj
    stale = 0

    for _ in range(iters):
        w_m = mu - mv
        r = y - X @ w_m - mb
        g_w = -(X.T @ r) + ridge * w_m
        g_b = -float(r.sum())

        u_new = np.maximum(mu - eta * (g_w + half_l1), 0.0)
        v_new = np.maximum(mv - eta * (-g_w + half_l1), 0.0)
        b_new = mb - eta * g_b

        obj = penalized_objective(u_new - v_new, b_new, X, y, lam, alpha)
        if obj > prev_obj:  # restart momentum
            t_k = 1.0
            mu, mv, mb = u.copy(), v.copy(), b
            prev_obj = penalized_objective(u - v, b, X, y, lam, alpha)
        else:
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_k * t_k))
            beta = (t_k - 1.0) / t_next
            mu = u_new + beta * (u_new - u)
            mv = v_new + beta * (v_new - v)
            mb = b_new + beta * (b_new - b)
            u, v, b = u_new, v_new, b_new
            t_k = t_next
            prev_obj = obj

        if obj < best_obj - 1e-14 * (1.0 + abs(best_obj)):
            stale = 0
        else:
            stale += 1
        if obj < best_obj:
            best_obj = obj
            best = (u.copy(), v.copy(), b)
        if stale >= patience:
            break

    u, v, b = best
    return u - v, b, best_obj


def stability_flips_bruteforce(contributions, eps=1e-12) -> int:
    """Pairwise sign flips over the subsequence of non-negligible entries."""
    signs = [1 if c > 0 else -1 for c in contributions if abs(c) >= eps]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def ols_fit(X, y):
    """Least squares with intercept via lstsq (independent of the solver)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    A = np.column_stack([X, np.ones(X.shape[0])])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return coef[:-1], float(coef[-1])
