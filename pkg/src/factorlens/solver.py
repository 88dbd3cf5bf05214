"""Penalized least-squares solver for one stock-cycle regression.

Objective (bias unpenalized):

    J(w, b) = 1/2 * sum_t (y_t - x_t.w - b)^2
              + 1/2 * lam * (alpha * ||w||_1 + (1 - alpha) * ||w||_2^2)

Minimized by cyclic coordinate descent: exact bias step b <- mean(y - Xw),
then for each coordinate w_j <- soft(rho_j, lam*alpha/2) / (z_j + lam*(1-alpha))
with rho_j the partial-residual correlation and z_j the column squared norm.
Three variants: fixed-lambda lasso (alpha=1), block-CV lasso, and the
half-and-half elastic net (alpha=0.5).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from .errors import (
    DimensionMismatch,
    InvalidConfig,
    NonFiniteInput,
    TooFewSamples,
)

VARIANTS = ("lasso", "lassocv", "elnet")

DEFAULT_TOL = 1e-7
DEFAULT_MAX_SWEEPS = 1000
DEFAULT_LAMBDA_RATIO = 0.1
KKT_TOL = 1e-6


@dataclass(frozen=True)
class ElasticNetConfig:
    """Solver settings; alpha is pinned by the variant (1.0, 1.0, 0.5)."""

    variant: str = "lasso"
    lambda_ratio: float = DEFAULT_LAMBDA_RATIO  # fixed lambda = ratio * lambda_max
    lambda_value: Optional[float] = None        # explicit lambda override
    max_sweeps: int = DEFAULT_MAX_SWEEPS
    tol: float = DEFAULT_TOL
    cv_folds: int = 10
    cv_grid_size: int = 100
    cv_lambda_min_ratio: float = 1e-3

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidConfig(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.lambda_ratio < 0 or (self.lambda_value is not None and self.lambda_value < 0):
            raise InvalidConfig("lambda must be nonnegative")
        if self.max_sweeps < 1 or self.tol <= 0:
            raise InvalidConfig("max_sweeps >= 1 and tol > 0 required")
        if self.cv_folds < 2 or self.cv_grid_size < 1:
            raise InvalidConfig("cv_folds >= 2 and cv_grid_size >= 1 required")
        if self.variant == "lassocv" and self.lambda_value is not None:
            raise InvalidConfig("lassocv selects lambda by CV; lambda_value not allowed")

    @property
    def alpha(self) -> float:
        return 0.5 if self.variant == "elnet" else 1.0


@dataclass(frozen=True)
class FitResult:
    """One fitted sparse regression: weights, bias, and solver diagnostics."""

    weights: np.ndarray
    bias: float
    residuals: np.ndarray
    lambda_used: float
    alpha: float
    objective: float
    sweeps: int
    converged: bool
    kkt_residual: float
    objective_history: np.ndarray
    cv_lambdas: Optional[np.ndarray] = None
    cv_errors: Optional[np.ndarray] = None

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights)


@njit(cache=True, nogil=True)
def _cd_kernel(X, y, w, b0, lam, alpha, max_sweeps, tol, kkt_tol):
    T, F = X.shape
    z = np.zeros(F)
    for j in range(F):
        s = 0.0
        for t in range(T):
            s += X[t, j] * X[t, j]
        z[j] = s

    b = b0
    r = np.empty(T)
    for t in range(T):
        acc = y[t] - b
        for j in range(F):
            if w[j] != 0.0:
                acc -= X[t, j] * w[j]
        r[t] = acc

    thr = 0.5 * lam * alpha
    ridge = lam * (1.0 - alpha)

    obj_hist = np.empty(max_sweeps + 1)

    def _objective(r, w):
        sq = 0.0
        for t in range(T):
            sq += r[t] * r[t]
        l1 = 0.0
        l2 = 0.0
        for j in range(F):
            l1 += abs(w[j])
            l2 += w[j] * w[j]
        return 0.5 * sq + 0.5 * lam * (alpha * l1 + (1.0 - alpha) * l2)

    obj_hist[0] = _objective(r, w)
    sweeps = 0
    converged = False

    for s_idx in range(max_sweeps):
        # exact bias step: b <- mean(y - Xw)
        shift = 0.0
        for t in range(T):
            shift += r[t]
        shift /= T
        if shift != 0.0:
            b += shift
            for t in range(T):
                r[t] -= shift

        max_delta = 0.0
        for j in range(F):
            zj = z[j]
            if zj == 0.0:  # degenerate column keeps w_j = 0
                continue
            rho = w[j] * zj
            for t in range(T):
                rho += X[t, j] * r[t]
            if rho > thr:
                w_new = (rho - thr) / (zj + ridge)
            elif rho < -thr:
                w_new = (rho + thr) / (zj + ridge)
            else:
                w_new = 0.0
            delta = w_new - w[j]
            if delta != 0.0:
                for t in range(T):
                    r[t] -= delta * X[t, j]
                w[j] = w_new
            if abs(delta) > max_delta:
                max_delta = abs(delta)

        sweeps = s_idx + 1
        obj_hist[sweeps] = _objective(r, w)

        if max_delta < tol:
            # accept only if the subgradient optimality conditions hold
            ok = True
            for j in range(F):
                zj = z[j]
                if zj == 0.0:
                    continue
                rho = w[j] * zj
                for t in range(T):
                    rho += X[t, j] * r[t]
                if w[j] != 0.0:
                    sign = 1.0 if w[j] > 0.0 else -1.0
                    resid = abs(-rho + w[j] * zj + ridge * w[j] + thr * sign)
                    if resid > kkt_tol * (1.0 + abs(rho)):
                        ok = False
                        break
                else:
                    if abs(rho) > thr + kkt_tol:
                        ok = False
                        break
            if ok:
                converged = True
                break

    return b, sweeps, converged, obj_hist[: sweeps + 1]


def _validate_xy(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"X {X.shape} incompatible with y {y.shape}")
    if X.shape[0] < 2:
        raise DimensionMismatch("need at least 2 rows")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise NonFiniteInput("X and y must be finite")
    return X, y


def objective_value(
    w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, lam: float, alpha: float
) -> float:
    """J = 1/2 ||y - Xw - b||^2 + lam/2 (alpha ||w||_1 + (1-alpha) ||w||_2^2)."""
    w = np.asarray(w, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or w.shape != (X.shape[1],) or y.shape != (X.shape[0],):
        raise DimensionMismatch(
            f"shapes disagree: X {X.shape}, w {w.shape}, y {y.shape}"
        )
    r = y - X @ w - b
    penalty = alpha * np.abs(w).sum() + (1.0 - alpha) * (w @ w)
    return float(0.5 * (r @ r) + 0.5 * lam * penalty)


def lambda_max(X: np.ndarray, y: np.ndarray, alpha: float) -> float:
    """Smallest lambda for which the all-zero weight vector is optimal."""
    if alpha <= 0:
        raise InvalidConfig("lambda_max requires alpha > 0")
    X, y = _validate_xy(X, y)
    corr = X.T @ (y - y.mean())
    return float(np.max(np.abs(corr)) * 2.0 / alpha) if corr.size else 0.0


def kkt_max_residual(
    X: np.ndarray, y: np.ndarray, w: np.ndarray, b: float, lam: float, alpha: float
) -> float:
    """Largest violation of the coordinate-wise optimality conditions.

    Active coordinates are measured relative to 1 + |rho_j|; inactive ones as
    the absolute excess of |rho_j| over the soft threshold.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    r = y - X @ w - b
    z = np.einsum("tj,tj->j", X, X)
    rho = X.T @ r + w * z
    thr = 0.5 * lam * alpha
    ridge = lam * (1.0 - alpha)
    worst = 0.0
    for j in range(X.shape[1]):
        if z[j] == 0.0:
            continue
        if w[j] != 0.0:
            resid = abs(-rho[j] + w[j] * z[j] + ridge * w[j] + thr * np.sign(w[j]))
            worst = max(worst, resid / (1.0 + abs(rho[j])))
        else:
            worst = max(worst, max(abs(rho[j]) - thr, 0.0))
    return float(worst)


def fit_elastic_net(
    X: np.ndarray,
    y: np.ndarray,
    lam: float,
    alpha: float,
    *,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    w0: Optional[np.ndarray] = None,
) -> FitResult:
    """Coordinate-descent fit at a fixed penalty; optionally warm-started."""
    X, y = _validate_xy(X, y)
    if lam < 0 or not 0.0 <= alpha <= 1.0:
        raise InvalidConfig("lam >= 0 and alpha in [0, 1] required")
    F = X.shape[1]
    if w0 is None:
        w = np.zeros(F)
    else:
        w = np.array(w0, dtype=np.float64)
        if w.shape != (F,):
            raise DimensionMismatch(f"w0 shape {w.shape} != ({F},)")

    b, sweeps, converged, history = _cd_kernel(
        X, y, w, 0.0, float(lam), float(alpha), int(max_sweeps), float(tol), KKT_TOL
    )
    residuals = y - X @ w - b
    return FitResult(
        weights=w,
        bias=float(b),
        residuals=residuals,
        lambda_used=float(lam),
        alpha=float(alpha),
        objective=objective_value(w, b, X, y, lam, alpha),
        sweeps=int(sweeps),
        converged=bool(converged),
        kkt_residual=kkt_max_residual(X, y, w, b, lam, alpha),
        objective_history=np.asarray(history),
    )


def fit_lasso(
    X: np.ndarray,
    y: np.ndarray,
    *,
    lambda_ratio: float = DEFAULT_LAMBDA_RATIO,
    lambda_value: Optional[float] = None,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> FitResult:
    """Lasso (alpha = 1) at a fixed lambda, default 0.1 * lambda_max."""
    X, y = _validate_xy(X, y)
    lam = lambda_value if lambda_value is not None else lambda_ratio * lambda_max(X, y, 1.0)
    return fit_elastic_net(X, y, lam, 1.0, tol=tol, max_sweeps=max_sweeps)


def cv_fold_bounds(n_rows: int, k: int) -> list[tuple[int, int]]:
    """k contiguous [start, end) blocks covering range(n_rows), sizes within 1."""
    sizes = np.full(k, n_rows // k)
    sizes[: n_rows % k] += 1
    bounds = []
    start = 0
    for size in sizes:
        bounds.append((start, start + int(size)))
        start += int(size)
    return bounds


def cross_validate_lambda(
    X: np.ndarray,
    y: np.ndarray,
    lambdas: np.ndarray,
    k: int,
    *,
    alpha: float = 1.0,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> np.ndarray:
    """Mean held-out MSE per lambda over k contiguous time blocks.

    Within each fold the path is evaluated from the largest lambda down with
    warm starts; the returned errors follow the order of ``lambdas``.
    """
    X, y = _validate_xy(X, y)
    T = X.shape[0]
    if T < k:
        raise TooFewSamples(f"{k}-fold CV needs at least {k} rows, got {T}")
    lambdas = np.asarray(lambdas, dtype=np.float64)
    order = np.argsort(lambdas)[::-1]  # largest first for warm starts
    errors = np.zeros(lambdas.shape[0])
    for lo, hi in cv_fold_bounds(T, k):
        keep = np.ones(T, dtype=bool)
        keep[lo:hi] = False
        X_tr = np.ascontiguousarray(X[keep])
        y_tr = np.ascontiguousarray(y[keep])
        X_va, y_va = X[lo:hi], y[lo:hi]
        w = np.zeros(X.shape[1])
        for idx in order:
            b, _, _, _ = _cd_kernel(
                X_tr, y_tr, w, 0.0, float(lambdas[idx]), float(alpha),
                int(max_sweeps), float(tol), KKT_TOL,
            )
            pred = X_va @ w + b
            errors[idx] += float(np.mean((pred - y_va) ** 2))
    return errors / k


def fit_lasso_cv(
    X: np.ndarray,
    y: np.ndarray,
    k: int = 10,
    *,
    grid_size: int = 100,
    lambda_min_ratio: float = 1e-3,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> FitResult:
    """Lasso with lambda selected on a log grid by blocked cross-validation.

    Ties in CV error resolve to the larger lambda (sparser model); the final
    model is refit on the full window at the selected lambda.
    """
    X, y = _validate_xy(X, y)
    lam_hi = lambda_max(X, y, 1.0)
    if lam_hi > 0:
        lambdas = lam_hi * np.logspace(np.log10(lambda_min_ratio), 0.0, grid_size)
    else:
        lambdas = np.zeros(1)  # constant target: any lambda gives the null model
    errors = cross_validate_lambda(X, y, lambdas, k, alpha=1.0, tol=tol, max_sweeps=max_sweeps)
    best = int(np.flatnonzero(errors == errors.min())[-1])  # prefer larger lambda
    fit = fit_elastic_net(X, y, float(lambdas[best]), 1.0, tol=tol, max_sweeps=max_sweeps)
    return FitResult(
        weights=fit.weights,
        bias=fit.bias,
        residuals=fit.residuals,
        lambda_used=fit.lambda_used,
        alpha=fit.alpha,
        objective=fit.objective,
        sweeps=fit.sweeps,
        converged=fit.converged,
        kkt_residual=fit.kkt_residual,
        objective_history=fit.objective_history,
        cv_lambdas=lambdas,
        cv_errors=errors,
    )


def fit_with_config(X: np.ndarray, y: np.ndarray, config: ElasticNetConfig) -> FitResult:
    """Dispatch a fit according to the configured variant."""
    if config.variant == "lasso":
        return fit_lasso(
            X, y,
            lambda_ratio=config.lambda_ratio,
            lambda_value=config.lambda_value,
            tol=config.tol,
            max_sweeps=config.max_sweeps,
        )
    if config.variant == "elnet":
        X, y = _validate_xy(X, y)
        lam = (
            config.lambda_value
            if config.lambda_value is not None
            else config.lambda_ratio * lambda_max(X, y, 0.5)
        )
        return fit_elastic_net(X, y, lam, 0.5, tol=config.tol, max_sweeps=config.max_sweeps)
    return fit_lasso_cv(
        X, y,
        k=config.cv_folds,
        grid_size=config.cv_grid_size,
        lambda_min_ratio=config.cv_lambda_min_ratio,
        tol=config.tol,
        max_sweeps=config.max_sweeps,
    )


def predict(fit: FitResult, x_row: np.ndarray) -> float:
    """Model output w.x + b for one (normalized) factor row."""
    x = np.asarray(x_row, dtype=np.float64)
    if x.shape != fit.weights.shape:
        raise DimensionMismatch(f"row shape {x.shape} != weights {fit.weights.shape}")
    return float(fit.weights @ x + fit.bias)
