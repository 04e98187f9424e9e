"""Weighted ridge, weighted logistic regression and diagonal Gaussians.

These are the only numerical building blocks the semi-generative model and
conditional self-learning need. Everything is dense numpy; problem sizes are
a few hundred rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import DimensionMismatch, NoPositiveWeights, NonFiniteInput, SingularSystem

VARIANCE_FLOOR = 1e-6
LOG_2PI = float(np.log(2.0 * np.pi))


def _as_matrix(X, name="X"):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise DimensionMismatch(f"{name} must be a matrix, got shape {X.shape}")
    return X


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NonFiniteInput("inputs contain NaN or inf")


def augment(X: np.ndarray) -> np.ndarray:
    """Append a trailing column of ones."""
    X = _as_matrix(X)
    return np.hstack([X, np.ones((X.shape[0], 1))])


@dataclass(frozen=True, eq=False)
class RidgeParams:
    """Coefficients of a (multi-output) linear map.

    With ``fit_intercept`` the last row of ``coef`` is the intercept.
    """

    coef: np.ndarray
    fit_intercept: bool = True

    def predict(self, X) -> np.ndarray:
        X = _as_matrix(X)
        d_in = self.coef.shape[0] - (1 if self.fit_intercept else 0)
        if X.shape[1] != d_in:
            raise DimensionMismatch(f"expected {d_in} input columns, got {X.shape[1]}")
        Xa = augment(X) if self.fit_intercept else X
        return Xa @ self.coef

    @property
    def slope(self) -> np.ndarray:
        """Input-to-output matrix, shape (d_out, d_in)."""
        return (self.coef[:-1] if self.fit_intercept else self.coef).T

    @property
    def intercept(self) -> np.ndarray:
        if not self.fit_intercept:
            return np.zeros(self.coef.shape[1])
        return self.coef[-1]


@dataclass(frozen=True, eq=False)
class LogisticParams:
    weights: np.ndarray
    intercept: float

    def decision(self, X) -> np.ndarray:
        X = _as_matrix(X)
        if X.shape[1] != self.weights.shape[0]:
            raise DimensionMismatch(f"expected {self.weights.shape[0]} input columns, got {X.shape[1]}")
        return X @ self.weights + self.intercept

    def predict_proba(self, X) -> np.ndarray:
        return expit(self.decision(X))

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X) > 0.5).astype(int)


@dataclass(frozen=True, eq=False)
class DiagGaussian:
    mean: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        var = np.atleast_1d(np.asarray(self.variances, dtype=float))
        if mean.shape != var.shape:
            raise DimensionMismatch("mean and variances must have the same length")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "variances", np.maximum(var, VARIANCE_FLOOR))


def log_density(g: DiagGaussian, x) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != g.mean.shape:
        raise DimensionMismatch(f"point has shape {x.shape}, Gaussian has {g.mean.shape}")
    return float(diag_gauss_logpdf(x[None, :], g.mean[None, :], g.variances)[0])


def diag_gauss_logpdf(X: np.ndarray, means: np.ndarray, variances: np.ndarray) -> np.ndarray:
    """Row-wise log N(x_i; mean_i, diag(variances)); ``means`` may be per-row."""
    resid = X - means
    return -0.5 * np.sum(LOG_2PI + np.log(variances) + resid**2 / variances, axis=-1)


def weighted_ridge(X, Y, weights=None, lam: float = 1.0, fit_intercept: bool = True) -> RidgeParams:
    """Minimise sum_i w_i ||y_i - Theta^T x_i||^2 + lam ||Theta||_F^2.

    With ``fit_intercept`` a ones column is appended to ``X`` and the
    intercept row is penalised together with the slopes.
    """
    X = _as_matrix(X)
    Y = _as_matrix(Y, "Y")
    n = X.shape[0]
    if Y.shape[0] != n:
        raise DimensionMismatch(f"X has {n} rows, Y has {Y.shape[0]}")
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float).reshape(-1)
    if w.shape[0] != n:
        raise DimensionMismatch("weights length must match the number of rows")
    _check_finite(X, Y, w)
    if np.any(w < 0) or lam < 0:
        raise ValueError("weights and lam must be non-negative")

    Xa = augment(X) if fit_intercept else X
    Xw = Xa * w[:, None]
    gram = Xa.T @ Xw + lam * np.eye(Xa.shape[1])
    rhs = Xw.T @ Y
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        raise SingularSystem("regularised normal matrix is not positive definite") from None
    if lam == 0.0 and np.linalg.cond(gram) > 1e14:
        raise SingularSystem("design is rank deficient and lam = 0")
    coef = np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))
    return RidgeParams(coef, fit_intercept)


def ridge_objective(coef, X, Y, weights, lam, fit_intercept=True) -> float:
    Xa = augment(X) if fit_intercept else _as_matrix(X)
    R = _as_matrix(Y) - Xa @ coef
    return float(np.sum(np.asarray(weights)[:, None] * R**2) + lam * np.sum(coef**2))


def _logistic_terms(X1, y, w, lam, theta):
    z = X1 @ theta
    p = expit(z)
    # CE(y, sigma(z)) = logaddexp(0, z) - y z
    loss = float(np.sum(w * (np.logaddexp(0.0, z) - y * z)) + 0.5 * lam * theta[:-1] @ theta[:-1])
    grad = X1.T @ (w * (p - y))
    grad[:-1] += lam * theta[:-1]
    return loss, grad, p


def logistic_objective(params: LogisticParams, X, y, weights, lam) -> float:
    X1 = augment(X)
    theta = np.append(params.weights, params.intercept)
    return _logistic_terms(X1, np.asarray(y, float), np.asarray(weights, float), lam, theta)[0]


def logistic_gradient(params: LogisticParams, X, y, weights, lam) -> np.ndarray:
    """Gradient of the weighted penalised cross-entropy, intercept last."""
    X1 = augment(X)
    theta = np.append(params.weights, params.intercept)
    return _logistic_terms(X1, np.asarray(y, float), np.asarray(weights, float), lam, theta)[1]


def weighted_logistic(
    X,
    y,
    weights=None,
    lam: float = 1.0,
    *,
    grad_tol: float = 1e-8,
    max_iter: int = 100,
) -> LogisticParams:
    """Newton/IRLS fit of sum_i w_i CE(y_i, sigma(w^T x_i + b)) + lam/2 ||w||^2.

    ``y`` may hold soft targets in [0, 1]. The intercept is not penalised.
    Steps are damped by backtracking so the objective never increases.
    """
    X = _as_matrix(X)
    n, d = X.shape
    y = np.asarray(y, dtype=float).reshape(-1)
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float).reshape(-1)
    if y.shape[0] != n or w.shape[0] != n:
        raise DimensionMismatch("X, y and weights must have matching lengths")
    if n < 1:
        raise NoPositiveWeights("no rows to fit")
    _check_finite(X, y, w)
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    if not np.any(w > 0):
        raise NoPositiveWeights("at least one weight must be positive")
    if np.any((y < 0) | (y > 1)):
        raise ValueError("targets must lie in [0, 1]")

    X1 = augment(X)
    penalty = np.full(d + 1, lam)
    penalty[-1] = 0.0
    theta = np.zeros(d + 1)
    loss, grad, p = _logistic_terms(X1, y, w, lam, theta)
    for _ in range(max_iter):
        if np.max(np.abs(grad)) < grad_tol:
            break
        s = w * p * (1.0 - p)
        H = X1.T @ (X1 * s[:, None]) + np.diag(penalty)
        try:
            step = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, grad, rcond=None)[0]
        g_norm = np.max(np.abs(grad))
        noise = 1e-13 * max(1.0, abs(loss))  # loss differences below this are roundoff
        t = 1.0
        while True:
            cand = theta - t * step
            c_loss, c_grad, c_p = _logistic_terms(X1, y, w, lam, cand)
            if c_loss <= loss + 1e-4 * t * (grad @ -step):
                break
            # near the optimum the loss is flat to machine precision; accept a
            # step that stays flat and shrinks the gradient
            if c_loss <= loss + noise and np.max(np.abs(c_grad)) < g_norm:
                break
            if t < 1e-10:
                break
            t *= 0.5
        if c_loss > loss + noise or (c_loss > loss and np.max(np.abs(c_grad)) >= g_norm):
            break
        theta, loss, grad, p = cand, c_loss, c_grad, c_p
    return LogisticParams(theta[:-1].copy(), float(theta[-1]))
