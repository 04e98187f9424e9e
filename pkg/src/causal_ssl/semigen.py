"""Semi-generative model of P(Y, X_E | X_C) and its EM fit.

The model is a logistic prior P(Y=1 | x_C) times a class-specific
linear-Gaussian mechanism x_E | x_C, Y=i ~ N(Theta_i^T [x_C; 1], diag(s_i)).
P(X_C) is never modelled.

Both EM variants share one M-step: given class-1 responsibilities ``r`` for
every row (0/1 for labelled rows and hard EM, posteriors for soft EM) it
fits the prior by logistic regression on soft targets ``r``, the class-1
mechanism by ridge with weights ``r`` and the class-0 mechanism with weights
``1 - r``, then re-estimates each noise variance from the weighted residuals.

The ridge and logistic penalties make every fit a MAP estimate. The noise
update (weighted RSS + lam * ||theta_j||^2) / sum(w) is the exact minimiser
of the penalised objective returned by :func:`objective`, which is therefore
what EM decreases monotonically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy.special import expit, log_expit, logsumexp

from .errors import DimensionMismatch, SingleClassLabels
from .regress import (
    LOG_2PI,
    VARIANCE_FLOOR,
    LogisticParams,
    weighted_logistic,
    weighted_ridge,
)


@dataclass(frozen=True, eq=False)
class SemiGenParams:
    prior: LogisticParams
    mech: tuple  # (RidgeParams for Y=0, RidgeParams for Y=1)
    noise: tuple  # (variances for Y=0, variances for Y=1), each (d_E,)

    def __post_init__(self):
        noise = tuple(np.maximum(np.asarray(v, float).reshape(-1), VARIANCE_FLOOR) for v in self.noise)
        object.__setattr__(self, "noise", noise)
        object.__setattr__(self, "mech", tuple(self.mech))
        d_c = self.prior.weights.shape[0]
        for m, v in zip(self.mech, noise):
            if m.coef.shape[0] != d_c + 1 or m.coef.shape[1] != v.shape[0]:
                raise DimensionMismatch("mechanism/noise shapes inconsistent with the prior")

    @property
    def d_causes(self) -> int:
        return self.prior.weights.shape[0]

    @property
    def d_effects(self) -> int:
        return self.noise[0].shape[0]


@dataclass(frozen=True)
class EmStep:
    iteration: int
    nll: float
    objective: float
    change: float


@dataclass
class EmTrace:
    """Per-iteration diagnostics of :func:`fit_em`.

    ``nll`` is the joint NLL under the current hard labels for hard EM and
    the marginal NLL for soft EM; ``objective`` adds the regularisation
    terms. ``change`` counts flipped labels (hard) or the largest absolute
    change in a responsibility (soft).
    """

    steps: List[EmStep] = field(default_factory=list)
    converged: bool = False

    def append(self, iteration, nll, objective, change):
        if self.steps and iteration <= self.steps[-1].iteration:
            raise ValueError("iteration indices must increase")
        self.steps.append(EmStep(iteration, float(nll), float(objective), float(change)))

    @property
    def nlls(self) -> np.ndarray:
        return np.array([s.nll for s in self.steps])

    @property
    def objectives(self) -> np.ndarray:
        return np.array([s.objective for s in self.steps])

    def __len__(self):
        return len(self.steps)


@dataclass
class EmResult:
    params: SemiGenParams
    labels: np.ndarray  # hard labels for the unlabelled rows
    resp: np.ndarray  # P(Y=1 | x) for the unlabelled rows under ``params``
    trace: EmTrace


def _inputs(params, X_C, X_E):
    X_C = np.asarray(X_C, float)
    X_E = np.asarray(X_E, float)
    if X_E.ndim == 1:
        X_E = X_E.reshape(-1, 1)
    if X_C.ndim == 1:
        X_C = X_C.reshape(X_E.shape[0], -1)
    if X_C.shape[0] != X_E.shape[0]:
        raise DimensionMismatch("X_C and X_E row counts differ")
    if X_C.shape[1] != params.d_causes or X_E.shape[1] != params.d_effects:
        raise DimensionMismatch(
            f"expected {params.d_causes} cause / {params.d_effects} effect columns, "
            f"got {X_C.shape[1]} / {X_E.shape[1]}"
        )
    return X_C, X_E


def log_joint(params: SemiGenParams, X_C, X_E) -> np.ndarray:
    """log p(y, x_E | x_C) for y = 0, 1; shape (n, 2)."""
    X_C, X_E = _inputs(params, X_C, X_E)
    z = params.prior.decision(X_C)
    out = np.empty((X_C.shape[0], 2))
    for i, log_prior in ((0, log_expit(-z)), (1, log_expit(z))):
        var = params.noise[i]
        resid = X_E - params.mech[i].predict(X_C)
        out[:, i] = log_prior - 0.5 * np.sum(LOG_2PI + np.log(var) + resid**2 / var, axis=1)
    return out


def posterior(params: SemiGenParams, x_C, x_E):
    """P(Y=1 | x_C, x_E); a float for a single point, an array for matrices.

    Computed as sigmoid of the difference of the two log-joints so that far
    points do not underflow.
    """
    single = np.ndim(x_E) <= 1 and np.ndim(x_C) <= 1
    if single:
        x_C = np.asarray(x_C, float).reshape(1, -1)
        x_E = np.asarray(x_E, float).reshape(1, -1)
    lj = log_joint(params, x_C, x_E)
    p = expit(lj[:, 1] - lj[:, 0])
    return float(p[0]) if single else p


def predict(params: SemiGenParams, X_C, X_E, threshold: float = 0.5) -> np.ndarray:
    # strict inequality: a posterior of exactly 0.5 is class 0
    return (np.atleast_1d(posterior(params, X_C, X_E)) > threshold).astype(int)


def nll(params: SemiGenParams, X_C, y, X_E) -> float:
    """Expected complete-data NLL; for 0/1 ``y`` this is the joint NLL."""
    lj = log_joint(params, X_C, X_E)
    y = np.asarray(y, float).reshape(-1)
    if y.shape[0] != lj.shape[0]:
        raise DimensionMismatch("y length differs from the number of rows")
    # avoid 0 * (-inf) for degenerate densities
    t1 = np.where(y > 0, y * lj[:, 1], 0.0)
    t0 = np.where(y < 1, (1.0 - y) * lj[:, 0], 0.0)
    return float(-np.sum(t0 + t1))


def marginal_nll(params: SemiGenParams, X_C, X_E) -> float:
    """-sum_i log sum_y p(y, x_E,i | x_C,i)."""
    return float(-np.sum(logsumexp(log_joint(params, X_C, X_E), axis=1)))


def penalty(params: SemiGenParams, ridge_lambda: float = 1.0, logistic_lambda: float = 1.0) -> float:
    """Regularisation terms matching the M-step's fits.

    lam_Y/2 ||w||^2 for the prior, and for each class and effect dimension
    j, lam_E ||theta_j||^2 / (2 s_j): the ridge penalty on the scale of the
    Gaussian log-likelihood.
    """
    total = 0.5 * logistic_lambda * float(params.prior.weights @ params.prior.weights)
    for m, var in zip(params.mech, params.noise):
        total += ridge_lambda * float(np.sum(m.coef**2, axis=0) @ (0.5 / var))
    return total


def objective(params: SemiGenParams, labelled, unlabelled=None, ridge_lambda=1.0, logistic_lambda=1.0) -> float:
    """Penalised NLL: labelled joint terms, unlabelled mixture terms, penalty."""
    X_C, y, X_E = labelled
    value = nll(params, X_C, y, X_E) + penalty(params, ridge_lambda, logistic_lambda)
    if unlabelled is not None and np.shape(unlabelled[1])[0]:
        value += marginal_nll(params, *unlabelled)
    return value


def _m_step(X_C, X_E, r, ridge_lambda, logistic_lambda) -> SemiGenParams:
    prior = weighted_logistic(X_C, r, np.ones_like(r), logistic_lambda)
    mech, noise = [], []
    for w in (1.0 - r, r):
        m = weighted_ridge(X_C, X_E, w, ridge_lambda)
        rss = w @ ((X_E - m.predict(X_C)) ** 2)
        total = w.sum()
        if total > 0:
            var = (rss + ridge_lambda * np.sum(m.coef**2, axis=0)) / total
        else:
            var = np.ones(X_E.shape[1])
        mech.append(m)
        noise.append(var)
    return SemiGenParams(prior, tuple(mech), tuple(noise))


def _check_labels(y):
    y = np.asarray(y).reshape(-1)
    if not np.all(np.isin(y, (0, 1))):
        raise ValueError("labelled targets must be 0 or 1")
    if np.unique(y).size < 2:
        raise SingleClassLabels("both classes must be present among the labelled rows")
    return y.astype(float)


def fit_supervised(X_C, y, X_E, ridge_lambda: float = 1.0, logistic_lambda: float = 1.0) -> SemiGenParams:
    y = _check_labels(y)
    X_C = np.asarray(X_C, float).reshape(y.shape[0], -1)
    X_E = np.asarray(X_E, float).reshape(y.shape[0], -1)
    return _m_step(X_C, X_E, y, ridge_lambda, logistic_lambda)


def fit_em(
    labelled,
    unlabelled,
    mode: str = "soft",
    ridge_lambda: float = 1.0,
    logistic_lambda: float = 1.0,
    max_iter: int = 100,
    tol: float = 1e-6,
) -> EmResult:
    """Fit the semi-generative model by soft or hard EM.

    ``labelled`` is ``(X_C, y, X_E)``, ``unlabelled`` is ``(X_C, X_E)``.
    Hard EM stops at a label fixpoint and returns the iterate with the lowest
    joint NLL; soft EM stops once no responsibility moves by ``tol`` or more.
    """
    if mode not in ("soft", "hard"):
        raise ValueError(f"mode must be 'soft' or 'hard', got {mode!r}")
    Xl_C, yl, Xl_E = labelled
    yl = _check_labels(yl)
    n_l = yl.shape[0]
    Xl_C = np.asarray(Xl_C, float).reshape(n_l, -1)
    Xl_E = np.asarray(Xl_E, float).reshape(n_l, -1)
    Xu_C, Xu_E = unlabelled
    Xu_E = np.asarray(Xu_E, float)
    n_u = Xu_E.shape[0]
    Xu_E = Xu_E.reshape(n_u, Xl_E.shape[1])
    Xu_C = np.asarray(Xu_C, float).reshape(n_u, Xl_C.shape[1])

    params = _m_step(Xl_C, Xl_E, yl, ridge_lambda, logistic_lambda)
    trace = EmTrace()
    if n_u == 0:
        value = nll(params, Xl_C, yl, Xl_E)
        trace.append(0, value, value + penalty(params, ridge_lambda, logistic_lambda), 0.0)
        trace.converged = True
        return EmResult(params, np.zeros(0, int), np.zeros(0), trace)

    X_C = np.vstack([Xl_C, Xu_C])
    X_E = np.vstack([Xl_E, Xu_E])
    prev = None
    best = None
    for it in range(max_iter):
        q = posterior(params, Xu_C, Xu_E)
        r_u = (q > 0.5).astype(float) if mode == "hard" else q
        if prev is None:
            change = np.inf
        elif mode == "hard":
            change = float(np.sum(r_u != prev))
        else:
            change = float(np.max(np.abs(r_u - prev)))
        if prev is not None and ((mode == "hard" and change == 0) or (mode == "soft" and change < tol)):
            trace.converged = True
            break
        r = np.concatenate([yl, r_u])
        params = _m_step(X_C, X_E, r, ridge_lambda, logistic_lambda)
        if mode == "hard":
            value = nll(params, X_C, r, X_E)
            if best is None or value < best[0]:
                best = (value, params, r_u)
        else:
            value = nll(params, Xl_C, yl, Xl_E) + marginal_nll(params, Xu_C, Xu_E)
        pen = penalty(params, ridge_lambda, logistic_lambda)
        trace.append(it, value, value + pen, change if np.isfinite(change) else n_u)
        prev = r_u

    if mode == "hard":
        _, params, r_u = best
        return EmResult(params, r_u.astype(int), posterior(params, Xu_C, Xu_E), trace)
    q = posterior(params, Xu_C, Xu_E)
    return EmResult(params, (q > 0.5).astype(int), q, trace)
