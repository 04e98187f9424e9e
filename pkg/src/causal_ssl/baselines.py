"""Causally agnostic baselines on the joint feature space (x_C, x_E)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ConfigError, SingleClassLabels
from .regress import LogisticParams, weighted_logistic


def fit_supervised_logreg(Z, y, lam: float = 1.0) -> LogisticParams:
    """Logistic regression on concatenated cause+effect features ``Z``."""
    y = np.asarray(y).reshape(-1)
    if np.unique(y).size < 2:
        raise SingleClassLabels("both classes must be present among the labelled rows")
    return weighted_logistic(Z, y, np.ones(y.shape[0]), lam)


@dataclass(frozen=True)
class LabelPropConfig:
    gamma: float = 20.0
    max_iter: int = 1000
    tol: float = 1e-3

    def __post_init__(self):
        if not self.gamma > 0:
            raise ConfigError("gamma must be positive")
        if self.max_iter < 1 or not self.tol > 0:
            raise ConfigError("max_iter must be >= 1 and tol > 0")


@dataclass
class LabelPropResult:
    labels: np.ndarray  # predictions for the unlabelled rows
    F: np.ndarray  # final label distribution, labelled rows first
    converged: bool
    n_iter: int


def transition_matrix(Z: np.ndarray, gamma: float) -> np.ndarray:
    """Row-normalised RBF affinities exp(-gamma ||z_i - z_j||^2)."""
    W = np.exp(-gamma * cdist(Z, Z, "sqeuclidean"))
    return W / W.sum(axis=1, keepdims=True)


def fit_label_propagation(Zl, yl, Zu, cfg: LabelPropConfig = LabelPropConfig()) -> LabelPropResult:
    """Clamped label propagation F <- T F with labelled rows reset each step.

    Convergence is declared when no entry of F moves by ``tol`` or more; if
    ``max_iter`` is reached first the last iterate is returned with
    ``converged=False``.
    """
    Zl = np.asarray(Zl, float)
    Zu = np.asarray(Zu, float)
    yl = np.asarray(yl).reshape(-1).astype(int)
    n_l = yl.shape[0]
    if n_l < 1:
        raise ConfigError("label propagation needs at least one labelled row")
    Zl = Zl.reshape(n_l, -1)
    Zu = Zu.reshape(-1, Zl.shape[1])
    T = transition_matrix(np.vstack([Zl, Zu]), cfg.gamma)

    Y_l = np.zeros((n_l, 2))
    Y_l[np.arange(n_l), yl] = 1.0
    F = np.zeros((T.shape[0], 2))
    F[:n_l] = Y_l
    converged = False
    it = 0
    for it in range(1, cfg.max_iter + 1):
        F_new = T @ F
        F_new[:n_l] = Y_l
        delta = np.max(np.abs(F_new - F))
        F = F_new
        if delta < cfg.tol:
            converged = True
            break
    # argmax ties (including untouched all-zero rows) resolve to class 0
    labels = (F[n_l:, 1] > F[n_l:, 0]).astype(int)
    return LabelPropResult(labels, F, converged, it)


def label_propagation_fixed_point(Zl, yl, Zu, gamma: float) -> np.ndarray:
    """Exact stationary F_u from (I - T_uu) F_u = T_ul Y_l."""
    Zl = np.asarray(Zl, float)
    yl = np.asarray(yl).reshape(-1).astype(int)
    n_l = yl.shape[0]
    Zl = Zl.reshape(n_l, -1)
    Zu = np.asarray(Zu, float).reshape(-1, Zl.shape[1])
    T = transition_matrix(np.vstack([Zl, Zu]), gamma)
    Y_l = np.zeros((n_l, 2))
    Y_l[np.arange(n_l), yl] = 1.0
    T_uu = T[n_l:, n_l:]
    T_ul = T[n_l:, :n_l]
    return np.linalg.solve(np.eye(T_uu.shape[0]) - T_uu, T_ul @ Y_l)
