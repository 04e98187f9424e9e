"""Conditional self-learning.

Two cause -> effect regressors, one per class, compete for unlabelled
points. At every step both are refitted on their current members, every
remaining unlabelled point is scored by its squared residual under each,
and the single best (class, point) pair is absorbed. Ties go to the lower
class index, then the lower sample index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .errors import DimensionMismatch, SingleClassLabels
from .regress import weighted_ridge


def ridge_regressor(lam: float = 1.0) -> Callable:
    """Default ``regress`` callable: intercept-augmented ridge."""

    def fit(X, Y):
        return weighted_ridge(X, Y, None, lam)

    return fit


@dataclass(eq=False)
class MechanismPair:
    f0: object
    f1: object
    lam: float
    class_rows: tuple  # (indices for class 0, indices for class 1) into [labelled; unlabelled]

    def residuals(self, X_C, X_E) -> np.ndarray:
        """Squared residual of every row under f0 and f1, shape (2, n)."""
        X_C = np.asarray(X_C, float)
        X_E = np.asarray(X_E, float)
        if X_E.ndim == 1:
            X_E = X_E.reshape(-1, 1)
        X_C = X_C.reshape(X_E.shape[0], -1)
        return np.stack([np.sum((X_E - f.predict(X_C)) ** 2, axis=1) for f in (self.f0, self.f1)])


@dataclass(frozen=True)
class SelfLearnStep:
    step: int
    cls: int
    sample: int  # index into the unlabelled block
    residual: float


@dataclass
class SelfLearnTrace:
    steps: List[SelfLearnStep] = field(default_factory=list)

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)


def fit_condself(labelled, unlabelled, lam: float = 1.0, regress: Optional[Callable] = None):
    """Label every unlabelled point by greedy absorption.

    Returns ``(labels, pair, trace)``. ``regress(X, Y)`` must return an
    object with ``predict(X)``; the default is ridge with strength ``lam``.
    """
    regress = regress or ridge_regressor(lam)
    Xl_C, yl, Xl_E = labelled
    yl = np.asarray(yl).reshape(-1).astype(int)
    n_l = yl.shape[0]
    if np.unique(yl).size < 2:
        raise SingleClassLabels("both classes must be present among the labelled rows")
    Xl_C = np.asarray(Xl_C, float).reshape(n_l, -1)
    Xl_E = np.asarray(Xl_E, float).reshape(n_l, -1)
    Xu_C, Xu_E = unlabelled
    Xu_E = np.asarray(Xu_E, float)
    n_u = Xu_E.shape[0]
    Xu_C = np.asarray(Xu_C, float)
    if Xu_E.size != n_u * Xl_E.shape[1] or Xu_C.size != n_u * Xl_C.shape[1]:
        raise DimensionMismatch("labelled and unlabelled feature widths differ")
    Xu_E = Xu_E.reshape(n_u, Xl_E.shape[1])
    Xu_C = Xu_C.reshape(n_u, Xl_C.shape[1])

    X_C = np.vstack([Xl_C, Xu_C])
    X_E = np.vstack([Xl_E, Xu_E])
    members = [list(np.flatnonzero(yl == 0)), list(np.flatnonzero(yl == 1))]
    labels = np.full(n_u, -1, dtype=int)
    remaining = np.arange(n_u)
    trace = SelfLearnTrace()

    def refit():
        return [regress(X_C[rows], X_E[rows]) for rows in members]

    fits = refit()
    step = 0
    while remaining.size:
        R = np.stack([np.sum((Xu_E[remaining] - f.predict(Xu_C[remaining])) ** 2, axis=1) for f in fits])
        # row-major argmin: lowest class first, then lowest remaining index
        flat = int(np.argmin(R))
        i, k = divmod(flat, remaining.size)
        j = int(remaining[k])
        labels[j] = i
        members[i].append(n_l + j)
        trace.steps.append(SelfLearnStep(step, i, j, float(R[i, k])))
        remaining = np.delete(remaining, k)
        step += 1
        fits = refit()

    pair = MechanismPair(fits[0], fits[1], lam, (np.array(members[0]), np.array(members[1])))
    return labels, pair, trace


def predict_condself(pair: MechanismPair, X_C, X_E) -> np.ndarray:
    R = pair.residuals(X_C, X_E)
    # ties resolve to class 0
    return (R[1] < R[0]).astype(int)
