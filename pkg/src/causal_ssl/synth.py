"""Synthetic data from a cause -> target -> effect structural model.

Causes come from a Gaussian mixture, the target is a logistic Bernoulli in
the causes, and effects are class-specific affine maps of the causes plus
diagonal Gaussian noise. Presets ``s1``, ``s2``, ``s3`` fix the parameters
used in the benchmark.

Randomness: numpy's ``Generator`` on PCG64. Each row consumes a fixed block
of ``2 + d_C + d_E`` uniforms in the order (component, causes, target
threshold, effect noise); normals are obtained by inverse-CDF so a row's
values never depend on how many rows are drawn after it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, log_expit, ndtri

from .data import Dataset
from .errors import ConfigError, DimensionMismatch, UnknownPreset
from .regress import LOG_2PI

_U_EPS = 2.0**-54


@dataclass(frozen=True, eq=False)
class SynthConfig:
    """Mixture for the causes, logistic target, class-wise affine effects.

    ``mix_vars`` are per-component diagonal covariances (variances, not
    standard deviations). ``effect_std`` holds the diagonals of D_0 and D_1.
    """

    mix_weights: np.ndarray  # (m,)
    mix_means: np.ndarray  # (m, d_C)
    mix_vars: np.ndarray  # (m, d_C)
    a: np.ndarray  # (d_C,)
    b: float
    A: np.ndarray  # (2, d_E, d_C)
    bias: np.ndarray  # (2, d_E)
    effect_std: np.ndarray  # (2, d_E)
    name: str = "custom"

    def __post_init__(self):
        w = np.asarray(self.mix_weights, float).reshape(-1)
        m = w.shape[0]
        mu = np.asarray(self.mix_means, float).reshape(m, -1)
        d_c = mu.shape[1]
        var = np.asarray(self.mix_vars, float).reshape(m, d_c)
        a = np.asarray(self.a, float).reshape(d_c)
        A = np.asarray(self.A, float)
        A = A.reshape(2, -1, d_c)
        d_e = A.shape[1]
        bias = np.asarray(self.bias, float).reshape(2, d_e)
        std = np.asarray(self.effect_std, float).reshape(2, d_e)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ConfigError("mixture weights must be non-negative and sum to 1")
        if np.any(var < 0):
            raise ConfigError("mixture variances must be non-negative")
        if np.any(std <= 0):
            raise ConfigError("effect noise standard deviations must be positive")
        for k, v in dict(mix_weights=w, mix_means=mu, mix_vars=var, a=a, A=A, bias=bias, effect_std=std).items():
            object.__setattr__(self, k, v)
        object.__setattr__(self, "b", float(self.b))

    @property
    def d_causes(self) -> int:
        return self.mix_means.shape[1]

    @property
    def d_effects(self) -> int:
        return self.A.shape[1]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "mix_weights": self.mix_weights.tolist(),
            "mix_means": self.mix_means.tolist(),
            "mix_vars": self.mix_vars.tolist(),
            "a": self.a.tolist(),
            "b": self.b,
            "A": self.A.tolist(),
            "bias": self.bias.tolist(),
            "effect_std": self.effect_std.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        return cls(**{k: d[k] for k in ("mix_weights", "mix_means", "mix_vars", "a", "b", "A", "bias", "effect_std")},
                   name=d.get("name", "custom"))


def preset(name: str) -> SynthConfig:
    key = str(name).lower()
    if key == "s1":
        return SynthConfig(
            mix_weights=[0.3, 0.4, 0.3],
            mix_means=[[-5.0], [0.0], [5.0]],
            mix_vars=[[0.5**2]] * 3,
            a=[0.5],
            b=0.0,
            A=[[[1.0]], [[1.0]]],
            bias=[[2.0], [-2.0]],
            effect_std=[[0.25], [0.25]],
            name="s1",
        )
    if key == "s2":
        return SynthConfig(
            mix_weights=[0.5, 0.5],
            mix_means=[[-3.0], [3.0]],
            mix_vars=[[0.5], [0.5]],
            a=[0.5],
            b=0.0,
            A=[[[0.5]], [[-0.5]]],
            bias=[[0.0], [0.0]],
            effect_std=[[0.25], [0.25]],
            name="s2",
        )
    if key == "s3":
        # "a_0 = -a_1 = 0.5" for a 2x2 map is read as 0.5 * identity
        return SynthConfig(
            mix_weights=[0.5, 0.5],
            mix_means=[[-3.0, -3.0], [3.0, 3.0]],
            mix_vars=[[0.5, 0.5], [0.5, 0.5]],
            a=[0.5, 0.5],
            b=0.0,
            A=[0.5 * np.eye(2), -0.5 * np.eye(2)],
            bias=[[0.0, 0.0], [0.0, 0.0]],
            effect_std=[[0.25, 0.25], [0.25, 0.25]],
            name="s3",
        )
    raise UnknownPreset(f"unknown preset {name!r}; expected one of s1, s2, s3")


PRESETS = ("s1", "s2", "s3")


def generate(cfg: SynthConfig, n: int, rng: np.random.Generator) -> Dataset:
    if n < 1:
        raise ConfigError("n must be at least 1")
    d_c, d_e = cfg.d_causes, cfg.d_effects
    U = rng.random((n, 2 + d_c + d_e))
    U = np.clip(U, _U_EPS, 1.0 - _U_EPS)

    comp = np.searchsorted(np.cumsum(cfg.mix_weights), U[:, 0], side="right")
    comp = np.minimum(comp, cfg.mix_weights.shape[0] - 1)
    z_c = ndtri(U[:, 1 : 1 + d_c])
    x_c = cfg.mix_means[comp] + np.sqrt(cfg.mix_vars[comp]) * z_c

    u_y = U[:, 1 + d_c]
    y = (expit(x_c @ cfg.a + cfg.b) > u_y).astype(int)

    eps = ndtri(U[:, 2 + d_c :])
    mean_e = np.einsum("nij,nj->ni", cfg.A[y], x_c) + cfg.bias[y]
    x_e = mean_e + cfg.effect_std[y] * eps
    return Dataset(x_c, x_e, y)


def oracle_log_joint(cfg: SynthConfig, X_C, X_E) -> np.ndarray:
    """log p(y, x_E | x_C) under the true model, shape (n, 2)."""
    X_C = np.atleast_2d(np.asarray(X_C, float))
    X_E = np.atleast_2d(np.asarray(X_E, float))
    if X_C.shape[1] != cfg.d_causes or X_E.shape[1] != cfg.d_effects or X_C.shape[0] != X_E.shape[0]:
        raise DimensionMismatch("inputs do not match the configuration's dimensions")
    z = X_C @ cfg.a + cfg.b
    out = np.empty((X_C.shape[0], 2))
    for i, log_prior in ((0, log_expit(-z)), (1, log_expit(z))):
        var = cfg.effect_std[i] ** 2
        resid = X_E - (X_C @ cfg.A[i].T + cfg.bias[i])
        out[:, i] = log_prior - 0.5 * np.sum(LOG_2PI + np.log(var) + resid**2 / var, axis=1)
    return out


def oracle_posterior(cfg: SynthConfig, x_C, x_E):
    """Bayes posterior P(Y=1 | x_C, x_E) under the generating model."""
    single = np.ndim(x_E) <= 1 and np.ndim(x_C) <= 1
    if single:
        x_C = np.asarray(x_C, float).reshape(1, -1)
        x_E = np.asarray(x_E, float).reshape(1, -1)
    lj = oracle_log_joint(cfg, x_C, x_E)
    p = expit(lj[:, 1] - lj[:, 0])
    return float(p[0]) if single else p


def write_sidecar(path, cfg: SynthConfig, n: int, seed: int) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"config": cfg.to_dict(), "n": n, "seed": seed, "bit_generator": "PCG64"}, fh, indent=2)
