import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize

from causal_ssl.errors import DimensionMismatch, NoPositiveWeights, NonFiniteInput, SingularSystem
from causal_ssl.regress import (
    DiagGaussian,
    augment,
    log_density,
    logistic_gradient,
    ridge_objective,
    weighted_logistic,
    weighted_ridge,
)


def gd_ridge(X, Y, w, lam, iters=20000):
    """Plain gradient descent on the ridge objective (oracle)."""
    Xa = augment(X)
    L = 2 * (np.linalg.norm(Xa.T @ (Xa * w[:, None]), 2) + lam)
    theta = np.zeros((Xa.shape[1], Y.shape[1]))
    for _ in range(iters):
        grad = 2 * Xa.T @ (w[:, None] * (Xa @ theta - Y)) + 2 * lam * theta
        theta -= grad / L
    return theta


def fd_grad(f, x, h=1e-6):
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        e = np.zeros_like(x)
        e[idx] = h
        g[idx] = (f(x + e) - f(x - e)) / (2 * h)
    return g


class TestRidge:
    def test_scalar_closed_form(self):
        p = weighted_ridge([[1.0]], [[1.0]], [1.0], 1.0, fit_intercept=False)
        assert p.coef[0, 0] == pytest.approx(0.5, abs=1e-15)

    def test_zero_weights_give_zero(self, rng):
        X, Y = rng.normal(size=(8, 2)), rng.normal(size=(8, 3))
        p = weighted_ridge(X, Y, np.zeros(8), 1.0)
        assert np.all(p.coef == 0)

    def test_matches_gradient_descent(self, rng):
        X, Y = rng.normal(size=(20, 3)), rng.normal(size=(20, 2))
        w = rng.uniform(0.1, 2.0, 20)
        p = weighted_ridge(X, Y, w, 1.0)
        np.testing.assert_allclose(p.coef, gd_ridge(X, Y, w, 1.0), atol=1e-6)

    def test_intercept_is_last_row_and_penalised(self):
        # one point at x=0: only the intercept sees data, shrunk by (1+lam)
        p = weighted_ridge([[0.0]], [[3.0]], [1.0], 1.0)
        assert p.coef[-1, 0] == pytest.approx(1.5)
        assert p.intercept[0] == pytest.approx(1.5)
        assert p.coef[0, 0] == 0

    def test_penalty_monotone_in_lambda(self, rng):
        X, Y = rng.normal(size=(15, 2)), rng.normal(size=(15, 1))
        norms = [np.sum(weighted_ridge(X, Y, None, lam).coef ** 2) for lam in (0.01, 0.1, 1, 10, 100)]
        assert all(a >= b for a, b in zip(norms, norms[1:]))

    def test_singular_without_penalty(self):
        X = np.ones((5, 1))  # duplicates the intercept column
        with pytest.raises(SingularSystem):
            weighted_ridge(X, np.arange(5.0), None, 0.0)

    def test_non_finite(self):
        with pytest.raises(NonFiniteInput):
            weighted_ridge([[np.nan]], [[1.0]], None, 1.0)

    def test_zero_cause_columns(self):
        p = weighted_ridge(np.zeros((4, 0)), np.array([[1.0], [2.0], [3.0], [4.0]]), None, 1.0)
        assert p.coef.shape == (1, 1)
        assert p.coef[0, 0] == pytest.approx(10.0 / 5.0)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_stationarity(self, seed):
        r = np.random.default_rng(seed)
        n, d, k = r.integers(3, 30), r.integers(1, 4), r.integers(1, 3)
        X, Y = r.normal(size=(n, d)), r.normal(size=(n, k))
        w, lam = r.uniform(0, 2, n), r.uniform(0.1, 5)
        coef = weighted_ridge(X, Y, w, lam).coef
        g = fd_grad(lambda c: ridge_objective(c, X, Y, w, lam), coef)
        assert np.max(np.abs(g)) < 1e-5


class TestLogistic:
    def test_half_targets_give_origin(self, rng):
        X = rng.normal(size=(12, 3))
        p = weighted_logistic(X, np.full(12, 0.5), None, 1.0)
        assert np.max(np.abs(p.weights)) < 1e-10
        assert abs(p.intercept) < 1e-10

    def test_two_point_set_matches_bfgs(self):
        X, y = np.array([[-1.0], [1.0]]), np.array([0.0, 1.0])

        def f(t):
            z = X[:, 0] * t[0] + t[1]
            return np.sum(np.logaddexp(0, z) - y * z) + 0.5 * t[0] ** 2

        ref = minimize(f, np.zeros(2), method="BFGS", options={"gtol": 1e-12}).x
        p = weighted_logistic(X, y, None, 1.0)
        assert p.weights[0] == pytest.approx(ref[0], abs=1e-5)
        assert p.intercept == pytest.approx(ref[1], abs=1e-5)

    def test_duplicated_rows_half_weight(self, rng):
        X = rng.normal(size=(10, 2))
        y = (rng.random(10) < 0.5).astype(float)
        y[:2] = [0, 1]
        a = weighted_logistic(X, y, None, 1.0)
        b = weighted_logistic(np.vstack([X, X]), np.concatenate([y, y]), np.full(20, 0.5), 1.0)
        np.testing.assert_allclose(a.weights, b.weights, atol=1e-10)
        assert a.intercept == pytest.approx(b.intercept, abs=1e-10)

    def test_permutation_invariance(self, rng):
        X = rng.normal(size=(25, 3))
        y = rng.random(25)
        w = rng.uniform(0.2, 1.5, 25)
        perm = rng.permutation(25)
        a = weighted_logistic(X, y, w, 1.0)
        b = weighted_logistic(X[perm], y[perm], w[perm], 1.0)
        np.testing.assert_allclose(a.weights, b.weights, atol=1e-10)
        assert a.intercept == pytest.approx(b.intercept, abs=1e-10)
        Y = rng.normal(size=(25, 2))
        np.testing.assert_allclose(
            weighted_ridge(X, Y, w, 1.0).coef, weighted_ridge(X[perm], Y[perm], w[perm], 1.0).coef, atol=1e-10
        )

    def test_no_positive_weights(self):
        with pytest.raises(NoPositiveWeights):
            weighted_logistic([[1.0], [2.0]], [0, 1], [0.0, 0.0], 1.0)

    def test_non_finite(self):
        with pytest.raises(NonFiniteInput):
            weighted_logistic([[np.inf], [2.0]], [0, 1], None, 1.0)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.booleans())
    def test_stationarity(self, seed, soft):
        r = np.random.default_rng(seed)
        n, d = r.integers(2, 40), r.integers(1, 4)
        X = r.normal(size=(n, d)) * r.uniform(0.5, 3)
        y = r.random(n) if soft else (r.random(n) < 0.5).astype(float)
        y[:2] = [0.0, 1.0]
        w, lam = r.uniform(0.1, 2, n), r.uniform(0.1, 5)
        p = weighted_logistic(X, y, w, lam)
        assert np.max(np.abs(logistic_gradient(p, X, y, w, lam))) < 1e-7


class TestLogDensity:
    def test_standard_mode(self):
        g = DiagGaussian([0.0], [1.0])
        assert log_density(g, [0.0]) == pytest.approx(-0.5 * np.log(2 * np.pi), abs=1e-15)
        assert log_density(g, [0.0]) == pytest.approx(-0.9189385, abs=1e-7)

    def test_quadratic_term(self):
        g = DiagGaussian([0.0], [1.0])
        assert log_density(g, [2.0]) == pytest.approx(-0.9189385 - 2.0, abs=1e-7)

    def test_product_of_1d_densities(self, rng):
        mu, var, x = rng.normal(size=3), rng.uniform(0.1, 3, 3), rng.normal(size=3)
        oracle = sum(np.log(np.exp(-((xi - m) ** 2) / (2 * v)) / np.sqrt(2 * np.pi * v)) for xi, m, v in zip(x, mu, var))
        assert log_density(DiagGaussian(mu, var), x) == pytest.approx(oracle, abs=1e-12)

    def test_variance_floor(self):
        g = DiagGaussian([0.0], [0.0])
        assert g.variances[0] == 1e-6
        assert np.isfinite(log_density(g, [1.0]))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            log_density(DiagGaussian([0.0, 0.0], [1.0, 1.0]), [1.0])
