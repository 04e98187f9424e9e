import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from causal_ssl.condself import MechanismPair, fit_condself, predict_condself, ridge_regressor
from causal_ssl.errors import DimensionMismatch, SingleClassLabels
from causal_ssl.regress import RidgeParams

from conftest import split_instance


def ridge_oracle(X, Y, lam=1.0):
    Xa = np.column_stack([X, np.ones(len(X))])
    return np.linalg.solve(Xa.T @ Xa + lam * np.eye(Xa.shape[1]), Xa.T @ Y)


def oracle_predict(coef, X):
    return np.column_stack([X, np.ones(len(X))]) @ coef


def toy_problem():
    X_C = np.array([[0.0], [2.0], [0.0], [2.0]])
    X_E = np.array([[0.0], [2.0], [10.0], [8.0]])
    return (X_C, np.array([0, 0, 1, 1]), X_E)


class TestHandOracle:
    def test_ridge_fits_by_hand(self):
        # (X^T X + I)^{-1} = [[3, -2], [-2, 5]] / 11 for x in {0, 2} with an intercept column
        lab = toy_problem()
        _, pair, _ = fit_condself(lab, (np.zeros((0, 1)), np.zeros((0, 1))))
        np.testing.assert_allclose(pair.f0.coef[:, 0], [8 / 11, 2 / 11], atol=1e-12)
        np.testing.assert_allclose(pair.f1.coef[:, 0], [12 / 11, 58 / 11], atol=1e-12)

    def test_single_point_goes_to_class_zero(self):
        labels, pair, trace = fit_condself(toy_problem(), (np.array([[1.0]]), np.array([[1.05]])))
        assert labels.tolist() == [0]
        assert trace.steps[0].residual == pytest.approx((1.05 - 10 / 11) ** 2, abs=1e-12)
        # the returned fit already includes the absorbed point
        X = np.array([[0.0], [2.0], [1.0]])
        Y = np.array([[0.0], [2.0], [1.05]])
        np.testing.assert_allclose(pair.f0.coef, ridge_oracle(X, Y), atol=1e-12)
        assert pair.class_rows[0].tolist() == [0, 1, 4]


class TestFitCondself:
    def test_empty_unlabelled_is_seed_fit(self):
        lab, _, _ = split_instance("s2", 1)
        labels, pair, trace = fit_condself(lab, (np.zeros((0, 1)), np.zeros((0, 1))))
        assert labels.size == 0 and len(trace) == 0
        X_C, y, X_E = lab
        np.testing.assert_allclose(pair.f1.coef, ridge_oracle(X_C[y == 1], X_E[y == 1]), atol=1e-12)

    def test_exhaustive(self):
        lab, unl, _ = split_instance("s1", 7, n_u=60)
        labels, pair, trace = fit_condself(lab, unl)
        assert len(trace) == 60
        assert sorted(s.sample for s in trace) == list(range(60))
        assert set(labels.tolist()) <= {0, 1}
        assert all(np.isfinite(s.residual) for s in trace)
        rows = np.concatenate(pair.class_rows)
        assert np.unique(rows).size == rows.size == 70

    def test_greedy_soundness_replay(self):
        """Re-run each step from the trace with an independent ridge and argmin."""
        lab, unl, _ = split_instance("s1", 3, n_u=40)
        labels, _, trace = fit_condself(lab, unl)
        X_C, y, X_E = lab
        U_C, U_E = unl
        members = {0: (list(X_C[y == 0]), list(X_E[y == 0])), 1: (list(X_C[y == 1]), list(X_E[y == 1]))}
        remaining = list(range(U_C.shape[0]))
        for s in trace:
            coefs = [ridge_oracle(np.array(members[i][0]), np.array(members[i][1])) for i in (0, 1)]
            cands = [
                (float(np.sum((U_E[j] - oracle_predict(coefs[i], U_C[j : j + 1])[0]) ** 2)), i, j)
                for i in (0, 1)
                for j in remaining
            ]
            best = min(r for r, _, _ in cands)
            assert s.residual == pytest.approx(best, abs=1e-10)
            assert s.residual <= min(r for r, _, _ in cands) + 1e-10
            assert labels[s.sample] == s.cls
            members[s.cls][0].append(U_C[s.sample])
            members[s.cls][1].append(U_E[s.sample])
            remaining.remove(s.sample)

    def test_tie_break_lowest_class_then_index(self):
        # both lines are symmetric about x_E = 5 at x_C = 0, so three copies of the same point tie
        X_C = np.array([[-1.0], [1.0], [-1.0], [1.0]])
        X_E = np.array([[4.0], [6.0], [6.0], [4.0]])
        lab = (X_C, np.array([0, 0, 1, 1]), X_E)
        labels, _, trace = fit_condself(lab, (np.zeros((3, 1)), np.full((3, 1), 50.0)))
        assert (trace.steps[0].cls, trace.steps[0].sample) == (0, 0)

    def test_deterministic(self):
        lab, unl, _ = split_instance("s3", 9, n_u=50)
        a = fit_condself(lab, unl)
        b = fit_condself(lab, unl)
        np.testing.assert_array_equal(a[0], b[0])
        assert a[2].steps == b[2].steps

    def test_s2_slopes(self):
        for seed in range(10):
            lab, unl, _ = split_instance("s2", seed)
            _, pair, _ = fit_condself(lab, unl)
            assert pair.f0.slope[0, 0] == pytest.approx(0.5, abs=0.1)
            assert pair.f1.slope[0, 0] == pytest.approx(-0.5, abs=0.1)

    def test_injected_regressor(self):
        calls = []
        base = ridge_regressor(1.0)

        def counting(X, Y):
            calls.append(X.shape[0])
            return base(X, Y)

        lab, unl, _ = split_instance("s2", 0, n_u=15)
        ref = fit_condself(lab, unl)[0]
        labels, _, _ = fit_condself(lab, unl, regress=counting)
        np.testing.assert_array_equal(labels, ref)
        assert len(calls) == 2 * 16
        assert calls[-2] + calls[-1] == 25

    def test_single_class(self):
        with pytest.raises(SingleClassLabels):
            fit_condself((np.zeros((2, 1)), [1, 1], np.zeros((2, 1))), (np.zeros((1, 1)), np.zeros((1, 1))))

    def test_width_mismatch(self):
        lab = toy_problem()
        with pytest.raises(DimensionMismatch):
            fit_condself(lab, (np.zeros((2, 2)), np.zeros((2, 1))))


def line_pair(s0, c0, s1, c1):
    return MechanismPair(RidgeParams(np.array([[s0], [c0]])), RidgeParams(np.array([[s1], [c1]])), 1.0, ((), ()))


class TestPredict:
    def test_on_class_one_surface(self):
        pair = line_pair(1.0, 0.0, -1.0, 0.0)
        assert predict_condself(pair, [[2.0]], [[-2.0]]).tolist() == [1]

    def test_equidistant_is_zero(self):
        pair = line_pair(1.0, 0.0, -1.0, 0.0)
        assert predict_condself(pair, [[2.0]], [[0.0]]).tolist() == [0]

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_residual_oracle(self, seed):
        r = np.random.default_rng(seed)
        c0, c1 = r.normal(size=(3, 2)), r.normal(size=(3, 2))
        pair = MechanismPair(RidgeParams(c0), RidgeParams(c1), 1.0, ((), ()))
        X_C, X_E = r.normal(size=(30, 2)), r.normal(size=(30, 2))
        r0 = np.sum((X_E - oracle_predict(c0, X_C)) ** 2, axis=1)
        r1 = np.sum((X_E - oracle_predict(c1, X_C)) ** 2, axis=1)
        np.testing.assert_array_equal(predict_condself(pair, X_C, X_E), (r1 < r0).astype(int))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            predict_condself(line_pair(1, 0, -1, 0), np.zeros((3, 2)), np.zeros((3, 1)))
