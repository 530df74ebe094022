import math
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from postergen.corpus import PanelSpec
from postergen.panel_model import (
    PanelAttributeModel,
    PanelModel,
    TrainingRow,
    fit,
    infer,
    joint_log_likelihood,
    normalize_sizes,
    predict_means,
)

W_S = np.array([0.1, 0.02, 0.05, 0.1])
W_R = np.array([1.2, 0.1, 0.5, 0.4])


def make_rows(n, sigma_s=0.0, sigma_r=0.0, seed=0, w_s=W_S, w_r=W_R):
    rng = np.random.default_rng(seed)
    t = rng.uniform(0, 1, n)
    k = rng.integers(0, 4, n).astype(float)
    g = np.where(k > 0, rng.uniform(0, 1, n), 0.0)
    X = np.column_stack([t, k, g, np.ones(n)])
    s = X @ w_s + sigma_s * rng.standard_normal(n)
    r = X @ w_r + sigma_r * rng.standard_normal(n)
    return [TrainingRow(*row) for row in zip(t, k, g, s, r)]


def ols_oracle(rows, target):
    X = np.array([[r.t_p, r.n_p, r.g_p, 1.0] for r in rows])
    y = np.array([getattr(r, target) for r in rows])
    w = np.linalg.solve(X.T @ X, X.T @ y)
    return w, math.sqrt(np.mean((y - X @ w) ** 2))


def spec(t, n, g, sid="s"):
    return PanelSpec(sid, l_p=0, t_p=t, n_p=n, g_p=g)


class TestFit:
    def test_noiseless_recovery(self):
        model = fit(make_rows(40))
        np.testing.assert_allclose(model.w_s, W_S, atol=1e-8)
        np.testing.assert_allclose(model.w_r, W_R, atol=1e-8)
        assert model.sigma_s == pytest.approx(1e-4)
        assert model.sigma_r == pytest.approx(1e-4)

    def test_noisy_recovery(self):
        rows = make_rows(500, sigma_s=0.02, sigma_r=0.03, seed=1)
        model = fit(rows)
        np.testing.assert_allclose(model.w_s, W_S, atol=0.01)
        assert abs(model.sigma_s - 0.02) < 0.005
        assert abs(model.sigma_r - 0.03) < 0.005
        for target, w, sigma in (("s_p", model.w_s, model.sigma_s), ("r_p", model.w_r, model.sigma_r)):
            w_ref, sigma_ref = ols_oracle(rows, target)
            np.testing.assert_allclose(w, w_ref, atol=1e-10)
            assert sigma == pytest.approx(sigma_ref, abs=1e-12)

    def test_too_few_rows(self):
        with pytest.raises(ValueError, match="at least 5"):
            fit(make_rows(3))

    def test_collinear_columns_named(self):
        rows = [TrainingRow(0.1 * i, float(i), 0.0, 0.2, 1.0) for i in range(6)]
        with pytest.raises(np.linalg.LinAlgError, match="t_p.*n_p"):
            fit(rows)

    def test_constant_column_named(self):
        rows = [TrainingRow(0.1 * i, 2.0, 0.02 * i * i, 0.2, 1.0) for i in range(6)]
        with pytest.raises(np.linalg.LinAlgError, match="n_p, intercept"):
            fit(rows)

    def test_row_validation(self):
        with pytest.raises(ValueError):
            TrainingRow(1.5, 0, 0, 0.1, 1.0)
        with pytest.raises(ValueError):
            TrainingRow(0.5, 0, 0, float("nan"), 1.0)

    def test_json_round_trip(self):
        model = fit(make_rows(20, 0.01, 0.01))
        assert PanelModel.from_json(model.to_json()) == model
        assert model.to_dict()["version"] == 1
        bad = dict(model.to_dict(), version=9)
        with pytest.raises(ValueError, match="version"):
            PanelModel.from_dict(bad)


class TestEstimator:
    def test_sklearn_contract(self):
        est = PanelAttributeModel()
        assert est.get_params() == {}
        assert clone(est).get_params() == {}
        with pytest.raises(NotFittedError):
            est.predict([[0.1, 1, 0.2]])

    def test_fit_predict(self):
        rows = make_rows(30)
        X = np.array([[r.t_p, r.n_p, r.g_p] for r in rows])
        y = np.array([[r.s_p, r.r_p] for r in rows])
        est = PanelAttributeModel().fit(X, y)
        np.testing.assert_allclose(est.predict(X), y, atol=1e-10)
        again = PanelAttributeModel.from_params(est.to_params())
        np.testing.assert_allclose(again.predict(X), est.predict(X), rtol=0, atol=0)

    def test_target_shape(self):
        with pytest.raises(ValueError, match="shape"):
            PanelAttributeModel().fit(np.zeros((6, 3)), np.zeros(6))
        with pytest.raises(ValueError, match="3 columns"):
            PanelAttributeModel().fit(np.zeros((6, 2)), np.zeros((6, 2)))


class TestInfer:
    def test_constant_cpd(self):
        model = PanelModel((0, 0, 0, 0.3), 0.01, (0, 0, 0, 1.5), 0.01)
        s, r = predict_means(model, [spec(0.2, 1, 0.5), spec(0.9, 3, 0.1)])
        np.testing.assert_allclose(s, 0.3)
        np.testing.assert_allclose(r, 1.5)

    def test_identical_panels(self):
        model = fit(make_rows(20))
        out = infer(model, [spec(0.5, 1, 0.5, "a"), spec(0.5, 1, 0.5, "b")])
        assert out[0].s_p == out[1].s_p == pytest.approx(0.5)
        assert out[0].r_p == out[1].r_p

    def test_recovers_training_row(self):
        rows = make_rows(25)
        model = fit(rows)
        out = infer(model, [spec(r.t_p, r.n_p, r.g_p) for r in rows], normalize=False)
        np.testing.assert_allclose([p.s_p for p in out], [r.s_p for r in rows], atol=1e-6)
        np.testing.assert_allclose([p.r_p for p in out], [r.r_p for r in rows], atol=1e-6)

    def test_untrained(self):
        with pytest.raises(NotFittedError):
            infer(None, [spec(0.5, 0, 0)])

    def test_sampling_is_seeded(self):
        model = PanelModel((0, 0, 0, 0.3), 0.05, (0, 0, 0, 1.5), 0.2)
        specs = [spec(0.3, 0, 0, "a"), spec(0.7, 0, 0, "b")]
        a = infer(model, specs, n_samples=5, seed=4, sample=True)
        b = infer(model, specs, n_samples=5, seed=4, sample=True)
        c = infer(model, specs, n_samples=5, seed=5, sample=True)
        assert a == b
        assert a != c

    def test_more_samples_land_closer_to_the_mean(self):
        model = PanelModel((0, 0, 0, 0.3), 0.05, (0, 0, 0, 1.5), 0.2)
        specs = [spec(0.5, 0, 0, str(i)) for i in range(50)]
        few = infer(model, specs, n_samples=1, seed=0, sample=True, normalize=False)
        many = infer(model, specs, n_samples=200, seed=0, sample=True, normalize=False)
        assert np.mean([abs(p.r_p - 1.5) for p in many]) < np.mean([abs(p.r_p - 1.5) for p in few])

    def test_clamps(self):
        model = PanelModel((0, 0, 0, -1.0), 0.01, (10.0, 0, 0, 0), 0.01)
        out = infer(model, [spec(0.0, 0, 0, "a"), spec(1.0, 0, 0, "b")])
        assert [p.s_p for p in out] == [0.5, 0.5]
        assert [p.r_p for p in out] == [0.2, 5.0]

    def test_n_samples_checked(self):
        with pytest.raises(ValueError):
            infer(fit(make_rows(10)), [spec(0.5, 0, 0)], n_samples=0)


class TestNormalizeSizes:
    def test_floor_is_respected(self):
        out = normalize_sizes([1.0, 1e-6, 0.5])
        assert out.sum() == pytest.approx(1.0, abs=1e-12)
        assert out.min() == pytest.approx(0.01)
        # the unpinned panels keep their relative proportions
        assert out[0] / out[2] == pytest.approx(2.0)

    def test_all_nonpositive(self):
        np.testing.assert_allclose(normalize_sizes([-1.0, 0.0]), [0.5, 0.5])

    def test_too_many_panels(self):
        with pytest.raises(ValueError):
            normalize_sizes(np.ones(101))


class TestLikelihood:
    def test_empty(self):
        assert joint_log_likelihood(fit(make_rows(10)), []) == 0.0

    def test_peak(self):
        model = PanelModel((0.1, 0, 0, 0.2), 0.02, (1.0, 0, 0, 0.5), 0.3)
        row = TrainingRow(0.5, 0, 0, 0.25, 1.0)
        assert joint_log_likelihood(model, [row]) == pytest.approx(math.log(1 / (2 * math.pi * 0.02 * 0.3)), abs=1e-12)

    def test_term_by_term(self):
        model = fit(make_rows(40, 0.02, 0.05, seed=2))
        rows = make_rows(15, 0.05, 0.1, seed=3)
        expected = 0.0
        for r in rows:
            x = (r.t_p, r.n_p, r.g_p, 1.0)
            for y, w, sigma in ((r.s_p, model.w_s, model.sigma_s), (r.r_p, model.w_r, model.sigma_r)):
                mean = sum(a * b for a, b in zip(w, x))
                pdf = math.exp(-((y - mean) ** 2) / (2 * sigma**2)) / (sigma * math.sqrt(2 * math.pi))
                expected += math.log(pdf)
        assert joint_log_likelihood(model, rows) == pytest.approx(expected, rel=1e-12)

    def test_fitted_weights_maximize_likelihood(self):
        rows = make_rows(60, 0.02, 0.05, seed=4)
        model = fit(rows)
        base = joint_log_likelihood(model, rows)
        for field in ("w_s", "w_r"):
            for i in range(4):
                for delta in (-0.05, 0.05):
                    w = list(getattr(model, field))
                    w[i] += delta
                    changed = PanelModel(**{**model.__dict__, field: tuple(w)})
                    assert joint_log_likelihood(changed, rows) <= base


class TestProperties:
    @settings(max_examples=80, deadline=None)
    @given(st.lists(st.tuples(st.floats(0, 1), st.integers(0, 4), st.floats(0, 1)), min_size=1, max_size=10))
    def test_inferred_sizes_are_consistent(self, feats):
        model = fit(make_rows(20, 0.01, 0.01))
        out = infer(model, [spec(t, n, g, str(i)) for i, (t, n, g) in enumerate(feats)])
        assert sum(p.s_p for p in out) == pytest.approx(1.0, abs=1e-9)
        assert all(p.s_p >= 0.01 - 1e-12 for p in out)
        assert all(0.2 <= p.r_p <= 5.0 for p in out)

    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(st.tuples(st.floats(0, 1), st.integers(0, 4), st.floats(0, 1)), min_size=2, max_size=6),
        st.tuples(st.floats(0, 1), st.integers(0, 4), st.floats(0, 1)),
    )
    def test_panels_are_independent(self, feats, replacement):
        model = fit(make_rows(20, 0.01, 0.01))
        specs = [spec(t, n, g, str(i)) for i, (t, n, g) in enumerate(feats)]
        before = infer(model, specs, normalize=False)
        specs[-1] = spec(*replacement, sid="x")
        after = infer(model, specs, normalize=False)
        assert before[:-1] == after[:-1]


def test_fit_runtime_is_small():
    rows = make_rows(500, 0.02, 0.03)
    start = time.perf_counter()
    fit(rows)
    assert time.perf_counter() - start < 1.0
