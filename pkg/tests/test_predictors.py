import math

import numpy as np
import pytest
from scipy.special import ndtri

from orderfx import streams
from orderfx.posterior import laplace_posterior, locexp_posterior, normal_posterior
from orderfx.predictors import (
    Family,
    GammaRule,
    PosteriorAssumption,
    PredictorSpec,
    g_bar,
    predict_direct,
    predict_empirical_best,
    predict_linear,
    predict_shen_louis,
)


def _rng(seed=0):
    return streams.stream(seed, streams.POSTERIOR_SALT)


class TestSpecTokens:
    @pytest.mark.parametrize(
        "token",
        ["direct", "linear@star", "linear@sqrt_star", "linear@opt", "linear@approx",
         "linear@0.35", "empirical_best", "shen_louis"],
    )
    def test_round_trip(self, token):
        assert PredictorSpec.from_token(token).token == token

    @pytest.mark.parametrize("token", ["nope", "linear@", "linear@fixed", "linear@1.5"])
    def test_rejects_bad_tokens(self, token):
        with pytest.raises(ValueError):
            PredictorSpec.from_token(token)

    def test_linear_needs_rule(self):
        with pytest.raises(ValueError):
            PredictorSpec(Family.LINEAR)
        with pytest.raises(ValueError):
            PredictorSpec(Family.DIRECT, GammaRule.STAR)

    def test_assumption_switch(self):
        spec = PredictorSpec.from_token("shen_louis")
        forced = spec.with_assumption(PosteriorAssumption.FORCE_NORMAL)
        assert forced.posterior_assumption is PosteriorAssumption.FORCE_NORMAL


class TestDirect:
    def test_sorts(self):
        np.testing.assert_array_equal(predict_direct([2.0, 1.0]).values, [1.0, 2.0])

    def test_equals_linear_at_one(self):
        y = np.array([0.3, -1.0, 2.2, 0.9])
        np.testing.assert_array_equal(predict_direct(y).values, predict_linear(y, 1.0).values)

    def test_multiset_preserved(self):
        y = np.array([3.0, -1.0, 3.0, 0.0])
        out = predict_direct(y).values
        np.testing.assert_array_equal(np.sort(y), out)


class TestLinear:
    def test_degenerate_shrinkage(self):
        y = np.array([1.0, 5.0, 3.0])
        np.testing.assert_allclose(predict_linear(y, 0.0).values, np.full(3, 3.0))

    def test_half_shrinkage_arithmetic(self):
        np.testing.assert_allclose(predict_linear([0.0, 2.0], 0.5).values, [0.5, 1.5])

    def test_rejects_gamma_outside_unit_interval(self):
        for gamma in (-0.1, 1.1, math.nan):
            with pytest.raises(ValueError):
                predict_linear([1.0, 2.0], gamma)

    def test_nondecreasing(self):
        rng = np.random.default_rng(4)
        for _ in range(25):
            y = rng.normal(size=12)
            vals = predict_linear(y, rng.uniform(0, 1)).values
            assert np.all(np.diff(vals) >= 0)

    def test_rearrangement_dominance(self):
        # sorting the coordinatewise predictor never increases the loss
        rng = np.random.default_rng(5)
        for _ in range(200):
            theta = rng.normal(size=15)
            y = theta + rng.normal(size=15)
            gamma = rng.uniform(0, 1)
            coordwise = gamma * y + (1 - gamma) * y.mean()
            unordered = float(((coordwise - theta) ** 2).sum())
            ordered = float(((np.sort(coordwise) - np.sort(theta)) ** 2).sum())
            assert ordered <= unordered + 1e-12


class TestEmpiricalBest:
    def test_point_mass_posterior_returns_sorted_y(self):
        y = np.array([0.4, -2.0, 1.1])
        builder = lambda yi: normal_posterior(yi, y.mean(), 1.0, 0.0)
        out = predict_empirical_best(y, builder, 7, _rng(1), use_closed_form=False)
        np.testing.assert_allclose(out.values, np.sort(y))

    def test_closed_form_pair_matches_sampling(self):
        y = np.array([0.7, -0.9])
        mu_hat = float(y.mean())
        builder = lambda yi: normal_posterior(yi, mu_hat, 0.6, 1.0)
        closed = predict_empirical_best(y, builder, 1)
        assert closed.meta.get("closed_form")
        sampled = predict_empirical_best(y, builder, 1_000_000, _rng(2), use_closed_form=False)
        # posterior sd ~ sqrt(0.6); MC standard error of each sorted coordinate
        se = math.sqrt(0.6) / math.sqrt(1_000_000)
        np.testing.assert_allclose(closed.values, sampled.values, atol=3.5 * se)

    def test_sum_of_components_matches_linear_sum(self):
        rng = _rng(3)
        y = np.array([0.2, -1.4, 2.0, 0.8, -0.3])
        mu_hat = float(y.mean())
        g, s2 = 0.7, 1.3
        builder = lambda yi: normal_posterior(yi, mu_hat, g, s2)
        out = predict_empirical_best(y, builder, 200_000, rng, use_closed_form=False)
        target = float((g * y + (1 - g) * mu_hat).sum())
        se = math.sqrt(len(y) * g * s2 / 200_000)
        assert abs(out.values.sum() - target) <= 4 * se

    def test_permutation_invariance(self):
        y = np.array([0.5, -1.0, 2.0, 0.1])
        mu_hat = float(y.mean())
        builder = lambda yi: normal_posterior(yi, mu_hat, 0.5, 1.0)
        a = predict_empirical_best(y, builder, 500, _rng(9), use_closed_form=False)
        b = predict_empirical_best(y[::-1], builder, 500, _rng(9), use_closed_form=False)
        np.testing.assert_array_equal(a.values, b.values)

    def test_nondecreasing_for_asymmetric_laws(self):
        y = np.array([0.5, -1.0, 2.0, 0.1, 4.0])
        mu_hat = float(y.mean())
        builder = lambda yi: locexp_posterior(yi, mu_hat, 1.2, 0.8)
        out = predict_empirical_best(y, builder, 4000, _rng(10))
        assert np.all(np.diff(out.values) >= 0)

    def test_closed_form_requires_pair_of_normals(self):
        y = np.array([0.5, -1.0, 2.0])
        builder = lambda yi: normal_posterior(yi, 0.0, 0.5, 1.0)
        with pytest.raises(ValueError):
            predict_empirical_best(y, builder, 10, use_closed_form=True)
        with pytest.raises(ValueError):
            predict_empirical_best(y, builder, 10)  # sampling route needs rng


class TestGBar:
    def test_limits(self):
        y = np.array([0.0, 1.0, -1.0])
        assert g_bar(-1e3, y, 0.0, 0.5, 1.0) <= 1e-12
        assert g_bar(1e3, y, 0.0, 0.5, 1.0) >= 1 - 1e-12

    def test_single_area_is_normal_cdf(self):
        from scipy.special import ndtr

        y = np.array([0.8])
        got = g_bar(1.1, y, 0.2, 0.5, 1.0)
        center = 0.5 * 0.8 + 0.5 * 0.2
        assert abs(got - float(ndtr((1.1 - center) / math.sqrt(0.5)))) <= 1e-15

    def test_strictly_increasing(self):
        y = np.array([0.0, 1.0, 3.0])
        grid = np.linspace(-5, 8, 200)
        vals = g_bar(grid, y, 0.5, 0.6, 1.0)
        assert np.all(np.diff(vals) > 0)

    def test_rejects_zero_gamma(self):
        with pytest.raises(ValueError):
            g_bar(0.0, [1.0, 2.0], 0.0, 0.0, 1.0)


class TestShenLouis:
    def test_single_area_median_is_mean(self):
        out = predict_shen_louis([1.4], 0.2, 0.5, 1.0)
        center = 0.5 * 1.4 + 0.5 * 0.2
        assert abs(out.values[0] - center) <= 1e-8

    def test_tied_observations_give_normal_quantiles(self):
        m = 6
        y = np.full(m, 1.0)
        mu_hat, g, s2 = 1.0, 0.49, 2.0
        out = predict_shen_louis(y, mu_hat, g, s2)
        center = g * 1.0 + (1 - g) * mu_hat
        sd = math.sqrt(g * s2)
        q = (2 * np.arange(1, m + 1) - 1) / (2 * m)
        np.testing.assert_allclose(out.values, center + sd * ndtri(q), atol=1e-8)

    def test_residuals_on_random_instances(self):
        rng = np.random.default_rng(17)
        for _ in range(5):
            y = rng.normal(size=100) * 2
            mu_hat = float(y.mean())
            out = predict_shen_louis(y, mu_hat, 0.6, 1.0)
            got = g_bar(out.values, y, mu_hat, 0.6, 1.0)
            q = (2 * np.arange(1, 101) - 1) / 200.0
            assert np.abs(got - q).max() <= 1e-8

    def test_strictly_increasing_for_distinct_means(self):
        y = np.array([0.0, 0.5, 2.0, -1.0])
        out = predict_shen_louis(y, float(y.mean()), 0.7, 1.0)
        assert np.all(np.diff(out.values) > 0)

    def test_zero_gamma_degenerates_to_constant(self):
        out = predict_shen_louis([1.0, 2.0, 3.0], 2.0, 0.0, 1.0)
        np.testing.assert_array_equal(out.values, np.full(3, 2.0))

    def test_match_true_laplace_agrees_with_normal_when_symmetric(self):
        # the two modes should give similar (not identical) predictors; this
        # pins the match-true path end to end
        y = np.array([0.5, -0.7, 1.8, 0.1])
        mu_hat = float(y.mean())
        g, s2, su = 0.5, 1.0, 1.0
        laws = [laplace_posterior(v, mu_hat, su, s2) for v in np.sort(y)]
        out_match = predict_shen_louis(np.sort(y), mu_hat, g, s2, laws=laws)
        out_norm = predict_shen_louis(np.sort(y), mu_hat, g, s2)
        assert np.all(np.diff(out_match.values) >= 0)
        assert np.abs(out_match.values - out_norm.values).max() < 1.0


class TestResultInvariants:
    def test_all_families_nondecreasing(self):
        rng = np.random.default_rng(23)
        y = rng.normal(size=9)
        mu_hat = float(y.mean())
        builder = lambda yi: normal_posterior(yi, mu_hat, 0.4, 1.0)
        results = [
            predict_direct(y),
            predict_linear(y, 0.37),
            predict_empirical_best(y, builder, 500, _rng(11)),
            predict_shen_louis(y, mu_hat, 0.4, 1.0),
        ]
        for res in results:
            assert np.all(np.diff(res.values) >= 0)
