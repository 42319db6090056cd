import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from synthinfo.errors import BoundaryError, FitError
from synthinfo.families import get_family
from synthinfo.mle import decomposed_loglik, fit_mle, fit_scalar_mle, naive_pooled_fit, se_calibration_report
from synthinfo.numerics import LOG_ZERO, golden_section_max
from synthinfo.sample import Sample
from synthinfo.synth import (
    ClassReweight,
    NonparametricBootstrap,
    ParametricBootstrap,
    SymmetryAugment,
    fit,
)

BERN = get_family("bernoulli")
BOOT = NonparametricBootstrap()
SEVEN_OF_TEN = Sample((1,) * 7 + (0,) * 3)


class TestFitMle:
    def test_bernoulli(self):
        f = fit_mle(BERN, SEVEN_OF_TEN)
        assert f.theta_hat == pytest.approx(0.7)
        np.testing.assert_allclose(f.standard_error, math.sqrt(0.21 / 10), rtol=1e-12)
        np.testing.assert_allclose(f.standard_error, 0.1449, atol=5e-5)
        assert f.data_size == 10

    def test_normal_symmetry(self):
        f = fit_mle(get_family("normal_mu"), Sample((-1.0, 1.0)))
        assert f.theta_hat == 0.0
        np.testing.assert_allclose(f.observed_information, 2.0)

    @pytest.mark.parametrize("name,data", [("poisson", (0, 2, 3, 7)), ("exponential", (0.2, 1.1, 3.0)),
                                           ("normal_mu", (0.3, -2.0, 1.5)), ("bernoulli", (1, 0, 0, 1, 1))])
    def test_closed_form_matches_golden_section(self, name, data):
        fam = get_family(name)
        closed = fit_mle(fam, Sample(data))
        lo, hi = fam.domain
        lo, hi = max(lo, -50.0), min(hi, 50.0)
        gs = fit_scalar_mle(lambda t: fam.loglik(t, data), lo + 1e-9 if lo == 0 else lo, hi, len(data))
        np.testing.assert_allclose(gs.theta_hat, closed.theta_hat, atol=1e-8)
        np.testing.assert_allclose(gs.observed_information, closed.observed_information, rtol=1e-5)
        assert abs(sum(fam.score(closed.theta_hat, x) for x in data)) <= 1e-6

    def test_boundary_all_zero(self):
        with pytest.raises(BoundaryError, match="boundary"):
            fit_mle(BERN, Sample((0, 0, 0)))

    def test_boundary_poisson_zero(self):
        with pytest.raises(BoundaryError):
            fit_mle(get_family("poisson"), Sample((0, 0)))

    def test_empty(self):
        with pytest.raises(FitError):
            fit_mle(BERN, Sample(()))

    def test_golden_section(self):
        x = golden_section_max(lambda t: -(t - 0.123456789) ** 2, 0.0, 1.0, tol=1e-10)
        assert abs(x - 0.123456789) <= 1e-9


class TestDecomposedLoglik:
    def test_bootstrap_minus_k_log_n(self):
        X = Sample((1.5, 2.0, -0.3, 4.4, 0.9))
        d = fit(BOOT, X)
        S = d.sample(12, 3)
        total, real, const = decomposed_loglik(get_family("normal_mu"), X, d, S, 0.2)
        assert const == -12 * math.log(5)
        assert total == const + real

    def test_empty_s(self):
        d = fit(BOOT, SEVEN_OF_TEN)
        total, real, const = decomposed_loglik(BERN, SEVEN_OF_TEN, d, Sample(()), 0.4)
        assert total == real == BERN.loglik(0.4, SEVEN_OF_TEN.observations)
        assert const == 0.0

    def test_off_support_is_log_zero(self):
        d = fit(BOOT, Sample((1, 1, 1, 0)))
        total, _, _ = decomposed_loglik(BERN, Sample((1, 1, 1, 0)), fit(BOOT, Sample((1,))), Sample((0,)), 0.5)
        assert total == LOG_ZERO
        assert d is not None

    @pytest.mark.parametrize("kind", [BOOT, ParametricBootstrap(BERN), SymmetryAugment((0, 1), (1, 0), 2), ClassReweight()])
    def test_constant_in_theta_random_probes(self, kind):
        rng = np.random.default_rng(99)
        for _ in range(20):
            n = int(rng.integers(2, 15))
            x = tuple(int(v) for v in rng.integers(0, 2, n))
            if len(set(x)) < 2:
                x = x + (1 - x[0],)
            labels = tuple(int(c) for c in rng.integers(0, 2, len(x))) if isinstance(kind, ClassReweight) else None
            X = Sample(x, labels)
            d = fit(kind, X)
            S = d.sample(int(rng.integers(0, 20)), int(rng.integers(2**31)))
            if isinstance(kind, ClassReweight):
                # labelled units: compare the theta-free part directly
                X_obs = Sample(x)
                diffs = [decomposed_loglik(BERN, X_obs, d, S, t)[2] for t in np.linspace(0.1, 0.9, 5)]
                assert len(set(diffs)) == 1
                continue
            diffs = []
            for t in np.linspace(0.1, 0.9, 5):
                total, real, _ = decomposed_loglik(BERN, X, d, S, t)
                diffs.append(total - real)
            np.testing.assert_allclose(diffs, diffs[0], rtol=0, atol=1e-12)

    def test_two_theta_difference(self):
        fam = get_family("poisson")
        X = Sample((1, 4, 2, 2, 0))
        d = fit(BOOT, X)
        S = d.sample(30, 8)
        a, b = decomposed_loglik(fam, X, d, S, 1.3), decomposed_loglik(fam, X, d, S, 2.9)
        np.testing.assert_allclose(a[0] - b[0], fam.loglik(1.3, X.observations) - fam.loglik(2.9, X.observations), atol=1e-12)

    @given(x=st.lists(st.integers(0, 1), min_size=3, max_size=20).filter(lambda v: 0 < sum(v) < len(v)),
           k=st.integers(0, 40), seed=st.integers(0, 2**31))
    @settings(max_examples=40, deadline=None)
    def test_argmax_invariance(self, x, k, seed):
        X = Sample(tuple(x))
        d = fit(BOOT, X)
        S = d.sample(k, seed)
        solo = fit_mle(BERN, X).theta_hat
        total = fit_scalar_mle(lambda t: decomposed_loglik(BERN, X, d, S, t)[0], 1e-9, 1 - 1e-9, len(X))
        real = fit_scalar_mle(lambda t: BERN.loglik(t, X.observations), 1e-9, 1 - 1e-9, len(X))
        assert abs(total.theta_hat - real.theta_hat) <= 1e-8
        assert abs(total.theta_hat - solo) <= 1e-8


class TestNaivePooling:
    def test_se_shrinks(self):
        S = Sample((1,) * 70 + (0,) * 30)
        naive = naive_pooled_fit(BERN, SEVEN_OF_TEN, S)
        correct = fit_mle(BERN, SEVEN_OF_TEN)
        assert naive.theta_hat == pytest.approx(0.7)
        np.testing.assert_allclose(naive.standard_error, math.sqrt(0.21 / 110), rtol=1e-12)
        np.testing.assert_allclose(naive.standard_error, 0.0437, atol=5e-5)
        np.testing.assert_allclose(naive.standard_error / correct.standard_error, math.sqrt(10 / 110), rtol=1e-12)

    def test_empty_s_identical(self):
        assert naive_pooled_fit(BERN, SEVEN_OF_TEN, Sample(())) == fit_mle(BERN, SEVEN_OF_TEN)

    def test_large_k_converges_to_empirical_mean(self):
        d = fit(BOOT, SEVEN_OF_TEN)
        f = naive_pooled_fit(BERN, SEVEN_OF_TEN, d.sample(200_000, 12))
        assert abs(f.theta_hat - 0.7) <= 4 * math.sqrt(0.21 / 200_000)

    def test_off_support_poison(self):
        with pytest.raises(FitError):
            naive_pooled_fit(BERN, SEVEN_OF_TEN, Sample((2,)))


class TestCalibration:
    def test_k0_nominal_coverage(self):
        rep = se_calibration_report(BERN, BOOT, 0.6, 50, 0, 1000, seed=3)
        cov = rep.aggregates["coverage_naive"]
        assert abs(cov - 0.95) <= 3 * math.sqrt(0.95 * 0.05 / 1000) + 0.01
        assert rep.aggregates["mean_se_ratio"] == pytest.approx(1.0)

    def test_k9n_ratio_and_coverage(self):
        rep = se_calibration_report(BERN, BOOT, 0.6, 50, 450, 1000, seed=3)
        a = rep.aggregates
        assert abs(a["mean_se_ratio"] / a["expected_se_ratio"] - 1) <= 0.05
        np.testing.assert_allclose(a["expected_se_ratio"], 1 / math.sqrt(10))
        # sampling spread stays near the real-data SE
        assert abs(a["empirical_sd_naive"] / a["mean_se_correct"] - 1) <= 0.15
        assert a["coverage_naive"] < 0.9

    def test_record_schema(self):
        rep = se_calibration_report(BERN, BOOT, 0.6, 20, 10, 100, seed=0)
        assert len(rep.records) == 100
        assert {"replicate", "theta_hat_naive", "se_naive", "se_correct", "covered"} <= set(rep.records[0])

    def test_min_reps(self):
        with pytest.raises(ValueError):
            se_calibration_report(BERN, BOOT, 0.6, 20, 10, 50, seed=0)
