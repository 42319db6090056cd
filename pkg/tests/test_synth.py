import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from synthinfo.bayes import BetaBernoulli, NormalNormal
from synthinfo.errors import FitError, SchemaError, UnsupportedOperation
from synthinfo.families import get_family
from synthinfo.numerics import LOG_ZERO
from synthinfo.sample import Sample
from synthinfo.synth import (
    ClassReweight,
    FixedDistribution,
    NonparametricBootstrap,
    ParametricBootstrap,
    PosteriorPredictive,
    SymmetryAugment,
    conditional_log_density,
    enumerate_support,
    fit,
    grid_rotation_action,
    load_permutation_csv,
    make_kind,
    sample_log_density,
    synth_sample,
)

BOOT = NonparametricBootstrap()


def as_dict(rows):
    return {k: v for k, v in rows}


class TestFit:
    def test_bootstrap_counts(self):
        d = fit(BOOT, Sample(("a", "a", "b")))
        pmf = as_dict(enumerate_support(d))
        assert pmf == pytest.approx({"a": 2 / 3, "b": 1 / 3}, abs=1e-15)

    def test_class_reweight(self):
        X = Sample((1.0, 2.0, 2.0, 5.0), labels=(0, 0, 0, 1))
        rows = enumerate_support(fit(ClassReweight(), X))
        assert len(rows) == 3
        pmf = as_dict(rows)
        by_class = Counter()
        for (c, _), p in pmf.items():
            by_class[c] += p
        np.testing.assert_allclose([by_class[0], by_class[1]], [0.5, 0.5], atol=1e-15)
        np.testing.assert_allclose(pmf[(0, 2.0)], 0.5 * 2 / 3, atol=1e-15)

    def test_class_reweight_four_rows(self):
        X = Sample((0, 1, 1, 0), labels=("u", "u", "u", "v"))
        rows = enumerate_support(fit(ClassReweight(), X))
        pmf = as_dict(rows)
        assert pmf == pytest.approx({("u", 0): 1 / 6, ("u", 1): 1 / 3, ("v", 0): 1 / 2})
        X2 = Sample((0, 1, 1, 0), labels=("u", "u", "v", "v"))
        assert len(enumerate_support(fit(ClassReweight(), X2))) == 4

    def test_fixed_ignores_data(self):
        fam = get_family("normal_mu")
        d1 = fit(FixedDistribution(fam, 0.0), Sample((5.0, 6.0)))
        d2 = fit(FixedDistribution(fam, 0.0), Sample(()))
        for s in [-1.0, 0.0, 2.5]:
            assert conditional_log_density(d1, s) == conditional_log_density(d2, s)
            np.testing.assert_allclose(conditional_log_density(d1, s), -0.5 * math.log(2 * math.pi) - s * s / 2)

    def test_fixed_bernoulli_support(self):
        d = fit(FixedDistribution(get_family("bernoulli"), 0.5), Sample(()))
        assert as_dict(enumerate_support(d)) == pytest.approx({0: 0.5, 1: 0.5})

    def test_empty_sample_errors(self):
        for kind in [BOOT, ClassReweight(), ParametricBootstrap(get_family("poisson"))]:
            with pytest.raises(FitError):
                fit(kind, Sample(()))

    def test_reweight_needs_labels(self):
        with pytest.raises(SchemaError):
            fit(ClassReweight(), Sample((1, 2)))

    def test_param_bootstrap_uses_plugin(self):
        d = fit(ParametricBootstrap(get_family("bernoulli")), Sample((1, 1, 0, 1)))
        assert as_dict(enumerate_support(d)) == pytest.approx({0: 0.25, 1: 0.75})

    def test_posterior_predictive(self):
        d = fit(PosteriorPredictive(BetaBernoulli(1, 1)), Sample((1, 1, 1, 0, 0, 0, 0)))
        assert as_dict(enumerate_support(d)) == pytest.approx({0: 5 / 9, 1: 4 / 9})
        dn = fit(PosteriorPredictive(NormalNormal(0.0, 1.0)), Sample((2.0,)))
        # predictive N(1, 1/2 + 1)
        np.testing.assert_allclose(conditional_log_density(dn, 1.0), -0.5 * math.log(2 * math.pi * 1.5))

    def test_infinite_support_cannot_be_enumerated(self):
        d = fit(ParametricBootstrap(get_family("poisson")), Sample((1, 2, 3)))
        with pytest.raises(UnsupportedOperation):
            enumerate_support(d)


class TestConditionalDensity:
    def test_bootstrap_one_over_n(self):
        d = fit(BOOT, Sample((3, 1, 4, 5)))
        assert conditional_log_density(d, 4) == -math.log(4)

    def test_off_support_sentinel(self):
        d = fit(BOOT, Sample((3, 1, 4, 5)))
        assert conditional_log_density(d, 9) == LOG_ZERO
        assert sample_log_density(d, Sample((3, 9))) == LOG_ZERO

    def test_symmetry_eighths(self):
        # x has bootstrap mass 1/2, period-4 action: each rotation gets 1/8
        act = SymmetryAugment(points=tuple(range(8)), perm=(1, 2, 3, 0, 5, 6, 7, 4), period=4)
        d = fit(act, Sample((0, 4)))
        for x in range(8):
            np.testing.assert_allclose(math.exp(conditional_log_density(d, x)), 1 / 8, rtol=1e-15)

    @pytest.mark.parametrize("kind", [BOOT, ClassReweight(), SymmetryAugment((0, 1), (1, 0), 2),
                                      PosteriorPredictive(BetaBernoulli(2, 3))])
    def test_discrete_normalisation(self, kind):
        X = Sample((0, 1, 1, 0, 1), labels=(0, 0, 1, 1, 1) if isinstance(kind, ClassReweight) else None)
        d = fit(kind, X)
        total = math.fsum(math.exp(conditional_log_density(d, s)) for s, _ in enumerate_support(d))
        assert abs(total - 1) <= 1e-12

    def test_theta_independence_via_factorisation(self):
        # q_theta(X, S) / prod p_theta(X_i) must not move with theta
        fam = get_family("bernoulli")
        X = Sample((1, 0, 1, 1, 0, 0, 1))
        for kind in [BOOT, SymmetryAugment((0, 1), (1, 0), 2), ParametricBootstrap(fam),
                     PosteriorPredictive(BetaBernoulli(1, 1))]:
            d = fit(kind, X)
            S = d.sample(10, 3)
            consts, ratios = [], []
            for theta in np.linspace(0.1, 0.9, 10):
                c = sample_log_density(d, S)
                joint = fam.loglik(theta, X.observations) + c
                consts.append(c)
                ratios.append(joint - fam.loglik(theta, X.observations))
            assert len(set(consts)) == 1
            np.testing.assert_allclose(ratios, ratios[0], rtol=0, atol=1e-12)

    def test_no_theta_in_signature(self):
        import inspect

        assert "theta" not in inspect.signature(conditional_log_density).parameters


class TestInvariance:
    @given(values=st.lists(st.integers(0, 4), min_size=1, max_size=12), data=st.data())
    @settings(max_examples=50)
    def test_refit_on_permutation(self, values, data):
        order = data.draw(st.permutations(range(len(values))))
        X = Sample(tuple(values))
        assert fit(BOOT, X) == fit(BOOT, X.permuted(order))
        act = SymmetryAugment(tuple(range(5)), (1, 2, 3, 4, 0), 5)
        assert fit(act, X) == fit(act, X.permuted(order))

    @given(values=st.lists(st.integers(0, 4), min_size=1, max_size=12),
           labels=st.lists(st.sampled_from("ab"), min_size=12, max_size=12), data=st.data())
    @settings(max_examples=30)
    def test_reweight_permutation(self, values, labels, data):
        X = Sample(tuple(values), tuple(labels[: len(values)]))
        order = data.draw(st.permutations(range(len(values))))
        assert fit(ClassReweight(), X) == fit(ClassReweight(), X.permuted(order))

    @given(values=st.lists(st.integers(0, 2**4 - 1), min_size=1, max_size=8))
    @settings(max_examples=30)
    def test_symmetry_pushforward(self, values):
        act = grid_rotation_action(2)
        pts = act.points
        d = fit(act, Sample(tuple(pts[v] for v in values)))
        pmf = as_dict(enumerate_support(d))
        pushed = Counter()
        for x, p in pmf.items():
            pushed[act.act(x)] += p
        for x in pmf:
            assert pushed[x] == pytest.approx(pmf[x], abs=1e-15)

    def test_bootstrap_is_empirical_frequency(self):
        X = Sample((2, 2, 3, 7, 7, 7, 1))
        pmf = as_dict(enumerate_support(fit(BOOT, X)))
        assert pmf == {1: 1 / 7, 2: 2 / 7, 3: 1 / 7, 7: 3 / 7}


class TestSymmetryAction:
    def test_bad_period(self):
        with pytest.raises(SchemaError):
            SymmetryAugment((0, 1, 2), (1, 2, 0), 2)

    def test_not_a_permutation(self):
        with pytest.raises(SchemaError):
            SymmetryAugment((0, 1, 2), (1, 1, 0), 3)

    def test_rotation_period(self):
        act = grid_rotation_action(3)
        assert len(act.points) == 2**9
        x = act.points[37]
        assert act.act(x, 4) == x

    def test_observation_not_in_action(self):
        with pytest.raises(SchemaError):
            fit(SymmetryAugment((0, 1), (1, 0), 2), Sample((5,)))

    def test_permutation_csv(self, tmp_path):
        p = tmp_path / "perm.csv"
        p.write_text("from_index,to_index\n0,1\n1,2\n2,3\n3,0\n")
        act = load_permutation_csv(p, 4)
        assert act.act(0) == 1 and act.act(3, 2) == 1
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n0,1\n")
        with pytest.raises(SchemaError):
            load_permutation_csv(bad, 2)


class TestSampling:
    def test_empty(self):
        assert len(synth_sample(fit(BOOT, Sample((1, 2))), 0, 5)) == 0

    def test_bootstrap_frequency(self):
        S = synth_sample(fit(BOOT, Sample(("a", "a", "b"))), 10**5, 17)
        freq = Counter(S.observations)["a"] / 10**5
        assert abs(freq - 2 / 3) <= 3 * math.sqrt((2 / 9) / 10**5)

    def test_symmetry_rotations_uniform(self):
        act = grid_rotation_action(2)
        img = act.points[0b0001]
        S = synth_sample(fit(act, Sample((img,))), 10**5, 23)
        counts = Counter(S.observations)
        assert len(counts) == 4
        for c in counts.values():
            assert abs(c / 10**5 - 0.25) <= 3 * math.sqrt(0.25 * 0.75 / 10**5)

    def test_deterministic(self):
        d = fit(ClassReweight(), Sample((1, 2, 3), ("x", "y", "y")))
        assert synth_sample(d, 50, 9) == synth_sample(d, 50, 9)
        assert synth_sample(d, 50, 9).labelled


class TestMakeKind:
    def test_names(self):
        fam = get_family("bernoulli")
        assert isinstance(make_kind("bootstrap"), NonparametricBootstrap)
        assert make_kind("fixed", "bernoulli", 0.3) == FixedDistribution(fam, 0.3)
        assert isinstance(make_kind("posterior_predictive"), PosteriorPredictive)
        with pytest.raises(SchemaError):
            make_kind("gan")
        with pytest.raises(SchemaError):
            make_kind("symmetry")
