"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from synthinfo.bayes import BetaBernoulli, NextObservation, ParameterInterval, Posterior, reflection_check
from synthinfo.experiments import run_scenario
from synthinfo.experiments.scenarios import SCENARIOS, default_config
from synthinfo.families import get_family
from synthinfo.info import exact_decomposition, mc_fisher_marginal
from synthinfo.mle import decomposed_loglik
from synthinfo.sample import Sample
from synthinfo.synth import FixedDistribution, NonparametricBootstrap, fit

BERN = get_family("bernoulli")
N_GRID, M_GRID, THETA_GRID = [2, 3, 4], [1, 2, 3], [0.1, 0.3, 0.5, 0.7, 0.9]
SEED = 20240101


@pytest.fixture
def verdict(capsys):
    def emit(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}")
        assert ok, detail

    return emit


def _grid(kind):
    out = []
    for n in N_GRID:
        for m in M_GRID:
            for theta in THETA_GRID:
                out.append((n, m, theta, exact_decomposition(BERN, kind, theta, n, m)))
    return out


def test_criterion_1_conditional_information_zero(verdict):
    t0 = time.perf_counter()
    rows = _grid(NonparametricBootstrap())
    elapsed = time.perf_counter() - t0
    cond = max(abs(d.i_s_given_x.value) for *_, d in rows)
    joint = max(abs(d.i_xs.value - n / (th * (1 - th))) for n, _, th, d in rows)
    ok = cond <= 1e-8 and joint <= 1e-6 and elapsed < 5.0
    verdict(1, ok, f"max|i_s|x|={cond:.2e} (<=1e-8), max|i_xs-n/(t(1-t))|={joint:.2e} (<=1e-6), {elapsed:.2f}s (<5s)")


def test_criterion_2_synthetic_information_bounded(verdict):
    boot = _grid(NonparametricBootstrap())
    fixed = _grid(FixedDistribution(BERN, 0.5))
    le_x = max(d.i_s.value - d.i_x.value for *_, d in boot)
    le_n = max(d.i_s.value - n * BERN.unit_fisher(th) for n, _, th, d in boot)
    informative = min(d.i_s.value for *_, d in boot)
    degenerate = max(abs(d.i_s.value) for *_, d in fixed)
    ok = le_x <= 1e-8 and le_n <= 1e-8 and informative > 0.01 and degenerate <= 1e-10
    verdict(2, ok, f"max(i_s-i_x)={le_x:.2e}, max(i_s-n*I1)={le_n:.2e}, min bootstrap i_s={informative:.4f} (>0.01), "
                   f"max fixed |i_s|={degenerate:.2e} (<=1e-10)")


def test_criterion_3_loglik_decomposition(verdict):
    report = run_scenario(default_config("decomposition", seed=SEED, n_reps=100), write=False)
    worst = report.aggregates["max_dev"]
    # separate exactness probes with distinct real values: const must be -k log n bit for bit
    fam = get_family("normal_mu")
    exact = True
    for n in range(1, 30):
        X = fam.sample(0.3, n, seed=n)
        d = fit(NonparametricBootstrap(), X)
        for k in (0, 1, 7, 40):
            S = d.sample(k, seed=1000 + k)
            _, _, const = decomposed_loglik(fam, X, d, S, 0.0)
            exact &= const == (-k * math.log(n) if k else 0.0)
    scenario_ok = all(v.passed for v in report.verdicts)
    ok = len(report.records) == 100 and worst <= 1e-12 and scenario_ok and exact
    verdict(3, ok, f"100 probes, max deviation of total-l_X across theta grid={worst:.2e} (<=1e-12), "
                   f"bootstrap const == -k log n exactly: {exact}")


def test_criterion_4_mc_consistency(verdict):
    t0 = time.perf_counter()
    est = mc_fisher_marginal("X", get_family("normal_mu"), NonparametricBootstrap(), 0.0, 50, 0, 10_000, seed=SEED)
    elapsed = time.perf_counter() - t0
    z = abs(est.value - 50.0) / est.std_error
    ok = z <= 4.0 and elapsed < 30.0
    verdict(4, ok, f"I_X estimate {est.value:.3f} +/- {est.std_error:.3f} vs 50, z={z:.2f} (<=4), {elapsed:.2f}s (<30s)")


def test_criterion_5_reflection(verdict):
    worst = 0.0
    for a in (0.5, 1, 2, 8):
        for b in (0.5, 1, 2, 8):
            post = Posterior(BetaBernoulli(a, b))
            for ev in (NextObservation(1), NextObservation(0), ParameterInterval(0.5, 1.0), ParameterInterval(0.0, 0.3)):
                lhs, rhs = reflection_check(post, ev, (0, 1))
                worst = max(worst, abs(lhs - rhs))
    verdict(5, worst <= 1e-12, f"max|lhs-rhs| over Beta grid and both event types={worst:.2e} (<=1e-12)")


def test_criterion_6_naive_degeneracy(verdict):
    report = run_scenario(default_config("naive_degeneracy", seed=SEED), write=False)
    agg = report.aggregates
    ks = [0, 50, 200, 450]
    ratio_err = max(abs(agg[f"k{k}"]["mean_se_ratio"] / math.sqrt(50 / (50 + k)) - 1) for k in ks)
    cov = [agg[f"k{k}"]["coverage_naive"] for k in ks]
    decreasing = all(b < a for a, b in zip(cov, cov[1:]))
    drop = cov[0] - cov[-1]
    ok = ratio_err <= 0.05 and decreasing and drop >= 0.10 and len(report.records) == 2000
    verdict(6, ok, f"SE ratio rel. error={ratio_err:.4f} (<=0.05), coverage={[round(c, 4) for c in cov]} "
                   f"strictly decreasing={decreasing}, drop={drop:.3f} (>=0.10)")


def test_criterion_7_censoring(verdict):
    report = run_scenario(default_config("censoring", seed=SEED), write=False)
    agg = report.aggregates
    ok = (
        abs(agg["bias_corrected"]) < 0.01
        and agg["bias_ignore"] < -0.05
        and agg["grid_spot_checks"] == 50
        and agg["max_grid_deviation"] <= 1e-6
        and len(report.records) == 5000
    )
    verdict(7, ok, f"corrected bias={agg['bias_corrected']:+.4f} (|.|<0.01), ignore-censoring bias="
                   f"{agg['bias_ignore']:+.4f} (<-0.05), grid deviation={agg['max_grid_deviation']:.1e} (<=1e-6) on 50 spots")


def test_criterion_8_determinism(verdict, tmp_path):
    mismatched = []
    for name in sorted(SCENARIOS):
        blobs = []
        for run in ("first", "second"):
            cfg = default_config(name, seed=SEED, out_dir=str(tmp_path / run))
            run_scenario(cfg)
            blobs.append(tuple((tmp_path / run / f"{name}_{s}").read_bytes() for s in ("replicates.csv", "report.json")))
        if blobs[0] != blobs[1]:
            mismatched.append(name)
    verdict(8, not mismatched, f"{len(SCENARIOS)} scenarios run twice, byte-identical CSV/JSON; mismatches: {mismatched or 'none'}")
