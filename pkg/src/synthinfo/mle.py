"""Maximum likelihood on real, synthetic and pooled data."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import BoundaryError, FitError
from .families import ParamFamily
from .numerics import LOG_ZERO, golden_section_max, richardson_derivative, richardson_second_derivative, stream
from .sample import Sample
from .synth import SynthDist, fit, sample_log_density

Z95 = 1.959963984540054


@dataclass(frozen=True)
class MleFit:
    theta_hat: float
    observed_information: float
    standard_error: float
    loglik_at_max: float
    data_size: int

    def __post_init__(self):
        if not self.observed_information > 0:
            raise FitError(f"observed information {self.observed_information} is not positive")


def _boundary_check(family: ParamFamily, theta_hat: float, data_size: int) -> None:
    lo, hi = family.domain
    if not (lo < theta_hat < hi):
        raise BoundaryError(
            f"{family.name}: MLE {theta_hat!r} from {data_size} observations lies on the "
            f"boundary of ({lo}, {hi}); observed information is undefined there"
        )


def fit_mle(family: ParamFamily, data: Sample) -> MleFit:
    """Closed-form MLE with analytic observed information."""
    if len(data) == 0:
        raise FitError("cannot fit an MLE to an empty sample")
    values = family.check_values(data.observations)
    theta_hat = family.plugin_estimate(values)
    _boundary_check(family, theta_hat, len(values))
    info = -float(np.sum(family._hessian(theta_hat, values)))
    return MleFit(
        theta_hat=theta_hat,
        observed_information=info,
        standard_error=1.0 / math.sqrt(info),
        loglik_at_max=family.loglik(theta_hat, values),
        data_size=len(values),
    )


def fit_scalar_mle(
    loglik: Callable[[float], float],
    lo: float,
    hi: float,
    data_size: int,
    tol: float = 1e-10,
    boundary_margin: float = 1e-7,
) -> MleFit:
    """Golden-section MLE for a unimodal scalar log-likelihood on (lo, hi).

    Observed information comes from a Richardson second difference.
    """
    theta_hat = golden_section_max(loglik, lo, hi, tol=tol)
    if theta_hat - lo < boundary_margin or hi - theta_hat < boundary_margin:
        raise BoundaryError(f"maximiser {theta_hat!r} is at the boundary of ({lo}, {hi})")
    h = 1e-4 * min(theta_hat - lo, hi - theta_hat, max(1.0, abs(theta_hat)))
    # comparisons stall near a flat top at ~sqrt(eps); polish on the score instead
    for _ in range(2):
        g = float(richardson_derivative(loglik, theta_hat, h))
        curv = float(richardson_second_derivative(loglik, theta_hat, h))
        step = -g / curv if curv < 0 else 0.0
        if not abs(step) < 1e-6 or not lo < theta_hat + step < hi:
            break
        theta_hat += step
    info = -float(richardson_second_derivative(loglik, theta_hat, h))
    if not info > 0:
        raise FitError(f"non-positive observed information {info} at {theta_hat}")
    return MleFit(theta_hat, info, 1.0 / math.sqrt(info), loglik(theta_hat), data_size)


def decomposed_loglik(
    family: ParamFamily, X: Sample, d: SynthDist, S: Sample, theta: float
) -> tuple[float, float, float]:
    """(total, real_part, const_part) with total = const_part + real_part.

    real_part is the log-likelihood of X; const_part = log c_X(S) does not
    involve theta. Off-support synthetic points make total ``LOG_ZERO``.
    """
    theta = family.check_theta(theta)
    values = family.check_values(X.observations)
    real = family.loglik(theta, values)
    const = sample_log_density(d, S) if len(S) else 0.0
    if const == LOG_ZERO:
        return LOG_ZERO, real, const
    return const + real, real, const


def naive_pooled_fit(family: ParamFamily, X: Sample, S: Sample) -> MleFit:
    """MLE treating X and S as n + k iid draws from the family.

    This is the common but wrong procedure: the reported standard error
    shrinks with k although S carries no new information about theta.
    """
    pooled = Sample(X.observations + S.observations)
    if len(pooled) == 0:
        raise FitError("pooled sample is empty")
    bad = [s for s in S.observations if not family.in_support(s)]
    if bad:
        raise FitError(
            f"pooled likelihood is log-zero: synthetic points {bad[:3]!r} are outside the {family.name} support"
        )
    return fit_mle(family, pooled)


@dataclass
class CalibrationReport:
    n: int
    k: int
    theta_true: float
    records: list[dict]
    aggregates: dict


def se_calibration_report(
    family: ParamFamily,
    kind,
    theta_true: float,
    n: int,
    k: int,
    n_reps: int,
    seed: int,
) -> CalibrationReport:
    """Naive pooled SE versus the sampling spread of the naive estimator.

    Replicate r draws X from stream (seed, r) and S from stream (seed, r, 1),
    so reports for different k share the same real data.
    """
    if n_reps < 100:
        raise ValueError("n_reps must be >= 100")
    theta_true = family.check_theta(theta_true)
    records = []
    for r in range(n_reps):
        X = Sample(family._to_native(family.draw(theta_true, n, stream(seed, r))))
        try:
            correct = fit_mle(family, X)
            d = fit(kind, X)
            S = d.sample(k, int(stream(seed, r, 1).integers(2**63)))
            naive = naive_pooled_fit(family, X, S)
        except BoundaryError:
            records.append({
                "replicate": r, "theta_hat_naive": math.nan, "se_naive": math.nan,
                "se_correct": math.nan, "covered": False, "theta_hat_correct": math.nan,
                "covered_correct": False, "skipped": True,
            })
            continue
        records.append({
            "replicate": r,
            "theta_hat_naive": naive.theta_hat,
            "se_naive": naive.standard_error,
            "se_correct": correct.standard_error,
            "covered": abs(naive.theta_hat - theta_true) <= Z95 * naive.standard_error,
            "theta_hat_correct": correct.theta_hat,
            "covered_correct": abs(correct.theta_hat - theta_true) <= Z95 * correct.standard_error,
            "skipped": False,
        })
    used = [rec for rec in records if not rec["skipped"]]
    th = np.array([rec["theta_hat_naive"] for rec in used])
    se_n = np.array([rec["se_naive"] for rec in used])
    se_c = np.array([rec["se_correct"] for rec in used])
    aggregates = {
        "n_used": len(used),
        "n_skipped": len(records) - len(used),
        "empirical_sd_naive": float(np.std(th, ddof=1)),
        "empirical_sd_correct": float(np.std([rec["theta_hat_correct"] for rec in used], ddof=1)),
        "mean_se_naive": float(np.mean(se_n)),
        "mean_se_correct": float(np.mean(se_c)),
        "mean_se_ratio": float(np.mean(se_n / se_c)),
        "expected_se_ratio": math.sqrt(n / (n + k)),
        "coverage_naive": float(np.mean([rec["covered"] for rec in used])),
        "coverage_correct": float(np.mean([rec["covered_correct"] for rec in used])),
    }
    return CalibrationReport(n, k, theta_true, records, aggregates)
