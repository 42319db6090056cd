"""Conjugate updating, the reflection identity and the naive-augmentation
pitfall.

``naive_augmented_update`` is deliberately the wrong thing to do: it feeds
synthetic draws to the conjugate update as if they were genuine
observations. It exists so the experiments can measure how badly the
resulting posterior over-concentrates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import ParameterError, SchemaError, UnsupportedOperation
from .numerics import betainc, log_beta, stream
from .sample import Sample


@dataclass(frozen=True)
class BetaBernoulli:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ParameterError(f"Beta hyperparameters must be > 0, got ({self.alpha}, {self.beta})")

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    @property
    def variance(self) -> float:
        a, b = self.alpha, self.beta
        return a * b / ((a + b) ** 2 * (a + b + 1.0))

    def cdf(self, x: float) -> float:
        return betainc(self.alpha, self.beta, x)


@dataclass(frozen=True)
class NormalNormal:
    """Normal prior N(m0, v0) on the mean of N(mu, 1) data."""

    m0: float
    v0: float

    def __post_init__(self):
        if not self.v0 > 0:
            raise ParameterError(f"prior variance must be > 0, got {self.v0}")

    @property
    def mean(self) -> float:
        return self.m0

    @property
    def variance(self) -> float:
        return self.v0


ConjugateModel = Union[BetaBernoulli, NormalNormal]


@dataclass(frozen=True)
class Posterior:
    model: ConjugateModel
    n_assimilated: int = 0

    @property
    def mean(self) -> float:
        return self.model.mean

    @property
    def sd(self) -> float:
        return math.sqrt(self.model.variance)

    def predictive(self):
        """Posterior-predictive distribution of one new observation."""
        from .families import Bernoulli
        from .synth import FrozenFamily, FrozenNormal

        if isinstance(self.model, BetaBernoulli):
            return FrozenFamily(Bernoulli(), self.model.mean)
        return FrozenNormal(self.model.m0, math.sqrt(self.model.v0 + 1.0))

    def predictive_one(self) -> float:
        """P(next observation = 1) for the Beta-Bernoulli model."""
        if not isinstance(self.model, BetaBernoulli):
            raise UnsupportedOperation("predictive_one is defined for Beta-Bernoulli only")
        return self.model.mean


def _as_posterior(model) -> Posterior:
    return model if isinstance(model, Posterior) else Posterior(model, 0)


def update(model: ConjugateModel | Posterior, data: Sample | Sequence) -> Posterior:
    """Exact conjugate update. Observation order does not matter."""
    post = _as_posterior(model)
    obs = data.observations if isinstance(data, Sample) else tuple(data)
    m = post.model
    if isinstance(m, BetaBernoulli):
        if any(x not in (0, 1) for x in obs):
            raise SchemaError("Beta-Bernoulli update needs observations in {0, 1}")
        ones = sum(1 for x in obs if x == 1)
        zeros = len(obs) - ones
        new = BetaBernoulli(m.alpha + ones, m.beta + zeros)
    elif isinstance(m, NormalNormal):
        try:
            vals = [float(x) for x in obs]
        except (TypeError, ValueError):
            raise SchemaError("Normal-Normal update needs real observations") from None
        if not all(math.isfinite(v) for v in vals):
            raise SchemaError("Normal-Normal update needs finite observations")
        prec = 1.0 / m.v0 + len(vals)
        mean = (m.m0 / m.v0 + math.fsum(vals)) / prec
        new = NormalNormal(mean, 1.0 / prec)
    else:
        raise SchemaError(f"unknown conjugate model {m!r}")
    return Posterior(new, post.n_assimilated + len(obs))


# -- reflection ---------------------------------------------------------------


@dataclass(frozen=True)
class NextObservation:
    """Event: the observation following Y equals ``value``."""

    value: int = 1


@dataclass(frozen=True)
class ParameterInterval:
    """Event: lo < p <= hi for the Bernoulli success probability p."""

    lo: float
    hi: float


def event_probability(p: Posterior, event) -> float:
    m = p.model
    if not isinstance(m, BetaBernoulli):
        raise UnsupportedOperation("events are defined for the Beta-Bernoulli model")
    if isinstance(event, NextObservation):
        return m.mean if event.value == 1 else 1.0 - m.mean
    if isinstance(event, ParameterInterval):
        return m.cdf(event.hi) - m.cdf(event.lo)
    raise SchemaError(f"unknown event {event!r}")


def predictive_probability(p: Posterior, y) -> float:
    """P'(Y = y) where y is one observation or a tuple of consecutive ones."""
    m = p.model
    if not isinstance(m, BetaBernoulli):
        raise UnsupportedOperation("finite predictive probabilities need Beta-Bernoulli")
    ys = tuple(y) if isinstance(y, (tuple, list)) else (y,)
    ones = sum(ys)
    zeros = len(ys) - ones
    return math.exp(log_beta(m.alpha + ones, m.beta + zeros) - log_beta(m.alpha, m.beta))


def reflection_check(p: Posterior, event, next_obs_space: Iterable = (0, 1)) -> tuple[float, float]:
    """Return (sum_y P'(Y=y) P'(E | y), P'(E)).

    The two agree exactly for any coherent posterior; the difference is
    only floating-point rounding.
    """
    p = _as_posterior(p)
    terms = []
    for y in next_obs_space:
        ys = tuple(y) if isinstance(y, (tuple, list)) else (y,)
        terms.append(predictive_probability(p, ys) * event_probability(update(p, ys), event))
    return math.fsum(terms), event_probability(p, event)


# -- naive augmentation ---------------------------------------------------------


def naive_augmented_update(model, X: Sample, d, k: int, seed: int) -> Posterior:
    """Draw k synthetic points from ``d`` and update on X and S as if all were real."""
    from .synth import synth_sample

    S = synth_sample(d, k, seed)
    return update(model, Sample(X.observations + S.observations))


def coherent_update(p: Posterior, d, S: Sample) -> tuple[Posterior, float]:
    """Assimilate synthetic S with its true conditional likelihood q(S | X).

    That likelihood carries no parameter dependence, so the posterior is
    returned unchanged together with the log evidence contribution
    log c_X(S).
    """
    from .synth import sample_log_density

    return _as_posterior(p), sample_log_density(d, S)


def expected_naive_predictive(p: Posterior, k: int) -> float:
    """E[P(next=1 | X, S)] over S ~ k iid draws from the current predictive.

    Exact finite sum over the number of ones; equals the current predictive.
    """
    m = p.model
    if not isinstance(m, BetaBernoulli):
        raise UnsupportedOperation("Beta-Bernoulli only")
    q = m.mean
    logw = np.array([
        math.lgamma(k + 1) - math.lgamma(j + 1) - math.lgamma(k - j + 1)
        + (j * math.log(q) if j else 0.0) + ((k - j) * math.log1p(-q) if k - j else 0.0)
        for j in range(k + 1)
    ])
    w = np.exp(logw - logw.max())
    vals = (m.alpha + np.arange(k + 1)) / (m.alpha + m.beta + k)
    # normalise so rounding in the binomial weights does not leak into the mean
    return math.fsum((w * vals).tolist()) / math.fsum(w.tolist())


def predictive_tv(a: Posterior, b: Posterior) -> float:
    """Total-variation distance between two one-step predictive distributions."""
    if isinstance(a.model, BetaBernoulli) and isinstance(b.model, BetaBernoulli):
        return abs(a.model.mean - b.model.mean)
    pa, pb = a.predictive(), b.predictive()
    lo = min(pa.mean - 12 * pa.sd, pb.mean - 12 * pb.sd)
    hi = max(pa.mean + 12 * pa.sd, pb.mean + 12 * pb.sd)
    grid = np.linspace(lo, hi, 200_001)
    diff = np.abs(np.exp(pa.logpdf_many(grid)) - np.exp(pb.logpdf_many(grid)))
    return 0.5 * float(np.trapezoid(diff, grid))


def posterior_stability_check(model, X: Sample, k_schedule: Sequence[int], seed: int, kind=None) -> dict:
    """Coherent versus naive assimilation of synthetic draws.

    For each k the coherent path draws S from the posterior predictive and
    assimilates it through its conditional likelihood; the naive path feeds
    a bootstrap (or ``kind``) resample of X to the conjugate update.
    """
    from .synth import NonparametricBootstrap, PosteriorPredictive, fit, synth_sample

    base = update(model, X)
    prior = model.model if isinstance(model, Posterior) else model
    d_coherent = fit(PosteriorPredictive(prior), X)
    d_naive = fit(kind or NonparametricBootstrap(), X)
    rows = []
    for i, k in enumerate(k_schedule):
        S_coh = synth_sample(d_coherent, k, stream(seed, i, 0).integers(2**63))
        coherent, _ = coherent_update(base, d_coherent, S_coh)
        naive = naive_augmented_update(model, X, d_naive, k, stream(seed, i, 1).integers(2**63))
        row = {
            "k": int(k),
            "coherent_mean": coherent.mean,
            "coherent_sd": coherent.sd,
            "naive_mean": naive.mean,
            "naive_sd": naive.sd,
            "predictive_tv": predictive_tv(coherent, naive),
        }
        if isinstance(base.model, BetaBernoulli):
            row["coherent_p_next_one"] = coherent.predictive_one()
            row["naive_p_next_one"] = naive.predictive_one()
            row["reflection_expectation"] = expected_naive_predictive(base, int(k))
            row["naive_alpha"] = naive.model.alpha
            row["naive_beta"] = naive.model.beta
        rows.append(row)
    return {
        "base_mean": base.mean,
        "base_sd": base.sd,
        "empirical_mean": float(np.mean(X.values())) if len(X) else math.nan,
        "rows": rows,
    }


def iterate_naive_updates(model, X: Sample, k: int, n_iter: int, seed: int) -> list[float]:
    """Repeatedly draw k points from the current posterior predictive and
    assimilate them naively. Returns the posterior mean after each round."""
    from .synth import ParametricSynthDist, PosteriorPredictive, synth_sample

    post = update(model, X)
    means = [post.mean]
    for t in range(n_iter):
        d = ParametricSynthDist(PosteriorPredictive(post.model), post.predictive(), X)
        S = synth_sample(d, k, stream(seed, t).integers(2**63))
        post = update(post, S)
        means.append(post.mean)
    return means
