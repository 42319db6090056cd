"""Fisher-information accounting for real data X, synthetic data S ~ S(X)
and the pair (X, S).

Two routes are provided:

* ``exact_decomposition`` enumerates every (X, S) outcome of a finite-support
  family, builds the exact log-densities of X, S, (X, S) and S | X as
  functions of theta, differentiates them numerically and takes
  expectations under the exact joint law.
* ``mc_fisher_marginal`` estimates a single information quantity as the
  replicate variance of a finite-difference score.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass
from typing import Callable, Literal, Sequence

import numpy as np

from .errors import EnumerationBudgetError, FitError, UnsupportedOperation
from .families import ParamFamily
from .numerics import LOG_ZERO, default_step, logsumexp, richardson_derivative, stream
from .sample import Sample
from .synth import FrozenFamily, SynthDist, TableSynthDist, canonical_order, fit

ENUMERATION_BUDGET = 10**7
NEGATIVE_SLACK = 1e-8


@dataclass(frozen=True)
class InfoEstimate:
    value: float
    method: Literal["exact", "monte_carlo", "analytic"]
    std_error: float = 0.0
    n_reps: int = 0

    def __post_init__(self):
        if self.value < -NEGATIVE_SLACK:
            raise ValueError(f"Fisher information estimate {self.value} is negative")
        if self.std_error < 0:
            raise ValueError("std_error must be >= 0")


@dataclass(frozen=True)
class InfoDecomposition:
    i_x: InfoEstimate
    i_s: InfoEstimate
    i_xs: InfoEstimate
    i_s_given_x: InfoEstimate
    i_x_given_s: InfoEstimate
    theta: float
    n: int
    m: int

    def chain_rule_residuals(self) -> tuple[float, float]:
        """(i_xs - i_x - i_s|x, i_xs - i_s - i_x|s)."""
        return (
            self.i_xs.value - self.i_x.value - self.i_s_given_x.value,
            self.i_xs.value - self.i_s.value - self.i_x_given_s.value,
        )

    def to_dict(self) -> dict:
        return asdict(self)


def exact_step(family: ParamFamily, theta: float) -> float:
    lo, hi = family.domain
    return 1e-3 * min(theta - lo, hi - theta, max(1.0, abs(theta)))


def _weighted_sq(logw: np.ndarray, score: np.ndarray) -> float:
    """sum exp(logw) * score**2 over entries with positive mass."""
    mask = np.isfinite(logw)
    w = np.exp(logw[mask])
    return float(np.sum(w * score[mask] ** 2))


def exact_decomposition(
    family: ParamFamily,
    kind,
    theta: float,
    n: int,
    m: int,
    budget: int = ENUMERATION_BUDGET,
) -> InfoDecomposition:
    """All five information quantities by exhaustive enumeration."""
    theta = family.check_theta(theta)
    omega = family.finite_support()
    if omega is None:
        raise UnsupportedOperation(f"exact enumeration needs a finite-support family, got {family.name}")
    if len(omega) ** n > budget:
        raise EnumerationBudgetError(f"|Omega|^n = {len(omega)}^{n} exceeds budget {budget}")

    xs = list(itertools.product(omega, repeat=n))
    dists = [fit(kind, Sample(x)) for x in xs]
    xi = set()
    for d in dists:
        if not d.is_finite:
            raise UnsupportedOperation(f"{kind.name} on {family.name} has infinite support")
        xi.update(p for p, q in d.support() if q > 0)
    xi = canonical_order(xi)
    if len(xs) * len(xi) ** m > budget:
        raise EnumerationBudgetError(
            f"|Omega|^n * |Xi|^m = {len(xs)} * {len(xi)}^{m} exceeds budget {budget}"
        )

    # log c_X(S) for every (X, S); independent of theta
    combos = list(itertools.product(range(len(xi)), repeat=m))
    s_idx = np.array(combos, dtype=np.int64).reshape(len(combos), m)
    log_table = np.array([[d.log_density(p) for p in xi] for d in dists])
    log_c = log_table[:, s_idx].sum(axis=2) if m > 0 else np.zeros((len(xs), 1))

    x_mat = np.asarray(xs, dtype=float).reshape(len(xs), n)

    def log_px(t):
        return family.loglik_rows(t, x_mat)

    def log_qxs(t):
        return log_px(t)[:, None] + log_c

    def log_qs(t):
        return logsumexp(log_qxs(t), axis=0)

    def log_q_s_given_x(t):
        # computed from the joint, not from log_c directly
        return log_qxs(t) - log_px(t)[:, None]

    h = exact_step(family, theta)
    with np.errstate(invalid="ignore"):
        s_x = richardson_derivative(log_px, theta, h)
        s_xs = richardson_derivative(log_qxs, theta, h)
        s_s = richardson_derivative(log_qs, theta, h)
        s_cond = richardson_derivative(log_q_s_given_x, theta, h)

    lpx, lqxs, lqs = log_px(theta), log_qxs(theta), log_qs(theta)
    i_x = _weighted_sq(lpx, s_x)
    i_xs = _weighted_sq(lqxs, s_xs)
    i_s = _weighted_sq(lqs, s_s)
    i_s_given_x = _weighted_sq(lqxs, s_cond)
    i_x_given_s = i_xs - i_s

    def est(v):
        return InfoEstimate(float(v), "exact", 0.0, 0)

    return InfoDecomposition(
        i_x=est(i_x),
        i_s=est(i_s),
        i_xs=est(i_xs),
        i_s_given_x=est(i_s_given_x),
        i_x_given_s=est(i_x_given_s),
        theta=theta,
        n=int(n),
        m=int(m),
    )


# -- Monte Carlo ----------------------------------------------------------------


def _variance_estimate(scores: np.ndarray) -> tuple[float, float]:
    r = len(scores)
    centred = scores - scores.mean()
    sq = centred**2
    value = float(sq.sum() / (r - 1))
    if np.all(sq == 0):
        return 0.0, 0.0
    se = float(np.std(sq, ddof=1) / math.sqrt(r))
    return value, se


class _InnerPool:
    """Shared pool of inner X replicates for the nested estimate of log q_t(S).

    q_t(S) is estimated by self-normalised importance sampling from the pool
    drawn at theta, with a leave-one-out jackknife on the log.
    """

    def __init__(self, family, kind, theta, n, size, rng):
        self.family = family
        self.theta = theta
        self.x_mat = np.asarray(family.draw(theta, n * size, rng), dtype=float).reshape(size, n)
        self.base = family.loglik_rows(theta, self.x_mat)
        self.dists: list[SynthDist] = [fit(kind, Sample(tuple(row))) for row in self._native_rows()]
        self.tables = all(isinstance(d, TableSynthDist) for d in self.dists)
        if self.tables:
            pts = sorted({p for d in self.dists for p in d.points}, key=repr)
            self.index = {p: j for j, p in enumerate(pts)}
            self.log_table = np.full((size, len(pts)), LOG_ZERO)
            for i, d in enumerate(self.dists):
                for p, lp in zip(d.points, d.logprobs):
                    self.log_table[i, self.index[p]] = lp
        self.frozen = None
        dist0 = getattr(self.dists[0], "dist", None) if not self.tables else None
        if isinstance(dist0, FrozenFamily) and all(
            isinstance(getattr(d, "dist", None), FrozenFamily) and d.dist.family == dist0.family for d in self.dists
        ):
            self.frozen = (dist0.family, np.array([d.dist.theta for d in self.dists])[:, None])

    def _native_rows(self):
        conv = self.family._to_native
        return [conv(row) for row in self.x_mat]

    def log_c(self, S: Sample) -> np.ndarray:
        units = S.units()
        if self.tables:
            counts: dict = {}
            for u in units:
                if u not in self.index:
                    return np.full(len(self.dists), LOG_ZERO)
                j = self.index[u]
                counts[j] = counts.get(j, 0) + 1
            cols = np.fromiter(counts.keys(), dtype=np.int64)
            cnt = np.fromiter(counts.values(), dtype=float)
            sub = self.log_table[:, cols]
            with np.errstate(invalid="ignore"):
                out = np.where(np.isfinite(sub), sub * cnt, LOG_ZERO).sum(axis=1)
            return out
        if self.frozen is not None:
            fam, thetas = self.frozen
            if not all(fam.in_support(u) for u in units):
                return np.full(len(self.dists), LOG_ZERO)
            obs = np.asarray(units, dtype=float)[None, :]
            return fam._logpdf(thetas, obs).sum(axis=1)
        out = np.empty(len(self.dists))
        for i, d in enumerate(self.dists):
            vals = d.log_density_many(units)
            out[i] = LOG_ZERO if np.any(vals == LOG_ZERO) else float(np.sum(vals))
        return out

    def log_marginal(self, log_c: np.ndarray) -> Callable[[float], float]:
        size = len(log_c)
        cmax = np.max(log_c)
        rel_c = np.exp(log_c - cmax)

        def f(t):
            log_w = self.family.loglik_rows(t, self.x_mat) - self.base
            w = np.exp(log_w - np.max(log_w))
            wc = w * rel_c
            num, den = wc.sum(), w.sum()
            full = math.log(num) - math.log(den)
            loo_num = num - wc
            loo_den = den - w
            if np.any(loo_num <= 0) or np.any(loo_den <= 0):
                return cmax + full
            loo = np.log(loo_num) - np.log(loo_den)
            return cmax + size * full - (size - 1) * float(np.mean(loo))

        return f


def mc_scores(
    target: Literal["X", "S", "XS"],
    family: ParamFamily,
    kind,
    theta: float,
    n: int,
    m: int,
    n_reps: int,
    seed: int,
    h: float | None = None,
) -> np.ndarray:
    """Per-replicate finite-difference scores of the target log-density.

    Replicate r draws X with stream (seed, r), fits the generator and draws
    S with stream (seed, r, 1). For target S the log marginal
    log E_X[c_X(S)] is estimated from a shared inner pool of ``n_reps``
    X-replicates; replicates whose S gets no inner mass are dropped.
    """
    target = target.upper()
    if target not in ("X", "S", "XS"):
        raise ValueError(f"target must be X, S or XS, got {target!r}")
    theta = family.check_theta(theta)
    h = h or default_step(theta)
    pool = _InnerPool(family, kind, theta, n, n_reps, stream(seed, 2**31 - 1)) if target == "S" else None

    scores = []
    for r in range(n_reps):
        x = family.draw(theta, n, stream(seed, r))
        if target == "X":
            f = lambda t, x=x: family.loglik(t, x)  # noqa: E731
        else:
            X = Sample(family._to_native(x))
            d = fit(kind, X)
            S = d.sample(m, int(stream(seed, r, 1).integers(2**63)))
            if target == "XS":
                const = float(np.sum(d.log_density_many(S.units())))
                if const == LOG_ZERO:
                    raise FitError("synthetic draw has zero conditional density")
                f = lambda t, x=x, c=const: family.loglik(t, x) + c  # noqa: E731
            else:
                lc = pool.log_c(S)
                if not np.any(np.isfinite(lc)):
                    continue
                f = pool.log_marginal(lc)
        scores.append(richardson_derivative(f, theta, h))
    return np.asarray(scores, dtype=float)


def mc_fisher_marginal(
    target: Literal["X", "S", "XS"],
    family: ParamFamily,
    kind,
    theta: float,
    n: int,
    m: int,
    n_reps: int,
    seed: int,
    h: float | None = None,
) -> InfoEstimate:
    """Monte Carlo Fisher information of X, S or (X, S) as a score variance.

    ``std_error`` is the standard error of the variance estimate; a sample of
    identical scores gives value 0 with std_error 0.
    """
    if n_reps < 100:
        raise ValueError("n_reps must be >= 100")
    scores = mc_scores(target, family, kind, theta, n, m, n_reps, seed, h)
    if len(scores) < 2:
        raise FitError("fewer than two usable replicates")
    value, se = _variance_estimate(scores)
    return InfoEstimate(value, "monte_carlo", se, len(scores))


def conditional_score_probe(d: SynthDist, s, theta_grid: Sequence[float]) -> list[float]:
    """d/dtheta log q(s | X) at each grid point.

    The conditional term is assembled through the same path as the joint
    log-likelihood; it receives theta and must ignore it.
    """
    units = [s]

    def term(t):
        return _conditional_term(d, units, t)

    out = []
    for t in theta_grid:
        if not math.isfinite(term(t)):
            out.append(0.0)
            continue
        out.append(float(richardson_derivative(term, float(t), default_step(float(t)))))
    return out


def _conditional_term(d: SynthDist, units, theta) -> float:
    # theta is accepted so callers can treat this like any other likelihood block
    vals = d.log_density_many(units)
    if np.any(vals == LOG_ZERO):
        return LOG_ZERO
    return math.fsum(vals.tolist())


def distinct_count(S: Sample) -> int:
    return len(set(S.units()))
