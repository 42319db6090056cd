"""Coin flips where every second head is dropped before the analyst sees them.

The analyst knows the number of flips n and observes h_obs heads and
t_obs tails. With censoring active the latent head count h is one of
{2*h_obs - 1, 2*h_obs} (intersected with [0, n - t_obs]) and the
likelihood sums the binomial terms of those candidates.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DataError
from ..mle import MleFit, fit_scalar_mle
from ..numerics import logsumexp
from ..sample import Sample


def censor_array(seq: np.ndarray) -> np.ndarray:
    seq = np.asarray(seq)
    ones_seen = np.cumsum(seq == 1)
    keep = (seq != 1) | (ones_seen % 2 == 1)
    return seq[keep]


def censor_every_second_h(seq: Sample) -> Sample:
    """Drop the 2nd, 4th, ... occurrence of 1; zeros pass through."""
    out, ones = [], 0
    for x in seq.observations:
        if x == 1:
            ones += 1
            if ones % 2 == 0:
                continue
        elif x != 0:
            raise DataError(f"censoring expects a binary sequence, got {x!r}")
        out.append(x)
    return Sample(tuple(out))


def consistent_heads(n: int, h_obs: int, t_obs: int, censoring: bool = True) -> list[int]:
    if min(n, h_obs, t_obs) < 0 or t_obs > n:
        raise DataError(f"infeasible counts n={n}, h_obs={h_obs}, t_obs={t_obs}")
    if not censoring:
        if h_obs + t_obs != n:
            raise DataError(f"uncensored counts must sum to n: {h_obs} + {t_obs} != {n}")
        return [h_obs]
    cands = [h for h in (2 * h_obs - 1, 2 * h_obs) if 0 <= h <= n - t_obs]
    if n - t_obs not in cands:
        raise DataError(
            f"infeasible counts: n - t_obs = {n - t_obs} heads cannot leave h_obs = {h_obs} after censoring"
        )
    return cands


def _log_binom(n: int, h: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(h + 1) - math.lgamma(n - h + 1)


def censored_loglik(n: int, h_obs: int, t_obs: int, theta: float, censoring: bool = True) -> float:
    """log sum_h C(n,h) theta^h (1-theta)^(n-h) over the consistent latent h."""
    hs = consistent_heads(n, h_obs, t_obs, censoring)
    lt, l1t = math.log(theta), math.log1p(-theta)
    terms = [_log_binom(n, h) + (h * lt if h else 0.0) + ((n - h) * l1t if n - h else 0.0) for h in hs]
    if len(terms) == 1:
        return terms[0]
    return float(logsumexp(np.asarray(terms)))


def censored_loglik_grid(n: int, h_obs: int, t_obs: int, grid: np.ndarray, censoring: bool = True) -> np.ndarray:
    hs = consistent_heads(n, h_obs, t_obs, censoring)
    lt, l1t = np.log(grid), np.log1p(-grid)
    terms = np.stack([_log_binom(n, h) + h * lt + (n - h) * l1t for h in hs])
    return logsumexp(terms, axis=0)


def censored_mle(n: int, h_obs: int, t_obs: int, censoring: bool = True) -> MleFit:
    return fit_scalar_mle(
        lambda t: censored_loglik(n, h_obs, t_obs, t, censoring), 0.0, 1.0, data_size=h_obs + t_obs
    )


def grid_argmax(n: int, h_obs: int, t_obs: int, points: int = 10**6, censoring: bool = True) -> float:
    """Brute-force argmax over a midpoint grid of (0, 1)."""
    grid = (np.arange(points) + 0.5) / points
    return float(grid[np.argmax(censored_loglik_grid(n, h_obs, t_obs, grid, censoring))])


def augment_pairs(h_obs: int) -> int:
    """Heads after re-inserting one head per observed pair of heads."""
    return h_obs + h_obs // 2
