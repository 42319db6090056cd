"""Scalar-parameter distribution families.

Each family exposes a log-density, its first and second derivatives in the
parameter, a seeded sampler and the per-observation Fisher information.
Parameter domains are open intervals: boundary values are rejected by the
public methods. The underscore methods are unchecked and are also used at
closed-boundary plug-in values (e.g. a parametric bootstrap fitted on an
all-zero Bernoulli sample).
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from typing import Optional

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, ParameterError
from .numerics import stream
from .sample import Sample

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class ParamFamily(ABC):
    name: str
    domain: tuple[float, float]
    support_kind: str  # "finite" | "countable" | "real"

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"

    def __eq__(self, other) -> bool:
        return type(self) is type(other)

    def __hash__(self) -> int:
        return hash(type(self).__name__)

    # -- validation ---------------------------------------------------------

    def check_theta(self, theta: float) -> float:
        lo, hi = self.domain
        t = float(theta)
        if not (lo < t < hi):
            raise ParameterError(f"{self.name}: theta={theta!r} outside open domain ({lo}, {hi})")
        return t

    @abstractmethod
    def in_support(self, x) -> bool: ...

    def check_x(self, x):
        if not self.in_support(x):
            raise DomainError(f"{self.name}: observation {x!r} outside support")
        return x

    def check_values(self, values) -> np.ndarray:
        arr = np.asarray(values, dtype=float)
        bad = [v for v in np.unique(arr) if not self.in_support(v)]
        if bad:
            raise DomainError(f"{self.name}: observations {bad[:5]!r} outside support")
        return arr

    def finite_support(self) -> Optional[tuple]:
        """Sorted support points for finite families, otherwise None."""
        return None

    # -- unchecked vectorised kernels --------------------------------------

    @abstractmethod
    def _logpdf(self, theta: float, x: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def _score(self, theta: float, x: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def _hessian(self, theta: float, x: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def _unit_fisher(self, theta: float) -> float: ...

    @abstractmethod
    def _draw(self, theta: float, n: int, rng: np.random.Generator) -> np.ndarray: ...

    @abstractmethod
    def plugin_estimate(self, values: np.ndarray) -> float:
        """Closed-form MLE; may land on the closed boundary of the domain."""

    def _to_native(self, arr: np.ndarray) -> tuple:
        return tuple(float(v) for v in arr)

    # -- public API -------------------------------------------------------

    def log_density(self, theta: float, x) -> float:
        t = self.check_theta(theta)
        self.check_x(x)
        return float(self._logpdf(t, np.asarray(float(x))))

    def score(self, theta: float, x) -> float:
        t = self.check_theta(theta)
        self.check_x(x)
        return float(self._score(t, np.asarray(float(x))))

    def hessian(self, theta: float, x) -> float:
        t = self.check_theta(theta)
        self.check_x(x)
        return float(self._hessian(t, np.asarray(float(x))))

    def unit_fisher(self, theta: float) -> float:
        return self._unit_fisher(self.check_theta(theta))

    def loglik(self, theta: float, values) -> float:
        """Sum of log-densities over a 1-D array of observations (unchecked support)."""
        return float(np.sum(self._logpdf(theta, np.asarray(values, dtype=float))))

    def loglik_rows(self, theta: float, matrix: np.ndarray) -> np.ndarray:
        return np.sum(self._logpdf(theta, np.asarray(matrix, dtype=float)), axis=-1)

    def draw(self, theta: float, n: int, rng: np.random.Generator) -> np.ndarray:
        return self._draw(self.check_theta(theta), int(n), rng)

    def sample(self, theta: float, n: int, seed: int) -> Sample:
        if n < 0:
            raise ValueError("n must be >= 0")
        t = self.check_theta(theta)
        return Sample(self._to_native(self._draw(t, int(n), stream(seed))))


class Bernoulli(ParamFamily):
    name = "bernoulli"
    domain = (0.0, 1.0)
    support_kind = "finite"

    def in_support(self, x) -> bool:
        return x in (0, 1)

    def finite_support(self):
        return (0, 1)

    def _logpdf(self, theta, x):
        with np.errstate(divide="ignore"):
            return np.where(x == 1, np.log(theta), np.log1p(-theta))

    def _score(self, theta, x):
        return x / theta - (1.0 - x) / (1.0 - theta)

    def _hessian(self, theta, x):
        return -x / theta**2 - (1.0 - x) / (1.0 - theta) ** 2

    def _unit_fisher(self, theta):
        return 1.0 / (theta * (1.0 - theta))

    def _draw(self, theta, n, rng):
        return (rng.random(n) < theta).astype(np.int64)

    def plugin_estimate(self, values):
        return float(np.mean(values))

    def _to_native(self, arr):
        return tuple(int(v) for v in arr)


class NormalMean(ParamFamily):
    """Normal(mu, 1) with unknown mean."""

    name = "normal_mu"
    domain = (-math.inf, math.inf)
    support_kind = "real"

    def in_support(self, x) -> bool:
        try:
            return math.isfinite(float(x))
        except (TypeError, ValueError):
            return False

    def _logpdf(self, theta, x):
        return -LOG_SQRT_2PI - 0.5 * (x - theta) ** 2

    def _score(self, theta, x):
        return x - theta

    def _hessian(self, theta, x):
        return -np.ones_like(x, dtype=float)

    def _unit_fisher(self, theta):
        return 1.0

    def _draw(self, theta, n, rng):
        return rng.normal(theta, 1.0, size=n)

    def plugin_estimate(self, values):
        return float(np.mean(values))


class Poisson(ParamFamily):
    name = "poisson"
    domain = (0.0, math.inf)
    support_kind = "countable"

    def in_support(self, x) -> bool:
        try:
            v = float(x)
        except (TypeError, ValueError):
            return False
        return math.isfinite(v) and v >= 0 and v == math.floor(v)

    def _logpdf(self, theta, x):
        with np.errstate(divide="ignore", invalid="ignore"):
            lt = np.where(x == 0, 0.0, x * np.log(theta))
        return lt - theta - gammaln(x + 1.0)

    def _score(self, theta, x):
        return x / theta - 1.0

    def _hessian(self, theta, x):
        return -x / theta**2

    def _unit_fisher(self, theta):
        return 1.0 / theta

    def _draw(self, theta, n, rng):
        return rng.poisson(theta, size=n)

    def plugin_estimate(self, values):
        return float(np.mean(values))

    def _to_native(self, arr):
        return tuple(int(v) for v in arr)


class Exponential(ParamFamily):
    """Exponential with rate lambda."""

    name = "exponential"
    domain = (0.0, math.inf)
    support_kind = "real"

    def in_support(self, x) -> bool:
        try:
            v = float(x)
        except (TypeError, ValueError):
            return False
        return math.isfinite(v) and v >= 0

    def _logpdf(self, theta, x):
        with np.errstate(divide="ignore"):
            return np.log(theta) - theta * x

    def _score(self, theta, x):
        return 1.0 / theta - x

    def _hessian(self, theta, x):
        return np.full_like(np.asarray(x, dtype=float), -1.0 / theta**2)

    def _unit_fisher(self, theta):
        return 1.0 / theta**2

    def _draw(self, theta, n, rng):
        return rng.exponential(1.0 / theta, size=n)

    def plugin_estimate(self, values):
        m = float(np.mean(values))
        return math.inf if m == 0 else 1.0 / m


FAMILIES: dict[str, ParamFamily] = {
    f.name: f for f in (Bernoulli(), NormalMean(), Poisson(), Exponential())
}


def get_family(name: str) -> ParamFamily:
    try:
        return FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}") from None


def _resolve(family) -> ParamFamily:
    return get_family(family) if isinstance(family, str) else family


def log_density(family: ParamFamily | str, theta: float, x) -> float:
    return _resolve(family).log_density(theta, x)


def score(family: ParamFamily | str, theta: float, x) -> float:
    return _resolve(family).score(theta, x)


def analytic_unit_fisher(family: ParamFamily | str, theta: float) -> float:
    return _resolve(family).unit_fisher(theta)


def sample(family: ParamFamily | str, theta: float, n: int, seed: int) -> Sample:
    return _resolve(family).sample(theta, n, seed)
