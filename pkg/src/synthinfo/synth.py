"""Synthetic distributions: maps from an observed sample to a distribution
over a target sample space, plus the concrete generators.

A generator *kind* is a small frozen description (``NonparametricBootstrap()``,
``SymmetryAugment(...)`` ...). ``fit(kind, X)`` returns a :class:`SynthDist`
whose conditional density depends only on ``X``; none of its methods accept
a model parameter.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Hashable, Optional, Sequence

import numpy as np

from .errors import FitError, SchemaError, UnsupportedOperation
from .families import ParamFamily, get_family
from .numerics import LOG_ZERO, stream
from .sample import Sample


def canonical_order(points) -> list:
    """Deterministic ordering for support points of mixed/hashable types."""
    pts = list(points)
    try:
        return sorted(pts)
    except TypeError:
        return sorted(pts, key=repr)


# -- generator kinds --------------------------------------------------------


@dataclass(frozen=True)
class NonparametricBootstrap:
    name = "bootstrap"


@dataclass(frozen=True)
class ParametricBootstrap:
    family: ParamFamily
    name = "param_bootstrap"


@dataclass(frozen=True)
class ClassReweight:
    """Pick an observed class uniformly, then bootstrap within that class."""

    name = "class_reweight"


@dataclass(frozen=True)
class SymmetryAugment:
    """Bootstrap followed by a uniformly chosen iterate r^k, k = 1..period.

    The action r is a permutation of ``points``: ``r(points[i]) = points[perm[i]]``.
    """

    points: tuple
    perm: tuple
    period: int
    name = "symmetry"

    def __post_init__(self):
        pts = tuple(self.points)
        perm = tuple(int(j) for j in self.perm)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "perm", perm)
        if len(set(pts)) != len(pts):
            raise SchemaError("symmetry action points must be distinct")
        if sorted(perm) != list(range(len(pts))):
            raise SchemaError("symmetry action is not a permutation of its points")
        if self.period < 1:
            raise SchemaError("period must be >= 1")
        idx = list(range(len(pts)))
        for _ in range(self.period):
            idx = [perm[i] for i in idx]
        if idx != list(range(len(pts))):
            raise SchemaError(f"action does not satisfy r^{self.period} = identity")

    @cached_property
    def index(self) -> dict:
        return {p: i for i, p in enumerate(self.points)}

    def act(self, x: Hashable, k: int = 1) -> Hashable:
        i = self.index[x]
        for _ in range(k % self.period):
            i = self.perm[i]
        return self.points[i]


@dataclass(frozen=True)
class FixedDistribution:
    """Ignores the data: always the family at a fixed parameter."""

    family: ParamFamily
    theta: float
    name = "fixed"

    def __post_init__(self):
        self.family.check_theta(self.theta)


@dataclass(frozen=True)
class PosteriorPredictive:
    prior: Any  # bayes.ConjugateModel
    name = "posterior_predictive"


GeneratorKind = (
    NonparametricBootstrap | ParametricBootstrap | ClassReweight
    | SymmetryAugment | FixedDistribution | PosteriorPredictive
)


# -- symmetry action helpers ------------------------------------------------


def grid_rotation_action(size: int) -> SymmetryAugment:
    """90-degree rotation acting on every binary ``size`` x ``size`` image.

    Images are row-major tuples of 0/1; the period is 4.
    """
    from itertools import product

    points = tuple(product((0, 1), repeat=size * size))
    index = {p: i for i, p in enumerate(points)}
    perm = []
    for p in points:
        img = np.asarray(p).reshape(size, size)
        perm.append(index[tuple(int(v) for v in np.rot90(img, -1).ravel())])
    return SymmetryAugment(points, tuple(perm), 4)


def load_permutation_csv(path, period: int) -> SymmetryAugment:
    """Read a ``from_index,to_index`` CSV; the points are the integer indices."""
    pairs = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["from_index", "to_index"]:
            raise SchemaError(f"{path}: expected header 'from_index,to_index'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                a, b = (int(v) for v in row)
            except ValueError:
                raise SchemaError(f"{path}:{lineno}: expected two integers, got {row!r}") from None
            if a in pairs:
                raise SchemaError(f"{path}:{lineno}: duplicate from_index {a}")
            pairs[a] = b
    points = tuple(sorted(pairs))
    index = {p: i for i, p in enumerate(points)}
    try:
        perm = tuple(index[pairs[p]] for p in points)
    except KeyError as exc:
        raise SchemaError(f"{path}: to_index {exc.args[0]} has no from_index row") from None
    return SymmetryAugment(points, perm, period)


# -- fitted distributions -----------------------------------------------------


class SynthDist:
    """A fitted synthetic distribution ``S(X)``."""

    kind: Any
    fitted_on: Sample
    labelled: bool = False

    def log_density(self, s) -> float:
        raise NotImplementedError

    def log_density_many(self, units: Sequence) -> np.ndarray:
        return np.array([self.log_density(u) for u in units], dtype=float)

    def support(self) -> list[tuple[Any, float]]:
        raise UnsupportedOperation(f"{type(self).__name__} has infinite support")

    @property
    def is_finite(self) -> bool:
        return False

    def draw_units(self, m: int, rng: np.random.Generator) -> list:
        raise NotImplementedError

    def sample(self, m: int, seed: int) -> Sample:
        if m < 0:
            raise ValueError("m must be >= 0")
        return Sample.from_units(self.draw_units(int(m), stream(seed)), self.labelled)


@dataclass(eq=False)
class TableSynthDist(SynthDist):
    """Finite-support synthetic distribution stored as a probability table."""

    kind: Any
    points: tuple
    probs: tuple
    fitted_on: Sample = field(repr=False)
    labelled: bool = False
    logprobs: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        if self.logprobs is None:
            self.logprobs = tuple(math.log(q) if q > 0 else LOG_ZERO for q in self.probs)
        self._logp = dict(zip(self.points, self.logprobs))
        self._cum = np.cumsum(np.asarray(self.probs, dtype=float))

    def __eq__(self, other):
        if not isinstance(other, TableSynthDist):
            return NotImplemented
        return (self.kind, self.points, self.probs, self.labelled) == (
            other.kind, other.points, other.probs, other.labelled)

    def log_density(self, s) -> float:
        try:
            return self._logp.get(s, LOG_ZERO)
        except TypeError:  # unhashable probe
            return LOG_ZERO

    def support(self):
        return list(zip(self.points, self.probs))

    @property
    def is_finite(self) -> bool:
        return True

    def draw_units(self, m, rng):
        if m == 0:
            return []
        u = rng.random(m) * self._cum[-1]
        idx = np.searchsorted(self._cum, u, side="right")
        idx = np.minimum(idx, len(self.points) - 1)
        return [self.points[i] for i in idx]


class _Frozen:
    """A distribution with fixed parameters, used by parametric generators."""

    def logpdf(self, x) -> float: ...
    def in_support(self, x) -> bool: ...
    def draw(self, m, rng) -> list: ...
    def finite_support(self) -> Optional[tuple]: ...


@dataclass(frozen=True)
class FrozenFamily(_Frozen):
    family: ParamFamily
    theta: float

    def in_support(self, x):
        return self.family.in_support(x)

    def logpdf(self, x):
        return float(self.family._logpdf(self.theta, np.asarray(float(x))))

    def logpdf_many(self, xs):
        return self.family._logpdf(self.theta, np.asarray(xs, dtype=float))

    def draw(self, m, rng):
        return list(self.family._to_native(self.family._draw(self.theta, m, rng)))

    def finite_support(self):
        return self.family.finite_support()


@dataclass(frozen=True)
class FrozenNormal(_Frozen):
    mean: float
    sd: float

    def in_support(self, x):
        try:
            return math.isfinite(float(x))
        except (TypeError, ValueError):
            return False

    def logpdf(self, x):
        z = (float(x) - self.mean) / self.sd
        return -0.5 * math.log(2 * math.pi) - math.log(self.sd) - 0.5 * z * z

    def logpdf_many(self, xs):
        z = (np.asarray(xs, dtype=float) - self.mean) / self.sd
        return -0.5 * math.log(2 * math.pi) - math.log(self.sd) - 0.5 * z * z

    def draw(self, m, rng):
        return [float(v) for v in rng.normal(self.mean, self.sd, size=m)]

    def finite_support(self):
        return None


@dataclass(eq=False)
class ParametricSynthDist(SynthDist):
    kind: Any
    dist: _Frozen
    fitted_on: Sample = field(repr=False)
    labelled: bool = False

    def __eq__(self, other):
        if not isinstance(other, ParametricSynthDist):
            return NotImplemented
        return (self.kind, self.dist) == (other.kind, other.dist)

    def log_density(self, s) -> float:
        if not self.dist.in_support(s):
            return LOG_ZERO
        return self.dist.logpdf(s)

    def log_density_many(self, units):
        units = list(units)
        if all(self.dist.in_support(u) for u in units):
            return np.asarray(self.dist.logpdf_many(units), dtype=float)
        return super().log_density_many(units)

    @property
    def is_finite(self) -> bool:
        return self.dist.finite_support() is not None

    def support(self):
        pts = self.dist.finite_support()
        if pts is None:
            raise UnsupportedOperation(f"{self.kind.name} synthetic distribution has infinite support")
        return [(p, math.exp(self.dist.logpdf(p))) for p in pts]

    def draw_units(self, m, rng):
        return self.dist.draw(m, rng)


# -- fitting ------------------------------------------------------------------


def _bootstrap_table(units: Sequence) -> tuple[tuple, tuple, tuple]:
    n = len(units)
    counts = Counter(units)
    points = tuple(canonical_order(counts))
    # log(count) - log(n) keeps a singleton at exactly -log(n)
    logn = math.log(n)
    return (
        points,
        tuple(counts[p] / n for p in points),
        tuple(math.log(counts[p]) - logn for p in points),
    )


def fit(kind, X: Sample) -> SynthDist:
    """Fit a generator kind to an observed sample."""
    if isinstance(kind, FixedDistribution):
        return ParametricSynthDist(kind, FrozenFamily(kind.family, float(kind.theta)), X)
    if len(X) == 0:
        raise FitError(f"{kind.name}: cannot fit on an empty sample")

    if isinstance(kind, NonparametricBootstrap):
        points, probs, logprobs = _bootstrap_table(X.units())
        return TableSynthDist(kind, points, probs, X, X.labelled, logprobs)

    if isinstance(kind, ClassReweight):
        if not X.labelled:
            raise SchemaError("class_reweight requires a labelled sample")
        by_class: dict = {}
        for c, y in X.units():
            by_class.setdefault(c, []).append(y)
        n_classes = len(by_class)
        mass: dict = {}
        for c, ys in by_class.items():
            for y, cnt in Counter(ys).items():
                mass[(c, y)] = cnt / len(ys) / n_classes
        points = tuple(canonical_order(mass))
        return TableSynthDist(kind, points, tuple(mass[p] for p in points), X, True)

    if isinstance(kind, SymmetryAugment):
        index = kind.index
        units = X.units()
        obs = [u[1] for u in units] if X.labelled else list(units)
        missing = [x for x in obs if x not in index]
        if missing:
            raise SchemaError(f"observations {missing[:3]!r} are not points of the symmetry action")
        boot_points, boot_probs, _ = _bootstrap_table(units)
        mass: dict = {}
        for u, p in zip(boot_points, boot_probs):
            for k in range(1, kind.period + 1):
                if X.labelled:
                    img = (u[0], kind.act(u[1], k))
                else:
                    img = kind.act(u, k)
                mass[img] = mass.get(img, 0.0) + p / kind.period
        points = tuple(canonical_order(mass))
        return TableSynthDist(kind, points, tuple(mass[p] for p in points), X, X.labelled)

    if isinstance(kind, ParametricBootstrap):
        fam = kind.family
        values = fam.check_values(X.observations)
        theta_hat = fam.plugin_estimate(values)
        if not math.isfinite(theta_hat):
            raise FitError(f"param_bootstrap: plug-in estimate {theta_hat} is not finite")
        return ParametricSynthDist(kind, FrozenFamily(fam, theta_hat), X)

    if isinstance(kind, PosteriorPredictive):
        from .bayes import update

        post = update(kind.prior, X)
        return ParametricSynthDist(kind, post.predictive(), X)

    raise UnsupportedOperation(f"unknown generator kind {kind!r}")


def synth_sample(d: SynthDist, m: int, seed: int) -> Sample:
    return d.sample(m, seed)


def conditional_log_density(d: SynthDist, s) -> float:
    """log q(s | X); -inf (``LOG_ZERO``) off the support."""
    return d.log_density(s)


def enumerate_support(d: SynthDist) -> list[tuple[Any, float]]:
    return d.support()


def sample_log_density(d: SynthDist, S: Sample) -> float:
    """log c_X(S) = sum_i log q(S_i | X), summed with ``math.fsum``."""
    vals = d.log_density_many(S.units())
    if np.any(vals == LOG_ZERO):
        return LOG_ZERO
    return math.fsum(vals.tolist())


def make_kind(
    name: str,
    family: Optional[str | ParamFamily] = None,
    theta: Optional[float] = None,
    prior: Any = None,
    action: Optional[SymmetryAugment] = None,
):
    """Build a generator kind from its configuration name."""
    fam = get_family(family) if isinstance(family, str) else family
    if name == "bootstrap":
        return NonparametricBootstrap()
    if name == "class_reweight":
        return ClassReweight()
    if name == "param_bootstrap":
        if fam is None:
            raise SchemaError("param_bootstrap needs a family")
        return ParametricBootstrap(fam)
    if name == "fixed":
        if fam is None or theta is None:
            raise SchemaError("fixed needs a family and a theta")
        return FixedDistribution(fam, float(theta))
    if name == "symmetry":
        if action is None:
            raise SchemaError("symmetry needs an action (permutation file or grid size)")
        return action
    if name == "posterior_predictive":
        if prior is None:
            from .bayes import BetaBernoulli

            prior = BetaBernoulli(1.0, 1.0)
        return PosteriorPredictive(prior)
    raise SchemaError(f"unknown generator kind {name!r}")


KIND_NAMES = ("bootstrap", "param_bootstrap", "class_reweight", "symmetry", "fixed", "posterior_predictive")
