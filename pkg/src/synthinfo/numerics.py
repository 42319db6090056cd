"""Small numerical kernels: finite differences, golden-section search,
the regularized incomplete beta function and seeded RNG streams."""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

LOG_ZERO = -math.inf
"""Log-density sentinel for zero probability. Not an error."""

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def default_step(theta: float) -> float:
    return max(1e-5, 1e-5 * abs(theta))


def central_difference(f: Callable, x: float, h: float):
    return (f(x + h) - f(x - h)) / (2.0 * h)


def richardson_derivative(f: Callable, x: float, h: float):
    """First derivative from central differences at h and h/2 combined by
    one Richardson step, error O(h^4).

    ``f`` may return a scalar or an ndarray; the result has the same shape.
    """
    d1 = central_difference(f, x, h)
    d2 = central_difference(f, x, h / 2.0)
    return (4.0 * d2 - d1) / 3.0


def second_difference(f: Callable, x: float, h: float):
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)


def richardson_second_derivative(f: Callable, x: float, h: float):
    d1 = second_difference(f, x, h)
    d2 = second_difference(f, x, h / 2.0)
    return (4.0 * d2 - d1) / 3.0


def golden_section_max(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-10,
    max_iter: int = 500,
) -> float:
    """Maximise a unimodal scalar function on [lo, hi] to absolute tolerance ``tol``."""
    a, b = float(lo), float(hi)
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = f(x2)
    return 0.5 * (a + b)


def logsumexp(a: np.ndarray, axis=None) -> np.ndarray:
    """log(sum(exp(a))) with -inf handled as zero mass."""
    a = np.asarray(a, dtype=float)
    amax = np.max(a, axis=axis, keepdims=True)
    amax = np.where(np.isfinite(amax), amax, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - amax), axis=axis, keepdims=True)) + amax
    if axis is None:
        return out.reshape(())[()]
    return np.squeeze(out, axis=axis)


def _betacf(a: float, b: float, x: float, eps: float = 1e-16, max_iter: int = 10_000) -> float:
    # modified Lentz evaluation of the incomplete-beta continued fraction
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("betainc requires a > 0 and b > 0")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for (seed, *keys); the same keys give the same stream."""
    if seed is None:
        raise ValueError("an explicit seed is required")
    return np.random.default_rng([int(seed), *[int(k) for k in keys]])


def as_float_array(values: Sequence) -> np.ndarray:
    return np.asarray(values, dtype=float)
