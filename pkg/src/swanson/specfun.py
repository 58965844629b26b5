"""Kummer's confluent hypergeometric function 1F1(a; b; y) for real arguments."""
from __future__ import annotations

import math

import numpy as np

from .errors import InvalidRegime, SeriesNonConvergence

MAX_TERMS = 100_000
_EPS = 1e-16


def hyp1f1(a: float, b: float, y):
    """Taylor series of 1F1(a; b; y), summed with Neumaier compensation.

    Terms follow t_{n+1} = t_n (a+n) y / ((b+n)(n+1)).  The sum stops once a
    term past the peak is below 1e-16 of the partial sum (or of the largest
    term, when the partial sum has cancelled), or exactly when a is a
    non-positive integer and the series terminates.  ``y`` may be an array.
    Negative arguments of non-terminating series go through Kummer's
    transformation 1F1(a; b; y) = e^y 1F1(b - a; b; -y), avoiding the
    cancellation of an alternating sum.
    """
    if b <= 0 and b == int(b):
        raise ValueError(f"b = {b} is a non-positive integer")
    scalar = np.ndim(y) == 0
    y = np.atleast_1d(np.asarray(y, dtype=float))
    negative = y < 0.0
    if np.any(negative) and not (a <= 0 and a == int(a)):
        out = np.empty_like(y)
        out[~negative] = _series(a, b, y[~negative])
        out[negative] = np.exp(y[negative]) * _series(b - a, b, -y[negative])
        return float(out[0]) if scalar else out
    out = _series(a, b, y)
    return float(out[0]) if scalar else out


def _series(a: float, b: float, y: np.ndarray) -> np.ndarray:
    term = np.ones_like(y)
    total = np.ones_like(y)
    comp = np.zeros_like(y)
    biggest = np.ones_like(y)
    active = np.ones(y.shape, dtype=bool)
    n = 0
    while np.any(active):
        if n >= MAX_TERMS:
            raise SeriesNonConvergence(f"1F1({a}, {b}, y) not converged after {MAX_TERMS} terms")
        factor = (a + n) / ((b + n) * (n + 1.0))
        term = term * factor * y
        t = np.where(active, term, 0.0)
        s = total + t
        comp += np.where(np.abs(total) >= np.abs(t), (total - s) + t, (t - s) + total)
        total = s
        np.maximum(biggest, np.abs(term), out=biggest)
        n += 1
        past_peak = np.abs(factor * y) < 1.0
        small = np.abs(term) <= _EPS * np.maximum(np.abs(total), _EPS * biggest)
        active &= ~((term == 0.0) | (past_peak & small))
    return total + comp


def hyp1f1_zero_guess(m: int, a: float, b: float) -> float:
    """First approximation of the m-th positive zero of 1F1(a; b; y).

    pi^2 (m + b/2 - 3/4)^2 / (2b - 4a), valid for large b/2 - a.  The value
    is advisory: 1F1(0; b; y) = 1 has no zero, yet the formula still returns
    a number.
    """
    if m < 1 or int(m) != m:
        raise ValueError(f"zero index must be a positive integer, got {m}")
    denom = 2.0 * b - 4.0 * a
    if denom <= 0.0:
        raise InvalidRegime(f"2b - 4a = {denom:.6g} <= 0; no asymptotic zero estimate")
    return math.pi**2 * (m + 0.5 * b - 0.75) ** 2 / denom


def hermite(n: int, t):
    """Physicists' Hermite polynomial by the three-term recurrence."""
    t = np.asarray(t, dtype=float)
    h_prev, h = np.ones_like(t), 2.0 * t
    if n == 0:
        return h_prev
    for k in range(1, n):
        h_prev, h = h, 2.0 * t * h - 2.0 * k * h_prev
    return h


def hermite_correspondence(m: int, t: float) -> tuple[float, float]:
    """(1F1(-m; 1/2; t^2), (-1)^m m!/(2m)! H_2m(t)); the two agree identically."""
    series = hyp1f1(-m, 0.5, t * t)
    scale = (-1) ** m * math.factorial(m) / math.factorial(2 * m)
    return series, float(scale * hermite(2 * m, t))
