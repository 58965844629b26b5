"""Swanson parameters, the effective frequency and the ladder coefficient B(x).

The generalized ladder operators are ``a = A d/dx + B`` and
``a+ = -A d/dx + B - A'``; their commutator is ``2AB' - AA''``.  Holding the
commutator at a constant ``k`` fixes ``B`` up to an integration constant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Mapping

import numpy as np

from .errors import ComplexFrequency, ConfigError
from .expr import BinOp, Expression, Num, eval_jet

if TYPE_CHECKING:
    from .mapping import CoordinateMap

NORMALIZATION_TOL = 1e-12


def omega_tilde(p: "SwansonParams") -> float:
    """Effective oscillator frequency sqrt(1 + 2(a+b) + (a-b)^2) / 2."""
    radicand = 1.0 + 2.0 * (p.alpha + p.beta) + (p.alpha - p.beta) ** 2
    if radicand <= 0.0:
        raise ComplexFrequency(
            f"1 + 2(alpha+beta) + (alpha-beta)^2 = {radicand:.6g} <= 0; frequency is not real"
        )
    return math.sqrt(radicand) / 2.0


@dataclass(frozen=True)
class SwansonParams:
    """Couplings of ``w (a+a + 1/2) + alpha a^2 + beta a+^2`` with ``[a, a+] = k``."""

    w: float
    alpha: float
    beta: float
    k: float = 1.0

    def __post_init__(self):
        if self.k <= 0.0:
            raise ConfigError(f"commutator constant k must be positive, got {self.k}")
        gap = self.w - self.alpha - self.beta - 1.0 / self.k
        if abs(gap) > NORMALIZATION_TOL:
            raise ConfigError(
                f"w - alpha - beta must equal 1/k = {1.0 / self.k:.12g}; off by {gap:.3g}"
            )
        omega_tilde(self)

    @classmethod
    def from_couplings(cls, alpha: float, beta: float, k: float = 1.0) -> "SwansonParams":
        """Derive ``w`` from the normalization ``w - alpha - beta = 1/k``."""
        return cls(w=alpha + beta + 1.0 / k, alpha=alpha, beta=beta, k=k)

    @property
    def wtilde(self) -> float:
        return omega_tilde(self)

    def unit(self) -> tuple["SwansonParams", float]:
        """Equivalent unit-commutator couplings and the additive energy shift.

        With ``a = sqrt(k) b`` and ``[b, b+] = 1`` the Hamiltonian becomes the
        one with couplings ``(k w, k alpha, k beta)`` plus ``w (1 - k) / 2``.
        """
        if self.k == 1.0:
            return self, 0.0
        k = self.k
        return (
            SwansonParams(k * self.w, k * self.alpha, k * self.beta, 1.0),
            0.5 * self.w * (1.0 - k),
        )

    def as_dict(self) -> dict:
        return {"w": self.w, "alpha": self.alpha, "beta": self.beta, "k": self.k,
                "wtilde": self.wtilde}


def unit_coefficient(A: Expression, k: float) -> Expression:
    """``A / sqrt(k)``: the coefficient of the rescaled unit-commutator operator."""
    if k == 1.0:
        return A
    return BinOp("/", A, Num(math.sqrt(k)))


def derive_b(A: Expression, cmap: "CoordinateMap", x, params: Mapping[str, float] | None = None,
             k: float = 1.0, const: float = 0.0, sign: float = 1.0):
    """B(x) = k (z(x) + const) / 2 + sign * A'(x) / 2.

    ``sign=+1`` solves ``2AB' - AA'' = k`` exactly.  ``sign=-1`` is the variant
    obtained by reading ``z''/(2 z'^2)`` with primes as x-derivatives; it is
    kept only to document that it breaks the commutator.
    """
    a = eval_jet(A, x, params)
    return 0.5 * k * (cmap.z(x) + const) + 0.5 * sign * a.d1


@dataclass(frozen=True)
class LadderSpec:
    """Coefficients of the generalized ladder operators.

    ``B`` may be given explicitly; when it is None it is derived from the
    coordinate map so that the commutator equals ``params.k``.
    """

    A: Expression
    params: SwansonParams
    B: Expression | None = None
    cmap: "CoordinateMap | None" = None
    constants: Mapping[str, float] = field(default_factory=dict)
    b_const: float = 0.0
    b_sign: float = 1.0

    def __post_init__(self):
        if self.B is None and self.cmap is None:
            raise ConfigError("derived B needs a coordinate map")

    def a_jet(self, x):
        return eval_jet(self.A, x, self.constants)

    def b_values(self, x):
        """B and B' at ``x``."""
        if self.B is not None:
            b = eval_jet(self.B, x, self.constants)
            return b.value, b.d1
        a = self.a_jet(x)
        k = self.params.k
        value = 0.5 * k * (self.cmap.z(x) + self.b_const) + 0.5 * self.b_sign * a.d1
        # z' = 1/A holds exactly by construction of the map
        slope = 0.5 * k / a.value + 0.5 * self.b_sign * a.d2
        return value, slope


def commutator(spec: LadderSpec, x):
    """2AB' - AA'' at ``x``."""
    a = spec.a_jet(x)
    _, bp = spec.b_values(x)
    return 2.0 * a.value * bp - a.value * a.d2


def commutator_residual(spec: LadderSpec, sample_points, relative: bool = False) -> float:
    """max |2AB' - AA'' - k| over ``sample_points``.

    With ``relative`` each point is divided by max(1, |A A''|), the size of
    the terms that cancel, so that rapidly growing A is judged at rounding
    level rather than in absolute terms.
    """
    x = np.asarray(sample_points, dtype=float)
    err = np.abs(commutator(spec, x) - spec.params.k)
    if relative:
        a = spec.a_jet(x)
        err = err / np.maximum(1.0, np.abs(a.value * a.d2))
    return float(np.max(err))
