"""Effective potential of the Hermitian equivalent operator -(A^2 psi')' + V_eff.

Two independent evaluations are provided: the general form in terms of
A, B and their derivatives, and the reduced form in terms of A and the
Liouville coordinate z.  They coincide whenever B is the derived coefficient.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ConfigError
from .expr import Expression, eval_jet
from .mapping import CoordinateMap
from .model import LadderSpec, SwansonParams


def _require_unit(p: SwansonParams):
    if p.k != 1.0:
        raise ConfigError("effective potentials are defined for k = 1; rescale with SwansonParams.unit() first")


def v_eff_general(A: Expression, B: Expression | None, p: SwansonParams, x, *,
                  cmap: CoordinateMap | None = None, constants: Mapping[str, float] | None = None,
                  b_const: float = 0.0, b_sign: float = 1.0):
    """V_eff from A, B and their derivatives (B=None derives it from ``cmap``)."""
    _require_unit(p)
    spec = LadderSpec(A, p, B, cmap, dict(constants or {}), b_const, b_sign)
    a = spec.a_jet(x)
    b, bp = spec.b_values(x)
    s = p.alpha + p.beta
    d = p.alpha - p.beta
    w2 = 4.0 * p.wtilde**2
    return (0.5 * s * a.value * a.d2
            + (0.5 * s + 0.25 * d * d) * a.d1**2
            - w2 * a.d1 * b
            + w2 * b * b
            - (s + 1.0) * a.value * bp
            + 0.5 * (s + 1.0))


def v_eff_reduced(A: Expression, p: SwansonParams, x, z, constants: Mapping[str, float] | None = None):
    """-A A''/2 - A'^2/4 + wt^2 z^2."""
    _require_unit(p)
    a = eval_jet(A, x, constants)
    z = np.asarray(z, dtype=float)
    return -0.5 * a.value * a.d2 - 0.25 * a.d1**2 + p.wtilde**2 * z * z


def consistency_report(A: Expression, p: SwansonParams, sample_points, cmap: CoordinateMap,
                       b_sign: float = 1.0, b_const: float = 0.0, relative: bool = False) -> float:
    """max |general - reduced| over the samples, with B derived from the map.

    ``relative`` divides by 1 + |A A''| + A'^2 + wt^2 z^2, the magnitude of
    the individual terms.
    """
    x = np.asarray(sample_points, dtype=float)
    z = cmap.z(x) + b_const
    general = v_eff_general(A, None, p, x, cmap=cmap, constants=cmap.params, b_const=b_const, b_sign=b_sign)
    reduced = v_eff_reduced(A, p, x, z, cmap.params)
    err = np.abs(general - reduced)
    if relative:
        a = eval_jet(A, x, cmap.params)
        err = err / (1.0 + np.abs(a.value * a.d2) + a.d1**2 + p.wtilde**2 * z * z)
    return float(np.max(err))


@dataclass(frozen=True)
class PotentialGrid:
    x: np.ndarray
    z: np.ndarray
    v: np.ndarray
    params: SwansonParams

    @classmethod
    def tabulate(cls, cmap: CoordinateMap, p: SwansonParams, x) -> "PotentialGrid":
        x = np.asarray(x, dtype=float)
        z = cmap.z(x)
        return cls(x, z, v_eff_reduced(cmap.A, p, x, z, cmap.params), p)

    def rows(self):
        return zip(self.x, self.z, self.v)
