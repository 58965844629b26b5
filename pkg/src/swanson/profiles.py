"""Built-in mass profiles with closed-form coordinates and potentials.

Each entry stores the mass m(x), a numerically stable form of A = m^(-1/2),
the closed-form Liouville coordinate, and the closed-form curvature part of
V_eff (that is, V_eff minus wt^2 z^2).  The closed forms are only used to
validate the quadrature and the reduced potential.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

from .expr import Expression, parse
from .mapping import CoordinateMap, DomainClass, build_map

LADDER = "Ladder"
BOX = "BoxExact"
DEFERRED = "Deferred"

ISOSPECTRAL = "isospectral"
NON_ISOSPECTRAL = "non-isospectral"


@dataclass(frozen=True)
class ProfileEntry:
    name: str
    group: str
    mass: str
    coefficient: str  # stable form of m^(-1/2)
    z_closed: str
    curvature_closed: str  # V_eff - wt^2 z^2
    expected: DomainClass
    law: str
    z0: float = 0.0  # z at x0 = 0 so that the quadrature matches z_closed
    approx: str = ""
    defaults: Mapping[str, float] = field(default_factory=dict)

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(self.defaults)

    def constants(self, **overrides) -> dict:
        values = dict(self.defaults)
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in values:
                raise KeyError(f"profile {self.name} has no parameter {key!r}")
            values[key] = float(value)
        return values

    def m_expr(self) -> Expression:
        return parse(self.mass, self.param_names)

    def A(self) -> Expression:
        return parse(self.coefficient, self.param_names)

    def z_expr(self) -> Expression:
        return parse(self.z_closed, self.param_names)

    def curvature_expr(self) -> Expression:
        return parse(self.curvature_closed, self.param_names)

    def build_map(self, tol: float = 1e-13, **overrides) -> CoordinateMap:
        return build_map(self.A(), x0=0.0, tol=tol, params=self.constants(**overrides), z0=self.z0)


_HALF_PI = math.pi / 2
_HALF_SQRT_PI = math.sqrt(math.pi) / 2

_CATALOG = (
    ProfileEntry(
        "nonlinear-osc", ISOSPECTRAL, "1/(1+x^2)", "sqrt(1+x^2)", "asinh(x)",
        "-(2+x^2)/(4*(1+x^2))",
        DomainClass("unbounded", -math.inf, math.inf), LADDER, approx="2 wt (n + 1/2)",
    ),
    ProfileEntry(
        "cosh2", ISOSPECTRAL, "cosh(x)^2", "sech(x)", "sinh(x)",
        "(7 - 3*cosh(2*x))*sech(x)^4/8",
        DomainClass("unbounded", -math.inf, math.inf), LADDER, approx="2 wt (n + 1/2)",
    ),
    ProfileEntry(
        "gamma-rational", ISOSPECTRAL, "((gamma+x^2)/(1+x^2))^2", "(1+x^2)/(gamma+x^2)",
        "x + (gamma-1)*atan(x)",
        "(gamma-1)*(3*x^4 - 2*(gamma-2)*x^2 - gamma)/(x^2+gamma)^4",
        DomainClass("unbounded", -math.inf, math.inf), LADDER, approx="2 wt (n + 1/2)",
        defaults={"gamma": 2.0},
    ),
    ProfileEntry(
        "exp-sech2", ISOSPECTRAL, "exp(2*x)*sech(x)^2", "(1+exp(-2*x))/2", "log(1+exp(2*x))",
        "-3/4*exp(-4*x) - 1/2*exp(-2*x)",
        DomainClass("semi-below", 0.0, math.inf), DEFERRED, z0=math.log(2.0),
        approx="half line; tested against 2 wt (n + 1/2) and 2 wt (2m + 3/2)",
    ),
    ProfileEntry(
        "exp-mass", ISOSPECTRAL, "exp(-x)", "exp(x/2)", "-2*exp(-x/2)",
        "-3/16*exp(x)",
        DomainClass("semi-above", -math.inf, 0.0), DEFERRED, z0=-2.0,
        approx="half line; tested against 2 wt (n + 1/2) and 2 wt (2m + 3/2)",
    ),
    ProfileEntry(
        "sech2", NON_ISOSPECTRAL, "sech(x)^2", "cosh(x)", "atan(sinh(x))",
        "1/4 - 3/4*cosh(x)^2",
        DomainClass("bounded", -_HALF_PI, _HALF_PI), BOX, approx="n^2",
    ),
    ProfileEntry(
        "gauss", NON_ISOSPECTRAL, "exp(-2*x^2)", "exp(x^2)", "sqrt(pi)/2*erf(x)",
        "-(1+3*x^2)*exp(2*x^2)",
        DomainClass("bounded", -_HALF_SQRT_PI, _HALF_SQRT_PI), BOX, approx="pi n^2",
    ),
    ProfileEntry(
        "lorentz2", NON_ISOSPECTRAL, "1/(1+x^2)^2", "1+x^2", "atan(x)",
        "-(1+2*x^2)",
        DomainClass("bounded", -_HALF_PI, _HALF_PI), BOX, approx="n^2",
    ),
)


def catalog() -> list[ProfileEntry]:
    return list(_CATALOG)


def get_profile(name: str) -> ProfileEntry:
    for entry in _CATALOG:
        if entry.name == name:
            return entry
    raise KeyError(f"unknown profile {name!r}; known: {', '.join(e.name for e in _CATALOG)}")
