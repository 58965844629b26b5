"""Liouville coordinate map z(x) = z0 + int_{x0}^x dx'/A(x').

The map is tabulated outward from the anchor: a uniform core of width
``scale`` on each side, then dyadic tail intervals ``[2^j, 2^(j+1)] * scale``
each cut into geometric sub-panels.  Every sub-panel is integrated with
adaptive Gauss-Legendre quadrature.  After each dyadic interval the tail is
tested:

* finite    -- the interval contributed less than ``TAIL_TOL``;
* infinite  -- the running integral exceeds ``DIVERGE_AT``, or the dyadic
  contributions stopped shrinking for ``STALL_RUN`` consecutive intervals;
* otherwise the doubling continues until ``max_doublings`` is exhausted and
  the end is reported as inconclusive.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import PchipInterpolator

from .errors import Inconclusive, NonPositiveMass, OutOfRange, QuadratureFailure
from .expr import DomainError, Expression, eval_jet

log = logging.getLogger(__name__)

TAIL_TOL = 1e-12
DIVERGE_AT = 1e6
STALL_RUN = 5
STALL_MIN_DOUBLING = 6
CORE_PANELS = 32
PANELS_PER_DOUBLING = 32
Z_EXTENT = 64.0
MAX_DEPTH = 40

_GL_X, _GL_W = leggauss(20)


def _gauss(f, a, b):
    """20-point Gauss-Legendre on each interval [a_i, b_i] (vectorized)."""
    a = np.atleast_1d(a)
    b = np.atleast_1d(b)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    pts = mid[:, None] + half[:, None] * _GL_X[None, :]
    vals = f(pts.ravel()).reshape(pts.shape)
    return half * (vals @ _GL_W)


def adaptive_panels(f, a, b, tol: float, depth: int = 0):
    """Integrals of ``f`` over panels [a_i, b_i], each refined to ``tol``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mid = 0.5 * (a + b)
    whole = _gauss(f, a, b)
    halves = _gauss(f, a, mid) + _gauss(f, mid, b)
    err = np.abs(whole - halves)
    bad = ~(err <= np.maximum(tol, 1e-14 * np.abs(halves)))
    if not np.any(bad):
        return halves
    if depth >= MAX_DEPTH:
        i = int(np.argmax(bad))
        raise QuadratureFailure(
            f"panel [{a[i]:.6g}, {b[i]:.6g}] not resolved after {MAX_DEPTH} bisections"
        )
    out = halves.copy()
    idx = np.flatnonzero(bad)
    left = adaptive_panels(f, a[idx], mid[idx], tol / 2, depth + 1)
    right = adaptive_panels(f, mid[idx], b[idx], tol / 2, depth + 1)
    out[idx] = left + right
    return out


@dataclass(frozen=True)
class DomainClass:
    """Shape of the image of the real line under z."""

    kind: str  # "unbounded" | "bounded" | "semi-below" | "semi-above"
    zminus: float
    zplus: float

    LABELS = {
        "unbounded": "UnboundedLine",
        "bounded": "BoundedInterval",
        "semi-below": "SemiBoundedBelow",
        "semi-above": "SemiBoundedAbove",
    }

    @property
    def label(self) -> str:
        return self.LABELS[self.kind]

    @property
    def is_symmetric(self) -> bool:
        return self.kind == "bounded" and abs(self.zplus + self.zminus) <= 1e-9 * (1 + self.zplus)

    def __str__(self):
        if self.kind == "unbounded":
            return self.label
        if self.kind == "bounded":
            return f"{self.label}({self.zminus:.10g}, {self.zplus:.10g})"
        if self.kind == "semi-below":
            return f"{self.label}(zminus={self.zminus:.10g})"
        return f"{self.label}(zplus={self.zplus:.10g})"


@dataclass
class _Side:
    status: str  # "finite" | "infinite" | "inconclusive"
    end: float  # integral from the anchor to the end (signed), inf if divergent
    xs: list
    zs: list


@dataclass(frozen=True, eq=False)
class CoordinateMap:
    """Tabulated monotone map with exact local quadrature between nodes."""

    A: Expression
    params: Mapping[str, float]
    x0: float
    z0: float
    xs: np.ndarray
    zs: np.ndarray
    zminus: float
    zplus: float
    status: tuple  # (lower, upper), each "finite" | "infinite" | "inconclusive"
    tol: float
    _inverse: PchipInterpolator = field(repr=False, compare=False, default=None)

    def inv_a(self, x):
        """1/A(x); raises NonPositiveMass where A <= 0."""
        a = eval_jet(self.A, x, self.params).value
        if np.any(~(a > 0.0)):
            raise NonPositiveMass(f"A(x) <= 0 or undefined near x={_first_bad(x, a):.6g}")
        return 1.0 / a

    @property
    def x_range(self) -> tuple[float, float]:
        return float(self.xs[0]), float(self.xs[-1])

    def z(self, x):
        """z(x), integrating from the nearest tabulated node at or left of x."""
        scalar = np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        inside = (x >= self.xs[0]) & (x <= self.xs[-1])
        if np.any(inside):
            xi = x[inside]
            j = np.clip(np.searchsorted(self.xs, xi, side="right") - 1, 0, len(self.xs) - 2)
            # integrate from the nearer end of the node interval
            right = (xi - self.xs[j]) > (self.xs[j + 1] - xi)
            base = np.where(right, j + 1, j)
            out[inside] = self.zs[base] + _gauss(self.inv_a, self.xs[base], xi)
        for i in np.flatnonzero(~inside):
            out[i] = self._z_outside(x[i])
        return float(out[0]) if scalar else out

    def _z_outside(self, x: float) -> float:
        if x > self.xs[-1]:
            a, b, z_a, sign = self.xs[-1], x, self.zs[-1], 1.0
        else:
            a, b, z_a, sign = x, self.xs[0], self.zs[0], -1.0
        n = max(1, int(math.ceil(math.log2(max(2.0, abs(b - a))))) * 8)
        edges = np.linspace(a, b, n + 1)
        return z_a + sign * float(np.sum(adaptive_panels(self.inv_a, edges[:-1], edges[1:], self.tol)))

    def integrate(self, f: Callable, x):
        """int_{x0}^x f(t) dt with the node table as panel breakpoints."""
        scalar = np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any((x < self.xs[0]) | (x > self.xs[-1])):
            raise OutOfRange("integration point outside the tabulated range")
        j = np.clip(np.searchsorted(self.xs, x, side="right") - 1, 0, len(self.xs) - 2)
        j0 = int(np.searchsorted(self.xs, self.x0))
        # only the node panels between the anchor and the requested points
        lo = min(int(j.min()), j0)
        hi = max(int(j.max()), j0)
        panels = adaptive_panels(f, self.xs[lo:hi], self.xs[lo + 1:hi + 1], self.tol) if hi > lo else np.zeros(0)
        cum = np.zeros(len(self.xs))
        cum[lo + 1:hi + 1] = np.cumsum(panels)
        cum -= cum[j0]
        out = cum[j] + _gauss(f, self.xs[j], x)
        return float(out[0]) if scalar else out

    def domain(self) -> DomainClass:
        return classify_domain(self)

    def invert(self, z):
        return invert_map(self, z)


def _first_bad(x, a) -> float:
    x = np.atleast_1d(x).ravel()
    a = np.atleast_1d(a).ravel()
    bad = np.flatnonzero(~(a > 0.0))
    return float(x[bad[0]]) if bad.size else float("nan")


def _explore(inv_a, x0: float, direction: float, scale: float, tol: float,
             max_doublings: int) -> _Side:
    core = x0 + direction * scale * np.linspace(0.0, 1.0, CORE_PANELS + 1)
    vals = adaptive_panels(inv_a, np.minimum(core[:-1], core[1:]), np.maximum(core[:-1], core[1:]), tol)
    xs = list(core[1:])
    zs = list(np.cumsum(vals))
    cum = zs[-1]
    prev = None
    stall = 0
    status = None
    end = math.inf
    frac = np.linspace(0.0, 1.0, PANELS_PER_DOUBLING + 1)
    for j in range(max_doublings):
        edges = x0 + direction * scale * 2.0 ** (j + frac)
        lo = np.minimum(edges[:-1], edges[1:])
        hi = np.maximum(edges[:-1], edges[1:])
        try:
            inv_a(edges)  # a sign change of A usually lands on or near an edge
            vals = adaptive_panels(inv_a, lo, hi, tol)
        except (DomainError, NonPositiveMass, FloatingPointError):
            if status == "infinite":
                break
            raise
        if not np.all(np.isfinite(vals)):
            if status is None and np.any(np.isinf(vals)):
                status = "infinite"
            break
        contribution = float(np.sum(vals))
        xs.extend(edges[1:])
        zs.extend(cum + np.cumsum(vals))
        cum = zs[-1]
        if status == "infinite":
            if cum >= Z_EXTENT:
                break
            continue
        if contribution < TAIL_TOL:
            ratio = contribution / prev if prev else 0.0
            remainder = contribution * ratio / (1.0 - ratio) if 0.0 < ratio < 1.0 else 0.0
            status = "finite"
            end = cum + remainder
            break
        if cum > DIVERGE_AT:
            status = "infinite"
            break
        if prev is not None and contribution >= prev * (1.0 - 1e-9):
            stall += 1
        else:
            stall = 0
        prev = contribution
        if stall >= STALL_RUN and j >= STALL_MIN_DOUBLING:
            status = "infinite"
            if cum >= Z_EXTENT:
                break
    if status is None:
        status = "inconclusive"
        end = math.nan
    return _Side(status, direction * end, [float(v) for v in xs], [direction * float(v) for v in zs])


def build_map(A: Expression, x0: float = 0.0, tol: float = 1e-13, params: Mapping[str, float] | None = None,
              z0: float = 0.0, scale: float = 1.0, max_doublings: int = 128) -> CoordinateMap:
    """Tabulate z(x) for the coefficient ``A`` anchored at z(x0) = z0."""
    params = dict(params or {})
    if tol <= 0:
        raise ValueError("tol must be positive")

    def inv_a(x):
        a = eval_jet(A, x, params).value
        if np.any(a <= 0.0) or np.any(np.isnan(a)):
            raise NonPositiveMass(f"A(x) <= 0 or undefined near x={_first_bad(x, a):.6g}")
        return 1.0 / a

    inv_a(np.array([x0]))
    upper = _explore(inv_a, x0, 1.0, scale, tol, max_doublings)
    lower = _explore(inv_a, x0, -1.0, scale, tol, max_doublings)
    xs = np.array(lower.xs[::-1] + [x0] + upper.xs)
    zs = z0 + np.array(lower.zs[::-1] + [0.0] + upper.zs)
    keep = np.concatenate([[True], np.diff(xs) > 0])
    xs, zs = xs[keep], zs[keep]
    zplus = z0 + upper.end if upper.status == "finite" else (math.inf if upper.status == "infinite" else math.nan)
    zminus = z0 + lower.end if lower.status == "finite" else (-math.inf if lower.status == "infinite" else math.nan)
    log.debug("map built: %d nodes, z in (%g, %g), status %s/%s", len(xs), zminus, zplus,
              lower.status, upper.status)
    strict = np.concatenate([[True], np.diff(zs) > 0])
    inverse = PchipInterpolator(zs[strict], xs[strict], extrapolate=False)
    return CoordinateMap(A, params, float(x0), float(z0), xs, zs, zminus, zplus,
                         (lower.status, upper.status), tol, inverse)


def classify_domain(cmap: CoordinateMap) -> DomainClass:
    lower, upper = cmap.status
    if "inconclusive" in cmap.status:
        raise Inconclusive(
            f"tail test undecided (lower: {lower}, upper: {upper}); neither the convergence nor "
            "the divergence threshold was met within the doubling budget"
        )
    if lower == "infinite" and upper == "infinite":
        kind = "unbounded"
    elif lower == "finite" and upper == "finite":
        kind = "bounded"
    elif lower == "finite":
        kind = "semi-below"
    else:
        kind = "semi-above"
    return DomainClass(kind, cmap.zminus, cmap.zplus)


def invert_map(cmap: CoordinateMap, z, tol: float = 1e-10, max_iter: int = 200):
    """x with z(x) = z: monotone-cubic guess, then safeguarded Newton/bisection."""
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(~((z > cmap.zminus) & (z < cmap.zplus))):
        bad = z[~((z > cmap.zminus) & (z < cmap.zplus))][0]
        raise OutOfRange(f"z={bad:.12g} outside ({cmap.zminus:.12g}, {cmap.zplus:.12g})")
    x = np.empty_like(z)
    inside = (z >= cmap.zs[0]) & (z <= cmap.zs[-1])
    if np.any(inside):
        x[inside] = _refine(cmap, z[inside], tol, max_iter)
    for i in np.flatnonzero(~inside):
        x[i] = _refine_outside(cmap, float(z[i]), tol, max_iter)
    return float(x[0]) if scalar else x


def _refine(cmap: CoordinateMap, z, tol, max_iter):
    j = np.clip(np.searchsorted(cmap.zs, z, side="left"), 1, len(cmap.zs) - 1)
    lo = cmap.xs[j - 1].copy()
    hi = cmap.xs[j].copy()
    x = cmap._inverse(z)
    x = np.where(np.isfinite(x) & (x >= lo) & (x <= hi), x, 0.5 * (lo + hi))
    active = np.ones(z.shape, dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        xi = x[idx]
        f = cmap.z(xi) - z[idx]
        below = f < 0
        lo[idx] = np.where(below, xi, lo[idx])
        hi[idx] = np.where(below, hi[idx], xi)
        a = eval_jet(cmap.A, xi, cmap.params).value
        newton = xi - f * a
        ok = (newton >= lo[idx]) & (newton <= hi[idx])
        xn = np.where(ok, newton, 0.5 * (lo[idx] + hi[idx]))
        step = np.abs(xn - xi)
        x[idx] = xn
        done = (step <= tol * np.maximum(1.0, np.abs(xn))) | (f == 0) | (hi[idx] - lo[idx] <= tol * np.maximum(1.0, np.abs(xn)))
        active[idx[done]] = False
    return x


def _refine_outside(cmap: CoordinateMap, z: float, tol, max_iter) -> float:
    if z > cmap.zs[-1]:
        lo, step = cmap.xs[-1], max(1.0, abs(cmap.xs[-1]))
        hi = lo + step
        while cmap.z(hi) < z:
            lo, step = hi, 2 * step
            hi = lo + step
    else:
        hi, step = cmap.xs[0], max(1.0, abs(cmap.xs[0]))
        lo = hi - step
        while cmap.z(lo) > z:
            hi, step = lo, 2 * step
            lo = hi - step
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if cmap.z(mid) < z:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)
