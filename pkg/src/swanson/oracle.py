"""Finite-difference cross-checks of the analytic spectra.

Both discretizations end in a symmetric tridiagonal matrix whose lowest
eigenvalues are found by Sturm-sequence bisection:

* in z, the three-point Laplacian plus wt^2 z^2 with Dirichlet ends;
* in x, the conservative (flux) form of -(A^2 psi')' + V_eff psi with A^2 at
  half nodes, on any monotone node set, symmetrized by the cell widths.

``hgs_residual`` applies the non-Hermitian H_GS to rho^{-1} psi with centered
differences and measures how far it is from an eigenfunction.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.linalg import solve_banded

from . import _sturm
from .errors import NumericalFailure, TruncationWarning
from .expr import eval_jet
from .mapping import CoordinateMap, DomainClass
from .model import LadderSpec, SwansonParams
from .potential import v_eff_reduced
from .spectrum import Level, SpectrumResult

log = logging.getLogger(__name__)

TAIL_AMPLITUDE = 1e-12
WARN_AMPLITUDE = 1e-8
EIG_RTOL = 1e-13
# finite z ends are cut this fraction of the interval short of the end point
END_GAP = 1e-8


@dataclass(frozen=True)
class TridiagonalOperator:
    """Symmetric tridiagonal matrix with Dirichlet boundary rows removed.

    When built with :meth:`from_flux` it also keeps the flux form
    ``sum c_j (u_{j+1} - u_j)^2 + sum V_i w_i u_i^2`` used to polish
    eigenvalues by a Rayleigh quotient free of large cancellations.
    """

    diag: np.ndarray
    off: np.ndarray
    h: float | None = None
    boundary: str = "dirichlet"
    flux: tuple | None = field(default=None, repr=False)  # (coef, width, potential)

    def __post_init__(self):
        if self.off.shape[0] != max(self.diag.shape[0] - 1, 0):
            raise ValueError("off-diagonal must have one entry fewer than the diagonal")

    @classmethod
    def from_flux(cls, coef, width, potential, h: float | None = None) -> "TridiagonalOperator":
        """-(c u')' + V u with interface coefficients c (one per interval) and cell widths."""
        coef = np.asarray(coef, dtype=float)
        width = np.asarray(width, dtype=float)
        potential = np.asarray(potential, dtype=float)
        diag = (coef[:-1] + coef[1:]) / width + potential
        off = -coef[1:-1] / np.sqrt(width[:-1] * width[1:])
        return cls(diag, off, h, "dirichlet", (coef, width, potential))

    @property
    def size(self) -> int:
        return int(self.diag.shape[0])

    def gershgorin(self) -> tuple[float, float]:
        r = np.zeros_like(self.diag)
        r[:-1] += np.abs(self.off)
        r[1:] += np.abs(self.off)
        return float(np.min(self.diag - r)), float(np.max(self.diag + r))

    @property
    def pivmin(self) -> float:
        big = float(np.max(self.off**2)) if self.off.size else 0.0
        return np.finfo(float).tiny * max(1.0, big)

    def count(self, lam: float) -> int:
        return int(_sturm.count_below(self.diag, self.off**2, float(lam), self.pivmin))

    def lowest(self, n: int, rtol: float = EIG_RTOL, polish: bool = True) -> np.ndarray:
        if n > self.size:
            raise NumericalFailure(f"asked for {n} eigenvalues of a {self.size}x{self.size} matrix")
        lo, hi = self.gershgorin()
        lams = _sturm.bisect_lowest(self.diag, self.off**2, n, lo, hi, rtol, self.pivmin)
        if polish and self.flux is not None:
            lams = np.array([self.rayleigh(self.eigenvector(lam)) for lam in lams])
        return lams

    def rayleigh(self, v: np.ndarray) -> float:
        """Rayleigh quotient of the symmetric eigenvector ``v`` via the flux form."""
        coef, width, potential = self.flux
        u = np.concatenate([[0.0], v / np.sqrt(width), [0.0]])
        num = np.sum(coef * np.diff(u) ** 2) + np.sum(potential * width * u[1:-1] ** 2)
        return float(num / np.sum(width * u[1:-1] ** 2))

    def eigenvector(self, lam: float, iterations: int = 3) -> np.ndarray:
        """Inverse iteration at a computed eigenvalue."""
        n = self.size
        shift = lam - 1e-10 * max(1.0, abs(lam))
        ab = np.zeros((3, n))
        ab[0, 1:] = self.off
        ab[1] = self.diag - shift
        ab[2, :-1] = self.off
        v = np.ones(n) / math.sqrt(n)
        for _ in range(iterations):
            v = solve_banded((1, 1), ab, v)
            v /= np.linalg.norm(v)
        return v


def sturm_count(T: TridiagonalOperator, lam: float) -> int:
    """Number of eigenvalues of T strictly below ``lam``."""
    return T.count(lam)


# ---------------------------------------------------------------------------
# z discretization


def z_operator(wtilde: float, zlo: float, zhi: float, N: int) -> TridiagonalOperator:
    """-d^2/dz^2 + wt^2 z^2 on N uniform intervals of [zlo, zhi]."""
    h = (zhi - zlo) / N
    z = zlo + h * np.arange(1, N)
    return TridiagonalOperator.from_flux(np.full(N, 1.0 / h), np.full(N - 1, h), wtilde**2 * z * z, h)


def truncation_extent(wtilde: float, n_top: int) -> float:
    """Z beyond which the n_top-th oscillator state is below TAIL_AMPLITUDE."""
    if wtilde <= 0.0:
        raise NumericalFailure("cannot truncate an infinite end without confinement (wt = 0)")
    return math.sqrt((2.0 * math.log(1.0 / TAIL_AMPLITUDE) + 2.0 * n_top + 1.0) / wtilde)


def _first_index(lo_finite: bool, hi_finite: bool) -> int:
    return 1 if lo_finite and hi_finite else 0


def _parity_labels(n_levels: int, symmetric: bool) -> list[str]:
    if not symmetric:
        return ["none"] * n_levels
    return ["even" if i % 2 == 0 else "odd" for i in range(n_levels)]


def _check_tail(T: TridiagonalOperator, lam: float, truncated: tuple[bool, bool], where: str):
    if not any(truncated):
        return
    v = np.abs(T.eigenvector(lam))
    scale = float(np.max(v))
    ends = [v[0] if truncated[0] else 0.0, v[-1] if truncated[1] else 0.0]
    amp = max(ends) / scale
    if amp > WARN_AMPLITUDE:
        warnings.warn(f"{where}: ground state amplitude {amp:.2e} at a truncated end; enlarge the domain",
                      TruncationWarning, stacklevel=3)


def fd_spectrum_z(wtilde: float, zdomain=(-math.inf, math.inf), N: int = 8000, n_max: int = 8, *,
                  richardson: bool = False, params: SwansonParams | None = None,
                  shift: float = 0.0) -> SpectrumResult:
    """Lowest eigenvalues of -phi'' + wt^2 z^2 phi with Dirichlet ends.

    Infinite ends are cut at ``truncation_extent``.  Levels are indexed like
    the analytic laws: from 1 on a bounded interval, from 0 otherwise.  With
    ``richardson`` the N and 2N results are combined as (4 E_2N - E_N)/3.
    """
    if N < 200:
        raise ValueError("N must be at least 200")
    zlo, zhi = (float(v) for v in zdomain)
    finite = (math.isfinite(zlo), math.isfinite(zhi))
    first = _first_index(*finite)
    n_levels = n_max - first + 1
    if not finite[0] or not finite[1]:
        Z = truncation_extent(wtilde, n_max)
        zlo = zlo if finite[0] else min(-Z, zhi - Z)
        zhi = zhi if finite[1] else max(Z, zlo + Z)
    truncated = (not finite[0], not finite[1])
    T = z_operator(wtilde, zlo, zhi, N)
    energies = T.lowest(n_levels)
    _check_tail(T, energies[0], truncated, "fd_spectrum_z")
    info = {"N": N, "zlo": zlo, "zhi": zhi, "richardson": richardson}
    if richardson:
        fine = z_operator(wtilde, zlo, zhi, 2 * N).lowest(n_levels)
        info["coarse"] = energies.tolist()
        info["fine"] = fine.tolist()
        energies = (4.0 * fine - energies) / 3.0
    symmetric = finite[0] and finite[1] and abs(zlo + zhi) <= 1e-9 * (1.0 + zhi)
    symmetric = symmetric or not (finite[0] or finite[1])
    labels = _parity_labels(n_levels, symmetric)
    levels = tuple(Level(first + i, float(e) + shift, labels[i]) for i, e in enumerate(energies))
    return SpectrumResult("OracleZ", levels, params, _domain_of(zdomain), info)


def _domain_of(zdomain) -> DomainClass:
    lo, hi = (float(v) for v in zdomain)
    if math.isfinite(lo) and math.isfinite(hi):
        return DomainClass("bounded", lo, hi)
    if math.isfinite(lo):
        return DomainClass("semi-below", lo, hi)
    if math.isfinite(hi):
        return DomainClass("semi-above", lo, hi)
    return DomainClass("unbounded", lo, hi)


# ---------------------------------------------------------------------------
# x discretization


@dataclass(frozen=True)
class XGrid:
    """Nodes x_0 < ... < x_N (ends carry Dirichlet zeros) and the N half nodes between them."""

    nodes: np.ndarray
    halves: np.ndarray
    kind: str = "uniform"
    truncated: tuple = (True, True)
    z_nodes: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.halves.shape[0] != self.nodes.shape[0] - 1:
            raise ValueError("need exactly one half node per interval")
        if not (np.all(np.diff(self.nodes) > 0) and np.all(self.halves > self.nodes[:-1])
                and np.all(self.halves < self.nodes[1:])):
            raise ValueError("grid nodes and half nodes must interleave strictly")

    @property
    def N(self) -> int:
        return int(self.nodes.shape[0] - 1)


def uniform_x_grid(xlo: float, xhi: float, N: int, truncated=(True, True)) -> XGrid:
    nodes = np.linspace(xlo, xhi, N + 1)
    return XGrid(nodes, 0.5 * (nodes[:-1] + nodes[1:]), "uniform", tuple(truncated))


def liouville_x_grid(cmap: CoordinateMap, zlo: float, zhi: float, N: int, truncated=(True, True)) -> XGrid:
    """Nodes and half nodes equispaced in z, mapped back to x."""
    z = np.linspace(zlo, zhi, 2 * N + 1)
    x = cmap.invert(z)
    return XGrid(x[0::2], x[1::2], "liouville", tuple(truncated), z[0::2])


def _log_stretch(x):
    return np.sign(x) * np.log1p(np.abs(x))


def blend_x_grid(cmap: CoordinateMap, xlo: float, xhi: float, N: int, truncated=(True, True),
                 table_size: int = 20001) -> XGrid:
    """Nodes equispaced in t = z(x)/span_z + log(1+|x|)/span_log (each term normalized to [0, 1]).

    The z term resolves oscillations of the eigenfunctions; the logarithmic
    term keeps the grid fine in x where A grows without bound, which is where
    the x-form of the operator has its singular end behavior.
    """
    g = np.linspace(_log_stretch(xlo), _log_stretch(xhi), table_size)
    xt = np.sign(g) * np.expm1(np.abs(g))
    xt[0], xt[-1] = xlo, xhi
    inside = (cmap.xs > xlo) & (cmap.xs < xhi)
    xt = np.unique(np.concatenate([xt, cmap.xs[inside]]))
    zt = cmap.z(xt)
    t = (zt - zt[0]) / (zt[-1] - zt[0]) + (_log_stretch(xt) - g[0]) / (g[-1] - g[0])
    strict = np.concatenate([[True], np.diff(t) > 0])
    inverse = PchipInterpolator(t[strict], xt[strict])
    x = inverse(np.linspace(0.0, 2.0, 2 * N + 1))
    x[0], x[-1] = xlo, xhi
    return XGrid(x[0::2], x[1::2], "blend", tuple(truncated))


def x_operator(inv_mass: Callable, veff: Callable, grid: XGrid) -> TridiagonalOperator:
    """Symmetrized flux discretization of -(a psi')' + V psi, a = 1/m."""
    x = grid.nodes
    coef = inv_mass(grid.halves) / np.diff(x)
    width = np.diff(grid.halves)
    interior = x[1:-1]
    v = veff(interior) if grid.z_nodes is None else veff(interior, grid.z_nodes[1:-1])
    return TridiagonalOperator.from_flux(coef, width, v)


def auto_x_grid(cmap: CoordinateMap, p: SwansonParams, N: int, n_max: int, kind: str = "auto",
                end_gap: float | None = None, z_shift: float = 0.0) -> XGrid:
    """Truncated x grid covering the z-image needed for the lowest levels.

    Infinite z ends are cut at ``truncation_extent``; finite ends are cut
    ``end_gap`` short of the end point, where the Dirichlet condition holds
    to that order.  ``kind`` is "blend" (default), "uniform" or "liouville";
    the last is only sound when both z ends are infinite.
    """
    unit, _ = p.unit()
    zlo, zhi = cmap.zminus, cmap.zplus
    finite = (math.isfinite(zlo), math.isfinite(zhi))
    Z = truncation_extent(unit.wtilde, n_max) if not all(finite) else 0.0
    if end_gap is None:
        length = (zhi - zlo) if all(finite) else Z
        end_gap = END_GAP * length
    # truncation is symmetric about the oscillator center z = -z_shift
    c = -z_shift
    lo = zlo + end_gap if finite[0] else min(c - Z, (zhi - Z) if finite[1] else c - Z)
    hi = zhi - end_gap if finite[1] else max(c + Z, (zlo + Z) if finite[0] else c + Z)
    truncated = (not finite[0], not finite[1])
    if kind == "liouville":
        return liouville_x_grid(cmap, lo, hi, N, truncated)
    xlo, xhi = (float(v) for v in cmap.invert(np.array([lo, hi])))
    if kind == "uniform":
        return uniform_x_grid(xlo, xhi, N, truncated)
    if kind in ("auto", "blend"):
        return blend_x_grid(cmap, xlo, xhi, N, truncated)
    raise ValueError(f"unknown grid kind {kind!r}")


def fd_spectrum_x(inv_mass: Callable, veff: Callable, grid: XGrid, n_max: int, *,
                  first_index: int = 0, params: SwansonParams | None = None, shift: float = 0.0,
                  domain: DomainClass | None = None) -> SpectrumResult:
    """Lowest eigenvalues of -(psi'/m)' + V_eff psi on ``grid`` with Dirichlet ends.

    ``veff`` takes x, or (x, z) when the grid carries its z nodes.
    """
    T = x_operator(inv_mass, veff, grid)
    n_levels = n_max - first_index + 1
    energies = T.lowest(n_levels)
    _check_tail(T, energies[0], grid.truncated, "fd_spectrum_x")
    levels = tuple(Level(first_index + i, float(e) + shift, "none") for i, e in enumerate(energies))
    info = {"N": grid.N, "grid": grid.kind, "xlo": float(grid.nodes[0]), "xhi": float(grid.nodes[-1])}
    return SpectrumResult("OracleX", levels, params, domain, info)


def oracle_x(cmap: CoordinateMap, p: SwansonParams, N: int = 20000, n_max: int = 8, kind: str = "auto",
             end_gap: float | None = None, z_shift: float = 0.0) -> SpectrumResult:
    """x-space oracle for the map's coefficient (already in unit-commutator form).

    ``z_shift`` is the integration constant of B: the potential is
    wt^2 (z + z_shift)^2.
    """
    unit, shift = p.unit()
    domain = cmap.domain()
    domain = DomainClass(domain.kind, domain.zminus + z_shift, domain.zplus + z_shift)
    grid = auto_x_grid(cmap, unit, N, n_max, kind, end_gap, z_shift)
    params = cmap.params

    def inv_mass(x):
        return eval_jet(cmap.A, x, params).value ** 2

    if grid.z_nodes is None:
        veff = lambda x: v_eff_reduced(cmap.A, unit, x, cmap.z(x) + z_shift, params)
    else:
        veff = lambda x, z: v_eff_reduced(cmap.A, unit, x, z + z_shift, params)
    first = 1 if domain.kind == "bounded" else 0
    return fd_spectrum_x(inv_mass, veff, grid, n_max, first_index=first, params=p, shift=shift, domain=domain)


# ---------------------------------------------------------------------------
# non-Hermitian residual


def _centered(f: np.ndarray, h: float) -> np.ndarray:
    out = np.full_like(f, np.nan)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    return out


def hgs_residual(spec: LadderSpec, x, psi_gs, E: float, h: float | None = None, margin: int = 4,
                 shift_convention: bool = False) -> float:
    """||H_GS psi - E psi|| / ||psi|| over interior points of a uniform x grid.

    H_GS = w (a+ a + 1/2) + alpha a^2 + beta a+^2, with a = A d/dx + B and
    a+ = -A d/dx + B - A'.  ``shift_convention`` uses a a+ in place of a+ a.
    """
    x = np.asarray(x, dtype=float)
    psi = np.asarray(psi_gs, dtype=float)
    if h is None:
        h = float(x[1] - x[0])
    if not np.allclose(np.diff(x), h, rtol=1e-9, atol=0.0):
        raise ValueError("hgs_residual needs a uniform grid")
    p = spec.params
    a = spec.a_jet(x)
    b, _ = spec.b_values(x)
    A, Ap = a.value, a.d1

    def lower(f):
        return A * _centered(f, h) + b * f

    def raise_(f):
        return -A * _centered(f, h) + (b - Ap) * f

    first = raise_(lower(psi)) if not shift_convention else lower(raise_(psi))
    h_psi = p.w * (first + 0.5 * psi) + p.alpha * lower(lower(psi)) + p.beta * raise_(raise_(psi))
    keep = slice(margin, len(x) - margin)
    r = h_psi[keep] - E * psi[keep]
    return float(np.linalg.norm(r) / np.linalg.norm(psi[keep]))
