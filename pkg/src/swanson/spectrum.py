"""Analytic spectra and eigenfunctions of the Hermitian equivalent Hamiltonian.

Energies come from two quantization rules: the ladder ``2 wt (n + 1/2)`` when
the z-image is the whole line, and the Dirichlet zeros of the even/odd
Kummer solutions when the z-image is a bounded interval.  All routines take
the geometry (``zplus``, maps) of the unit-commutator problem; couplings with
``k != 1`` are reduced through :meth:`SwansonParams.unit`.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.optimize import brentq

from .errors import DomainMismatch, ParityOrderViolation, RootBracketFailure
from .expr import Expression, eval_jet
from .mapping import CoordinateMap, DomainClass
from .model import SwansonParams
from .specfun import hyp1f1

METHODS = ("Ladder", "BoxExact", "BoxApprox", "OracleZ", "OracleX")


@dataclass(frozen=True)
class Level:
    n: int
    E: float
    parity: str  # "even" | "odd" | "none"


@dataclass(frozen=True)
class SpectrumResult:
    method: str
    levels: tuple[Level, ...]
    params: SwansonParams | None = None
    domain: DomainClass | None = None
    info: Mapping = field(default_factory=dict)

    @property
    def energies(self) -> np.ndarray:
        return np.array([lv.E for lv in self.levels])

    @property
    def indices(self) -> list[int]:
        return [lv.n for lv in self.levels]

    def energy(self, n: int) -> float:
        for lv in self.levels:
            if lv.n == n:
                return lv.E
        raise KeyError(n)

    def as_dict(self) -> dict:
        return {"method": self.method,
                "levels": [{"n": lv.n, "E": lv.E, "parity": lv.parity} for lv in self.levels]}


def _alternating(first_index: int, energies, start_even=True, parity=True) -> tuple[Level, ...]:
    levels = []
    for i, e in enumerate(energies):
        if parity:
            label = "even" if (i % 2 == 0) == start_even else "odd"
        else:
            label = "none"
        levels.append(Level(first_index + i, float(e), label))
    return tuple(levels)


def ladder_spectrum(p: SwansonParams, n_max: int, domain: DomainClass) -> SpectrumResult:
    """E_n = 2 wt (n + 1/2), n = 0..n_max; only on the whole line."""
    if domain.kind != "unbounded":
        raise DomainMismatch(
            f"ladder spectrum needs an unbounded z-image, got {domain}; the oscillator "
            "quantization does not apply here (use the box rule or the oracle)"
        )
    unit, shift = p.unit()
    wt = unit.wtilde
    energies = [2.0 * wt * (n + 0.5) + shift for n in range(n_max + 1)]
    return SpectrumResult("Ladder", _alternating(0, energies), p, domain)


# ---------------------------------------------------------------------------
# bounded z-interval


def even_boundary(E, wt: float, z: float) -> float:
    """1F1(1/4 - E/4wt; 1/2; wt z^2): the even solution at z without its Gaussian."""
    return hyp1f1(0.25 - E / (4.0 * wt), 0.5, wt * z * z)


def odd_boundary(E, wt: float, z: float) -> float:
    return hyp1f1(0.75 - E / (4.0 * wt), 1.5, wt * z * z)


def _scan_roots(f, start: float, step: float, count: int, limit: float):
    """Brackets of the first ``count`` sign changes of f above ``start``."""
    brackets = []
    e0, f0 = start, f(start)
    while len(brackets) < count:
        e1 = e0 + step
        if e1 > limit:
            raise RootBracketFailure(
                f"found {len(brackets)} of {count} roots while scanning [{start:.6g}, {limit:.6g}]"
            )
        f1 = f(e1)
        if f0 == 0.0:
            brackets.append((e0, e0))
        elif f0 * f1 < 0.0:
            brackets.append((e0, e1))
        e0, f0 = e1, f1
    return brackets


def _refine(f, brackets, rtol=1e-12):
    return [a if a == b else brentq(f, a, b, xtol=1e-300, rtol=rtol, maxiter=500) for a, b in brackets]


def box_spectrum_exact(p: SwansonParams, zplus: float, n_max: int, zminus: float | None = None) -> SpectrumResult:
    """Dirichlet spectrum of -d^2/dz^2 + wt^2 z^2 on (zminus, zplus), n = 1..n_max.

    Symmetric intervals use the parity conditions: even roots give odd n,
    odd roots give even n.  Otherwise the 2x2 determinant of the even and odd
    solutions at both ends is root-searched.  Roots are bracketed by a scan
    that starts at the bottom of the min-max window and steps by a fraction
    of the smallest admissible level gap, then polished with Brent's method.
    """
    if zminus is None:
        zminus = -zplus
    if not (zminus < zplus) or not (math.isfinite(zminus) and math.isfinite(zplus)):
        raise DomainMismatch(f"box spectrum needs a finite interval, got ({zminus}, {zplus})")
    unit, shift = p.unit()
    wt = unit.wtilde
    length = zplus - zminus
    box = math.pi**2 / length**2
    vmax = wt**2 * max(zminus**2, zplus**2)
    vmin = 0.0 if zminus < 0.0 < zplus else wt**2 * min(zminus**2, zplus**2)
    gap = max(min(2.0 * wt, 3.0 * box), 3.0 * box - (vmax - vmin), 1e-3 * box)
    step = 0.25 * gap
    start = box + vmin - 1e-9 * box
    limit = box * n_max**2 + vmax + 10.0 * step + 1.0
    symmetric = abs(zplus + zminus) <= 1e-9 * (1.0 + zplus)
    domain = DomainClass("bounded", zminus, zplus)
    if symmetric:
        fe = lambda E: even_boundary(E, wt, zplus)
        fo = lambda E: odd_boundary(E, wt, zplus)
        n_even = (n_max + 1) // 2
        n_odd = n_max // 2
        even = _refine(fe, _scan_roots(fe, start, step, n_even, limit)) if n_even else []
        odd = _refine(fo, _scan_roots(fo, start, step, n_odd, limit)) if n_odd else []
        merged = []
        for i in range(n_max):
            merged.append(even[i // 2] if i % 2 == 0 else odd[i // 2])
        for i in range(1, len(merged)):
            if not merged[i] > merged[i - 1]:
                raise ParityOrderViolation(
                    f"E_{i} = {merged[i - 1]:.12g} (parity {'even' if i % 2 else 'odd'}) is not below "
                    f"E_{i + 1} = {merged[i]:.12g}; even/odd roots do not interlace"
                )
        levels = _alternating(1, [e + shift for e in merged])
    else:
        def det(E):
            ea = even_boundary(E, wt, zminus)
            oa = zminus * odd_boundary(E, wt, zminus)
            eb = even_boundary(E, wt, zplus)
            ob = zplus * odd_boundary(E, wt, zplus)
            return ea * ob - oa * eb

        roots = _refine(det, _scan_roots(det, start, step, n_max, limit))
        levels = _alternating(1, [e + shift for e in roots], parity=False)
    return SpectrumResult("BoxExact", levels, p, domain, {"zminus": zminus, "zplus": zplus})


def box_spectrum_approx(p: SwansonParams, zplus: float, n_max: int, zminus: float | None = None) -> SpectrumResult:
    """Leading approximation pi^2 n^2 / (4 zplus^2), n = 1..n_max."""
    if zminus is None:
        zminus = -zplus
    _, shift = p.unit()
    length = zplus - zminus
    energies = [math.pi**2 * n * n / length**2 + shift for n in range(1, n_max + 1)]
    symmetric = abs(zplus + zminus) <= 1e-9 * (1.0 + zplus)
    return SpectrumResult("BoxApprox", _alternating(1, energies, parity=symmetric), p,
                          DomainClass("bounded", zminus, zplus))


def analytic_spectrum(p: SwansonParams, domain: DomainClass, n_max: int) -> SpectrumResult:
    """The spectral law appropriate to ``domain``; semi-bounded images are refused."""
    if domain.kind == "unbounded":
        return ladder_spectrum(p, n_max, domain)
    if domain.kind == "bounded":
        return box_spectrum_exact(p, domain.zplus, n_max, domain.zminus)
    raise DomainMismatch(
        f"no analytic spectrum for a half-line z-image ({domain}); run the finite-difference oracle instead"
    )


# ---------------------------------------------------------------------------
# eigenfunctions


def eigenfunction_z(p: SwansonParams, E: float, parity: str, z_grid, normalize: bool = True):
    """Even or odd Kummer solution at energy E, unit L2(dz) norm on ``z_grid`` (trapezoid)."""
    unit, shift = p.unit()
    wt = unit.wtilde
    e = E - shift
    z = np.asarray(z_grid, dtype=float)
    y = wt * z * z
    gauss = np.exp(-0.5 * y)
    if parity == "even":
        phi = gauss * hyp1f1(0.25 - e / (4.0 * wt), 0.5, y)
    elif parity == "odd":
        phi = z * gauss * hyp1f1(0.75 - e / (4.0 * wt), 1.5, y)
    else:
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    if normalize:
        phi = phi / math.sqrt(np.trapezoid(phi * phi, z))
    return phi


@dataclass(frozen=True)
class EigenfunctionTable:
    x: np.ndarray
    z: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    psi_gs: np.ndarray
    energy: float
    parity: str
    norm: float  # int |psi|^2 dx after normalization in z

    def to_csv(self, path_or_file) -> None:
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["x", "z", "phi", "psi", "psi_gs"])
            for row in zip(self.x, self.z, self.phi, self.psi, self.psi_gs):
                writer.writerow(["%.12g" % v for v in row])
        finally:
            if own:
                fh.close()


def wavefunction_x(p: SwansonParams, E: float, parity: str, cmap: CoordinateMap, z_grid=None, *,
                   x_grid=None) -> EigenfunctionTable:
    """psi(x) = A(x)^(-1/2) phi(z(x)) sampled at x = z^{-1}(z_grid), or on ``x_grid``.

    phi is normalized in z over the sampled range, so the x norm is 1 up to
    quadrature error when the samples cover the support.
    """
    if (z_grid is None) == (x_grid is None):
        raise ValueError("give exactly one of z_grid and x_grid")
    if x_grid is not None:
        x = np.asarray(x_grid, dtype=float)
        z = cmap.z(x)
    else:
        z = np.asarray(z_grid, dtype=float)
        x = cmap.invert(z)
    phi = eigenfunction_z(p, E, parity, z)
    a = eval_jet(cmap.A, x, cmap.params).value
    psi = phi / np.sqrt(a)
    norm = float(np.trapezoid(psi * psi, x))
    return EigenfunctionTable(x, z, phi, psi, psi.copy(), E, parity, norm)


def rho_weight(A: Expression, B: Expression | None, p: SwansonParams, cmap: CoordinateMap, x,
               constants: Mapping[str, float] | None = None, b_const: float = 0.0):
    """Similarity weight A^(d/2) exp(-d int_{x0}^x B/A) with d = k (alpha - beta).

    ``B=None`` uses the derived coefficient k (z + b_const)/2 + A'/2, with z
    from ``cmap`` (the map of this same A).  For k = 1, d is alpha - beta.
    """
    constants = dict(constants or {})
    d = p.k * (p.alpha - p.beta)
    if d == 0.0:
        return np.ones_like(np.asarray(x, dtype=float)) if np.ndim(x) else 1.0

    def b_over_a(t):
        a = eval_jet(A, t, constants)
        if B is None:
            b = 0.5 * p.k * (cmap.z(t) + b_const) + 0.5 * a.d1
        else:
            b = eval_jet(B, t, constants).value
        return b / a.value

    integral = cmap.integrate(b_over_a, x)
    a = eval_jet(A, x, constants).value
    return a ** (0.5 * d) * np.exp(-d * integral)


def gs_wavefunction(table: EigenfunctionTable, rho) -> EigenfunctionTable:
    """Attach rho^{-1} psi, the (unnormalized) eigenfunction of the non-Hermitian H_GS."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0.0):
        raise ValueError("similarity weight must be positive")
    return EigenfunctionTable(table.x, table.z, table.phi, table.psi, table.psi / rho,
                              table.energy, table.parity, table.norm)
