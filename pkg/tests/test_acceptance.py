"""Acceptance criteria, one test each, at the stated tolerances.

Every test records a PASS/FAIL line that is repeated in the terminal summary.
Criteria 4 and 6 are known to fail; see the decisions ledger for the analysis.
"""
import math

import mpmath
import numpy as np
from conftest import record
from swanson import pipeline
from swanson.mapping import DomainClass, build_map
from swanson.model import LadderSpec, SwansonParams, commutator_residual
from swanson.oracle import fd_spectrum_z
from swanson.profiles import ISOSPECTRAL, NON_ISOSPECTRAL, catalog
from swanson.specfun import hermite_correspondence, hyp1f1, hyp1f1_zero_guess
from swanson.spectrum import box_spectrum_exact, ladder_spectrum

LINE = DomainClass("unbounded", -math.inf, math.inf)
PARAM_SETS = [(1.0, 0.0, 0.0), (1.4, 0.2, 0.2), (1.0, 0.2, -0.2)]
LADDER_ROWS = ["nonlinear-osc", "cosh2", "gamma-rational"]
BOX_ROWS = [e.name for e in catalog() if e.group == NON_ISOSPECTRAL]
SEMI_ROWS = [e.name for e in catalog() if e.group == ISOSPECTRAL and e.name not in LADDER_ROWS]


def test_criterion_1_closed_forms(problems):
    worst = {"closed-form-z": 0.0, "closed-form-veff": 0.0}
    failed = []
    for entry in catalog():
        for w, a, b in PARAM_SETS:
            for c in pipeline.closed_form_checks(problems(entry.name, a, b, w=w)):
                worst[c.name] = max(worst[c.name], c.value)
                if not c.passed:
                    failed.append((entry.name, a, b, c.name))
    ok = not failed
    record(1, ok, f"8 profiles x 3 parameter sets, 50 points: max z error {worst['closed-form-z']:.2e}, "
                  f"max V_eff error {worst['closed-form-veff']:.2e} (tolerance 1e-9)")
    assert ok, failed


def test_criterion_2_isospectral(problems):
    worst_rel, ratios_all = 0.0, []
    for name in LADDER_ROWS:
        for w, a, b in PARAM_SETS:
            p = problems(name, a, b, w=w)
            ladder = pipeline.analytic(p, 5).energies
            coarse = pipeline.oracle_x_spectrum(p, 5, 20000).energies
            fine = pipeline.oracle_x_spectrum(p, 5, 40000).energies
            worst_rel = max(worst_rel, float(np.max(np.abs(coarse - ladder) / ladder)))
            ratios_all.extend(np.abs(coarse - ladder) / np.abs(fine - ladder))
    ratios_all = np.array(ratios_all)
    ok = worst_rel <= 1e-3 and np.all((ratios_all >= 3.5) & (ratios_all <= 4.5))
    record(2, ok, f"rows 1-3, n <= 5, N = 20000: max relative error {worst_rel:.2e} (<= 1e-3); "
                  f"Richardson ratios in [{ratios_all.min():.3f}, {ratios_all.max():.3f}]")
    assert ok


def test_criterion_3_box(problems):
    worst_diff, worst_bound, worst_approx = 0.0, -math.inf, 0.0
    for name in BOX_ROWS:
        for w, a, b in PARAM_SETS:
            p = problems(name, a, b, w=w)
            d = p.domain
            zp = d.zplus
            exact = box_spectrum_exact(p.params, zp, 8).energies
            fd = fd_spectrum_z(p.params.wtilde, (d.zminus, zp), 8000, 8, richardson=True).energies
            worst_diff = max(worst_diff, float(np.max(np.abs(exact - fd))))
            n = np.arange(1, 9)
            low = math.pi**2 * n**2 / (4 * zp**2)
            high = low + p.params.wtilde**2 * zp**2
            worst_bound = max(worst_bound, float(np.max(low - exact)), float(np.max(exact - high)))
            if name == "sech2" and p.params.wtilde == 0.5:
                worst_approx = max(worst_approx, float(np.max(np.abs(exact - n**2))))
    ok = worst_diff <= 1e-6 and worst_bound <= 0.0 and worst_approx <= 0.617
    record(3, ok, f"3 box profiles x 3 parameter sets, n <= 8: |exact - FD| <= {worst_diff:.1e} (1e-6); "
                  f"bounds {'hold' if worst_bound <= 0 else 'violated'}; sech2 |E_n - n^2| <= {worst_approx:.4f}"
                  " (0.617)")
    assert ok


def test_criterion_4_witness(problems):
    rows, ok, witness_ok = [], True, True
    for name in BOX_ROWS:
        for w, a, b in PARAM_SETS:
            p = problems(name, a, b, w=w)
            zp = p.domain.zplus
            e = box_spectrum_exact(p.params, zp, 12).energies
            second = np.diff(e, 2)
            threshold = math.pi**2 / (2 * zp**2) - 0.05
            ladder = np.diff(ladder_spectrum(p.params, 12, LINE).energies, 2)
            ok &= bool(np.all(second > threshold))
            witness_ok &= bool(np.all(second > 0.5)) and np.max(np.abs(ladder)) <= 1e-12
            rows.append(f"{name}({a:g},{b:g}) min {second.min():.4f} vs {threshold:.4f}")
    checks = {c.name: c for c in pipeline.verify(problems("sech2"), 8, 20000)}
    verify_ok = checks["second-difference-leading-order"].passed
    ok = ok and verify_ok
    record(4, ok, f"second difference > pi^2/(2 z+^2) - 0.05 for n >= 2: {'; '.join(rows)}; "
                  f"witness > 0.5 with ladder 0 {'holds' if witness_ok else 'fails'}; "
                  f"verify reports {checks['second-difference-leading-order'].status}")
    assert ok


def test_criterion_5_similarity():
    parts, ok = [], True
    for label, kw in (("constant mass", {"A": "1"}), ("m = 1/(1+x^2)", {"m": "1/(1+x^2)"})):
        p = pipeline.make_problem(alpha=0.2, beta=-0.2, **kw)
        residuals, perturbed = pipeline.similarity_residuals(p, halvings=3)
        ratios = residuals[:-1] / residuals[1:]
        ok &= bool(np.all((ratios >= 3.5) & (ratios <= 4.5))) and perturbed > 0.05
        parts.append(f"{label}: ratios {np.round(ratios, 3).tolist()}, E+0.1 plateau {perturbed:.3f}")
    record(5, ok, "; ".join(parts))
    assert ok


def _smallest_zero(m, b):
    f = lambda y: mpmath.hyp1f1(-m, b, y, zeroprec=200)  # noqa: E731
    y, step = mpmath.mpf(0), mpmath.mpf("0.001")
    while f(y) * f(y + step) > 0:
        y += step
    if f(y + step) == 0:
        return float(y + step)
    return float(mpmath.findroot(f, (y, y + step), solver="bisect"))


def test_criterion_6_special_functions():
    rng = np.random.default_rng(2024)
    kummer, accuracy = 0.0, 0.0
    for _ in range(500):
        a, b, y = rng.uniform(-6, 3), float(rng.choice([0.5, 1.5])), rng.uniform(0, 10)
        lhs = hyp1f1(a, b, y)
        kummer = max(kummer, abs(lhs - math.exp(y) * hyp1f1(b - a, b, -y)) / math.exp(y))
        accuracy = max(accuracy, abs(lhs - float(mpmath.hyp1f1(a, b, y, zeroprec=200))) / math.exp(y))
    herm = max(abs(s - q) for m in range(7) for t in np.linspace(-3, 3, 61)
               for s, q in [hermite_correspondence(m, float(t))])
    errors = {}
    for m in range(1, 5):
        for b in (0.5, 1.5):
            exact = _smallest_zero(m, b)
            errors[(-m, b)] = abs(hyp1f1_zero_guess(1, -m, b) - exact) / exact
    worst = max(errors, key=errors.get)
    worked = hyp1f1_zero_guess(1, -1.0, 0.5)
    ok = (kummer <= 1e-12 and accuracy <= 1e-12 and herm <= 1e-11 and errors[worst] <= 0.05
          and abs(worked - 0.49348) < 1e-5)
    record(6, ok, f"Kummer {kummer:.1e}, mpmath {accuracy:.1e} (1e-12); Hermite {herm:.1e} (1e-11); "
                  f"zero guess worst {errors[worst]:.1%} at a={worst[0]}, b={worst[1]} (5%); "
                  f"worked value {worked:.5f} vs exact 0.5")
    assert ok


def test_criterion_7_commutator():
    x = np.linspace(-3, 3, 200)
    derived, flipped = 0.0, 0.0
    for entry in catalog():
        cmap = build_map(entry.A(), params=entry.constants(), z0=entry.z0)
        p = SwansonParams(1.0, 0.0, 0.0)
        spec = LadderSpec(entry.A(), p, None, cmap, entry.constants())
        derived = max(derived, commutator_residual(spec, x, relative=True))
        wrong = LadderSpec(entry.A(), p, None, cmap, entry.constants(), 0.0, -1.0)
        flipped = max(flipped, commutator_residual(wrong, x))
    ok = derived <= 1e-9 and flipped >= 0.5
    record(7, ok, f"derived B residual {derived:.1e} (<= 1e-9, scaled by max(1, |AA''|)); "
                  f"flipped sign residual {flipped:.3g} (>= 0.5)")
    assert ok


def test_criterion_8_semi_bounded(problems):
    parts, ok = [], True
    for name in SEMI_ROWS:
        p = problems(name)
        ox = pipeline.oracle_x_spectrum(p, 4, 20000)
        finding = pipeline.semi_bounded_finding(p, ox)
        ok &= len(ox.levels) == 5 and finding.passed
        parts.append(f"{name}: {finding.detail}")
    record(8, ok, "; ".join(parts))
    assert ok

