import math

import numpy as np
import pytest

from swanson.errors import ConfigError
from swanson.expr import eval_jet, parse
from swanson.mapping import build_map
from swanson.model import SwansonParams
from swanson.potential import PotentialGrid, consistency_report, v_eff_general, v_eff_reduced
from swanson.profiles import catalog

PARAMS = [SwansonParams(1.0, 0.0, 0.0), SwansonParams(1.4, 0.2, 0.2), SwansonParams(1.0, 0.2, -0.2)]


def test_general_constant_mass():
    A = parse("1")
    v = v_eff_general(A, parse("x/2"), SwansonParams(1, 0, 0), 2.0)
    assert v == pytest.approx(1.0, abs=1e-14)


def test_general_scaled_oscillator():
    A = parse(f"{1 / math.sqrt(2)!r}")
    B = parse(f"x/{math.sqrt(2)!r}")
    assert v_eff_general(A, B, SwansonParams(1.4, 0.2, 0.2), 1.0) == pytest.approx(0.9, abs=1e-12)


@pytest.mark.parametrize("p", PARAMS)
def test_constant_mass_quadratic_potential(p):
    A = parse(f"{1 / math.sqrt(2)!r}")
    x = np.linspace(-4, 4, 33)
    v = v_eff_general(A, None, p, x, cmap=build_map(A))
    jones = 0.5 * (p.w**2 - 4 * p.alpha * p.beta) / (p.w - p.alpha - p.beta) * x**2
    assert np.max(np.abs(v - jones)) <= 1e-12


def test_reduced_values_at_origin():
    p = PARAMS[0]
    assert v_eff_reduced(parse("sqrt(1+x^2)"), p, 0.0, 0.0) == pytest.approx(-0.5)
    assert v_eff_reduced(parse("cosh(x)"), p, 0.0, 0.0) == pytest.approx(-0.5)
    assert v_eff_reduced(parse("exp(x^2)"), p, 0.0, 0.0) == pytest.approx(-1.0)
    A = parse("sqrt(1+x^2)")
    assert v_eff_general(A, None, p, 0.0, cmap=build_map(A)) == pytest.approx(-0.5, abs=1e-14)


def test_reduced_constant_mass():
    p = PARAMS[2]
    t = np.linspace(-3, 3, 7)
    assert v_eff_reduced(parse("1"), p, t, t) == pytest.approx(p.wtilde**2 * t**2)


@pytest.mark.parametrize("p", PARAMS, ids=["zero", "equal", "opposite"])
@pytest.mark.parametrize("entry", catalog(), ids=lambda e: e.name)
def test_reduced_matches_closed_form(entry, p):
    cmap = entry.build_map()
    c = entry.constants()
    x = np.linspace(-3, 3, 50)
    z_ref = eval_jet(entry.z_expr(), x, c).value
    ref = eval_jet(entry.curvature_expr(), x, c).value + p.wtilde**2 * z_ref**2
    got = v_eff_reduced(entry.A(), p, x, cmap.z(x), c)
    assert np.max(np.abs(got - ref) / np.maximum(1, np.abs(ref))) <= 1e-9


@pytest.mark.parametrize("entry", catalog(), ids=lambda e: e.name)
def test_general_and_reduced_agree(entry):
    cmap = entry.build_map()
    x = np.linspace(-3, 3, 100)
    for p in PARAMS:
        assert consistency_report(entry.A(), p, x, cmap, relative=True) <= 1e-9
        assert consistency_report(entry.A(), p, np.linspace(-2, 2, 100), cmap) <= 1e-9


def test_flipped_sign_is_inconsistent():
    A = parse("sqrt(1+x^2)")
    err = consistency_report(A, PARAMS[0], np.linspace(-2, 2, 41), build_map(A), b_sign=-1.0)
    assert err > 0.1


def test_general_form_requires_unit_commutator():
    A = parse("1")
    with pytest.raises(ConfigError):
        v_eff_general(A, None, SwansonParams.from_couplings(0, 0, k=2.0), 0.0, cmap=build_map(A))


def test_potential_grid():
    A = parse("cosh(x)")
    cmap = build_map(A)
    grid = PotentialGrid.tabulate(cmap, PARAMS[0], np.linspace(-1, 1, 5))
    rows = list(grid.rows())
    assert len(rows) == 5
    assert rows[2][2] == pytest.approx(-0.5)
