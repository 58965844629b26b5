import math

import mpmath
import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from swanson.expr import (BinOp, Call, DomainError, Num, ParseError, Param, UnknownIdentifier, Var,
                          eval_jet, parse, to_text)
from swanson.profiles import catalog


def test_rational_tree():
    assert parse("1/(1+x^2)") == BinOp("/", Num(1.0), BinOp("+", Num(1.0), BinOp("^", Var(), Num(2.0))))


def test_function_power_tree():
    assert parse("sech(x)^2") == BinOp("^", Call("sech", Var()), Num(2.0))


def test_parameter_accepted():
    e = parse("((gamma+x^2)/(1+x^2))^2", ["gamma"])
    assert e.names() == {"gamma"}
    assert eval_jet(e, 0.0, {"gamma": 2.0}).value == pytest.approx(4.0)


def test_precedence_and_unary_minus():
    assert eval_jet(parse("-x^2"), 3.0).value == -9.0
    assert eval_jet(parse("2^3^2"), 0.0).value == 512.0
    assert eval_jet(parse("1-2-3"), 0.0).value == -4.0
    assert eval_jet(parse("8/4/2"), 0.0).value == 1.0
    assert eval_jet(parse("2*-x"), 1.5).value == -3.0


@pytest.mark.parametrize("text, x, expected", [
    ("x^2", 3.0, (9.0, 6.0, 2.0)),
    ("sqrt(1+x^2)", 1.0, (math.sqrt(2), 1 / math.sqrt(2), 2 ** -1.5)),
    ("cosh(x)", 0.0, (1.0, 0.0, 1.0)),
])
def test_jet_values(text, x, expected):
    j = eval_jet(parse(text), x)
    assert (j.value, j.d1, j.d2) == pytest.approx(expected, rel=1e-12, abs=1e-15)


def test_jet_broadcasts_constants_over_arrays():
    j = eval_jet(parse("3"), np.linspace(0, 1, 4))
    assert j.value.shape == (4,) and np.all(j.d1 == 0)


@pytest.mark.parametrize("text", ["", "x +", "(x", "x)", "2 $ x", "sin x", "1e", "x^"])
def test_malformed(text):
    with pytest.raises(ParseError):
        parse(text)


def test_unknown_identifier_offset():
    with pytest.raises(UnknownIdentifier) as err:
        parse("1 + foo(x)")
    assert err.value.offset == 4
    with pytest.raises(UnknownIdentifier):
        parse("x + gamma")


def test_domain_errors():
    with pytest.raises(DomainError):
        eval_jet(parse("log(x)"), -1.0)
    with pytest.raises(DomainError):
        eval_jet(parse("1/x"), 0.0)


def test_unbound_parameter():
    with pytest.raises(KeyError):
        eval_jet(parse("gamma*x", ["gamma"]), 1.0)


def _catalog_texts():
    out = []
    for e in catalog():
        for text in (e.mass, e.coefficient, e.z_closed, e.curvature_closed):
            out.append((text, e.param_names, dict(e.defaults)))
    return out


@pytest.mark.parametrize("text, names, _", _catalog_texts())
def test_print_round_trip(text, names, _):
    e = parse(text, names)
    assert parse(to_text(e), names) == e


def _mp_function(text, params):
    """The formula as a 40-digit mpmath callable (reference only)."""
    local = {name: sp.Float(value, 40) for name, value in params.items()}
    expr = sp.sympify(text.replace("^", "**"), locals=dict(local, sech=sp.sech, erf=sp.erf))
    return sp.lambdify(sp.Symbol("x"), expr, modules="mpmath")


def test_derivatives_match_central_differences():
    # central differences at h = 1e-5 are evaluated in 40-digit arithmetic so
    # the reference carries truncation error only, not float64 cancellation
    rng = np.random.default_rng(20240611)
    pool = _catalog_texts()
    refs = {text: _mp_function(text, params) for text, _, params in pool}
    h = mpmath.mpf("1e-5")
    with mpmath.workdps(40):
        for _ in range(1000):
            text, names, params = pool[rng.integers(len(pool))]
            x = rng.uniform(-2.0, 2.0)
            j = eval_jet(parse(text, names), x, params)
            f, xm = refs[text], mpmath.mpf(x)
            fd1 = float((f(xm + h) - f(xm - h)) / (2 * h))
            fd2 = float((f(xm + h) - 2 * f(xm) + f(xm - h)) / h**2)
            assert abs(j.d1 - fd1) <= 1e-7 * (1 + abs(j.d1)), (text, x)
            assert abs(j.d2 - fd2) <= 1e-5 * (1 + abs(j.d2)), (text, x)


_FUNCS = ["sin", "cos", "exp", "sinh", "cosh", "tanh", "atan", "asinh", "sech", "erf"]


@st.composite
def smooth_expressions(draw, depth=3):
    if depth == 0 or draw(st.booleans()):
        return draw(st.sampled_from(["x", "0.5", "2", "(1+x^2)"]))
    kind = draw(st.sampled_from(["call", "+", "*", "-"]))
    if kind == "call":
        return f"{draw(st.sampled_from(_FUNCS))}({draw(smooth_expressions(depth=depth - 1))})"
    a = draw(smooth_expressions(depth=depth - 1))
    b = draw(smooth_expressions(depth=depth - 1))
    return f"({a}){kind}({b})"


@settings(max_examples=200, deadline=None)
@given(smooth_expressions(), st.floats(-1.5, 1.5))
def test_random_expressions_first_derivative(text, x):
    e = parse(text)
    j = eval_jet(e, x)
    h = 1e-6 * (1 + abs(x))
    fd = (eval_jet(e, x + h).value - eval_jet(e, x - h).value) / (2 * h)
    scale = 1 + abs(j.d1) + abs(j.value)
    assert abs(j.d1 - fd) <= 1e-6 * scale


def test_param_node():
    assert parse("a*x", ["a"]) == BinOp("*", Param("a"), Var())
