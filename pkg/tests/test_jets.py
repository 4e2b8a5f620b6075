import math

import numpy as np
import pytest
import sympy as sp

from cartan_ode.expressions import X, Y, Z, parse
from cartan_ode.jets import jet_space, to_jet

POINT = {"x": 1.3, "y": 0.7, "z": 0.6}

EXPRS = [
    "x*y^2*z^3",
    "exp(-z)*sin(x*y)",
    "(1 + z^2)^(3/2)*exp(-atan(z))",
    "ln(1 + x^2 + y^2)/(2 + z)",
    "z^(5/2)/x",
    "cos(x - y*z) + sqrt(x)",
]


@pytest.mark.parametrize("text", EXPRS)
def test_jet_coefficients_match_sympy_derivatives(text):
    f = parse(text)
    order = 6
    space = jet_space(("x", "y", "z"), order)
    jet = to_jet(f, POINT, space)
    subs = {X: sp.Float(POINT["x"], 30), Y: sp.Float(POINT["y"], 30), Z: sp.Float(POINT["z"], 30)}
    for mono in space.monomials:
        if sum(mono) > 4:
            continue
        d = f
        for s, k in zip((X, Y, Z), mono):
            if k:
                d = sp.diff(d, s, k)
        exact = float(d.evalf(subs=subs, n=30))
        fact = math.prod(math.factorial(k) for k in mono)
        got = jet.c[space.index[mono]] * fact
        assert got == pytest.approx(exact, rel=1e-9, abs=1e-9)


def test_jet_arithmetic_identities():
    space = jet_space(("x", "y", "z"), 5)
    u = to_jet(parse("x + y*z"), POINT, space)
    assert np.allclose((u.exp() * (-u).exp()).c, space.constant(1.0).c, atol=1e-12)
    assert np.allclose((u.power(sp.Rational(1, 2)) ** 2).c, u.c, atol=1e-12)
    assert np.allclose((u.sin() ** 2 + u.cos() ** 2).c, space.constant(1.0).c, atol=1e-12)


def test_jet_diff_lowers_order():
    space = jet_space(("x", "y", "z"), 4)
    j = to_jet(parse("x^3*z"), POINT, space)
    dj = j.diff("x")
    assert dj.order == 3
    assert dj.value == pytest.approx(3 * 1.3**2 * 0.6)
