import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from cartan_ode.assumptions import Assumptions, TriBool, parse_box, parse_relation
from cartan_ode.evaluation import evaluate, interval_range
from cartan_ode.expressions import X, Y, Z, parse
from cartan_ode.zerotest import sample_points, zero_test


def status(text, a=None):
    return zero_test(parse(text), a).status


def test_identities_are_zero():
    assert status("sin(x)^2 + cos(x)^2 - 1") is TriBool.ZERO
    assert status("exp(x + y) - exp(x)*exp(y)") is TriBool.ZERO
    assert status("(1 + z^2)^(3/2) - (1 + z^2)*sqrt(1 + z^2)") is TriBool.ZERO
    assert status("0") is TriBool.ZERO


def test_nonzero_expressions():
    assert status("x - y") is TriBool.NONZERO
    assert status("exp(-z) - 1 + z") is TriBool.NONZERO
    assert status("3") is TriBool.NONZERO


def test_small_but_nonzero_is_detected():
    assert status("x/1000000") is TriBool.NONZERO


def test_abs_needs_a_sign():
    a_free = Assumptions.build(box={"z": ("-1", "1")})
    assert status("abs(z) - z", a_free) is TriBool.UNKNOWN
    a_pos = Assumptions.build(["z > 0"], box={"z": ("-1", "1")})
    assert status("abs(z) - z", a_pos) is TriBool.ZERO
    # the default box [1/2, 2] proves z > 0 by interval arithmetic
    assert status("abs(z) - z") is TriBool.ZERO


def test_fractional_power_of_negative_base_is_unknown():
    a = Assumptions.build(box={"z": ("-2", "-1")})
    assert status("z^(3/2) - 1", a) is TriBool.UNKNOWN
    assert "undeclared sign" in zero_test(parse("z^(3/2) - 1"), a).reason


def test_declared_sign_on_subexpression():
    a = Assumptions.build(["1 - z^2 > 0"], box={"z": ("0.1", "0.9")})
    assert status("abs(1 - z^2) - (1 - z^2)", a) is TriBool.ZERO
    assert status("abs(z^2 - 1) - (1 - z^2)", a) is TriBool.ZERO


def test_relation_and_box_parsing():
    e, s = parse_relation("z > 1")
    assert e == Z - 1 and s == 1
    e, s = parse_relation("sign(x) = -1")
    assert e == X and s == -1
    assert parse_box("z:0.1,0.9") == ("z", (sp.Rational(1, 10), sp.Rational(9, 10)))


def test_samples_are_rational_and_seeded():
    a = Assumptions.build(seed=7)
    p1 = sample_points(a, ["x", "y", "z"], 5)
    p2 = sample_points(a, ["x", "y", "z"], 5)
    assert p1 == p2
    assert all(isinstance(v, sp.Rational) for p in p1 for v in p.values())
    assert all(sp.Rational(1, 2) <= v <= 2 for p in p1 for v in p.values())
    assert sample_points(a.with_seed(8), ["x"], 5) != sample_points(a, ["x"], 5)


def test_samples_honour_declared_signs():
    a = Assumptions.build(["z - 1 > 0"])
    assert all(p["z"] > 1 for p in sample_points(a, ["x", "y", "z"], 10))


def test_evaluate_and_interval_range():
    assert abs(evaluate(parse("exp(x)*y"), {"x": 0, "y": 3}) - 3) < 1e-15
    lo, hi = interval_range(parse("z^2 - 1/4"), {Z: (sp.Rational(1), sp.Rational(2))})
    assert lo >= 0.75 - 1e-12 and hi <= 3.75 + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=6, max_size=6))
def test_expanded_polynomials_are_zero(c):
    p = (c[0] * X + c[1] * Y + c[2]) * (c[3] * Z + c[4] * X * Y + c[5])
    assert zero_test(p - sp.expand(p)).status is TriBool.ZERO
    q = p + sp.Rational(1, 1000) * X
    assert zero_test(q - sp.expand(p)).status is TriBool.NONZERO
