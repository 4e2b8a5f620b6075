import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from cartan_ode.expressions import (
    ParseError,
    X,
    Y,
    Z,
    differentiate,
    normalize,
    parse,
    to_text,
    total_derivative,
)


def test_parse_basic_grammar():
    assert parse("x + y*z") == X + Y * Z
    assert parse("2^3^2") == 512  # right associative
    assert parse("x^-1") == 1 / X
    assert parse("-z^2") == -(Z**2)
    assert parse("p") == Z
    assert parse("1.5*x") == sp.Rational(3, 2) * X


def test_parse_functions():
    assert parse("exp(-z)") == sp.exp(-Z)
    assert parse("atan(z)") == sp.atan(Z)
    assert parse("abs(x)") == sp.Abs(X)


@pytest.mark.parametrize(
    "text, offset",
    [("x + ", 4), ("x ) y", 2), ("foo(x)", 0), ("x $ y", 2), ("(x + y", 6)],
)
def test_parse_errors_carry_offset(text, offset):
    with pytest.raises(ParseError) as err:
        parse(text)
    assert err.value.offset == offset


def test_normalize_cancels_rational_functions():
    assert normalize((X**2 - 1) / (X - 1)) == X + 1
    assert normalize(X * Y / Y) == X


def test_normalize_keeps_radicals_compact():
    e = (1 + Z**2) ** sp.Rational(3, 2)
    assert sp.count_ops(normalize(e)) <= sp.count_ops(e)


def test_differentiate_and_total_derivative():
    assert differentiate(parse("x^2*y"), "x") == 2 * X * Y
    assert total_derivative(Y, parse("exp(-z)")) == Z
    assert total_derivative(Z, parse("exp(-z)")) == sp.exp(-Z)
    with pytest.raises(ValueError):
        differentiate(X, "w")


def test_to_text_roundtrip_examples():
    for s in ["exp(-z)", "(z^3 - z)/(2*x)", "(1 + z^2)^(3/2)*exp(-atan(z))", "x^-2 + y"]:
        e = parse(s)
        assert parse(to_text(e)) == e


_leaves = st.sampled_from(["x", "y", "z", "1", "2", "3/2"])


def _combine(children):
    ops = st.sampled_from(["+", "-", "*"])
    return st.one_of(
        st.tuples(children, ops, children).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        children.map(lambda c: f"exp({c})"),
        children.map(lambda c: f"({c})^2"),
    )


expressions = st.recursive(_leaves, _combine, max_leaves=6)


@settings(max_examples=60, deadline=None)
@given(expressions)
def test_to_text_roundtrip_property(text):
    e = parse(text)
    assert sp.simplify(parse(to_text(e)) - e) == 0
