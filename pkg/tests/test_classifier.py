import json
from fractions import Fraction

import pytest

from cartan_ode.assumptions import Assumptions
from cartan_ode.classifier import classify, i1_3a, i1_3b, i2_3g, i2_table, rational_guess
from cartan_ode.expressions import parse

E3 = "(z*(1 - z^2) + {a}*abs(z^2 - 1)^(3/2))/x"
F3 = "(z*(1 + z^2) + {a}*(1 + z^2)^(3/2))/x"
G3 = "(2*(1 + z^2)*(x*z - y) + {a}*(1 + z^2)^(3/2))/(1 + x^2 + y^2)"

CASES = [
    ("z^4", None, "3a", {Fraction(4), Fraction(-1)}),
    ("z^(-1)", None, "3a", {Fraction(4), Fraction(-1)}),
    ("z^(3/2)", None, "3a", {Fraction(3, 2)}),
    ("(1 + z^2)^(3/2)*exp(-atan(z))", None, "3b", {Fraction(1), Fraction(-1)}),
    ("(1 + z^2)^(3/2)", None, "3b", {Fraction(0)}),
    ("exp(-z)", None, "3c", set()),
    ("(z^3 - z)/(2*x)", None, "3d+", set()),
    ("(-z^3 - z)/(2*x)", None, "3d-", set()),
    (E3.format(a=2), "z:0.1,0.9", "3e-", {Fraction(2), Fraction(-2)}),
    (E3.format(a=2), "z:1.2,2", "3e+", {Fraction(2), Fraction(-2)}),
    (E3.format(a="1/2"), "z:1.2,2", "3e+", {Fraction(1, 2), Fraction(-1, 2)}),
    (F3.format(a=2), None, "3f", {Fraction(2), Fraction(-2)}),
    (F3.format(a="1/2"), None, "3f", {Fraction(1, 2), Fraction(-1, 2)}),
    (G3.format(a=2), None, "3g", {Fraction(2), Fraction(-2)}),
    (G3.format(a=3), None, "3g", {Fraction(3), Fraction(-3)}),
]


@pytest.mark.parametrize("text, box, family, params", CASES)
def test_representatives(text, box, family, params):
    a = Assumptions.build(box=[box] if box else None)
    rep = classify(parse(text), a, with_dimension=False)
    assert rep.family == family
    assert set(rep.parameters) == params


def test_linearizable_cases_are_fast_and_complete():
    for text in ["0", "z^3", "y", "x*z^3"]:
        rep = classify(parse(text))
        assert rep.family == "linearizable"
        assert rep.dimension.dimension == 8


def test_dual_family_needs_dimension_three():
    rep = classify(parse(F3.format(a=1)))
    assert rep.family == "dual-cubic-3d-family"
    assert rep.dimension.dimension == 3


def test_non_constant_invariant_is_undetermined():
    rep = classify(parse("exp(-z) + z^4"))
    assert rep.family == "dim<=2-undetermined"
    assert rep.dimension.dimension == 2


def test_missing_sign_is_undecided_with_warning():
    rep = classify(parse("abs(z)^5"), Assumptions.build(box=["z:-1,1"]))
    assert rep.family == "undecided"
    assert any("undeclared sign" in w for w in rep.warnings)


def test_declared_sign_resolves_abs():
    rep = classify(parse("abs(z)^5"), Assumptions.build(["z > 0"], box=["z:-1,1"]), with_dimension=False)
    assert rep.family == "3a"


def test_report_json_is_deterministic_and_rational():
    r1 = classify(parse("exp(-z)"), Assumptions.build(seed=4)).to_json()
    r2 = classify(parse("exp(-z)"), Assumptions.build(seed=4)).to_json()
    assert json.dumps(r1, sort_keys=True, default=str) == json.dumps(r2, sort_keys=True, default=str)
    assert r1["invariants"]["I1"]["rational"] == "41/256"
    assert all("/" in v for p in r1["points"] for v in p.values())


def test_table_formulas():
    assert i1_3a(Fraction(4)) == i1_3a(Fraction(-1)) == Fraction(13, 80)
    assert i1_3b(Fraction(1)) == Fraction(13, 128)
    assert i2_table(Fraction(2), True) == Fraction(5, 144)
    assert i2_3g(Fraction(2)) == Fraction(2, 36)
    assert rational_guess(0.16015625) == Fraction(41, 256)
    assert rational_guess(0.1234567) is None
