import pytest
import sympy as sp

from cartan_ode.assumptions import Assumptions, TriBool
from cartan_ode.cartan import (
    OneForm,
    Section,
    a_scalar,
    classify_flags,
    connection_forms,
    connection_matrix,
    curvature_scalars,
)
from cartan_ode.cubic import CubicForm, UndecidableError, cubic_coefficients
from cartan_ode.expressions import X, Y, Z, parse
from cartan_ode.zerotest import zero_test

COORDS = (X, Y, Z)


def test_flat_equation_has_zero_curvature():
    assert curvature_scalars(parse("0")).as_tuple() == (0, 0, 0, 0)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("exp(-z)", ("-exp(-3*z)/6", "exp(-3*z)/2", "-exp(-2*z)/2", "-exp(-z)/6")),
        ("z^4", ("-4*z^8", "-32*z^7", "32*z^3", "-4")),
        ("z^3", ("0", "0", "0", "0")),
        ("y", ("0", "0", "0", "0")),
    ],
)
def test_curvature_scalar_examples(text, expected):
    got = curvature_scalars(parse(text)).as_tuple()
    for g, e in zip(got, expected):
        assert sp.simplify(g - parse(e)) == 0


def _coframe(f):
    """theta1 = dx, theta2 = dy - z dx, theta3 = dz - f dx as (dx, dy, dz) rows."""
    return {1: [1, 0, 0], 2: [-Z, 1, 0], 3: [-f, 0, 1]}


def _one(of, th):
    out = [0, 0, 0]
    for c, k in zip(of.as_tuple(), (1, 2, 3)):
        for i in range(3):
            out[i] += c * th[k][i]
    return out


def _d(w):
    o = {}
    for i in range(3):
        for j in range(3):
            if i != j:
                key = tuple(sorted((i, j)))
                s = 1 if j < i else -1
                o[key] = o.get(key, 0) + s * sp.diff(w[i], COORDS[j])
    return o


def _wedge(a, b):
    o = {}
    for i in range(3):
        for j in range(3):
            if i != j:
                key = tuple(sorted((i, j)))
                s = 1 if i < j else -1
                o[key] = o.get(key, 0) + s * a[i] * b[j]
    return o


@pytest.mark.parametrize("text", ["exp(-z)", "x*y*z^2 + y^2", "sin(x)*z^5 + exp(y)*z^2", "z^4/(1 + x^2) + y*z"])
def test_structure_equation(text):
    """d(omega) + omega ^ omega, expanded in coordinates with sympy, has
    only the a, b, c, d components."""
    f = parse(text)
    conn = connection_matrix(f)
    th = _coframe(f)
    W = {k: _one(v, th) for k, v in conn.entries.items()}
    cs = curvature_scalars(f)
    t1, t2, t3 = (_one(OneForm(*e), th) for e in ((1, 0, 0), (0, 1, 0), (0, 0, 1)))
    t12, t23 = _wedge(t1, t2), _wedge(t2, t3)
    expected = {
        (1, 2): {k: cs.a * t12[k] for k in t12},
        (2, 3): {k: cs.d * t23[k] for k in t23},
        (1, 3): {k: cs.b * t12[k] + cs.c * t23[k] for k in t12},
    }
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            O = _d(W[i, j])
            for k in (1, 2, 3):
                for key, v in _wedge(W[i, k], W[k, j]).items():
                    O[key] = O.get(key, 0) + v
            exp = expected.get((i, j), {})
            for key in O:
                assert sp.simplify(O[key] - exp.get(key, 0)) == 0, (i, j, key)


@pytest.mark.parametrize("text", ["exp(-z)", "x*y*z^4 + sin(y)", "(1 + z^2)^(3/2)/x"])
def test_connection_is_trace_free(text):
    tr = connection_matrix(parse(text)).trace()
    assert all(zero_test(c).status is TriBool.ZERO for c in tr.as_tuple())


def test_jet_backend_matches_symbolic_scalars():
    f = parse("x*z^4 + exp(y*z)")
    pt = {"x": 1.1, "y": 0.4, "z": 0.7}
    sym = a_scalar(Section.symbolic(f))
    num = a_scalar(Section.jets(f, pt, 4)).value
    assert float(num) == pytest.approx(float(sym.subs({X: 1.1, Y: 0.4, Z: 0.7})), rel=1e-10)


def test_b_is_a_z_derivative_by_finite_differences():
    f = parse("x*z^4 + exp(y*z)")
    cs = curvature_scalars(f)
    h = 1e-5
    pt = {X: 1.1, Y: 0.4}
    a_plus = float(cs.a.subs({**pt, Z: 0.7 + h}))
    a_minus = float(cs.a.subs({**pt, Z: 0.7 - h}))
    assert float(cs.b.subs({**pt, Z: 0.7})) == pytest.approx((a_plus - a_minus) / (2 * h), rel=1e-6)


def test_flags():
    fl = classify_flags(parse("z^3"))
    assert (fl.is_cubic, fl.is_dual_cubic, fl.is_linearizable) == (True, True, True)
    fl = classify_flags(parse("exp(-z)"))
    assert (fl.is_cubic, fl.is_dual_cubic, fl.is_linearizable) == (False, False, False)
    fl = classify_flags(parse("(z^3 - z)/(2*x)"))
    assert fl.is_cubic is True and fl.is_dual_cubic is False


def test_connection_forms_jet_section_agrees():
    f = parse("z^4*y")
    pt = {"x": 1.2, "y": 0.9, "z": 0.5}
    sym = connection_matrix(f)
    jet = connection_forms(Section.jets(f, pt, 4))
    subs = {X: 1.2, Y: 0.9, Z: 0.5}
    for key, form in sym.entries.items():
        for cs, cj in zip(form.as_tuple(), jet.entries[key].as_tuple()):
            vj = float(getattr(cj, "value", cj))
            assert vj == pytest.approx(float(sp.sympify(cs).subs(subs)), abs=1e-12)


def test_cubic_coefficients():
    c = cubic_coefficients(parse("x*z^3 + y*z + 1"))
    assert c == CubicForm.of(X, 0, Y, 1)
    assert cubic_coefficients(parse("exp(-z)")) is None
    assert cubic_coefficients(parse("z^2*exp(x)")).B == sp.exp(X)
    assert sp.simplify(c.rhs() - parse("x*z^3 + y*z + 1")) == 0


def test_cubic_coefficients_undecidable_raises():
    a = Assumptions.build(box={"z": ("-1", "1")})
    with pytest.raises(UndecidableError):
        cubic_coefficients(parse("abs(z)^3"), a)
