"""Semi-invariants and absolute invariants for equations with a
three-dimensional symmetry algebra.

Generic branch (a, d both nonzero): the 2x5 derivative matrix of (a, d) is
moved by a structure-group element to the form with second row
(0, 0, 0, -2d, 3d); the first three entries of the first row are the
semi-invariants s1, s2, s3.

Degenerate branch (d = 0, a nonzero): the same is done one order higher
for h = (a, a1, a2, a3), giving s11, s12, s13, s23, s33.
"""

from dataclasses import dataclass

import numpy as np
import sympy as sp

from .assumptions import Assumptions, TriBool
from .cartan import (
    EquivariantFunction,
    Section,
    a_scalar,
    connection_forms,
    covariant_derivative,
    f1_entries,
)
from .expressions import normalize
from .lie import AD_ACTION, H_ACTION, Ad_num, X1_num, group_element_num, rho_num
from .zerotest import zero_test

R = sp.Rational
NORMALIZATION_TOL = 1e-8


class NormalizationError(ArithmeticError):
    """The normalized matrix does not have the expected zero pattern."""


class PreconditionError(ValueError):
    pass


def _value(v):
    return float(np.asarray(getattr(v, "value", v)))


# -- generic branch -------------------------------------------------------


def f1_values(f, point):
    """Numeric 2x5 derivative matrix at `point`, plus (a, d)."""
    S = Section.jets(f, point, 5)
    rows = f1_entries(S)
    M = np.array([[_value(v) for v in row] for row in rows])
    return M, M[0, 4], M[1, 4] / 3.0


@dataclass
class GenericSemiInvariants:
    s1: float
    s2: float
    s3: float
    a: float
    d: float
    residual: float = 0.0

    # exponents (p, q) with s_i ~ |a|^p |d|^q under the scalings
    WEIGHTS = {"s1": (11 / 8, -1 / 8), "s2": (7 / 8, 3 / 8), "s3": (5 / 4, 1 / 4)}

    def scale_free(self, name):
        """s_i divided by the power of (a, d) of the same weight: an
        absolute invariant up to sign, used for vanishing decisions."""
        p, q = self.WEIGHTS[name]
        return getattr(self, name) / (abs(self.a) ** p * abs(self.d) ** q)


def normalization_element(M, d):
    c21, c22, c23 = M[1, 0], M[1, 1], M[1, 2]
    t = c21 / d
    u = -c22 / (5 * d)
    v = (-u * t * d + u * c21 - t * c22 - c23) / (4 * d)
    return group_element_num(t=t, u=u, v=v)


def act_on_f1(M, g):
    """g.A = X1 A X2^{-1}, with X2 the adjoint action on the quotient."""
    X2 = Ad_num(g)[:5, :5]
    return X1_num(g) @ M @ np.linalg.inv(X2)


def normalize_f1(M, a, d, tol=NORMALIZATION_TOL):
    M = np.asarray(M, dtype=float)
    if a == 0 or d == 0:
        raise PreconditionError("the generic normalization needs a != 0 and d != 0")
    g = normalization_element(M, d)
    N = act_on_f1(M, g)
    target = np.array([0, 0, 0, -2 * d, 3 * d])
    scale = max(1.0, float(np.abs(M).max()))
    residual = float(np.abs(N[1] - target).max()) / scale
    if residual > tol:
        raise NormalizationError(f"second row not normalized (residual {residual:.3g})")
    return GenericSemiInvariants(N[0, 0], N[0, 1], N[0, 2], a, d, residual)


def invariant_I1(s):
    if s.s1 == 0 or s.s2 == 0:
        raise PreconditionError("I1 needs s1 and s2 nonzero")
    return s.a * s.s3 / (s.s1 * s.s2)


def invariant_I2(s):
    """(I2, sign(a d), sign(s3))."""
    if s.s3 == 0:
        raise PreconditionError("I2 needs s3 nonzero")
    return s.a**5 * s.d / s.s3**4, int(np.sign(s.a * s.d)), int(np.sign(s.s3))


# -- degenerate branch ----------------------------------------------------

A_ALONE = EquivariantFunction([None], tuple(sp.Matrix([[m[0, 0]]]) for m in AD_ACTION))


def h_function(S, conn=None):
    """h = (a, a1, a2, a3) with its action."""
    conn = conn or connection_forms(S)
    a = a_scalar(S)
    F = EquivariantFunction([a], A_ALONE.action)
    cols = covariant_derivative(F, conn, S)
    return EquivariantFunction([a, cols[0][0], cols[1][0], cols[2][0]], H_ACTION), conn


def h1_entries(S):
    """4x8 matrix (columns u1*, u2*, u3* derivatives, then -e_j . h)."""
    h, conn = h_function(S)
    cols = covariant_derivative(h, conn, S)
    for j in range(5):
        cols.append([-v for v in h.act(j)])
    return [[cols[j][i] for j in range(8)] for i in range(4)]


def h1_values(f, point):
    S = Section.jets(f, point, 6)
    return np.array([[_value(v) for v in row] for row in h1_entries(S)])


def h1_relations(H):
    """Residuals of a21 = a12 - a3, a31 = a13, a32 = a23, a22 = 0."""
    return [
        H[2, 0] - (H[1, 1] - H[0, 2]),
        H[3, 0] - H[1, 2],
        H[3, 1] - H[2, 2],
        H[2, 1],
    ]


def h1_matrix(f, assumptions=None):
    """Symbolic 4x8 matrix; checks the bracket relations and a22 = 0."""
    a = assumptions or Assumptions()
    S = Section.symbolic(f)
    H = sp.Matrix([[normalize(sp.sympify(v)) for v in row] for row in h1_entries(S)])
    for k, r in enumerate(h1_relations(H)):
        t = zero_test(r, a)
        if t.status is TriBool.NONZERO:
            raise NormalizationError(f"relation {k} of the second derivatives fails ({t.reason})")
    return H


@dataclass
class DegenerateSemiInvariants:
    s11: float
    s12: float
    s13: float
    s23: float
    s33: float
    a: float
    residual: float = 0.0


def degenerate_element(H, a):
    a1, a2, a3 = H[0, 0], H[0, 1], H[0, 2]
    t = -a1 / (5 * a)
    u = a2 / a
    v = (5 * u * t * a + u * a1 - t * a2 - a3) / (4 * a)
    return group_element_num(t=t, u=u, v=v)


def act_on_h1(H, g):
    """g.phi = rho(g) phi Ad(g)^{-1}."""
    return rho_num(g) @ H @ Ad_num(np.linalg.inv(g))


def normalize_h1(H, a, tol=NORMALIZATION_TOL):
    H = np.asarray(H, dtype=float)
    if a == 0:
        raise PreconditionError("the degenerate normalization needs a != 0")
    g = degenerate_element(H, a)
    N = act_on_h1(H, g)
    s11, s12, s13 = N[1, 0], N[1, 1], N[1, 2]
    s23, s33 = N[2, 2], N[3, 2]
    expected = np.array(
        [
            [0, 0, 0, 2 * a, a, 0, 0, 0],
            [s11, s12, s13, 0, 0, -5 * a, 0, 0],
            [s12, 0, s23, 0, 0, 0, a, 0],
            [s13, s23, s33, 0, 0, 0, 0, -4 * a],
        ]
    )
    scale = max(1.0, float(np.abs(H).max()))
    residual = float(np.abs(N - expected).max()) / scale
    if residual > tol:
        raise NormalizationError(f"normalized second derivatives off pattern (residual {residual:.3g})")
    return DegenerateSemiInvariants(s11, s12, s13, s23, s33, a, residual)


def degenerate_invariants(s):
    """(I1, I2, sign(s12)) = (s11 s12 / a^3, s12^2 / (a s33), sign s12)."""
    return s.s11 * s.s12 / s.a**3, s.s12**2 / (s.a * s.s33), int(np.sign(s.s12))
