"""The Lie algebra sl(3) and the lower-triangular structure group.

Basis order used everywhere (u1, u2, u3, e1, ..., e5):

    u1 = E21, u2 = E32, u3 = E31,
    e1 = diag(-1/3, 2/3, -1/3), e2 = diag(-1/3, -1/3, 2/3),
    e3 = E12, e4 = E23, e5 = E13.

The e's span the isotropy algebra g; e3, e4, e5 span the ideal g1.  Group
elements are upper-triangular matrices [[x, t, v], [0, y, u], [0, 0, z]].
"""

import numpy as np
import sympy as sp

R = sp.Rational
NAMES = ("u1", "u2", "u3", "e1", "e2", "e3", "e4", "e5")


def _E(i, j):
    m = sp.zeros(3)
    m[i - 1, j - 1] = 1
    return m


BASIS = (
    _E(2, 1),
    _E(3, 2),
    _E(3, 1),
    sp.diag(-R(1, 3), R(2, 3), -R(1, 3)),
    sp.diag(-R(1, 3), -R(1, 3), R(2, 3)),
    _E(1, 2),
    _E(2, 3),
    _E(1, 3),
)


def coords(M):
    """Coordinates of a traceless 3x3 matrix in BASIS."""
    return [M[1, 0], M[2, 1], M[2, 0], M[1, 1] - M[0, 0], M[2, 2] - M[0, 0], M[0, 1], M[1, 2], M[0, 2]]


def from_coords(c):
    return sum((ci * b for ci, b in zip(c, BASIS)), sp.zeros(3))


def ad_matrix(k):
    """Matrix of ad(B_k): column j holds the coordinates of [B_k, B_j]."""
    b = BASIS[k]
    return sp.Matrix([coords(b * bj - bj * b) for bj in BASIS]).T


AD = tuple(ad_matrix(k) for k in range(8))
AD_NUM = tuple(np.array(m.tolist(), dtype=float) for m in AD)


def group_element(x=1, y=1, z=1, t=0, u=0, v=0):
    return sp.Matrix([[x, t, v], [0, y, u], [0, 0, z]])


def params(g):
    """(x, y, z, t, u, v) of an upper-triangular matrix."""
    return g[0, 0], g[1, 1], g[2, 2], g[0, 1], g[1, 2], g[0, 2]


def Ad(g):
    """8x8 matrix of Ad(g) on sl(3) (columns = images of the basis)."""
    gi = g.inv()
    return sp.Matrix([coords(g * b * gi) for b in BASIS]).T


def X1(g):
    """Action of g on the (a, d) plane."""
    x, y, z = params(g)[:3]
    return sp.diag(x**3 / (y**2 * z), x * y**2 / z**3)


def X2(g):
    """Ad(g) on the quotient by g1 (first five basis vectors); g1 is
    Ad-invariant so this is the leading 5x5 block."""
    return Ad(g)[:5, :5]


def X2_printed(g):
    """The quotient action exactly as it is usually displayed.  It agrees
    with X2 except at entry (3, 3), printed as z/(xy) where the adjoint
    action gives z/x; at x = y = z = 1 (the only place it is used for the
    normalization) the two coincide."""
    x, y, z, t, u, v = params(g)
    return sp.Matrix(
        [
            [y / x, 0, u / x, 0, 0],
            [0, z / y, -z * t / (x * y), 0, 0],
            [0, 0, z / (x * y), 0, 0],
            [-2 * t / x, u / y, -(y * v + u * t) / (x * y), 1, 0],
            [-t / x, -u / y, (-2 * y * v + u * t) / (x * y), 0, 1],
        ]
    )


def rho(g):
    """Action on (a, a1, a2, a3) used when d vanishes identically."""
    x, y, z, t, u, v = params(g)
    return sp.Matrix(
        [
            [x**3 / (y**2 * z), 0, 0, 0],
            [5 * x**3 * t / (y**3 * z), x**4 / (y**3 * z), 0, 0],
            [-(x**3) * u / (y**2 * z**2), 0, x**3 / (y * z**2), 0],
            [x**3 * (4 * y * v - 5 * u * t) / (y**3 * z**2), -(x**4) * u / (y**3 * z**2), x**3 * t / (y**2 * z**2), x**4 / (y**2 * z**2)],
        ]
    )


def differential(rep, k):
    """d/deps rep(I + eps B_k) at eps = 0 for an isotropy basis vector
    (k in 3..7)."""
    eps = sp.Symbol("eps")
    g = sp.eye(3) + eps * BASIS[k]
    return sp.diff(rep(g), eps).subs(eps, 0)


# the e-actions on (a, d) and on (a, a1, a2, a3): e.F = d rep(e) F
AD_ACTION = tuple(differential(X1, k) for k in range(3, 8))
H_ACTION = tuple(differential(rho, k) for k in range(3, 8))


_BASIS_NUM = tuple(np.array(b.tolist(), dtype=float) for b in BASIS)


def group_element_num(x=1.0, y=1.0, z=1.0, t=0.0, u=0.0, v=0.0):
    return np.array([[x, t, v], [0.0, y, u], [0.0, 0.0, z]], dtype=float)


def Ad_num(g):
    """Numeric Ad(g) (8x8, columns = images of the basis)."""
    gi = np.linalg.inv(g)
    return np.array([coords(g @ b @ gi) for b in _BASIS_NUM], dtype=float).T


def rho_num(g):
    x, y, z, t, u, v = g[0, 0], g[1, 1], g[2, 2], g[0, 1], g[1, 2], g[0, 2]
    return np.array(
        [
            [x**3 / (y**2 * z), 0, 0, 0],
            [5 * x**3 * t / (y**3 * z), x**4 / (y**3 * z), 0, 0],
            [-(x**3) * u / (y**2 * z**2), 0, x**3 / (y * z**2), 0],
            [x**3 * (4 * y * v - 5 * u * t) / (y**3 * z**2), -(x**4) * u / (y**3 * z**2), x**3 * t / (y**2 * z**2), x**4 / (y**2 * z**2)],
        ]
    )


def X1_num(g):
    x, y, z = g[0, 0], g[1, 1], g[2, 2]
    return np.diag([x**3 / (y**2 * z), x * y**2 / z**3])
