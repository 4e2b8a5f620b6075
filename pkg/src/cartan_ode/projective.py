"""Projective connection of a cubic equation, its geodesics and the
development of plane curves into RP^2.

A one-form on the plane is a pair (p, q) meaning p dx + q dy.  The
connection matrix in the gauge omega^1 = dx, omega^2 = dy is

    [[0,        w_1,    w_2   ],
     [dx,       w^1_1,  w^1_2 ],
     [dy,       w^2_1, -w^1_1 ]]

where w^i_j sits in row i, column j.
"""

from dataclasses import dataclass

import numpy as np
import sympy as sp
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from .cubic import CubicForm
from .expressions import X, Y, normalize, parse, symbol

R = sp.Rational
DEFAULT_STEP = 1e-3
DET_DRIFT = 1e-6


class DevelopmentError(RuntimeError):
    def __init__(self, message, t):
        super().__init__(f"{message} at t = {t:.6g}")
        self.t = t


class NotAGraphError(ValueError):
    pass


def _pair(p, q):
    return (normalize(sp.sympify(p)), normalize(sp.sympify(q)))


@dataclass(frozen=True)
class ProjectiveConn:
    """Coefficient pairs (dx, dy) of w^1_1, w^1_2, w^2_1, w_1, w_2."""

    w11: tuple
    w12: tuple
    w21: tuple
    w1: tuple
    w2: tuple

    @property
    def w22(self):
        return (-self.w11[0], -self.w11[1])

    def entries(self):
        return {"w^1_1": self.w11, "w^1_2": self.w12, "w^2_1": self.w21, "w_1": self.w1, "w_2": self.w2}

    def matrix(self):
        """Symbolic 3x3 matrix of one-forms as (dx part, dy part)."""
        z = (sp.S.Zero, sp.S.Zero)
        return [[z, self.w1, self.w2], [(sp.S.One, sp.S.Zero), self.w11, self.w12], [(sp.S.Zero, sp.S.One), self.w21, self.w22]]

    def numeric(self):
        """Vectorized evaluator (x, y, xdot, ydot) -> 3x3 matrices."""
        return _NumericConn(self)


class _NumericConn:
    def __init__(self, conn):
        forms = [conn.w1, conn.w2, conn.w11, conn.w12, conn.w21]
        flat = [c for form in forms for c in form]
        self._fn = sp.lambdify((X, Y), flat, "numpy")

    def __call__(self, x, y, xd, yd):
        v = [np.broadcast_to(np.asarray(c, dtype=float), np.shape(x)) for c in self._fn(x, y)]
        ev = [v[2 * k] * xd + v[2 * k + 1] * yd for k in range(5)]
        w1, w2, w11, w12, w21 = ev
        out = np.zeros(np.shape(x) + (3, 3))
        out[..., 0, 1], out[..., 0, 2] = w1, w2
        out[..., 1, 0], out[..., 1, 1], out[..., 1, 2] = xd, w11, w12
        out[..., 2, 0], out[..., 2, 1], out[..., 2, 2] = yd, w21, -w11
        return out


def build_projective_connection(c, printed=False):
    """Connection whose geodesics satisfy y'' = A z^3 + B z^2 + C z + D.

    The dy coefficient of w_1 contains B C / 9; `printed=True` uses B^2 / 9
    instead, which violates the vanishing of the diagonal curvature unless
    B (B - C) = 0.
    """
    A, B, C, D = (sp.sympify(v) for v in c.as_tuple())
    d = sp.diff
    w11 = _pair(C / 3, B / 3)
    w12 = _pair(B / 3, A)
    w21 = _pair(-D, -C / 3)
    quad = B**2 if printed else B * C
    w1 = _pair(
        d(D, Y) - R(1, 3) * d(C, X) - R(2, 3) * B * D + R(2, 9) * C**2,
        R(1, 3) * d(C, Y) - R(1, 3) * d(B, X) + R(1, 9) * quad - A * D,
    )
    w2 = _pair(
        R(1, 3) * d(C, Y) - R(1, 3) * d(B, X) + R(1, 9) * B * C - A * D,
        R(1, 3) * d(B, Y) - d(A, X) + R(2, 9) * B**2 - R(2, 3) * A * C,
    )
    return ProjectiveConn(w11, w12, w21, w1, w2)


def geodesic_equation(conn):
    """(A, B, C, D) with y'' = b^1_2 z^3 + (2 b^1_1 + a^1_2) z^2
    + (2 a^1_1 - b^2_1) z - a^2_1 (a = dx part, b = dy part)."""
    a11, b11 = conn.w11
    a12, b12 = conn.w12
    a21, b21 = conn.w21
    return CubicForm.of(b12, 2 * b11 + a12, 2 * a11 - b21, -a21)


def curvature(conn):
    """dw + w ^ w as a 3x3 table of dx^dy coefficients."""
    M = conn.matrix()

    def wedge(a, b):
        return a[0] * b[1] - a[1] * b[0]

    def dform(a):
        return sp.diff(a[1], X) - sp.diff(a[0], Y)

    return sp.Matrix(3, 3, lambda i, j: normalize(dform(M[i][j]) + sum(wedge(M[i][k], M[k][j]) for k in range(3))))


# -- curves ----------------------------------------------------------------


class PlaneCurve:
    """A parametrized plane curve on [t0, t1].

    Built from closed-form expressions in t, or from samples (t, x, y)
    with optional velocity samples; sampled curves are interpolated by
    (Hermite) cubic splines so that integrators can evaluate between
    samples.
    """

    def __init__(self, t0, t1, fn, grid=None, second=None):
        self.t0, self.t1 = float(t0), float(t1)
        self._fn = fn  # t -> (x, y, xd, yd)
        self._second = second  # t -> (xdd, ydd)
        self.grid = grid

    def __call__(self, t):
        return self._fn(np.asarray(t, dtype=float))

    def acceleration(self, t):
        return self._second(np.asarray(t, dtype=float))

    @classmethod
    def from_expressions(cls, x_expr, y_expr, t0, t1, param="t"):
        t = symbol(param)
        xe, ye = (parse(e, (param,)) if isinstance(e, str) else sp.sympify(e) for e in (x_expr, y_expr))
        funcs = [xe, ye, sp.diff(xe, t), sp.diff(ye, t)]
        f = sp.lambdify(t, funcs, "numpy")
        g = sp.lambdify(t, [sp.diff(xe, t, 2), sp.diff(ye, t, 2)], "numpy")

        def fn(tt):
            return tuple(np.broadcast_to(np.asarray(v, dtype=float), np.shape(tt)) for v in f(tt))

        def second(tt):
            return tuple(np.broadcast_to(np.asarray(v, dtype=float), np.shape(tt)) for v in g(tt))

        return cls(t0, t1, fn, None, second)

    @classmethod
    def from_samples(cls, t, x, y, xd=None, yd=None):
        t = np.asarray(t, dtype=float)
        if t.ndim != 1 or t.size < 4 or np.any(np.diff(t) <= 0):
            raise ValueError("sample times must be strictly increasing (at least 4 samples)")
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        if xd is None or yd is None:
            sx, sy = CubicSpline(t, x), CubicSpline(t, y)
        else:
            sx = CubicHermiteSpline(t, x, np.asarray(xd, dtype=float))
            sy = CubicHermiteSpline(t, y, np.asarray(yd, dtype=float))
        dx, dy = sx.derivative(), sy.derivative()

        def fn(tt):
            return sx(tt), sy(tt), dx(tt), dy(tt)

        if xd is None or yd is None:
            ddx, ddy = sx.derivative(2), sy.derivative(2)

            def second(tt):
                return ddx(tt), ddy(tt)

        else:
            # derivative of a spline through the velocity samples
            gx = CubicSpline(t, np.asarray(xd, dtype=float)).derivative()
            gy = CubicSpline(t, np.asarray(yd, dtype=float)).derivative()

            def second(tt):
                return gx(tt), gy(tt)

        return cls(t[0], t[-1], fn, t, second)

    @classmethod
    def from_csv(cls, path):
        data = np.loadtxt(path, delimiter=",", ndmin=2, comments="#")
        if data.shape[1] not in (3, 5):
            raise ValueError("curve CSV rows must be t,x,y or t,x,y,xdot,ydot")
        if data.shape[1] == 5:
            return cls.from_samples(*data.T)
        return cls.from_samples(data[:, 0], data[:, 1], data[:, 2])

    def times(self, step):
        n = max(1, int(round((self.t1 - self.t0) / step)))
        return np.linspace(self.t0, self.t1, n + 1)


@dataclass
class DevelopedCurve:
    t: np.ndarray
    h: np.ndarray  # (n, 3, 3)
    points: np.ndarray  # (n, 3) unit homogeneous coordinates
    max_det_drift: float

    def collinearity(self, max_points=25):
        return collinearity(self.points, max_points)


def unit_homogeneous(p):
    """Scale rows to unit norm with the first nonzero coordinate positive."""
    p = np.asarray(p, dtype=float)
    p = p / np.linalg.norm(p, axis=-1, keepdims=True)
    idx = np.argmax(np.abs(p) > 1e-12, axis=-1)
    lead = np.take_along_axis(p, idx[..., None], axis=-1)
    return p * np.sign(lead)


def collinearity(points, max_points=25):
    """Largest |det[p_i p_j p_k]| over triples of (up to max_points evenly
    spaced) unit homogeneous points."""
    P = unit_homogeneous(points)
    if len(P) > max_points:
        P = P[np.linspace(0, len(P) - 1, max_points).round().astype(int)]
    n = len(P)
    if n < 3:
        return 0.0
    i, j, k = np.array([(a, b, c) for a in range(n) for b in range(a + 1, n) for c in range(b + 1, n)]).T
    dets = np.linalg.det(np.stack([P[i], P[j], P[k]], axis=1))
    return float(np.abs(dets).max())


def develop_curve(conn, curve, step=DEFAULT_STEP):
    """RK4 for h' = h X(t), h(0) = I, X(t) = omega(curve velocity); the
    development is h(t) applied to the base point [1 : 0 : 0]."""
    Xof = conn.numeric()
    ts = curve.times(step)

    def Xat(t):
        x, y, xd, yd = curve(t)
        return Xof(x, y, xd, yd)

    h = np.eye(3)
    hs = [h]
    drift = 0.0
    for t, t_next in zip(ts[:-1], ts[1:]):
        dt = t_next - t
        X0, Xm, X1 = Xat(t), Xat(t + dt / 2), Xat(t_next)
        k1 = h @ X0
        k2 = (h + dt / 2 * k1) @ Xm
        k3 = (h + dt / 2 * k2) @ Xm
        k4 = (h + dt * k3) @ X1
        h = h + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        dev = abs(np.linalg.det(h) - 1.0)
        drift = max(drift, dev)
        if dev > DET_DRIFT:
            raise DevelopmentError(f"det h drifted by {dev:.3g}; step too large", t_next)
        hs.append(h)
    H = np.array(hs)
    return DevelopedCurve(ts, H, unit_homogeneous(H[:, :, 0]), drift)


def solve_geodesic(c, x0, y0, p0, length, step=DEFAULT_STEP):
    """RK4 solution of y'' = A p^3 + B p^2 + C p + D on [x0, x0 + length],
    returned as a sampled PlaneCurve t -> (t, y(t))."""
    rhs = sp.lambdify((X, Y, symbol("z")), c.rhs(), "numpy")

    def F(x, s):
        return np.array([s[1], float(rhs(x, s[0], s[1]))])

    n = max(1, int(round(length / step)))
    xs = np.linspace(x0, x0 + length, n + 1)
    s = np.array([y0, p0], dtype=float)
    ys, ps = [s[0]], [s[1]]
    for x, xn in zip(xs[:-1], xs[1:]):
        dt = xn - x
        k1 = F(x, s)
        k2 = F(x + dt / 2, s + dt / 2 * k1)
        k3 = F(x + dt / 2, s + dt / 2 * k2)
        k4 = F(xn, s + dt * k3)
        s = s + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        ys.append(s[0])
        ps.append(s[1])
    return PlaneCurve.from_samples(xs, xs, np.array(ys), np.ones_like(xs), np.array(ps))


def geodesic_residual(conn, curve, step=DEFAULT_STEP):
    """Max |y'' - (A y'^3 + B y'^2 + C y' + D)| along the curve, with y as
    a function of x (requires xdot != 0)."""
    cubic = geodesic_equation(conn)
    rhs = sp.lambdify((X, Y, symbol("z")), cubic.rhs(), "numpy")
    ts = curve.times(step) if curve.grid is None else curve.grid
    x, y, xd, yd = curve(ts)
    if np.any(np.abs(xd) < 1e-12):
        raise NotAGraphError("curve is not a graph over x (xdot vanishes)")
    xdd, ydd = curve.acceleration(ts)
    p = yd / xd
    ypp = (ydd * xd - yd * xdd) / xd**3
    res = ypp - np.broadcast_to(np.asarray(rhs(x, y, p), dtype=float), np.shape(ts))
    return float(np.abs(res).max())


def is_geodesic(conn, curve, tol=1e-6, step=DEFAULT_STEP):
    return geodesic_residual(conn, curve, step) < tol
