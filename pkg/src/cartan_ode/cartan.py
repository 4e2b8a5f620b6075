"""Normal Cartan connection of y'' = f(x, y, z), its curvature scalars and
equivariant covariant derivatives.

Every formula is written once against a `Section`: an object bundling f,
the coordinate functions and a partial-derivative operator.  The symbolic
section works on sympy trees; the jet section works on truncated Taylor
series at a point, which is how the higher invariants are evaluated.

Coframe: th1 = dx, th2 = dy - z dx, th3 = dz - f dx.  Dual frame used for
covariant derivatives: X1 = d/dx = D, X2 = d/dz, X3 = d/dy (dual to th1,
th3, th2 respectively, matching u1, u2, u3).
"""

import functools
from dataclasses import dataclass

import sympy as sp

from .assumptions import Assumptions, TriBool
from .expressions import X, Y, Z, normalize, partial
from .jets import jet_space, to_jet
from .lie import AD_ACTION
from .zerotest import zero_test

R = sp.Rational
_VAR = {"x": 0, "y": 1, "z": 2}


class Section:
    """f plus coordinates and partial derivatives for one arithmetic backend."""

    def __init__(self, f, coords, partial_fn):
        self.f = f
        self.x, self.y, self.z = coords
        self._partial = partial_fn
        self._fcache = {"": f}

    @classmethod
    def symbolic(cls, f):
        f = sp.sympify(f)
        syms = (X, Y, Z)

        def part(e, i):
            if not isinstance(e, sp.Basic):
                return sp.S.Zero
            return _sym_partial(e, syms[i])

        return cls(f, syms, part)

    @classmethod
    def jets(cls, f, point, order):
        """Jet section at `point` (name -> value), trustworthy to `order`."""
        space = jet_space(("x", "y", "z"), order)
        fj = to_jet(sp.sympify(f), point, space)
        coords = tuple(space.variable(n, float(point[n])) for n in ("x", "y", "z"))

        def part(e, i):
            if not hasattr(e, "diff") or isinstance(e, (int, float)):
                return 0.0
            return e.diff(i)

        return cls(fj, coords, part)

    def d(self, e, letters):
        for ch in letters:
            e = self._partial(e, _VAR[ch])
        return e

    def fd(self, letters):
        """Partial derivative of f, e.g. fd('yzz'); memoized."""
        key = "".join(sorted(letters))
        if key not in self._fcache:
            self._fcache[key] = self.d(self.fd(key[:-1]), key[-1])
        return self._fcache[key]

    def D(self, e):
        """Total derivative d/dx + z d/dy + f d/dz."""
        return self.d(e, "x") + self.z * self.d(e, "y") + self.f * self.d(e, "z")

    def frame(self, e, k):
        """Derivative along the frame vector X_{k+1}: (D, d/dz, d/dy)."""
        if k == 0:
            return self.D(e)
        return self.d(e, "z" if k == 1 else "y")


@functools.lru_cache(maxsize=65536)
def _sym_partial(e, s):
    return partial(e, s)


@dataclass(frozen=True)
class OneForm:
    """c1 th1 + c2 th2 + c3 th3."""

    c1: object
    c2: object
    c3: object

    def on_frame(self, k):
        """Value on X1 = D, X2 = d/dz, X3 = d/dy."""
        return (self.c1, self.c3, self.c2)[k]

    def __add__(self, o):
        return OneForm(self.c1 + o.c1, self.c2 + o.c2, self.c3 + o.c3)

    def __sub__(self, o):
        return OneForm(self.c1 - o.c1, self.c2 - o.c2, self.c3 - o.c3)

    def scale(self, s):
        return OneForm(s * self.c1, s * self.c2, s * self.c3)

    def map(self, fn):
        return OneForm(fn(self.c1), fn(self.c2), fn(self.c3))

    def as_tuple(self):
        return (self.c1, self.c2, self.c3)


@dataclass
class ConnectionForm:
    """Entries w[(i, j)] (1-based) as OneForms, plus the chosen mu."""

    entries: dict
    mu: object

    def __getitem__(self, ij):
        return self.entries[ij]

    def components(self):
        """The five isotropy components paired with e1..e5."""
        w = self.entries
        return (w[2, 2] - w[1, 1], w[3, 3] - w[1, 1], w[1, 2], w[2, 3], w[1, 3])

    def trace(self):
        return self.entries[1, 1] + self.entries[2, 2] + self.entries[3, 3]


def connection_forms(S):
    """Connection entries for a section (any backend)."""
    f = S.f
    fz, fzz, fzzz = S.fd("z"), S.fd("zz"), S.fd("zzz")
    fy, fyz, fyzz = S.fd("y"), S.fd("yz"), S.fd("yzz")
    Dfzz, Dfzzz = S.D(fzz), S.D(fzzz)
    mu = R(1, 6) * fyzz - R(1, 6) * fz * fzzz - R(1, 6) * Dfzzz
    zero = 0 * fz
    one = zero + 1
    d1 = OneForm(fz, zero, zero)  # w22 - w11
    d2 = OneForm(zero, -R(1, 2) * fzz, zero)  # w33 - w11
    w11 = (d1 + d2).scale(-R(1, 3))
    w = {
        (2, 1): OneForm(one, zero, zero),
        (3, 1): OneForm(zero, one, zero),
        (3, 2): OneForm(zero, zero, one),
        (1, 1): w11,
        (2, 2): w11 + d1,
        (3, 3): w11 + d2,
        (2, 3): OneForm(zero, R(1, 6) * fzzz, zero),
        (1, 2): OneForm(fy, R(2, 3) * fyz - R(1, 6) * Dfzz, R(1, 2) * fzz),
        # (1/3 f_yz - 1/6 D f_zz) th1 - 1/6 d(f_zz) + mu th2, with
        # d(g) = Dg th1 + g_y th2 + g_z th3
        (1, 3): OneForm(
            R(1, 3) * fyz - R(1, 6) * Dfzz - R(1, 6) * Dfzz,
            -R(1, 6) * fyzz + mu,
            -R(1, 6) * fzzz,
        ),
    }
    return ConnectionForm(w, mu)


def connection_matrix(f):
    """Symbolic connection of y'' = f with every coefficient normalized."""
    conn = connection_forms(Section.symbolic(f))
    entries = {k: v.map(lambda c: normalize(sp.sympify(c))) for k, v in conn.entries.items()}
    return ConnectionForm(entries, normalize(conn.mu))


def a_scalar(S):
    """The relative invariant a (sixteen-term formula)."""
    f = S.f
    z = S.z
    fd = S.fd
    fy, fz, fx = fd("y"), fd("z"), fd("x")
    fzz, fzzz, fzzzz = fd("zz"), fd("zzz"), fd("zzzz")
    return (
        -fd("yy")
        + R(1, 2) * f * fd("yzz")
        + R(1, 2) * fy * fzz
        + R(2, 3) * fd("xyz")
        - R(1, 6) * fd("xxzz")
        - R(1, 3) * z * fd("xyzz")
        - R(1, 6) * fx * fzzz
        - R(1, 3) * f * fd("xzzz")
        + R(2, 3) * z * fd("yyz")
        - R(1, 6) * z**2 * fd("yyzz")
        - R(1, 6) * z * fy * fzzz
        - R(1, 3) * z * f * fd("yzzz")
        - R(2, 3) * fz * fd("yz")
        + R(1, 6) * fz * fd("xzz")
        + R(1, 6) * z * fz * fd("yzz")
        - R(1, 6) * f**2 * fzzzz
    )


def d_scalar(S):
    return -R(1, 6) * S.fd("zzzz")


@dataclass
class CurvatureScalars:
    a: sp.Expr
    b: sp.Expr
    c: sp.Expr
    d: sp.Expr

    def as_tuple(self):
        return (self.a, self.b, self.c, self.d)


def curvature_scalars(f):
    S = Section.symbolic(f)
    a = a_scalar(S)
    d = d_scalar(S)
    b = S.d(a, "z")
    c = -S.D(d) - 2 * S.fd("z") * d
    return CurvatureScalars(*(normalize(sp.sympify(v)) for v in (a, b, c, d)))


@dataclass
class Flags:
    is_cubic: object  # True / False / None (undecided)
    is_dual_cubic: object
    is_linearizable: object
    tests: dict

    def to_json(self):
        return {
            "cubic": self.is_cubic,
            "dual_cubic": self.is_dual_cubic,
            "linearizable": self.is_linearizable,
            "zero_tests": {k: {"status": str(v.status), "reason": v.reason} for k, v in self.tests.items()},
        }


def _both(s, t):
    if s is TriBool.ZERO and t is TriBool.ZERO:
        return True
    if TriBool.NONZERO in (s, t):
        return False
    return None


def _and(p, q):
    if p is False or q is False:
        return False
    if p is None or q is None:
        return None
    return True


def classify_flags(f, assumptions=None, scalars=None):
    a = assumptions or Assumptions()
    cs = scalars or curvature_scalars(f)
    tests = {k: zero_test(v, a) for k, v in zip("abcd", cs.as_tuple())}
    st = {k: t.status for k, t in tests.items()}
    cubic = _both(st["c"], st["d"])
    dual = _both(st["a"], st["b"])
    return Flags(cubic, dual, _and(cubic, dual), tests)


@dataclass
class EquivariantFunction:
    """A vector of functions with the e1..e5 action on it (constant
    matrices: action[j][r, s] is the coefficient of value[s] in (e_j . F)_r)."""

    value: list
    action: tuple

    def act(self, j, vec=None):
        vec = self.value if vec is None else vec
        A = self.action[j]
        out = []
        for r in range(A.shape[0]):
            acc = 0
            for s in range(A.shape[1]):
                if A[r, s] != 0:
                    acc = acc + A[r, s] * vec[s]
            out.append(acc)
        return out


def covariant_derivative(F, conn, S):
    """(F_1, F_2, F_3): F_k = X_k F + sum_i w^(i)(X_k) (e_i . F)."""
    comps = conn.components()
    acted = [F.act(i) for i in range(5)]
    result = []
    for k in range(3):
        col = [S.frame(v, k) for v in F.value]
        for i in range(5):
            coef = comps[i].on_frame(k)
            if isinstance(coef, (int, sp.Integer)) and coef == 0:
                continue
            col = [c + coef * e for c, e in zip(col, acted[i])]
        result.append(col)
    return result


def base_function(S):
    """(a, d) with its isotropy action."""
    return EquivariantFunction([a_scalar(S), d_scalar(S)], AD_ACTION)


def f1_entries(S, conn=None):
    """The 2x5 matrix (columns F1, F2, F3, -e1.F, -e2.F) as nested lists."""
    conn = conn or connection_forms(S)
    F = base_function(S)
    cols = covariant_derivative(F, conn, S)
    a, d = F.value
    cols.append([2 * a, -2 * d])
    cols.append([a, 3 * d])
    return [[cols[j][i] for j in range(5)] for i in range(2)]


def f1_matrix(f):
    S = Section.symbolic(f)
    rows = f1_entries(S)
    return sp.Matrix([[normalize(sp.sympify(v)) for v in row] for row in rows])
