"""Vector fields, differential forms and distributions on a coordinate chart;
integration of Lie-algebra-valued paths into the group.

Distributions are given by generating vector fields or by annihilating
one-forms.  Integrability is tested both ways: closure of the generators
under brackets, and the wedge condition d(w_i) ^ w_1 ^ ... ^ w_n = 0.
"""

import itertools
import json
from dataclasses import dataclass

import numpy as np
import sympy as sp
from scipy.interpolate import CubicSpline

from .assumptions import Assumptions, TriBool
from .evaluation import evaluate_batch
from .expressions import normalize, parse, partial, symbol, to_text
from .zerotest import sample_points, zero_test

SPAN_TOL = 1e-8
SPAN_POINTS = 8
EXACT_SPAN_OPS = 400


class ChartMismatch(ValueError):
    pass


class DegenerateFrame(ValueError):
    pass


def _combine(statuses):
    """All ZERO -> ZERO; any NONZERO -> NONZERO; else UNKNOWN."""
    statuses = list(statuses)
    if any(s is TriBool.NONZERO for s in statuses):
        return TriBool.NONZERO
    if all(s is TriBool.ZERO for s in statuses):
        return TriBool.ZERO
    return TriBool.UNKNOWN


def _truth(status):
    """ZERO of a defect -> True, NONZERO -> False, UNKNOWN -> None."""
    return {TriBool.ZERO: True, TriBool.NONZERO: False}.get(status)


# -- vector fields ------------------------------------------------------------


@dataclass(frozen=True)
class VectorField:
    chart: tuple
    components: tuple

    @classmethod
    def of(cls, chart, components):
        chart = tuple(chart)
        comps = tuple(normalize(sp.sympify(c), chart) for c in components)
        if len(comps) != len(chart):
            raise ChartMismatch(f"{len(comps)} components for a {len(chart)}-dimensional chart")
        return cls(chart, comps)

    @classmethod
    def parse(cls, chart, texts):
        chart = tuple(chart)
        return cls.of(chart, [parse(t, chart) if isinstance(t, str) else t for t in texts])

    @property
    def symbols(self):
        return tuple(symbol(n) for n in self.chart)

    def apply(self, f):
        """Derivative of the function f along the field."""
        return normalize(sum(c * partial(sp.sympify(f), s) for c, s in zip(self.components, self.symbols)), self.chart)

    def __add__(self, other):
        _same_chart(self, other)
        return VectorField.of(self.chart, [a + b for a, b in zip(self.components, other.components)])

    def scale(self, g):
        return VectorField.of(self.chart, [g * c for c in self.components])

    def is_zero(self, assumptions=None):
        return _combine(zero_test(c, assumptions).status for c in self.components)

    def to_json(self):
        return {"chart": list(self.chart), "components": [to_text(c) for c in self.components]}

    def __str__(self):
        terms = [f"({to_text(c)}) d/d{n}" for c, n in zip(self.components, self.chart) if c != 0]
        return " + ".join(terms) if terms else "0"


def _same_chart(X, Y):
    if X.chart != Y.chart:
        raise ChartMismatch(f"charts differ: {X.chart} vs {Y.chart}")


def coordinate_field(chart, name):
    return VectorField.of(chart, [1 if n == name else 0 for n in chart])


def lie_bracket(X, Y):
    """[X, Y] with components X(Y_i) - Y(X_i)."""
    _same_chart(X, Y)
    return VectorField.of(X.chart, [X.apply(b) - Y.apply(a) for a, b in zip(X.components, Y.components)])


# -- differential forms -------------------------------------------------------


@dataclass(frozen=True)
class Form:
    """A differential form: {increasing index tuple: coefficient}."""

    chart: tuple
    terms: tuple  # sorted ((indices, expr), ...)

    @classmethod
    def of(cls, chart, terms):
        chart = tuple(chart)
        clean = {}
        for idx, c in dict(terms).items():
            c = normalize(sp.sympify(c), chart)
            if c != 0:
                clean[tuple(idx)] = c
        return cls(chart, tuple(sorted(clean.items())))

    @classmethod
    def one_form(cls, chart, coefficients):
        return cls.of(chart, {(i,): c for i, c in enumerate(coefficients)})

    @classmethod
    def parse_one_form(cls, chart, texts):
        chart = tuple(chart)
        return cls.one_form(chart, [parse(t, chart) if isinstance(t, str) else t for t in texts])

    @property
    def degree(self):
        return len(self.terms[0][0]) if self.terms else 0

    def coefficient(self, idx):
        return dict(self.terms).get(tuple(idx), sp.S.Zero)

    def coefficients(self):
        return [c for _, c in self.terms]

    def __add__(self, other):
        out = dict(self.terms)
        for k, v in other.terms:
            out[k] = out.get(k, 0) + v
        return Form.of(self.chart, out)

    def d(self):
        syms = [symbol(n) for n in self.chart]
        out = {}
        for idx, c in self.terms:
            for v, s in enumerate(syms):
                if v in idx:
                    continue
                sgn, key = _sort_with_sign((v,) + idx)
                out[key] = out.get(key, 0) + sgn * partial(c, s)
        return Form.of(self.chart, out)

    def wedge(self, other):
        out = {}
        for i1, c1 in self.terms:
            for i2, c2 in other.terms:
                if set(i1) & set(i2):
                    continue
                sgn, key = _sort_with_sign(i1 + i2)
                out[key] = out.get(key, 0) + sgn * c1 * c2
        return Form.of(self.chart, out)

    def on(self, *fields):
        """Value on vector fields (determinant formula)."""
        k = len(fields)
        total = 0
        for idx, c in self.terms:
            if len(idx) != k:
                continue
            M = sp.Matrix(k, k, lambda a, b: fields[b].components[idx[a]])
            total += c * M.det()
        return normalize(total, self.chart)

    def label(self, idx):
        return "^".join(f"d{self.chart[i]}" for i in idx)

    def __str__(self):
        return " + ".join(f"({to_text(c)}) {self.label(i)}" for i, c in self.terms) or "0"


def _sort_with_sign(idx):
    idx = list(idx)
    sgn = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sgn = -sgn
    return sgn, tuple(idx)


# -- distributions ------------------------------------------------------------


class DistributionSpec:
    """A distribution by generators, by annihilating one-forms, or both."""

    def __init__(self, chart, generators=None, forms=None):
        self.chart = tuple(chart)
        self._gens = list(generators) if generators else None
        self._forms = list(forms) if forms else None
        for g in self._gens or []:
            if g.chart != self.chart:
                raise ChartMismatch("generator on a different chart")
        if self._gens is not None and self._forms is not None:
            if len(self._gens) + len(self._forms) != len(self.chart):
                raise ValueError("generator count + form count must equal the chart dimension")
        if self._gens is None and self._forms is None:
            raise ValueError("a distribution needs generators or forms")

    @property
    def rank(self):
        return len(self._gens) if self._gens is not None else len(self.chart) - len(self._forms)

    def generators(self):
        if self._gens is None:
            M = sp.Matrix([[f.coefficient((i,)) for i in range(len(self.chart))] for f in self._forms])
            basis = M.nullspace(simplify=True)
            self._gens = [VectorField.of(self.chart, list(_clear_denominators(v))) for v in basis]
        return self._gens

    def forms(self):
        if self._forms is None:
            M = sp.Matrix([list(g.components) for g in self._gens])
            basis = M.nullspace(simplify=True)
            self._forms = [Form.one_form(self.chart, list(_clear_denominators(v))) for v in basis]
        return self._forms

    def check_independent(self, assumptions=None, count=SPAN_POINTS):
        """Numeric rank of the generators at sample points equals their count."""
        gens = self.generators()
        a = assumptions or Assumptions(chart=self.chart)
        pts = sample_points(a, self.chart, count)
        M = _numeric_matrix([g.components for g in gens], self.chart, pts)
        if M is None:
            return False
        return all(np.linalg.matrix_rank(Mp, tol=1e-9 * max(1.0, np.abs(Mp).max())) == len(gens) for Mp in M)

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        chart = tuple(data.get("chart", ("x", "y", "z")))
        gens = [VectorField.parse(chart, g) for g in data.get("generators", [])] or None
        forms = [Form.parse_one_form(chart, f) for f in data.get("forms", [])] or None
        return cls(chart, gens, forms)

    def to_json(self):
        out = {"chart": list(self.chart)}
        if self._gens is not None:
            out["generators"] = [[to_text(c) for c in g.components] for g in self._gens]
        if self._forms is not None:
            out["forms"] = [[to_text(f.coefficient((i,))) for i in range(len(self.chart))] for f in self._forms]
        return out


def _clear_denominators(v):
    den = sp.lcm([sp.fraction(sp.together(c))[1] for c in v])
    return [normalize(c * den) for c in v]


def _numeric_matrix(rows, chart, points):
    """Array (npoints, len(rows), len(rows[0])) or None if evaluation fails."""
    cols = {symbol(n): np.array([float(p[n]) for p in points]) for n in chart}
    k = len(points)
    out = np.zeros((k, len(rows), len(rows[0])))
    for i, row in enumerate(rows):
        for j, e in enumerate(row):
            vals, _, failed, _ = evaluate_batch(sp.sympify(e), cols, k)
            if failed.any():
                return None
            out[:, i, j] = vals
    return out


def in_span(v, gens, assumptions=None):
    """Whether the field v lies in the span of gens over the functions:
    exact residual of the normal-equation solve when cheap, else numeric
    least squares at sample points."""
    a = assumptions or Assumptions(chart=v.chart)
    if not gens:
        return v.is_zero(a)
    M = sp.Matrix([list(g.components) for g in gens]).T
    rhs = sp.Matrix(list(v.components))
    if sum(sp.count_ops(c) for c in list(M) + list(rhs)) <= EXACT_SPAN_OPS:
        try:
            G = (M.T * M).applyfunc(sp.cancel)
            det = sp.cancel(G.det())
            if zero_test(det, a).status is TriBool.NONZERO:
                coef = (G.adjugate() * (M.T * rhs)).applyfunc(lambda e: sp.cancel(e / det))
                res = (M * coef - rhs).applyfunc(lambda e: normalize(e, v.chart))
                status = _combine(zero_test(r, a).status for r in res)
                if status is not TriBool.UNKNOWN:
                    return status
        except (ZeroDivisionError, sp.PolynomialError):
            pass
    return _numeric_in_span(v, gens, a)


def _numeric_in_span(v, gens, a):
    pts = sample_points(a, v.chart, SPAN_POINTS)
    M = _numeric_matrix([g.components for g in gens], v.chart, pts)
    b = _numeric_matrix([v.components], v.chart, pts)
    if M is None or b is None:
        return TriBool.UNKNOWN
    worst = 0.0
    for Mp, bp in zip(M, b):
        A = Mp.T
        sol, *_ = np.linalg.lstsq(A, bp[0], rcond=None)
        res = np.linalg.norm(A @ sol - bp[0]) / (1.0 + np.linalg.norm(bp[0]))
        worst = max(worst, res)
    return TriBool.ZERO if worst < SPAN_TOL else TriBool.NONZERO


@dataclass
class IntegrabilityResult:
    status: TriBool  # ZERO: integrable, NONZERO: not integrable
    method: str
    witness: str = ""

    @property
    def integrable(self):
        return _truth(self.status)


def frobenius_by_brackets(D, assumptions=None):
    gens = D.generators()
    for (i, Yi), (j, Yj) in itertools.combinations(enumerate(gens), 2):
        br = lie_bracket(Yi, Yj)
        s = in_span(br, gens, assumptions)
        if s is not TriBool.ZERO:
            return IntegrabilityResult(s, "brackets", f"[Y{i + 1}, Y{j + 1}] = {br}")
    return IntegrabilityResult(TriBool.ZERO, "brackets")


def frobenius_by_forms(D, assumptions=None):
    forms = D.forms()
    if not forms:
        return IntegrabilityResult(TriBool.ZERO, "forms")
    top = forms[0]
    for w in forms[1:]:
        top = top.wedge(w)
    unknown = ""
    for i, w in enumerate(forms):
        eta = w.d().wedge(top)
        for idx, c in eta.terms:
            t = zero_test(c, assumptions)
            where = f"coefficient {to_text(c)} of d(w{i + 1}) ^ w1 ^ ... on {eta.label(idx)}"
            if t.status is TriBool.NONZERO:
                return IntegrabilityResult(t.status, "forms", where)
            if t.status is TriBool.UNKNOWN and not unknown:
                unknown = f"{where}: {t.reason}"
    if unknown:
        return IntegrabilityResult(TriBool.UNKNOWN, "forms", unknown)
    return IntegrabilityResult(TriBool.ZERO, "forms")


def frobenius_integrable(D, assumptions=None):
    """Form test when forms are given, bracket test otherwise."""
    if D._forms is not None:
        return frobenius_by_forms(D, assumptions)
    return frobenius_by_brackets(D, assumptions)


def is_symmetry(X, D, assumptions=None):
    """[X, Y_i] in span(Y) for each generator; True / False / None."""
    gens = D.generators()
    return _truth(_combine(in_span(lie_bracket(X, Y), gens, assumptions) for Y in gens))


def is_first_integral(f, D, assumptions=None):
    """Y f = 0 for every generator; True / False / None."""
    return _truth(_combine(zero_test(Y.apply(f), assumptions).status for Y in D.generators()))


def structure_functions(frame, assumptions=None):
    """c[i][j][k] with [X_i, X_j] = -sum_k c_ij^k X_k (0-based indices)."""
    if not frame:
        raise DegenerateFrame("empty frame")
    chart = frame[0].chart
    m = len(chart)
    if len(frame) != m:
        raise DegenerateFrame(f"{len(frame)} fields cannot frame a {m}-dimensional chart")
    M = sp.Matrix([list(X.components) for X in frame]).T  # columns = fields
    det = normalize(M.det(), chart)
    if zero_test(det, assumptions).status is not TriBool.NONZERO:
        raise DegenerateFrame("the fields are not pointwise independent")
    Minv = M.adjugate() / det
    c = [[[sp.S.Zero] * m for _ in range(m)] for _ in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            br = sp.Matrix(list(lie_bracket(frame[i], frame[j]).components))
            coef = Minv * br
            for k in range(m):
                v = normalize(-coef[k], chart)
                c[i][j][k] = v
                c[j][i][k] = -v
    return c


# -- group-valued paths -------------------------------------------------------


class MatrixPath:
    """A path of n x n matrices: closed form in t, or samples on a grid
    (cubic-spline interpolated between samples)."""

    def __init__(self, fn, t0, t1, n, constraint=None, grid=None, samples=None):
        self._fn = fn
        self.t0, self.t1, self.n = float(t0), float(t1), n
        self.constraint = constraint
        self.grid = grid
        self.samples = samples

    def __call__(self, t):
        return self._fn(float(t))

    @classmethod
    def constant(cls, M, t0=0.0, t1=1.0, constraint=None):
        M = np.asarray(M, dtype=float)
        return cls(lambda t: M, t0, t1, M.shape[0], constraint)

    @classmethod
    def from_expressions(cls, rows, t0, t1, param="t", constraint=None):
        t = symbol(param)
        M = sp.Matrix([[parse(e, (param,)) if isinstance(e, str) else sp.sympify(e) for e in row] for row in rows])
        f = sp.lambdify(t, M, "numpy")
        path = cls(lambda tt: np.asarray(f(tt), dtype=float), t0, t1, M.shape[0], constraint)
        path.check_constraint()
        return path

    @classmethod
    def from_samples(cls, t, mats, constraint=None):
        t = np.asarray(t, dtype=float)
        mats = np.asarray(mats, dtype=float)
        if t.ndim != 1 or np.any(np.diff(t) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if len(t) >= 2:
            spline = CubicSpline(t, mats, axis=0)
            fn = lambda tt: spline(tt)  # noqa: E731
        else:
            fn = lambda tt: mats[0]  # noqa: E731
        path = cls(fn, t[0], t[-1], mats.shape[1], constraint, t, mats)
        path.check_constraint()
        return path

    @classmethod
    def from_csv(cls, path, constraint=None):
        data = np.loadtxt(path, delimiter=",", ndmin=2, comments="#")
        n = int(round(np.sqrt(data.shape[1] - 1)))
        if n * n != data.shape[1] - 1:
            raise ValueError("matrix-path CSV rows must be t followed by n*n row-major entries")
        return cls.from_samples(data[:, 0], data[:, 1:].reshape(-1, n, n), constraint)

    def to_csv_rows(self):
        return [[t] + list(np.asarray(M).ravel()) for t, M in zip(self.grid, self.samples)]

    def check_constraint(self, tol=1e-9):
        if self.constraint in (None, "none"):
            return
        ts = self.grid if self.grid is not None else np.linspace(self.t0, self.t1, 11)
        for t in ts:
            M = self(t)
            if self.constraint == "traceless" and abs(np.trace(M)) > tol:
                raise ValueError(f"path leaves the traceless matrices at t = {t}")


def integrate_g_structure(X, g0, step=1e-3, t0=None, t1=None):
    """RK4 for g'(t) = X(t) g(t), g(t0) = g0; returns the sampled path."""
    g = np.array(g0, dtype=float)
    if abs(np.linalg.det(g)) < 1e-14:
        raise ValueError("initial value is not invertible")
    t0 = X.t0 if t0 is None else float(t0)
    t1 = X.t1 if t1 is None else float(t1)
    n = max(1, int(round(abs(t1 - t0) / step)))
    ts = np.linspace(t0, t1, n + 1)
    out = [g]
    scale = abs(np.linalg.det(g))
    for t, tn in zip(ts[:-1], ts[1:]):
        h = tn - t
        Xa, Xm, Xb = X(t), X(t + h / 2), X(tn)
        k1 = Xa @ g
        k2 = Xm @ (g + h / 2 * k1)
        k3 = Xm @ (g + h / 2 * k2)
        k4 = Xb @ (g + h * k3)
        g = g + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if abs(np.linalg.det(g)) < 1e-12 * scale:
            raise ArithmeticError(f"lost invertibility at t = {tn:.6g}; reduce the step")
        out.append(g)
    return MatrixPath.from_samples(ts, np.array(out)) if len(ts) > 1 else None


def solve_linear(A, F0, step=1e-3, t0=None, t1=None):
    """RK4 samples (t, values) of F'(t) = A(t) F(t) from F(t0) = F0."""
    t0 = A.t0 if t0 is None else float(t0)
    t1 = A.t1 if t1 is None else float(t1)
    n = max(1, int(round(abs(t1 - t0) / step)))
    ts = np.linspace(t0, t1, n + 1)
    F = np.asarray(F0, dtype=float).reshape(-1, 1)
    out = [F[:, 0].copy()]
    for t, tn in zip(ts[:-1], ts[1:]):
        h = tn - t
        Aa, Am, Ab = A(t), A(t + h / 2), A(tn)
        k1 = Aa @ F
        k2 = Am @ (F + h / 2 * k1)
        k3 = Am @ (F + h / 2 * k2)
        k4 = Ab @ (F + h * k3)
        F = F + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(F[:, 0].copy())
    return ts, np.array(out)


@dataclass
class Superposition:
    t: np.ndarray
    values: np.ndarray  # (len(t), n)
    coefficients: np.ndarray


def superposition_solve(particulars, b, t0_index=0):
    """Solution with initial value b as a combination of particular solutions.

    particulars: list of (t, values) pairs sampled on a common grid; the
    combination matrix is the inverse of the initial-condition matrix."""
    if not particulars:
        raise ValueError("no particular solutions given")
    t = np.asarray(particulars[0][0])
    V = np.stack([np.asarray(p[1], dtype=float) for p in particulars], axis=-1)  # (nt, n, k)
    M0 = V[t0_index]
    if M0.shape[0] != M0.shape[1]:
        raise ValueError(f"need {M0.shape[0]} particular solutions, got {M0.shape[1]}")
    if np.linalg.matrix_rank(M0) < M0.shape[0]:
        raise ValueError("initial conditions of the particular solutions are linearly dependent")
    coef = np.linalg.solve(M0, np.asarray(b, dtype=float))
    return Superposition(t, V @ coef, coef)
