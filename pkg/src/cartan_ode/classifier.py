"""Decision procedure identifying equations with a three-dimensional
symmetry algebra, plus the dimension estimate for everything else.

Vanishing of the curvature scalars splits the problem:

    a = d = 0           linearizable (equivalent to y'' = 0)
    a != 0, d != 0      semi-invariants s1, s2, s3 and the invariants I1 / I2
    a != 0, d = 0       second-order semi-invariants s11 ... s33 (families 3d+-)
    a = 0, d != 0       dual of 3d+-: 3e+ (alpha = +-1) or 3f (alpha = +-1)

Invariants are evaluated numerically at a handful of sample points and
must agree across them before any family tag is issued.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy as sp

from .assumptions import Assumptions, TriBool
from .cartan import classify_flags, curvature_scalars
from .evaluation import DomainError
from .expressions import to_text
from .invariants import (
    degenerate_invariants,
    f1_values,
    h1_relations,
    h1_values,
    invariant_I1,
    invariant_I2,
    normalize_f1,
    normalize_h1,
)
from .symmetry import symmetry_dimension_estimate
from .zerotest import sample_points

DEFAULT_POINTS = 5
VANISH_TOL = 1e-7  # scale-free semi-invariants below this count as zero
CONSTANCY_TOL = 1e-6  # relative spread allowed for an invariant across points
MATCH_TOL = 1e-6  # relative distance to a tabulated value

I1_3C = Fraction(41, 256)
I2_SPLIT = Fraction(1, 36)
I1_3D = Fraction(25, 12)
I2_3D = Fraction(-5, 4)

FAMILIES = (
    "linearizable",
    "3a",
    "3b",
    "3c",
    "3d+",
    "3d-",
    "3e+",
    "3e-",
    "3f",
    "3g",
    "dual-cubic-3d-family",
    "dim<=2-undetermined",
    "undecided",
)


def i1_3a(alpha):
    w = alpha * (alpha - 3)
    return (41 * w + 96) / (256 * w + 576)


def i1_3b(alpha):
    return (41 * alpha**2 - 15) / (256 * alpha**2)


def i2_table(alpha, plus):
    """I2 of 3e- (plus=True) or 3e+/3f (plus=False) in terms of alpha."""
    s = 1 if plus else -1
    return (alpha**2 + s) / (36 * alpha**2)


def i2_3g(alpha):
    """I2 of the 3g normal form; the alpha^2 + 1 law holds for alpha / 2."""
    return (alpha**2 + 4) / (36 * alpha**2)


def rational_guess(value, max_den=10000, tol=1e-8):
    """Nearby fraction with a small denominator, or None."""
    if value is None or not math.isfinite(value):
        return None
    fr = Fraction(value).limit_denominator(max_den)
    if abs(float(fr) - value) <= tol * max(1.0, abs(value)):
        return fr
    return None


def _close(value, target, tol=MATCH_TOL):
    return abs(value - float(target)) <= tol * max(1.0, abs(float(target)))


def _spread(values):
    v = np.asarray(values, dtype=float)
    return float(np.abs(v - np.median(v)).max() / max(1.0, float(np.abs(v).max())))


@dataclass
class ClassificationReport:
    expression: str
    flags: dict
    scalars: dict
    family: str = "undecided"
    parameters: list = field(default_factory=list)
    invariants: dict = field(default_factory=dict)
    signs: dict = field(default_factory=dict)
    dimension: object = None  # DimensionEstimate
    points: list = field(default_factory=list)
    per_point: list = field(default_factory=list)
    trace: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    seed: int = 0

    def note(self, text):
        self.trace.append(text)

    def to_json(self):
        dim = self.dimension
        return {
            "expression": self.expression,
            "family": self.family,
            "parameters": [_num_json(p) for p in self.parameters],
            "invariants": {k: _num_json(v) for k, v in self.invariants.items()},
            "signs": dict(self.signs),
            "flags": self.flags,
            "scalars": self.scalars,
            "dimension": None
            if dim is None
            else {"value": dim.dimension, "exact": dim.exact, "ranks": {str(k): v for k, v in sorted(dim.ranks.items())}},
            "points": [{k: _rat(v) for k, v in p.items()} for p in self.points],
            "per_point": self.per_point,
            "trace": list(self.trace),
            "warnings": list(self.warnings),
            "seed": self.seed,
        }


def _rat(v):
    v = sp.Rational(v)
    return f"{v.p}/{v.q}"


def _num_json(v):
    """Floats plus a rational reading when one is within 1e-8."""
    if isinstance(v, str):
        return v
    if isinstance(v, (Fraction, sp.Rational)):
        fr = Fraction(int(sp.Rational(v).p), int(sp.Rational(v).q)) if isinstance(v, sp.Rational) else v
        return {"value": float(fr), "rational": f"{fr.numerator}/{fr.denominator}"}
    guess = rational_guess(float(v))
    out = {"value": float(v)}
    if guess is not None:
        out["rational"] = f"{guess.numerator}/{guess.denominator}"
    return out


def classification_points(assumptions, count=DEFAULT_POINTS, seed=None):
    return sample_points(assumptions, assumptions.chart, count, seed)


def _float_point(p):
    return {k: float(v) for k, v in p.items()}


def classify(f, assumptions=None, points=None, npoints=DEFAULT_POINTS, with_dimension=True):
    """Run the decision procedure on y'' = f; returns a ClassificationReport."""
    a = assumptions or Assumptions()
    f = sp.sympify(f)
    points = list(points) if points is not None else classification_points(a, npoints)
    scalars = curvature_scalars(f)
    flags = classify_flags(f, a, scalars)
    rep = ClassificationReport(
        expression=to_text(f),
        flags=flags.to_json(),
        scalars={k: to_text(v) for k, v in zip("abcd", scalars.as_tuple())},
        points=points,
        seed=a.seed,
    )
    st = {k: t.status for k, t in flags.tests.items()}
    rep.note(f"zero tests: a {st['a']}, b {st['b']}, c {st['c']}, d {st['d']}")
    for k in "ad":
        if st[k] is TriBool.UNKNOWN:
            rep.family = "undecided"
            rep.warnings.append(f"zero test of {k} undecided: {flags.tests[k].reason}")
            rep.note("stopped: vanishing of the curvature scalars is undecided")
            return rep

    a_zero, d_zero = st["a"] is TriBool.ZERO, st["d"] is TriBool.ZERO
    if a_zero and d_zero:
        from .symmetry import DimensionEstimate

        rep.family = "linearizable"
        rep.dimension = DimensionEstimate(8, True, {}, 0)
        rep.note("a = d = 0: equivalent to y'' = 0, symmetry algebra of dimension 8")
        return rep

    fpts = [_float_point(p) for p in points]
    if with_dimension:
        rep.dimension, _ = symmetry_dimension_estimate(f, fpts)
        rep.note(f"symmetry dimension estimate {rep.dimension} (ranks {rep.dimension.ranks})")
        if rep.dimension.dimension != 3:
            rep.note("dimension estimate is not 3")

    if not a_zero and not d_zero:
        _generic_branch(f, fpts, rep)
    elif d_zero:
        _degenerate_branch(f, fpts, rep)
    else:
        _dual_branch(rep)
    dim = rep.dimension.dimension if rep.dimension is not None else None
    if rep.family not in ("undecided", "dim<=2-undetermined") and dim is not None and dim != 3:
        rep.warnings.append(f"family {rep.family} found but the symmetry dimension estimate is {dim}")
    return rep


def _undetermined(rep, why):
    rep.family = "dim<=2-undetermined"
    rep.parameters = []
    rep.note(why)
    return rep


def _collect(rep, fpts, compute):
    """Evaluate `compute` at every point, skipping domain failures."""
    out = []
    for p in fpts:
        try:
            out.append((p, compute(p)))
        except (DomainError, ZeroDivisionError, FloatingPointError) as err:
            rep.warnings.append(f"point {p} skipped: {err}")
    if len(out) < 3:
        raise _TooFewPoints()
    return out


class _TooFewPoints(Exception):
    pass


def _generic_branch(f, fpts, rep):
    rep.note("a != 0, d != 0: generic normalization of the first derivatives")

    def compute(p):
        M, a, d = f1_values(f, p)
        return normalize_f1(M, a, d)

    try:
        sems = _collect(rep, fpts, compute)
    except _TooFewPoints:
        rep.family = "undecided"
        rep.warnings.append("fewer than three usable sample points")
        return rep
    for p, s in sems:
        rep.per_point.append(
            {"point": p, "a": s.a, "d": s.d, "s1": s.s1, "s2": s.s2, "s3": s.s3, "residual": s.residual}
        )
    vanish = [(abs(s.scale_free("s1")) < VANISH_TOL, abs(s.scale_free("s2")) < VANISH_TOL) for _, s in sems]
    if all(not v1 and not v2 for v1, v2 in vanish):
        return _i1_route(rep, [s for _, s in sems])
    if all(v1 and v2 for v1, v2 in vanish):
        return _i2_route(rep, [s for _, s in sems])
    return _undetermined(rep, "s1, s2 vanish at some sample points but not at others")


def _i1_route(rep, sems):
    vals = [invariant_I1(s) for s in sems]
    for row, v in zip(rep.per_point, vals):
        row["I1"] = v
    spread = _spread(vals)
    rep.note(f"s1, s2 != 0: I1 = a s3 / (s1 s2), spread {spread:.2e} over {len(vals)} points")
    if spread > CONSTANCY_TOL:
        return _undetermined(rep, "I1 is not constant: not a dimension-3 family")
    I = float(np.median(vals))
    rep.invariants["I1"] = I
    if _close(I, I1_3C):
        rep.family = "3c"
        rep.note("I1 = 41/256: family 3c")
    elif I > float(I1_3C):
        root = math.sqrt(15.0 / (256 * I - 41))
        alpha = (3 + root) / 2
        rep.family = "3a"
        rep.parameters = _pair(alpha, 3 - alpha)
        rep.note(f"I1 > 41/256: family 3a, alpha(alpha - 3) = {(96 - 576 * I) / (256 * I - 41):.12g}")
    else:
        alpha = math.sqrt(15.0 / (41 - 256 * I))
        rep.family = "3b"
        rep.parameters = _pair(alpha, -alpha)
        rep.note(f"I1 < 41/256: family 3b, alpha^2 = {alpha * alpha:.12g}")
    return rep


def _i2_route(rep, sems):
    rep.note("s1 = s2 = 0: switching to I2 = a^5 d / s3^4")
    if any(abs(s.scale_free("s3")) < VANISH_TOL for s in sems):
        return _undetermined(rep, "s3 vanishes as well; I2 is not defined")
    triples = [invariant_I2(s) for s in sems]
    for row, (v, sad, s3) in zip(rep.per_point, triples):
        row["I2"] = v
    sign_ad = {t[1] for t in triples}
    sign_s3 = {t[2] for t in triples}
    if len(sign_ad) != 1 or len(sign_s3) != 1:
        return _undetermined(rep, "signs of a d and s3 change between sample points")
    vals = [t[0] for t in triples]
    spread = _spread(vals)
    if spread > CONSTANCY_TOL:
        return _undetermined(rep, f"I2 is not constant (spread {spread:.2e})")
    I = float(np.median(vals))
    sad, s3 = sign_ad.pop(), sign_s3.pop()
    rep.invariants["I2"] = I
    rep.signs = {"a*d": _sgn(sad), "s3": _sgn(s3)}
    rep.note(f"I2 = {I:.12g}, sign(a d) {_sgn(sad)}, sign(s3) {_sgn(s3)}")
    at_split = _close(I, I2_SPLIT)
    if sad > 0:
        if at_split:
            if s3 < 0:
                rep.family, rep.parameters = "3a", [Fraction(3, 2)]
            else:
                rep.family, rep.parameters = "3b", [Fraction(0)]
        elif I > float(I2_SPLIT):
            alpha = 1 / math.sqrt(36 * I - 1)
            rep.family = "3e-" if s3 < 0 else "3g"
            if rep.family == "3g":
                # the normal form 2(1 + z^2)(x z - y) + alpha (1 + z^2)^(3/2)
                # over 1 + x^2 + y^2 has I2 = (alpha^2 + 4) / (36 alpha^2)
                alpha *= 2
            rep.parameters = _pair(alpha, -alpha)
        else:
            alpha = 1 / math.sqrt(1 - 36 * I)
            rep.family = "3e+" if s3 < 0 else "3f"
            rep.parameters = _pair(alpha, -alpha)
    else:
        if I >= 0:
            return _undetermined(rep, "sign(a d) < 0 needs I2 < 0; no tabulated family matches")
        alpha = 1 / math.sqrt(1 - 36 * I)
        rep.family = "3e+" if s3 > 0 else "3f"
        rep.parameters = _pair(alpha, -alpha)
    rep.note(f"sign table selects {rep.family}")
    return rep


def _degenerate_branch(f, fpts, rep):
    rep.note("d = 0, a != 0: normalization of the second derivatives of a")

    def compute(p):
        H = h1_values(f, p)
        return H, normalize_h1(H, H[0, 3] / 2)

    try:
        res = _collect(rep, fpts, compute)
    except _TooFewPoints:
        rep.family = "undecided"
        rep.warnings.append("fewer than three usable sample points")
        return rep
    trip = []
    for p, (H, s) in res:
        I1, I2, sg = degenerate_invariants(s)
        rel = max(abs(r) for r in h1_relations(H)) / max(1.0, float(np.abs(H).max()))
        rep.per_point.append(
            {
                "point": p,
                "a": s.a,
                "s11": s.s11,
                "s12": s.s12,
                "s13": s.s13,
                "s23": s.s23,
                "s33": s.s33,
                "I1": I1,
                "I2": I2,
                "bracket_residual": rel,
            }
        )
        trip.append((I1, I2, sg, s))
    signs = {t[2] for t in trip}
    if len(signs) != 1:
        return _undetermined(rep, "sign of s12 changes between sample points")
    I1s, I2s = [t[0] for t in trip], [t[1] for t in trip]
    if max(_spread(I1s), _spread(I2s)) > CONSTANCY_TOL:
        return _undetermined(rep, "degenerate-branch invariants are not constant")
    I1, I2 = float(np.median(I1s)), float(np.median(I2s))
    rep.invariants.update({"I1": I1, "I2": I2})
    sg = signs.pop()
    rep.signs = {"s12": _sgn(sg)}
    small = max(max(abs(t[3].s13), abs(t[3].s23)) / max(1.0, abs(t[3].s11), abs(t[3].s33)) for t in trip)
    rep.note(f"I1 = {I1:.12g}, I2 = {I2:.12g}, sign(s12) {_sgn(sg)}, max |s13|, |s23| (relative) {small:.1e}")
    if _close(I1, I1_3D) and _close(I2, I2_3D):
        rep.family = "3d+" if sg > 0 else "3d-"
        rep.note(f"I1 = 25/12 and I2 = -5/4: family {rep.family}")
        return rep
    return _undetermined(rep, "invariants differ from the values of 3d")


def _dual_branch(rep):
    rep.note("a = 0, d != 0: dual of 3d+-")
    dim = rep.dimension.dimension if rep.dimension is not None else None
    if dim == 3:
        rep.family = "dual-cubic-3d-family"
        rep.parameters = ["3e+ (alpha = +-1)", "3f (alpha = +-1)"]
        rep.note("dimension 3: one of 3e+ (alpha = +-1), 3f (alpha = +-1); not separated")
        return rep
    return _undetermined(rep, f"dimension estimate {dim}: not a dimension-3 equation")


def _pair(p, q):
    out = []
    for v in (p, q):
        g = rational_guess(v)
        out.append(g if g is not None else v)
    return out


def _sgn(s):
    return "+" if s > 0 else "-"
