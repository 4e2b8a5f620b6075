"""Numeric evaluation of expression trees.

Three evaluators share the same node vocabulary:

* `evaluate_batch` walks the tree once with numpy arrays (one entry per
  sample point) and also reports the largest intermediate magnitude, which
  the zero test uses to scale its threshold;
* `evaluate` is the scalar front end, raising DomainError with the
  offending subexpression;
* `interval_range` encloses the range of an expression over a box with
  mpmath interval arithmetic, used to prove signs.
"""

import math

import mpmath
import numpy as np
import sympy as sp


class DomainError(ArithmeticError):
    def __init__(self, message, subexpr):
        super().__init__(f"{message}: {subexpr}")
        self.subexpr = subexpr


class UnsupportedNode(TypeError):
    pass


def _is_integer_exponent(ex):
    return ex.is_Integer


def evaluate_batch(e, columns, npoints):
    """Evaluate at `npoints` points given per-symbol arrays.

    Returns (values, magnitude, failed, culprit): failed is a boolean mask of
    points where some subexpression left its domain, culprit the first
    subexpression found failing (or None).
    """
    memo = {}
    mag = np.zeros(npoints)
    failed = np.zeros(npoints, dtype=bool)
    culprit = []

    def note(node, val, bad):
        nonlocal mag, failed
        bad = bad | ~np.isfinite(val)
        new = bad & ~failed
        if new.any() and not culprit:
            culprit.append(node)
        failed = failed | bad
        with np.errstate(invalid="ignore"):
            mag = np.fmax(mag, np.where(bad, 0.0, np.abs(val)))
        return np.where(bad, np.nan, val)

    def ev(node):
        if node in memo:
            return memo[node]
        none = np.zeros(npoints, dtype=bool)
        if node.is_Symbol:
            if node not in columns:
                raise KeyError(f"no value for {node}")
            val = np.asarray(columns[node], dtype=float)
            bad = none
        elif node.is_Number or node in (sp.pi, sp.E):
            val = np.full(npoints, float(node))
            bad = none
        elif node.is_Add:
            val = sum(ev(a) for a in node.args)
            bad = none
        elif node.is_Mul:
            val = np.ones(npoints)
            for a in node.args:
                val = val * ev(a)
            bad = none
        elif node.is_Pow:
            base, ex = node.args
            b = ev(base)
            with np.errstate(all="ignore"):
                if _is_integer_exponent(ex):
                    n = int(ex)
                    bad = (b == 0) if n < 0 else none
                    val = np.power(b, float(n))
                elif ex.is_Rational:
                    bad = b < 0
                    if ex < 0:
                        bad = bad | (b == 0)
                    val = np.power(np.abs(b), float(ex))
                else:
                    k = ev(ex)
                    bad = b <= 0
                    val = np.exp(k * np.log(np.abs(b)))
        elif isinstance(node, sp.exp):
            with np.errstate(all="ignore"):
                val = np.exp(ev(node.args[0]))
            bad = none
        elif isinstance(node, sp.log):
            u = ev(node.args[0])
            bad = u <= 0
            with np.errstate(all="ignore"):
                val = np.log(np.abs(u))
        elif isinstance(node, sp.atan):
            val = np.arctan(ev(node.args[0]))
            bad = none
        elif isinstance(node, sp.sin):
            val = np.sin(ev(node.args[0]))
            bad = none
        elif isinstance(node, sp.cos):
            val = np.cos(ev(node.args[0]))
            bad = none
        elif isinstance(node, sp.Abs):
            val = np.abs(ev(node.args[0]))
            bad = none
        elif isinstance(node, sp.sign):
            u = ev(node.args[0])
            val = np.sign(u)
            bad = u == 0
        else:
            raise UnsupportedNode(f"cannot evaluate node {node.func.__name__}")
        out = note(node, val, bad)
        memo[node] = out
        return out

    with np.errstate(all="ignore"):
        values = ev(sp.sympify(e))
    values = np.broadcast_to(values, (npoints,)).copy()
    return values, mag, failed, (culprit[0] if culprit else None)


def evaluate(e, point, precision=53):
    """Value of `e` at `point` (mapping symbol or name -> number).

    precision is the float width in bits; 53 uses numpy doubles, larger
    widths re-evaluate with mpmath after the domain check.
    """
    e = sp.sympify(e)
    cols = {}
    for k, v in point.items():
        s = k if isinstance(k, sp.Symbol) else sp.Symbol(k, real=True)
        cols[s] = np.array([float(v)])
    missing = [s for s in e.free_symbols if s not in cols]
    if missing:
        raise KeyError(f"point does not cover {sorted(map(str, missing))}")
    vals, _, failed, culprit = evaluate_batch(e, cols, 1)
    if failed[0]:
        raise DomainError("evaluation left the domain", culprit)
    if precision <= 53:
        return float(vals[0])
    digits = int(math.ceil(precision * math.log10(2)))
    subs = {s: sp.Rational(str(point.get(s, point.get(s.name)))) for s in e.free_symbols}
    return sp.N(e.subs(subs), digits)


def interval_range(e, box):
    """Enclosure (lo, hi) of `e` over `box` (symbol -> (lo, hi)), or None
    when the enclosure cannot be formed (domain issues, unsupported nodes)."""
    iv = mpmath.iv
    memo = {}

    def ev(node):
        if node in memo:
            return memo[node]
        if node.is_Symbol:
            lo, hi = box[node]
            r = iv.mpf([float(lo), float(hi)])
        elif node.is_Rational:
            r = iv.mpf(int(node.p)) / iv.mpf(int(node.q))
        elif node.is_Number or node in (sp.pi, sp.E):
            r = iv.mpf(float(node))
        elif node.is_Add:
            r = iv.mpf(0)
            for a in node.args:
                r = r + ev(a)
        elif node.is_Mul:
            r = iv.mpf(1)
            for a in node.args:
                r = r * ev(a)
        elif node.is_Pow:
            base, ex = node.args
            b = ev(base)
            if ex.is_Integer:
                n = int(ex)
                if n < 0 and b.a <= 0 <= b.b:
                    raise ArithmeticError
                r = b ** n
            elif ex.is_Rational:
                if b.a < 0 or (ex < 0 and b.a <= 0):
                    raise ArithmeticError
                # monotone on the nonnegative axis; pad for rounding
                ends = sorted(float(t) ** float(ex) for t in (b.a, b.b))
                r = iv.mpf([ends[0] * (1 - 1e-14), ends[1] * (1 + 1e-14)])
            else:
                if b.a <= 0:
                    raise ArithmeticError
                r = iv.exp(ev(ex) * iv.log(b))
        elif isinstance(node, sp.exp):
            r = iv.exp(ev(node.args[0]))
        elif isinstance(node, sp.log):
            u = ev(node.args[0])
            if u.a <= 0:
                raise ArithmeticError
            r = iv.log(u)
        elif isinstance(node, sp.atan):
            u = ev(node.args[0])
            pad = 1e-15
            r = iv.mpf([math.atan(float(u.a)) - pad, math.atan(float(u.b)) + pad])
        elif isinstance(node, sp.sin):
            r = iv.sin(ev(node.args[0]))
        elif isinstance(node, sp.cos):
            r = iv.cos(ev(node.args[0]))
        elif isinstance(node, sp.Abs):
            u = ev(node.args[0])
            if u.a >= 0:
                r = u
            elif u.b <= 0:
                r = -u
            else:
                r = iv.mpf([0, max(-u.a, u.b)])
        elif isinstance(node, sp.sign):
            u = ev(node.args[0])
            if u.a > 0:
                r = iv.mpf(1)
            elif u.b < 0:
                r = iv.mpf(-1)
            else:
                raise ArithmeticError
        else:
            raise ArithmeticError
        memo[node] = r
        return r

    try:
        r = ev(sp.sympify(e))
    except (ArithmeticError, ValueError, ZeroDivisionError, KeyError):
        return None
    lo, hi = float(r.a), float(r.b)
    if math.isnan(lo) or math.isnan(hi):
        return None
    return lo, hi
