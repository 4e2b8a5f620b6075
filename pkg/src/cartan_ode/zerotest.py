"""Probabilistic zero testing.

An expression is first normalized; if that does not already give 0 it is
evaluated at seeded random points of the sampling box and compared against
a threshold scaled by the largest intermediate value met during
evaluation (cancellation between large terms is expected in the curvature
formulas).
"""

from dataclasses import dataclass

import numpy as np
import sympy as sp

from .assumptions import Assumptions, MissingAssumption, TriBool, resolve_branches
from .evaluation import evaluate_batch
from .expressions import normalize, symbol

ZERO_THRESHOLD = 1e-9
MAX_DRAWS_PER_POINT = 200
GRID = 4096


@dataclass
class ZeroTest:
    status: TriBool
    reason: str = ""
    max_ratio: float = 0.0  # largest |value| / (1 + magnitude) seen


def _satisfies(assumptions, point):
    if not assumptions.signs:
        return True
    cols = {symbol(k): np.array([float(v)]) for k, v in point.items()}
    for expr, s in assumptions.signs:
        if any(sym not in cols for sym in expr.free_symbols):
            continue
        val, _, failed, _ = evaluate_batch(expr, cols, 1)
        if failed[0] or val[0] * s <= 0:
            return False
    return True


def sample_points(assumptions, names=None, count=None, seed=None):
    """Rational points of the box honouring every declared sign.

    Points lie on a 1/4096 grid of each interval (exact rationals, so reports
    can print them without rounding).  Raises ValueError when the declared
    signs exclude nearly the whole box.
    """
    names = list(names if names is not None else assumptions.chart)
    count = assumptions.samples if count is None else count
    rng = np.random.default_rng(assumptions.seed if seed is None else seed)
    points = []
    draws = 0
    while len(points) < count:
        draws += 1
        if draws > MAX_DRAWS_PER_POINT * count:
            raise ValueError("declared signs exclude the sampling box")
        point = {}
        for n in names:
            lo, hi = assumptions.interval(n)
            k = int(rng.integers(1, GRID))
            point[n] = lo + (hi - lo) * sp.Rational(k, GRID)
        if _satisfies(assumptions, point):
            points.append(point)
    return points


def zero_test(e, assumptions=None):
    a = assumptions or Assumptions()
    e = sp.sympify(e)
    try:
        r = resolve_branches(e, a)
    except MissingAssumption as err:
        return ZeroTest(TriBool.UNKNOWN, f"undeclared sign of {err.subexpr}")
    n = normalize(r, a.chart)
    if n == 0:
        return ZeroTest(TriBool.ZERO, "normalizes to 0")
    if n.is_Number:
        return ZeroTest(TriBool.NONZERO, "nonzero constant", float("inf"))
    names = list(a.chart) + sorted(s.name for s in n.free_symbols if s.name not in a.chart)
    pts = sample_points(a, names)
    k = len(pts)
    cols = {symbol(nm): np.array([float(p[nm]) for p in pts]) for nm in names}
    vals, mag, failed, culprit = evaluate_batch(n, cols, k)
    if failed.sum() > k / 2:
        return ZeroTest(TriBool.UNKNOWN, f"evaluation failed at {int(failed.sum())}/{k} samples ({culprit})")
    ok = ~failed
    ratio = np.abs(vals[ok]) / (1.0 + mag[ok])
    worst = float(ratio.max()) if ratio.size else 0.0
    if worst >= ZERO_THRESHOLD:
        return ZeroTest(TriBool.NONZERO, "sample above threshold", worst)
    return ZeroTest(TriBool.ZERO, f"below threshold at {int(ok.sum())} samples", worst)


def is_zero(e, assumptions=None):
    return zero_test(e, assumptions).status
