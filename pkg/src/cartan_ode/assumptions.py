"""Sign declarations, sampling boxes and branch resolution."""

import enum
import functools
import re
from dataclasses import dataclass, field

import sympy as sp

from .evaluation import interval_range
from .expressions import DEFAULT_CHART, normalize, parse, symbol

DEFAULT_BOX = (sp.Rational(1, 2), sp.Integer(2))
DEFAULT_SAMPLES = 12


class TriBool(enum.Enum):
    ZERO = "zero"
    NONZERO = "nonzero"
    UNKNOWN = "unknown"

    def __str__(self):
        return self.value


class MissingAssumption(ValueError):
    """A branch point (abs, sign, fractional power) has no known sign."""

    def __init__(self, subexpr):
        super().__init__(f"no sign known for {subexpr}")
        self.subexpr = subexpr


@dataclass(frozen=True)
class Assumptions:
    """Declared signs of subexpressions plus the sampling box.

    signs holds (expression, +1 or -1) pairs; box holds (name, (lo, hi))
    pairs with rational bounds.  Variables without a box entry use
    DEFAULT_BOX.
    """

    signs: tuple = ()
    box: tuple = ()
    seed: int = 0
    samples: int = DEFAULT_SAMPLES
    chart: tuple = DEFAULT_CHART
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @classmethod
    def build(cls, relations=(), box=None, seed=0, samples=DEFAULT_SAMPLES, chart=DEFAULT_CHART):
        """relations: strings like "1 - z^2 > 0" or "sign(z) = -1";
        box: mapping name -> (lo, hi) or strings "z:0.1,0.9"."""
        signs = tuple(parse_relation(r, chart) if isinstance(r, str) else r for r in relations)
        entries = {}
        if isinstance(box, dict):
            for k, (lo, hi) in box.items():
                entries[k] = (sp.Rational(str(lo)), sp.Rational(str(hi)))
        elif box:
            for spec in box:
                k, lohi = parse_box(spec)
                entries[k] = lohi
        for k, (lo, hi) in entries.items():
            if not lo < hi:
                raise ValueError(f"empty box for {k}: [{lo}, {hi}]")
        return cls(signs=signs, box=tuple(sorted(entries.items())), seed=seed, samples=samples,
                   chart=tuple(chart))

    def interval(self, name):
        if isinstance(name, sp.Symbol):
            name = name.name
        return dict(self.box).get(name, DEFAULT_BOX)

    def box_of(self, symbols):
        return {s: self.interval(s) for s in symbols}

    def with_seed(self, seed):
        return Assumptions(self.signs, self.box, seed, self.samples, self.chart)

    def with_box(self, **intervals):
        b = dict(self.box)
        for k, (lo, hi) in intervals.items():
            b[k] = (sp.Rational(str(lo)), sp.Rational(str(hi)))
        return Assumptions(self.signs, tuple(sorted(b.items())), self.seed, self.samples, self.chart)

    def declared_sign(self, u):
        key = normalize(u, self.chart)
        neg = normalize(-u, self.chart)
        for expr, s in self.signs:
            if expr == key:
                return s
            if expr == neg:
                return -s
        return None

    def sign_of(self, u):
        """+1 / -1 when declared or provable over the box, else None."""
        u = sp.sympify(u)
        if u in self._cache:
            return self._cache[u]
        s = None
        if u.is_Number:
            s = int(sp.sign(u)) or None
        if s is None:
            s = self.declared_sign(u)
        if s is None:
            rng = interval_range(u, self.box_of(u.free_symbols))
            if rng is not None:
                if rng[0] > 0:
                    s = 1
                elif rng[1] < 0:
                    s = -1
        self._cache[u] = s
        return s

    def describe(self):
        return {
            "signs": [f"{_fmt(e)} {'>' if s > 0 else '<'} 0" for e, s in self.signs],
            "box": {k: [str(lo), str(hi)] for k, (lo, hi) in self.box},
            "seed": self.seed,
            "samples": self.samples,
        }

    def transformed(self, substitution, new_box):
        """Assumptions for a transformed expression: every declared
        subexpression is pushed through `substitution` (symbol -> expr)."""
        signs = tuple((normalize(e.subs(substitution, simultaneous=True), self.chart), s) for e, s in self.signs)
        b = {k: (sp.Rational(str(lo)), sp.Rational(str(hi))) for k, (lo, hi) in new_box.items()}
        return Assumptions(signs, tuple(sorted(b.items())), self.seed, self.samples, self.chart)


def _fmt(e):
    from .expressions import to_text

    return to_text(e)


_REL = re.compile(r"^(.*?)(>=|<=|>|<|=)(.*)$")


def parse_relation(text, chart=DEFAULT_CHART):
    """'lhs > rhs' / 'lhs < rhs' / 'sign(u) = +1' -> (normalized lhs - rhs, sign)."""
    m = _REL.match(text.strip())
    if not m:
        raise ValueError(f"cannot read relation {text!r}; expected 'lhs > rhs' or 'lhs < rhs'")
    lhs, op, rhs = m.group(1), m.group(2), m.group(3)
    if op == "=":
        left = parse(lhs, chart)
        val = parse(rhs, chart)
        if not isinstance(left, sp.sign) or val not in (1, -1):
            raise ValueError(f"equality relations must read 'sign(u) = +1' or '= -1': {text!r}")
        return normalize(left.args[0], chart), int(val)
    diff = normalize(parse(lhs, chart) - parse(rhs, chart), chart)
    return diff, (1 if op.startswith(">") else -1)


def parse_box(text):
    """'z:0.1,0.9' -> ('z', (1/10, 9/10))"""
    try:
        name, rest = text.split(":")
        lo, hi = rest.split(",")
        return name.strip(), (sp.Rational(lo.strip()), sp.Rational(hi.strip()))
    except ValueError as err:
        raise ValueError(f"box must read 'var:lo,hi', got {text!r}") from err


def resolve_branches(e, assumptions):
    """Rewrite abs(u) -> s*u and sign(u) -> s using known signs, and check
    every fractional power has a provably positive base.

    Raises MissingAssumption naming the first undecided subexpression.
    """
    return _resolve(sp.sympify(e), assumptions)


@functools.lru_cache(maxsize=4096)
def _resolve(e, assumptions):
    if e.is_Atom:
        return e
    args = [_resolve(a, assumptions) for a in e.args]
    if isinstance(e, sp.Abs):
        s = assumptions.sign_of(args[0])
        if s is None:
            raise MissingAssumption(e.args[0])
        return s * args[0]
    if isinstance(e, sp.sign):
        s = assumptions.sign_of(args[0])
        if s is None:
            raise MissingAssumption(e.args[0])
        return sp.Integer(s)
    if e.is_Pow and not args[1].is_Integer:
        if assumptions.sign_of(args[0]) != 1:
            raise MissingAssumption(args[0])
    if all(a is b for a, b in zip(args, e.args)):
        return e
    return e.func(*args)


__all__ = [
    "Assumptions",
    "TriBool",
    "MissingAssumption",
    "parse_relation",
    "parse_box",
    "resolve_branches",
    "symbol",
]
