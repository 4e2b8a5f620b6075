"""Recognizing right-hand sides that are cubic polynomials in z = y'."""

from dataclasses import dataclass

import sympy as sp

from .assumptions import Assumptions, MissingAssumption, TriBool, resolve_branches
from .expressions import X, Y, Z, normalize, partial, to_text
from .zerotest import zero_test


class UndecidableError(RuntimeError):
    """A zero test needed for the decision came back Unknown."""


@dataclass(frozen=True)
class CubicForm:
    """y'' = A z^3 + B z^2 + C z + D with A..D functions of (x, y)."""

    A: sp.Expr
    B: sp.Expr
    C: sp.Expr
    D: sp.Expr

    def rhs(self):
        return self.A * Z**3 + self.B * Z**2 + self.C * Z + self.D

    def as_tuple(self):
        return (self.A, self.B, self.C, self.D)

    def to_json(self):
        return {k: to_text(v) for k, v in zip("ABCD", self.as_tuple())}

    @classmethod
    def of(cls, A, B, C, D):
        return cls(*(normalize(sp.sympify(c)) for c in (A, B, C, D)))


def _decide(e, a, what):
    t = zero_test(e, a)
    if t.status is TriBool.UNKNOWN:
        raise UndecidableError(f"cannot decide whether {what} vanishes: {t.reason}")
    return t.status is TriBool.ZERO


def cubic_coefficients(f, assumptions=None):
    """Return the CubicForm of f, or None when f is not cubic in z."""
    a = assumptions or Assumptions()
    f = sp.sympify(f)
    if f.has(sp.Abs, sp.sign):
        # abs/sign are piecewise; only a known sign makes the z-dependence explicit
        try:
            f = normalize(resolve_branches(f, a))
        except MissingAssumption as err:
            raise UndecidableError(f"cannot decide the sign of {to_text(err.subexpr)}") from err
    fz = partial(f, Z)
    fzz = partial(fz, Z)
    fzzz = partial(fzz, Z)
    if not _decide(partial(fzzz, Z), a, "f_zzzz"):
        return None
    A = normalize(fzzz / 6)
    B = normalize((fzz - 6 * A * Z) / 2)
    C = normalize(fz - 3 * A * Z**2 - 2 * B * Z)
    D = normalize(f - A * Z**3 - B * Z**2 - C * Z)
    for name, c in zip("ABCD", (A, B, C, D)):
        if not _decide(partial(c, Z), a, f"d{name}/dz"):
            return None
    # z-free coefficients may still carry z symbolically (e.g. unsimplified
    # transcendental identities); pin them to the middle of the z interval
    lo, hi = a.interval("z")
    mid = (lo + hi) / 2
    A, B, C, D = (normalize(c.subs(Z, mid)) if c.has(Z) else c for c in (A, B, C, D))
    return CubicForm(A, B, C, D)


__all__ = ["CubicForm", "cubic_coefficients", "UndecidableError", "X", "Y", "Z"]
