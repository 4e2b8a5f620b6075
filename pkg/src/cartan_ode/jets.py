"""Truncated multivariate Taylor series ("jets") at a point.

A jet stores the Taylor coefficients c_a = (d^a F)(p) / a! for all
multi-indices a of total degree <= K, as the last axis of a numpy array
(leading axes allow batches of jets).  Derivatives lower the number of
trustworthy degrees by one; that count is tracked in `order`.

Products gather coefficient pairs and scatter them with a sparse matrix,
so a batch of n jets costs one sparse product.  Elementary functions are
applied by composing their one-variable Taylor series with the jet.
"""

import functools
import math
from itertools import combinations_with_replacement

import numpy as np
import scipy.sparse as sps
import sympy as sp

from .evaluation import DomainError


class JetSpace:
    def __init__(self, names, order):
        self.names = tuple(names)
        self.nvars = len(self.names)
        self.order = order
        monos = []
        for deg in range(order + 1):
            for combo in combinations_with_replacement(range(self.nvars), deg):
                a = [0] * self.nvars
                for v in combo:
                    a[v] += 1
                monos.append(tuple(a))
        self.monomials = monos
        self.size = len(monos)
        self.index = {m: i for i, m in enumerate(monos)}
        self.degree = np.array([sum(m) for m in monos])
        I, J, K, D = [], [], [], []
        for i, a in enumerate(monos):
            for j, b in enumerate(monos):
                d = self.degree[i] + self.degree[j]
                if d <= order:
                    I.append(i)
                    J.append(j)
                    K.append(self.index[tuple(p + q for p, q in zip(a, b))])
                    D.append(d)
        I, J, K, D = map(np.array, (I, J, K, D))
        perm = np.argsort(D, kind="stable")
        self.pi, self.pj, self.pk = I[perm], J[perm], K[perm]
        sorted_deg = D[perm]
        # pairs contributing to degrees <= m form a prefix of the sorted list
        self.prefix = [int(np.searchsorted(sorted_deg, m, side="right")) for m in range(order + 1)]
        self.scatter = [
            sps.csr_matrix((np.ones(n), (np.arange(n), self.pk[:n])), shape=(n, self.size)) for n in self.prefix
        ]
        self.dsrc, self.ddst, self.dfac = [], [], []
        for v in range(self.nvars):
            src, dst, fac = [], [], []
            for i, a in enumerate(monos):
                if a[v] and self.degree[i] >= 1:
                    b = list(a)
                    b[v] -= 1
                    src.append(i)
                    dst.append(self.index[tuple(b)])
                    fac.append(a[v])
            self.dsrc.append(np.array(src, dtype=int))
            self.ddst.append(np.array(dst, dtype=int))
            self.dfac.append(np.array(fac, dtype=float))

    def var_index(self, v):
        if isinstance(v, (int, np.integer)):
            return int(v)
        name = v.name if isinstance(v, sp.Symbol) else str(v)
        return self.names.index(name)

    def constant(self, value):
        c = np.zeros(self.size)
        c[0] = value
        return Jet(self, c, self.order)

    def variable(self, v, value):
        c = np.zeros(self.size)
        c[0] = value
        one = [0] * self.nvars
        one[self.var_index(v)] = 1
        c[self.index[tuple(one)]] = 1.0
        return Jet(self, c, self.order)

    def stack(self, jets):
        """Batch a list of jets into one jet with a leading axis."""
        order = min(j.order for j in jets) if jets else self.order
        return Jet(self, np.stack([j.c for j in jets]), order)


@functools.lru_cache(maxsize=16)
def jet_space(names, order):
    return JetSpace(names, order)


def _coerce(space, other):
    if isinstance(other, Jet):
        return other
    if isinstance(other, sp.Basic):
        if not other.is_Number:
            return NotImplemented
        other = float(other)
    if isinstance(other, (int, float, np.floating, np.integer)):
        return float(other)
    return NotImplemented


class Jet:
    __array_ufunc__ = None  # let numpy scalars defer to our operators
    __slots__ = ("space", "c", "order")

    def __init__(self, space, c, order):
        self.space = space
        self.c = c
        self.order = order

    @property
    def value(self):
        return self.c[..., 0]

    def __repr__(self):
        return f"Jet(value={self.value}, order={self.order})"

    def _new(self, c, order):
        return Jet(self.space, c, order)

    def __add__(self, other):
        o = _coerce(self.space, other)
        if o is NotImplemented:
            return o
        if isinstance(o, Jet):
            return self._new(self.c + o.c, min(self.order, o.order))
        c = self.c.copy()
        c[..., 0] += o
        return self._new(c, self.order)

    __radd__ = __add__

    def __neg__(self):
        return self._new(-self.c, self.order)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = _coerce(self.space, other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = _coerce(self.space, other)
        if o is NotImplemented:
            return o
        return (-self) + o

    def __mul__(self, other):
        o = _coerce(self.space, other)
        if o is NotImplemented:
            return o
        if isinstance(o, Jet):
            order = min(self.order, o.order)
            sp_ = self.space
            n = sp_.prefix[order]
            prod = self.c[..., sp_.pi[:n]] * o.c[..., sp_.pj[:n]]
            S = sp_.scatter[order]
            if prod.ndim == 1:
                out = S.T @ prod
            else:
                lead = prod.shape[:-1]
                out = (S.T @ prod.reshape(-1, n).T).T.reshape(*lead, sp_.size)
            return self._new(np.asarray(out), order)
        return self._new(self.c * o, self.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(self.space, other)
        if o is NotImplemented:
            return o
        if isinstance(o, Jet):
            return self * o.power(-1)
        return self._new(self.c / o, self.order)

    def __rtruediv__(self, other):
        o = _coerce(self.space, other)
        if o is NotImplemented:
            return o
        return self.power(-1) * o

    def __pow__(self, exponent):
        if isinstance(exponent, Jet):
            return (exponent * self.log()).exp()
        return self.power(exponent)

    def diff(self, v):
        i = self.space.var_index(v)
        sp_ = self.space
        c = np.zeros_like(self.c)
        c[..., sp_.ddst[i]] = self.c[..., sp_.dsrc[i]] * sp_.dfac[i]
        return self._new(c, self.order - 1)

    # -- composition with one-variable series ---------------------------
    def compose(self, coeffs):
        """F(self) where coeffs[n] = F^(n)(u0)/n! (arrays broadcast over the
        batch axes)."""
        h = self._new(self.c.copy(), self.order)
        h.c[..., 0] = 0.0
        K = self.order
        out = self._new(np.zeros_like(self.c), self.order)
        out.c[..., 0] = coeffs[K]
        for n in range(K - 1, -1, -1):
            out = out * h
            out.c[..., 0] += coeffs[n]
        return out

    def power(self, r):
        r = sp.Rational(r) if not isinstance(r, float) else r
        u0 = self.value
        if isinstance(r, sp.Integer) or (isinstance(r, sp.Rational) and r.q == 1):
            n = int(r)
            if n >= 0:
                return self._int_power(n)
            if np.any(u0 == 0):
                raise DomainError("division by zero", "1/u")
            rf = float(n)
        else:
            if np.any(u0 <= 0):
                raise DomainError("fractional power of a non-positive base", f"u^{r}")
            rf = float(r)
        coeffs = [np.power(u0, rf) if np.ndim(u0) else u0**rf]
        for k in range(1, self.order + 1):
            coeffs.append(coeffs[-1] * (rf - k + 1) / k / u0)
        return self.compose(coeffs)

    def _int_power(self, n):
        result = None
        base = self
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        if result is None:
            out = self._new(np.zeros_like(self.c), self.order)
            out.c[..., 0] = 1.0
            return out
        return result

    def exp(self):
        e0 = np.exp(self.value)
        return self.compose([e0 / math.factorial(n) for n in range(self.order + 1)])

    def log(self):
        u0 = self.value
        if np.any(u0 <= 0):
            raise DomainError("logarithm of a non-positive value", "ln(u)")
        coeffs = [np.log(u0)] + [(-1) ** (n + 1) / (n * u0**n) for n in range(1, self.order + 1)]
        return self.compose(coeffs)

    def atan(self):
        u0 = self.value
        K = self.order
        # 1/(1 + (u0+h)^2) = sum b_n h^n, from (q0 + q1 h + h^2) * b = 1
        q0, q1 = 1 + u0**2, 2 * u0
        b = [1 / q0]
        for n in range(1, K):
            prev2 = b[n - 2] if n >= 2 else 0.0
            b.append(-(q1 * b[n - 1] + prev2) / q0)
        coeffs = [np.arctan(u0)] + [b[n - 1] / n for n in range(1, K + 1)]
        return self.compose(coeffs)

    def sin(self):
        u0 = self.value
        return self.compose([np.sin(u0 + n * np.pi / 2) / math.factorial(n) for n in range(self.order + 1)])

    def cos(self):
        u0 = self.value
        return self.compose([np.cos(u0 + n * np.pi / 2) / math.factorial(n) for n in range(self.order + 1)])

    def sign(self):
        u0 = self.value
        if np.any(u0 == 0):
            raise DomainError("sign at a zero", "sign(u)")
        out = self._new(np.zeros_like(self.c), self.order)
        out.c[..., 0] = np.sign(u0)
        return out

    def abs(self):
        return self * self.sign()


def to_jet(expr, point, space):
    """Jet of a sympy expression at `point` (mapping name -> number)."""
    memo = {}
    values = {n: float(point[n]) for n in space.names if n in point}

    def ev(node):
        if node in memo:
            return memo[node]
        if node.is_Symbol:
            if node.name not in values:
                raise KeyError(f"no coordinate for {node}")
            r = space.variable(node.name, values[node.name])
        elif node.is_Number or node in (sp.pi, sp.E):
            r = space.constant(float(node))
        elif node.is_Add:
            r = ev(node.args[0])
            for a in node.args[1:]:
                r = r + ev(a)
        elif node.is_Mul:
            r = ev(node.args[0])
            for a in node.args[1:]:
                r = r * ev(a)
        elif node.is_Pow:
            base, ex = node.args
            if ex.is_Rational:
                r = ev(base).power(ex)
            else:
                r = ev(base) ** ev(ex)
        elif isinstance(node, sp.exp):
            r = ev(node.args[0]).exp()
        elif isinstance(node, sp.log):
            r = ev(node.args[0]).log()
        elif isinstance(node, sp.atan):
            r = ev(node.args[0]).atan()
        elif isinstance(node, sp.sin):
            r = ev(node.args[0]).sin()
        elif isinstance(node, sp.cos):
            r = ev(node.args[0]).cos()
        elif isinstance(node, sp.Abs):
            r = ev(node.args[0]).abs()
        elif isinstance(node, sp.sign):
            r = ev(node.args[0]).sign()
        else:
            raise TypeError(f"no jet rule for {node.func.__name__}")
        memo[node] = r
        return r

    if not isinstance(expr, sp.Basic):
        expr = sp.sympify(expr)
    return ev(expr)
