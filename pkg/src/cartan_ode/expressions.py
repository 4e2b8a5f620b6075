"""Expression layer: parsing, normalization and exact differentiation.

Expressions are sympy trees over real chart symbols.  The parser below is
deliberately small: it accepts exactly the input grammar used by the command
line and the file formats, and turns decimals into exact rationals.
"""

import re

import sympy as sp

DEFAULT_CHART = ("x", "y", "z")

FUNCTIONS = {
    "exp": sp.exp,
    "ln": sp.log,
    "atan": sp.atan,
    "sin": sp.sin,
    "cos": sp.cos,
    "abs": sp.Abs,
    "sign": sp.sign,
    "sqrt": lambda u: sp.Pow(u, sp.Rational(1, 2)),
}

# expressions larger than this are not passed through cancel(); the
# rational-function reduction becomes too slow to be worth it there
NORMALIZE_OP_LIMIT = 600


class ParseError(ValueError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.message = message
        self.offset = offset


def symbol(name):
    """The real symbol used for chart variable `name`."""
    return sp.Symbol(name, real=True)


X, Y, Z = (symbol(n) for n in DEFAULT_CHART)


def chart_symbols(chart=DEFAULT_CHART):
    return tuple(symbol(n) for n in chart)


_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^(),]))")


def _tokenize(text):
    pos = 0
    tokens = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            offset = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[offset]!r}", offset)
        start = m.start(m.lastindex)
        kind = ("num", "ident", "op")[m.lastindex - 1]
        value = m.group(m.lastindex)
        if value == "**":
            value = "^"
        tokens.append((kind, value, start))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text, chart):
        self.tokens = _tokenize(text)
        self.i = 0
        self.names = {n: symbol(n) for n in chart}
        self.names.setdefault("pi", sp.pi)
        if "z" in self.names and "p" not in self.names:
            self.names["p"] = self.names["z"]

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, v, pos = self.peek()
        if v != value:
            found = "end of input" if kind == "end" else repr(v)
            raise ParseError(f"expected {value!r}, found {found}", pos)
        return self.take()

    def parse(self):
        e = self.expr()
        kind, v, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {v!r}", pos)
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self):
        e = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            e = e * rhs if op == "*" else e / rhs
        return e

    def unary(self):
        if self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            e = self.unary()
            return -e if op == "-" else e
        return self.power()

    def power(self):
        base = self.base()
        if self.peek()[1] == "^":
            self.take()
            exponent = self.unary()  # right associative, allows x^-1
            return sp.Pow(base, exponent)
        return base

    def base(self):
        kind, v, pos = self.take()
        if kind == "num":
            return sp.Rational(v)
        if kind == "ident":
            if v in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return FUNCTIONS[v](arg)
            if v in self.names:
                return self.names[v]
            raise ParseError(f"unknown identifier {v!r}", pos)
        if v == "(":
            e = self.expr()
            self.expect(")")
            return e
        found = "end of input" if kind == "end" else repr(v)
        raise ParseError(f"unexpected {found}", pos)


def parse(text, chart=DEFAULT_CHART):
    """Parse `text` into a normalized expression over `chart`.

    The identifier p is accepted as an alias of z (the derivative y').
    """
    return normalize(_Parser(text, chart).parse(), chart)


def normalize(e, chart=DEFAULT_CHART):
    """Canonical form: sympy's flattening and constant folding, then
    cancellation of common polynomial factors when the tree is small enough."""
    e = sp.sympify(e)
    if e.is_Number or e.is_Symbol:
        return e
    ops = sp.count_ops(e)
    if ops > NORMALIZE_OP_LIMIT:
        return e
    reduced = sp.cancel(e)
    if e.is_rational_function(*chart_symbols(chart)):
        return reduced
    # with transcendental atoms, cancel() treats them as generators and may
    # expand powers; keep its result only when it actually shrinks the tree
    return reduced if sp.count_ops(reduced) < ops else e


def strip_distributions(e):
    """Drop DiracDelta terms produced by differentiating sign/abs; under a
    declared sign the argument never crosses zero."""
    if e.has(sp.DiracDelta):
        e = e.replace(lambda n: isinstance(n, sp.DiracDelta), lambda n: sp.S.Zero)
    return e


def partial(e, v):
    """Raw partial derivative, no normalization (used in long formulas)."""
    return strip_distributions(sp.diff(e, v))


def differentiate(e, v, chart=DEFAULT_CHART):
    if isinstance(v, str):
        v = symbol(v)
    if v.name not in chart:
        raise ValueError(f"variable {v} is not in the chart {chart}")
    return normalize(partial(e, v), chart)


def total_derivative(e, f):
    """d/dx along the equation y'' = f: the field d/dx + z d/dy + f d/dz."""
    return normalize(partial(e, X) + Z * partial(e, Y) + f * partial(e, Z))


def free_chart_symbols(e, chart=DEFAULT_CHART):
    allowed = set(chart_symbols(chart))
    extra = {s for s in e.free_symbols if s not in allowed}
    if extra:
        raise ValueError(f"symbols outside the chart: {sorted(map(str, extra))}")
    return sorted(e.free_symbols, key=lambda s: s.name)


def to_text(e):
    """Render an expression in the input grammar (round-trips through parse)."""
    return _Printer().doprint(e)


class _Printer(sp.printing.str.StrPrinter):
    def _print_Pow(self, expr, rational=False):
        b, ex = expr.as_base_exp()
        if ex == sp.Rational(1, 2):
            return f"sqrt({self._print(b)})"
        base = self.parenthesize(b, sp.printing.precedence.PRECEDENCE["Pow"])
        if ex.is_Integer and ex >= 0:
            return f"{base}^{ex}"
        return f"{base}^({self._print(ex)})"

    def _print_Exp1(self, expr):
        return "exp(1)"

    def _print_Pi(self, expr):
        return "pi"

    def _print_log(self, expr):
        return f"ln({self._print(expr.args[0])})"

    def _print_Abs(self, expr):
        return f"abs({self._print(expr.args[0])})"
