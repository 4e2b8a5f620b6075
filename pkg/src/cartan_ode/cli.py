"""Command-line interface: cartan-ode <command> [options].

Every command builds a report dictionary; --json prints it as JSON with a
schema version, otherwise as aligned text.  Exit codes: 0 success (also
for undecided results, which carry warnings), 1 usage or input errors,
2 internal consistency failures.
"""

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

import numpy as np
import sympy as sp

from . import __version__
from .assumptions import Assumptions
from .cartan import curvature_scalars
from .classifier import classify
from .cubic import CubicForm, UndecidableError, cubic_coefficients
from .distributions import (
    DistributionSpec,
    MatrixPath,
    frobenius_by_brackets,
    frobenius_by_forms,
    frobenius_integrable,
    integrate_g_structure,
    solve_linear,
    superposition_solve,
)
from .evaluation import evaluate_batch
from .expressions import ParseError, parse, symbol, to_text
from .invariants import NormalizationError
from .projective import (
    PlaneCurve,
    build_projective_connection,
    curvature,
    develop_curve,
    geodesic_equation,
    solve_geodesic,
)
from .symmetry import RANK_TOL, symmetry_dimension_estimate
from .zerotest import sample_points, zero_test

SCHEMA = "1"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- helpers ------------------------------------------------------------------


def _rational(v):
    r = sp.Rational(v)
    return f"{r.p}/{r.q}"


def _point(p):
    return {k: _rational(v) for k, v in p.items()}


def _split_top(text, sep):
    """Split on `sep` outside parentheses."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return [s.strip() for s in out]


def _matrix_rows(text):
    """'a, b; c, d' -> [['a', 'b'], ['c', 'd']]"""
    rows = [_split_top(r, ",") for r in _split_top(text, ";")]
    if len({len(r) for r in rows}) != 1 or len(rows) != len(rows[0]):
        raise UsageError(f"matrix must be square with rows separated by ';': {text!r}")
    return rows


def _floats(text, what):
    try:
        return [float(Fraction(s.strip())) for s in text.split(",")]
    except ValueError as err:
        raise UsageError(f"{what} must be comma-separated numbers: {text!r}") from err


def _assumptions(args, chart=("x", "y", "z")):
    return Assumptions.build(args.assume or (), args.box or None, args.seed, args.samples, chart)


def _read_text(path):
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) for v in r])
    if path == "-":
        sys.stdout.write(buf.getvalue())
    else:
        with open(path, "w") as fh:
            fh.write(buf.getvalue())


def _matrix_json(M):
    return [[float(v) for v in row] for row in np.asarray(M)]


def _matrix_path(args):
    t0, t1 = _floats(args.t_range, "--t-range")
    if args.csv:
        return MatrixPath.from_csv(args.csv, args.constraint)
    if args.matrix:
        return MatrixPath.from_expressions(_matrix_rows(args.matrix), t0, t1, constraint=args.constraint)
    raise UsageError("give the matrix path with --matrix or --csv")


# -- commands -----------------------------------------------------------------


def cmd_classify(args):
    a = _assumptions(args)
    f = parse(args.expr)
    rep = classify(f, a, npoints=args.points, with_dimension=not args.no_dimension)
    out = rep.to_json()
    out["input"] = args.expr
    return out


def cmd_invariants(args):
    a = _assumptions(args)
    f = parse(args.expr)
    cs = curvature_scalars(f)
    pts = sample_points(a, a.chart, args.points)
    cols = {symbol(n): np.array([float(p[n]) for p in pts]) for n in a.chart}
    values = {}
    for k, e in zip("abcd", cs.as_tuple()):
        vals, _, failed, _ = evaluate_batch(e, cols, len(pts))
        values[k] = [None if bad else float(v) for v, bad in zip(vals, failed)]
    return {
        "input": args.expr,
        "expression": to_text(f),
        "scalars": {k: to_text(e) for k, e in zip("abcd", cs.as_tuple())},
        "zero_tests": {k: str(zero_test(e, a).status) for k, e in zip("abcd", cs.as_tuple())},
        "points": [_point(p) for p in pts],
        "values": values,
    }


def _cubic_from_args(coeffs, from_f, a):
    if from_f:
        c = cubic_coefficients(parse(from_f), a)
        if c is None:
            raise UsageError(f"{from_f!r} is not cubic in z")
        return c
    if len(coeffs) != 4:
        raise UsageError("give four coefficients A B C D (functions of x, y) or --from-f")
    return CubicForm.of(*(parse(s) for s in coeffs))


def cmd_projective(args):
    a = _assumptions(args)
    c = _cubic_from_args(args.coeffs, args.from_f, a)
    conn = build_projective_connection(c, printed=args.printed)
    back = geodesic_equation(conn)
    diffs = {k: str(zero_test(p - q, a).status) for k, p, q in zip("ABCD", c.as_tuple(), back.as_tuple())}
    K = curvature(conn)
    return {
        "cubic": c.to_json(),
        "connection": {k: {"dx": to_text(v[0]), "dy": to_text(v[1])} for k, v in conn.entries().items()},
        "roundtrip": {"geodesic_equation": back.to_json(), "difference_zero_tests": diffs},
        "curvature": {f"{i + 1}{j + 1}": to_text(K[i, j]) for i in range(3) for j in range(3) if K[i, j] != 0},
    }


def cmd_develop(args):
    a = _assumptions(args)
    c = _cubic_from_args(args.cubic or ["0", "0", "0", "0"], None, a)
    conn = build_projective_connection(c)
    if args.curve:
        curve = PlaneCurve.from_csv(args.curve)
        source = f"samples from {args.curve}"
    elif args.param:
        t0, t1 = _floats(args.t_range, "--t-range")
        curve = PlaneCurve.from_expressions(args.param[0], args.param[1], t0, t1)
        source = f"t -> ({args.param[0]}, {args.param[1]})"
    elif args.geodesic:
        x0, y0, p0, length = _floats(args.geodesic, "--geodesic")
        curve = solve_geodesic(c, x0, y0, p0, length, args.step)
        source = f"RK4 geodesic from ({x0}, {y0}) with slope {p0} over length {length}"
    else:
        raise UsageError("give the curve with --curve, --param or --geodesic")
    dev = develop_curve(conn, curve, args.step)
    tol = args.tol if args.tol is not None else 1e-5
    worst = dev.collinearity()
    if args.out:
        _write_csv(args.out, ["t", "p0", "p1", "p2"], [[t, *p] for t, p in zip(dev.t, dev.points)])
    return {
        "cubic": c.to_json(),
        "curve": source,
        "step": args.step,
        "samples": len(dev.t),
        "max_collinearity_det": worst,
        "max_det_drift": dev.max_det_drift,
        "straight": worst < tol,
        "tolerance": tol,
        "endpoints": [list(map(float, dev.points[0])), list(map(float, dev.points[-1]))],
    }


def cmd_frobenius(args):
    try:
        data = json.loads(_read_text(args.file))
    except json.JSONDecodeError as err:
        raise UsageError(f"malformed distribution JSON: {err}") from err
    D = DistributionSpec.from_json(data)
    a = Assumptions.build(list(data.get("assume", [])) + list(args.assume or []), args.box or None, args.seed,
                          args.samples, D.chart)
    res = frobenius_integrable(D, a)
    verdict = {True: "integrable", False: "not integrable", None: "unknown"}[res.integrable]
    out = {
        "distribution": D.to_json(),
        "result": verdict,
        "method": res.method,
        "witness": res.witness,
        "warnings": [f"undecided: {res.witness}"] if res.integrable is None else [],
    }
    if args.both:
        other = frobenius_by_brackets(D, a) if res.method == "forms" else frobenius_by_forms(D, a)
        out["cross_check"] = {"method": other.method, "status": str(other.status), "agrees": other.status == res.status}
    return out


def cmd_symmetry_dim(args):
    a = _assumptions(args)
    f = parse(args.expr)
    pts = sample_points(a, a.chart, args.points)
    tol = args.tol if args.tol is not None else RANK_TOL
    est, each = symmetry_dimension_estimate(f, [{k: float(v) for k, v in p.items()} for p in pts], tol=tol)
    return {
        "expression": to_text(f),
        "dimension": est.dimension,
        "exact": est.exact,
        "per_point": [{"point": _point(p), "dimension": e.dimension, "exact": e.exact,
                       "ranks": {str(k): v for k, v in sorted(e.ranks.items())}} for p, e in zip(pts, each)],
    }


def cmd_g_integrate(args):
    X = _matrix_path(args)
    g0 = np.eye(X.n) if not args.g0 else np.array([[float(Fraction(v)) for v in r] for r in _matrix_rows(args.g0)])
    t0, t1 = (X.t0, X.t1)
    g = integrate_g_structure(X, g0, args.step, t0, t1)
    dets = np.linalg.det(g.samples)
    if args.out:
        _write_csv(args.out, ["t"] + [f"g{i + 1}{j + 1}" for i in range(X.n) for j in range(X.n)], g.to_csv_rows())
    return {
        "t_range": [t0, t1],
        "step": args.step,
        "constraint": args.constraint or "none",
        "final": _matrix_json(g.samples[-1]),
        "det_range": [float(dets.min()), float(dets.max())],
        "det_drift": float(np.abs(dets / np.linalg.det(g0) - 1).max()),
    }


def cmd_superpose(args):
    A = _matrix_path(args)
    b = np.array(_floats(args.b, "--b"))
    if len(b) != A.n:
        raise UsageError(f"--b needs {A.n} entries")
    parts = [solve_linear(A, e, args.step) for e in np.eye(A.n)]
    sol = superposition_solve(parts, b)
    ts, direct = solve_linear(A, b, args.step)
    err = float(np.abs(sol.values - direct).max())
    if args.out:
        _write_csv(args.out, ["t"] + [f"F{i + 1}" for i in range(A.n)], [[t, *v] for t, v in zip(sol.t, sol.values)])
    return {
        "t_range": [A.t0, A.t1],
        "step": args.step,
        "coefficients": [float(v) for v in sol.coefficients],
        "final": [float(v) for v in sol.values[-1]],
        "error_vs_direct": err,
    }


COMMANDS = {
    "classify": cmd_classify,
    "invariants": cmd_invariants,
    "projective": cmd_projective,
    "develop": cmd_develop,
    "frobenius": cmd_frobenius,
    "symmetry-dim": cmd_symmetry_dim,
    "g-integrate": cmd_g_integrate,
    "superpose": cmd_superpose,
}


def _global_flags(p, default):
    def d(value):
        return value if default is None else default

    p.add_argument("--json", action="store_true", default=d(False), help="print the report as JSON")
    p.add_argument("--seed", type=int, default=d(0), help="seed for sample points (default 0)")
    p.add_argument("--tol", type=float, default=d(None), help="decision tolerance of the command")
    p.add_argument("--samples", type=int, default=d(12), help="points per zero test (default 12)")
    p.add_argument("--assume", action="append", default=d(None), metavar="REL",
                   help="sign relation such as 'z > 0'; repeatable")
    p.add_argument("--box", action="append", default=d(None), metavar="VAR:LO,HI",
                   help="sampling interval of a variable; repeatable")


def build_parser():
    p = _Parser(prog="cartan-ode", description="Point-equivalence tools for y'' = f(x, y, y').")
    _global_flags(p, None)
    # the same flags after the command name; SUPPRESS keeps values given before it
    common = _Parser(add_help=False)
    _global_flags(common, argparse.SUPPRESS)
    p.add_argument("--version", action="version", version=f"cartan-ode {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("classify", parents=[common], help="decide the equivalence family of y'' = EXPR")
    s.add_argument("expr", help="right-hand side in x, y, z (p is an alias of z = y')")
    s.add_argument("--points", type=int, default=5, help="classification points (default 5)")
    s.add_argument("--no-dimension", action="store_true", help="skip the symmetry-dimension estimate")

    s = sub.add_parser("invariants", parents=[common], help="curvature scalars a, b, c, d")
    s.add_argument("expr")
    s.add_argument("--points", type=int, default=5)

    s = sub.add_parser("projective", parents=[common], help="projective connection of a cubic equation")
    s.add_argument("coeffs", nargs="*", metavar="COEF", help="A B C D of y'' = A z^3 + B z^2 + C z + D")
    s.add_argument("--from-f", metavar="EXPR", help="read the coefficients off a cubic right-hand side")
    s.add_argument("--printed", action="store_true", help="use the B^2 variant of the w_1 dy coefficient")

    s = sub.add_parser("develop", parents=[common], help="develop a plane curve into the projective plane")
    s.add_argument("--cubic", nargs=4, metavar=("A", "B", "C", "D"), help="connection coefficients (default flat)")
    s.add_argument("--curve", metavar="CSV", help="samples t,x,y or t,x,y,xdot,ydot")
    s.add_argument("--param", nargs=2, metavar=("X(t)", "Y(t)"), help="closed-form curve")
    s.add_argument("--geodesic", metavar="X0,Y0,P0,LENGTH", help="integrate a geodesic first")
    s.add_argument("--t-range", default="0,1", help="parameter interval for --param (default 0,1)")
    s.add_argument("--step", type=float, default=1e-3)
    s.add_argument("--out", metavar="CSV", help="write developed points here ('-' for stdout)")

    s = sub.add_parser("frobenius", parents=[common], help="integrability of a distribution given as JSON")
    s.add_argument("file", help="JSON file ('-' for stdin)")
    s.add_argument("--both", action="store_true", help="also run the other test and compare")

    s = sub.add_parser("symmetry-dim", parents=[common], help="dimension of the point-symmetry algebra")
    s.add_argument("expr")
    s.add_argument("--points", type=int, default=5)

    for name, text in (("g-integrate", "integrate g' = X(t) g"), ("superpose", "superposition for F' = A(t) F")):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("--matrix", metavar="ROWS", help="matrix in t, entries ',' rows ';'")
        s.add_argument("--csv", metavar="CSV", help="sampled path: t then row-major entries")
        s.add_argument("--t-range", default="0,1", help="interval for --matrix (default 0,1)")
        s.add_argument("--step", type=float, default=1e-3)
        s.add_argument("--constraint", choices=["none", "traceless"], default=None)
        s.add_argument("--out", metavar="CSV")
        if name == "g-integrate":
            s.add_argument("--g0", metavar="ROWS", help="initial value (default identity)")
        else:
            s.add_argument("--b", required=True, metavar="B1,B2,...", help="initial value")
    return p


def _text(value, indent=0):
    pad = "  " * indent
    lines = []
    if isinstance(value, dict):
        width = max((len(str(k)) for k in value), default=0)
        for k, v in value.items():
            if isinstance(v, (dict, list)) and v and not _flat(v):
                lines.append(f"{pad}{str(k):<{width}} :")
                lines.extend(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{str(k):<{width}} : {_scalar(v)}")
    elif isinstance(value, list):
        for v in value:
            if isinstance(v, (dict, list)) and not _flat(v):
                lines.append(f"{pad}-")
                lines.extend(_text(v, indent + 1))
            else:
                lines.append(f"{pad}- {_scalar(v)}")
    else:
        lines.append(pad + _scalar(value))
    return lines


def _flat(v):
    """Short containers of scalars print on one line."""
    items = v.values() if isinstance(v, dict) else v
    if any(isinstance(x, (dict, list)) for x in items):
        return False
    return len(_scalar(v)) <= 100


def _scalar(v):
    if isinstance(v, dict):
        return ", ".join(f"{k}={_scalar(x)}" for k, x in v.items())
    if isinstance(v, list):
        return "[" + ", ".join(_scalar(x) for x in v) + "]"
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        body = COMMANDS[args.command](args)
    except (AssertionError, NormalizationError) as err:
        print(f"cartan-ode: internal check failed: {err}", file=sys.stderr)
        return 2
    except (UsageError, ParseError, ValueError, KeyError, OSError, UndecidableError, ArithmeticError) as err:
        print(f"cartan-ode: error: {err}", file=sys.stderr)
        return 1
    report = {"schema": SCHEMA, "tool": "cartan-ode", "version": __version__, "command": args.command}
    report.update(body)
    report.setdefault("warnings", [])
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print("\n".join(_text(report)))
    for w in report["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
