"""
Classifying second order equations
==================================

Curvature scalars, point invariants and the family of a few
representative equations y'' = f(x, y, y').
"""

from cartan_ode.assumptions import Assumptions
from cartan_ode.cartan import curvature_scalars
from cartan_ode.classifier import classify
from cartan_ode.expressions import parse, to_text

# The free particle y'' = 0 is flat: all four curvature scalars vanish
# and its point symmetry algebra is sl(3), of dimension 8.
flat = classify(parse("0"))
print("y'' = 0:", flat.family, "symmetry dimension", flat.dimension.dimension)

# y'' = exp(-y') has both a and d nonzero.
cs = curvature_scalars(parse("exp(-z)"))
for name, value in zip("abcd", cs.as_tuple()):
    print(f"  {name} = {to_text(value)}")

# Representatives of several homogeneous families.  Boxes restrict the
# sample region, which also fixes the branch of abs(...).
cases = [
    ("z^4", None),
    ("(1 + z^2)^(3/2)*exp(-atan(z))", None),
    ("exp(-z)", None),
    ("(z^3 - z)/(2*x)", None),
    ("(z*(1 - z^2) + 2*abs(z^2 - 1)^(3/2))/x", ["z:0.1,0.9"]),
    ("exp(-z) + z^4", None),
]
for text, box in cases:
    rep = classify(parse(text), Assumptions.build(box=box))
    params = ", ".join(str(p) for p in rep.parameters)
    dim = rep.dimension.dimension if rep.dimension else "-"
    print(f"{text:45s} family {rep.family:14s} params [{params}]  dim {dim}")

# Invariants are point invariants: y'' = z^4 and y'' = 1/z share I1.
for text in ("z^4", "z^(-1)"):
    rep = classify(parse(text), with_dimension=False)
    print(text, "I1 =", rep.invariants.get("I1"))
