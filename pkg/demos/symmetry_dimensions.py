"""
Point symmetry dimensions
=========================

Numerical rank of the symmetry tower at sample points gives the
dimension of the point symmetry algebra.
"""

from cartan_ode.assumptions import Assumptions
from cartan_ode.classifier import classification_points
from cartan_ode.expressions import parse
from cartan_ode.symmetry import symmetry_dimension_estimate

points = [{k: float(v) for k, v in p.items()} for p in classification_points(Assumptions(), 5)]
for text in ("0", "exp(-z)", "z^4", "exp(-z) + z^4"):
    est = symmetry_dimension_estimate(parse(text), points)[0]
    print(f"y'' = {text:15s} dimension {est.dimension}")
