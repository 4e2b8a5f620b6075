"""
Projective connections and development
======================================

An equation cubic in y' defines a projective connection.  Geodesics
develop onto straight lines of the projective plane; other curves do not.
"""

import numpy as np

from cartan_ode.cubic import CubicForm
from cartan_ode.projective import (
    PlaneCurve,
    build_projective_connection,
    develop_curve,
    geodesic_equation,
    solve_geodesic,
)
from cartan_ode.zerotest import zero_test
from cartan_ode.expressions import parse

# y'' = x y'^3 + y y' + 1 as a cubic form, and back again.
c = CubicForm.of(parse("x"), 0, parse("y"), 1)
conn = build_projective_connection(c)
back = geodesic_equation(conn)
print("round trip exact:", all(zero_test(p - q).status.name == "ZERO"
                               for p, q in zip(c.as_tuple(), back.as_tuple())))

# Develop a geodesic of a constant cubic; the image points are collinear.
c = CubicForm.of(parse("1/4"), parse("-1/8"), parse("3/8"), parse("1/2"))
conn = build_projective_connection(c)
geo = solve_geodesic(c, 0.0, 0.0, 0.3, 0.5, step=1e-3)
print("geodesic collinearity:", develop_curve(conn, geo, step=1e-3).collinearity())

# A parabola in the flat connection is not a line.
flat = build_projective_connection(CubicForm.of(0, 0, 0, 0))
parab = PlaneCurve.from_expressions("t", "t^2", 0, 0.5)
print("parabola collinearity:", develop_curve(flat, parab, step=1e-3).collinearity())

# Straight lines stay straight in the flat connection.
line = PlaneCurve.from_expressions("t", "2*t + 1", 0, 1)
print("line collinearity:", np.round(develop_curve(flat, line, step=1e-3).collinearity(), 15))
