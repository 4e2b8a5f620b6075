"""
Distributions, Frobenius and matrix flows
=========================================

Integrability of plane fields in three dimensions by brackets and by
forms, followed by g-structure integration and superposition for a
linear system.
"""

import numpy as np

from cartan_ode.distributions import (
    DistributionSpec,
    Form,
    MatrixPath,
    frobenius_by_brackets,
    frobenius_by_forms,
    integrate_g_structure,
    solve_linear,
    superposition_solve,
)
from cartan_ode.expressions import symbol

chart = ("x", "y", "z")
x, y, z = (symbol(n) for n in chart)

# The contact form dy - z dx: d(w) ^ w = -dx^dy^dz, never integrable.
contact = Form.one_form(chart, [-z, 1, 0])
print("d(w)^w coefficient:", contact.d().wedge(contact).coefficient((0, 1, 2)))
D = DistributionSpec(chart, forms=[contact])
print("integrable by forms:   ", frobenius_by_forms(D).integrable)
print("integrable by brackets:", frobenius_by_brackets(DistributionSpec(chart, generators=D.generators())).integrable)

# An exact form is integrable by both tests.
exact = DistributionSpec(chart, forms=[Form.one_form(chart, [y * z, x * z, x * y])])
print("d(xyz) integrable:", frobenius_by_forms(exact).integrable)

# g' = X g for a traceless path stays in SL(2).
X = MatrixPath.from_expressions([["0", "1"], ["-t", "0"]], 0, 2, constraint="traceless")
g = integrate_g_structure(X, np.eye(2), 1e-3)
print("max |det g - 1|:", np.abs(np.linalg.det(g.samples) - 1).max())

# Rotation generator: solutions are combinations of two particular ones.
A = MatrixPath.constant([[0, 1], [-1, 0]], 0, 2 * np.pi)
parts = [solve_linear(A, e, 1e-3) for e in np.eye(2)]
sol = superposition_solve(parts, np.array([1.0, 2.0]))
_, direct = solve_linear(A, np.array([1.0, 2.0]), 1e-3)
print("superposition error:", np.abs(sol.values - direct).max())
