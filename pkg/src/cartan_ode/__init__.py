"""Point equivalence of second-order ODEs y'' = f(x, y, y') via Cartan's
method: curvature scalars, absolute invariants, family classification,
projective connections and distribution tools."""

__version__ = "0.1.0"

from .assumptions import Assumptions, TriBool  # noqa: E402
from .cartan import classify_flags, connection_matrix, curvature_scalars  # noqa: E402
from .classifier import ClassificationReport, classify  # noqa: E402
from .cubic import CubicForm, cubic_coefficients  # noqa: E402
from .distributions import (  # noqa: E402
    DistributionSpec,
    Form,
    MatrixPath,
    VectorField,
    frobenius_integrable,
    integrate_g_structure,
    is_first_integral,
    is_symmetry,
    lie_bracket,
    structure_functions,
    superposition_solve,
)
from .expressions import normalize, parse, to_text  # noqa: E402
from .invariants import invariant_I1, invariant_I2  # noqa: E402
from .projective import (  # noqa: E402
    PlaneCurve,
    build_projective_connection,
    develop_curve,
    geodesic_equation,
    is_geodesic,
)
from .symmetry import symmetry_dimension_estimate  # noqa: E402
from .zerotest import is_zero, zero_test  # noqa: E402
