"""deltaforms: metric-free distributional differential forms on 4D spacetime.

Surface, string and point electric currents built from Dirac delta-forms
D(phi) = delta(phi) d(phi), integrated over parametrized chains by exact
delta collapse and by a mollified quadrature oracle, with covariant and
adapted-coordinate conservation-law checks.
"""

from .errors import (
    CollapseSingularError,
    ConfigError,
    DegenerateMapError,
    DegenerateSurfaceError,
    DegreeError,
    DeltaFormsError,
    DomainError,
    ExpressionError,
    IllDefinedProductError,
    NotReducedError,
    OracleDivergenceError,
    OrientationError,
    ParityError,
    RootFailureError,
    TransversalityError,
    UnsupportedChartError,
)
from .expr import ScalarField, const, coords, cos, exp, parse, sin, var
from .exterior import (
    RegularForm,
    SmoothMap,
    dualize2,
    dualize3,
    dx,
    evaluate,
    exterior_derivative,
    form_from_terms,
    levi_civita,
    multi_indices,
    pullback,
    scalar_form,
    wedge,
    zero_form,
)
from .chains import (
    Chain,
    CollapseResult,
    QuadratureSpec,
    TransversalityReport,
    boundary_faces,
    box_chain,
    mapped_chain,
    collapse_integrate,
    integrate_regular,
    mollified_integrate,
    total_charge,
    transversality_check,
)
from .singular import (
    DeltaFactor,
    SingularForm,
    d_singular,
    delta,
    gauge_reduce,
    point_current,
    pullback_singular,
    string_current,
    surface_current,
    weak_equal,
    wedge_singular,
)
from .kernel import backend_name

__version__ = "0.1.0"
