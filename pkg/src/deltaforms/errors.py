"""Exception types raised across the package."""


class DeltaFormsError(Exception):
    """Base class for all errors raised by deltaforms."""


class ExpressionError(DeltaFormsError):
    """Malformed expression text or unsupported operation."""


class DomainError(DeltaFormsError):
    """Evaluation hit a pole or produced a non-finite value."""


class DegreeError(DeltaFormsError):
    """Form degree mismatch, or wedge/derivative degree overflow."""


class ParityError(DeltaFormsError):
    """A twisted form was required but an untwisted one supplied (or vice versa)."""


class DegenerateSurfaceError(DeltaFormsError):
    """Level-set function has (sampled) vanishing gradient on its zero set."""


class DegenerateMapError(DeltaFormsError):
    """Map Jacobian determinant vanishes or changes sign on the working region."""


class IllDefinedProductError(DeltaFormsError):
    """Two delta factors share a zero set; their product has no meaning."""


class TransversalityError(DeltaFormsError):
    """Level sets fail the sampled transversality requirement."""


class UnsupportedChartError(DeltaFormsError):
    """No adapted chart construction available for this level-set function."""


class NotReducedError(DeltaFormsError):
    """Surface density extraction requires a form with no d(phi) factor."""


class CollapseSingularError(DeltaFormsError):
    """No well-conditioned parameter-axis selection for the delta collapse."""


class RootFailureError(DeltaFormsError):
    """Newton root search failed to converge; details name the node."""


class OracleDivergenceError(DeltaFormsError):
    """Mollified extrapolation ladder is not converging."""


class OrientationError(DeltaFormsError):
    """Boundary decomposition failed the smooth-form Stokes smoke test."""


class ConfigError(DeltaFormsError):
    """Scenario configuration is invalid; message names the offending field."""
