"""Error taxonomy shared across the package.

Every failure the solvers, harness, or I/O layer can signal derives from
:class:`AepnpError`, so callers (and the CLI) can catch one base class.
"""


class AepnpError(Exception):
    """Base class for all errors raised by this package."""


class NonPositiveDepth(AepnpError):
    """A point lies on or behind the camera plane; projection is undefined."""


class InvalidGroundTruth(AepnpError):
    """A ground-truth quantity violates its domain (e.g. scale <= 0)."""


class DegenerateMatrix(AepnpError):
    """A matrix expected to be well-conditioned collapsed numerically."""


class DegenerateControlPoints(AepnpError):
    """The control-point basis is singular; barycentric weights undefined."""


class TooFewCorrespondences(AepnpError):
    """Fewer correspondences than the solver's minimum."""


class RankDeficient(AepnpError):
    """The homogeneous system has no clearly one-dimensional null space."""


class AxisCollapse(AepnpError):
    """A world axis has (near-)zero extent; its scale is unobservable."""


class NoHypothesisFound(AepnpError):
    """Every RANSAC sample failed to produce a model."""


class InsufficientResiduals(AepnpError):
    """Too few residuals to constrain the refinement parameters."""


class NumericalFailure(AepnpError):
    """An iterative solve broke down beyond damping recovery."""


class PlacementFailure(AepnpError):
    """No valid camera placement found for a synthetic scene."""


class InvalidScale(AepnpError):
    """A scale factor outside (0, inf) was supplied."""


class ParseError(AepnpError):
    """A correspondence file does not match the documented structure."""


class ValidationError(AepnpError):
    """A correspondence file parsed but carries invalid values."""
