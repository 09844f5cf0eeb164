"""Error taxonomy shared across the toolkit.

Every domain error is a subclass of GraftLabError so callers can catch
broadly; the CLI maps them to nonzero exit codes with the class name in
the message.
"""


class GraftLabError(Exception):
    pass


# -- mobius / hyperbolic ----------------------------------------------------

class ParabolicOrIdentity(GraftLabError):
    """Requested an axis of an element that has no axis."""


class DegenerateGeodesic(GraftLabError):
    """Ideal endpoints coincide (or are too close to separate)."""


class Disjoint(GraftLabError):
    """Two geodesics do not intersect in the hyperbolic plane."""


class Equal(GraftLabError):
    """Two geodesics coincide where distinct ones were required."""


class DegenerateTriangle(GraftLabError):
    """Triangle construction parameters outside the valid range."""


class OpenBoundary(GraftLabError):
    """Boundary arcs of a region fail to chain into a closed loop."""


class InvalidParams(GraftLabError):
    """Construction parameters outside the documented validity region."""


# -- surface / lamination ---------------------------------------------------

class NotLoxodromic(GraftLabError):
    """Element was expected to be loxodromic."""


class DepthTooLarge(GraftLabError):
    """Requested lift depth exceeds the combinatorial guard."""


class EmptyLoopSet(GraftLabError):
    """A nonempty loop set is required."""


class CrossingDetected(GraftLabError):
    """Two lamination leaves cross transversally; input multiloop invalid."""


class EndpointOnLeaf(GraftLabError):
    """Arc endpoint lies on a leaf; perturb the endpoint and retry."""


# -- traintrack ---------------------------------------------------------------

class DimensionMismatch(GraftLabError):
    """Weight vector length does not match the branch count."""


class NotCarried(GraftLabError):
    """Weight vector violates the switch conditions or positivity."""


class NoEmbedding(GraftLabError):
    """Operation requires an embedded (geometric) train track."""


# -- bending ------------------------------------------------------------------

class PointOnLeaf(GraftLabError):
    """Evaluation point lies on a leaf (general position violated)."""


class InsufficientDepth(GraftLabError):
    """Lift depth too small for the requested equivariance tolerance."""


class TooFewSamples(GraftLabError):
    """Polyline has too few samples for the requested report."""


# -- grafting -----------------------------------------------------------------

class NotAdmissible(GraftLabError):
    """Loop fails the admissibility test (loxodromic + embedded lift)."""


class UnsupportedConfiguration(GraftLabError):
    """Multiloop crosses the existing lamination transversally."""


class SupportMismatch(GraftLabError):
    """Quadrangles are not supported on the same cylinder with equal arcs."""


class NonIntegralResidual(GraftLabError):
    """Winding difference is too far from a multiple of a full turn."""


class ParameterOutOfRange(GraftLabError):
    """Foliation parameter outside the quadrangle's range."""


# -- cli ----------------------------------------------------------------------

class UnknownRecipe(GraftLabError):
    """Figure recipe name not recognized."""


class ConfigError(GraftLabError):
    """Run configuration invalid (unknown suite, bad tolerance, ...)."""


# IOError is builtin (alias of OSError); the CLI uses it directly.
