"""Exception types shared across the package."""


class BundlewalkError(Exception):
    """Base class for all package errors."""


class UnknownPlane(BundlewalkError):
    pass


class TransversalIsParallel(BundlewalkError):
    pass


class InvalidAngle(BundlewalkError):
    pass


class IndexOutOfRange(BundlewalkError):
    pass


class EmptyContour(BundlewalkError):
    pass


class NonconvergentQuadrature(BundlewalkError):
    pass


class DisjointPlanes(BundlewalkError):
    pass


class MismatchedContours(BundlewalkError):
    pass


class DirectionMismatch(BundlewalkError):
    pass


class DegenerateDisc(BundlewalkError):
    pass


class ResolutionTooCoarse(BundlewalkError):
    pass


class PreconditionUnmet(BundlewalkError):
    pass


class NotPartitioned(BundlewalkError):
    pass


class ConfigInvalid(BundlewalkError):
    """Raised when a run configuration fails validation; message names the field."""


class MissingArtifact(BundlewalkError):
    pass
