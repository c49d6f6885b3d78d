"""Exception and warning classes raised by grassfilt."""


class GrassfiltError(Exception):
    """Base class for all grassfilt errors."""


class GraphError(GrassfiltError, ValueError):
    pass


class DuplicateEdge(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class NegativeWeight(GraphError):
    pass


class IndexOutOfRange(GraphError, IndexError):
    pass


class ZeroDegree(GraphError):
    pass


class DegenerateFeatures(GraphError):
    pass


class NotSymmetric(GrassfiltError, ValueError):
    pass


class KOutOfRange(GrassfiltError, ValueError):
    pass


class RankOutOfRange(GrassfiltError, ValueError):
    pass


class DimensionMismatch(GrassfiltError, ValueError):
    pass


class CutLocus(GrassfiltError, ArithmeticError):
    """The logarithm is undefined: some principal angle reaches pi/2."""


class BaseMismatch(GrassfiltError, ValueError):
    """A tangent vector was used with a base point it is not anchored at."""


class RankDeficientTangent(GrassfiltError, ValueError):
    pass


class DuplicateNodes(GrassfiltError, ValueError):
    pass


class ZeroFeatureVector(GrassfiltError, ValueError):
    pass


class SingularNormalEquations(GrassfiltError, ArithmeticError):
    pass


class EmptyValidation(GrassfiltError, ValueError):
    pass


class EmptyMask(GrassfiltError, ValueError):
    pass


class ConfigInvalid(GrassfiltError, ValueError):
    pass


class MissingLabels(GrassfiltError, ValueError):
    pass


class ExtrapolationWarning(UserWarning):
    """Interpolation queried outside the span of the anchor parameters."""


class BrokenEigenspaceWarning(UserWarning):
    """The k-th and (k+1)-th eigenvalues coincide, so the k-dimensional
    eigenspace is not well defined."""
