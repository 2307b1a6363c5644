"""Exception hierarchy for modop."""


class ModopError(Exception):
    """Base class for all errors raised by modop."""


class EmptyAlgebra(ModopError, ValueError):
    pass


class InvalidDim(ModopError, ValueError):
    pass


class AlgebraMismatch(ModopError, ValueError):
    pass


class BlockOutOfRange(ModopError, IndexError):
    pass


class ShapeMismatch(ModopError, ValueError):
    pass


class ModuleMismatch(ModopError, ValueError):
    pass


class NumericalFailure(ModopError, ArithmeticError):
    """An eigensolver or SVD did not converge, or a computed certificate is off."""


class InconsistentGrowth(ModopError, ValueError):
    """A declared tail descriptor contradicts the materialized generator blocks."""


class NotAGraph(ModopError):
    """A complement that should be a graph contains a vertical vector (0, z), z != 0."""


class NotStrictContraction(ModopError, ValueError):
    pass


class UndecidableTail(ModopError):
    """The growth descriptor does not bound the tail infimum of nonzero singular values."""


class NotMinimalProjection(ModopError, ValueError):
    pass


class CapExceeded(ModopError, ValueError):
    pass
