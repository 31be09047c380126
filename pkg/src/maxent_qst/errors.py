"""Exception types shared across the package."""


class NotHermitianError(ValueError):
    """Matrix fails the Hermitian symmetry check."""


class DimensionMismatchError(ValueError):
    """Operands have incompatible shapes or qubit counts."""


class NotPowerOfTwoError(ValueError):
    """Matrix dimension is not 2**n for integer n."""


class ParameterCountError(ValueError):
    """Ansatz parameter vector has the wrong length."""


class RecordMismatchError(ValueError):
    """Two measurement records do not list operators in the same order."""


class SingularFrameError(ValueError):
    """Operator set is not informationally complete (rank-deficient Gram matrix)."""


class CircuitParseError(ValueError):
    """Circuit-spec text is malformed; message carries the line number."""


class MathDomainError(ValueError):
    """Scalar function applied outside its domain (e.g. log of a negative eigenvalue)."""
