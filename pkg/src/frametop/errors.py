"""Exception hierarchy. Every domain error derives from FrametopError so the CLI
can map it to exit code 2."""


class FrametopError(Exception):
    """Base class for domain errors."""


class DimensionMismatch(FrametopError, ValueError):
    pass


class FrameInvariantViolated(FrametopError, ValueError):
    pass


class NotAProjection(FrametopError, ValueError):
    pass


class TraceNotIntegral(FrametopError, ValueError):
    pass


class NotHermitian(FrametopError, ValueError):
    pass


class EigenvalueTie(FrametopError, ArithmeticError):
    pass


class NotInPolytope(FrametopError, ValueError):
    pass


class BadDimensions(FrametopError, ValueError):
    pass


class TooLarge(FrametopError, ValueError):
    pass


class NumericalStall(FrametopError, ArithmeticError):
    pass


class BadPermutation(FrametopError, ValueError):
    pass


class BadComposition(FrametopError, ValueError):
    pass


class InfeasibleDescriptor(FrametopError, ValueError):
    pass


class AmbiguousEigenvalue(FrametopError, ArithmeticError):
    pass


class CutLocus(FrametopError, ArithmeticError):
    pass


class RetractionHitCriticalStratum(FrametopError, ArithmeticError):
    pass


class UndersampledLoop(FrametopError, ValueError):
    pass


class ZeroEntry(FrametopError, ValueError):
    pass


class NotInFiber(FrametopError, ValueError):
    pass


class ParseError(FrametopError, ValueError):
    pass
