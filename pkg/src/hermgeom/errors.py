"""Exception hierarchy shared by all modules."""


class HermGeomError(Exception):
    """Base class for every error raised by the package."""


class ParseError(HermGeomError, ValueError):
    """Syntax or semantic error in a metric DSL source.

    ``position`` is the 0-based character offset into the source text.
    """

    def __init__(self, message, position=None, source=None):
        self.position = position
        self.source = source
        if position is not None and source is not None:
            line = source.count("\n", 0, position) + 1
            col = position - (source.rfind("\n", 0, position) + 1) + 1
            message = f"{message} (line {line}, column {col})"
        elif position is not None:
            message = f"{message} (position {position})"
        super().__init__(message)


class DimensionError(HermGeomError, ValueError):
    """Operand dimensions or index roles do not match."""


class MetricError(HermGeomError, ArithmeticError):
    """The metric is singular, indefinite or non-Hermitian at a point."""


class DomainError(HermGeomError, ValueError):
    """A point lies outside the validity domain of a field."""


class HypothesisError(HermGeomError):
    """A precondition of an integral identity failed on the input manifold."""


class IntegrationError(HermGeomError, ArithmeticError):
    """An integrand produced non-finite values on the sample."""
