"""Exception hierarchy shared by every module of the package."""


class SemigenericError(Exception):
    """Base class for all errors raised by this package."""


class MalformedGraph(SemigenericError, ValueError):
    """Raw graph data that cannot even be read as a loopless digraph."""


class DuplicateEdge(MalformedGraph):
    pass


class SelfLoop(MalformedGraph):
    pass


class OppositeEdgePair(MalformedGraph):
    pass


class UnknownVertex(SemigenericError, KeyError):
    pass


class InvalidGraph(SemigenericError, ValueError):
    """Raised when a structure fails the class conditions and a graph was required."""

    def __init__(self, violation):
        super().__init__(f"not a member of the class: {violation}")
        self.violation = violation


class VertexNotInColumn(SemigenericError, ValueError):
    pass


class InvalidDemand(SemigenericError, ValueError):
    pass


class UnrealizableExtension(SemigenericError, ValueError):
    """The requested one-point pattern is not consistent with the parity condition."""


class BudgetExceeded(SemigenericError, RuntimeError):
    """A growth procedure ran out of budget; ``result`` holds the partial outcome."""

    def __init__(self, result, message: str | None = None):
        if message is None:
            message = f"saturation not reached; {len(result.missing)} demands missing"
        super().__init__(message)
        self.result = result


class ScaleExceeded(SemigenericError, RuntimeError):
    pass


class ColumnsNotOrdered(SemigenericError, ValueError):
    pass


class BaseNotInColumn(SemigenericError, ValueError):
    pass


class InconsistentLabels(SemigenericError, ValueError):
    pass


class ColumnMismatch(SemigenericError, ValueError):
    pass


class InconsistentCylinders(SemigenericError, ValueError):
    pass
