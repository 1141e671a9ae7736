"""Exception types raised across the package."""


class BDError(Exception):
    """Base class for every error raised by bdindex."""


class GraphFormatError(BDError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SelfLoopError(GraphFormatError):
    pass


class EmptyGraphError(BDError, ValueError):
    pass


class DisconnectedGraphError(BDError, ValueError):
    def __init__(self, u, w):
        self.u, self.w = u, w
        super().__init__(
            f"graph is disconnected: vertices {u!r} and {w!r} lie in different components"
        )


class HierarchyError(BDError, ValueError):
    pass


class NumericalBreakdownError(BDError, ArithmeticError):
    def __init__(self, vertex, pivot, message=None):
        self.vertex, self.pivot = vertex, pivot
        super().__init__(
            message
            or f"non-positive Schur pivot f={pivot!r} at vertex {vertex!r} "
            "(invalid hierarchy or disconnected graph)"
        )


class IndexFormatError(BDError, ValueError):
    pass


class BadMagicError(IndexFormatError):
    pass


class TruncatedIndexError(IndexFormatError):
    def __init__(self, what, expected, actual):
        self.expected, self.actual = expected, actual
        super().__init__(f"truncated index while reading {what}: expected {expected} bytes, got {actual}")


class ChecksumError(IndexFormatError):
    pass


class QueryError(BDError, ValueError):
    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"pair {position}: {message}"
        super().__init__(message)


class OracleError(BDError, ValueError):
    pass
