"""Exception hierarchy shared by every module of the package."""


class MinorAmpError(Exception):
    """Base class for all errors raised by minoramp."""


class InvalidGraphError(MinorAmpError):
    pass


class EmptyGraphError(MinorAmpError):
    def __init__(self, message: str = "undefined density") -> None:
        super().__init__(message)


class UnknownVertexError(MinorAmpError):
    def __init__(self, vertex: int) -> None:
        super().__init__(f"unknown vertex {vertex}")
        self.vertex = vertex


class InvalidModelError(MinorAmpError):
    pass


class InvalidWitnessError(MinorAmpError):
    pass


class NotAForestError(MinorAmpError):
    pass


class EmptyForestError(MinorAmpError):
    def __init__(self, message: str = "forest is empty") -> None:
        super().__init__(message)


class NotATreeError(MinorAmpError):
    pass


class NoCentralEdgeError(MinorAmpError):
    def __init__(self, vertex: int) -> None:
        super().__init__(f"no central edge: {vertex} is a centroid")
        self.vertex = vertex


class StarShapeError(MinorAmpError):
    pass


class PreconditionError(MinorAmpError):
    pass


class InvariantViolation(MinorAmpError):
    """An internal guarantee failed; this always points at an implementation fault."""


class CertificateError(MinorAmpError):
    pass


class GraphFormatError(MinorAmpError):
    def __init__(self, message: str, line: int | None = None) -> None:
        if line is not None:
            message = f"{message} at line {line}"
        super().__init__(message)
        self.line = line


class UsageError(MinorAmpError):
    pass
