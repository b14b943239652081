"""Exception types shared across the package."""


class BergspecError(Exception):
    """Base class for all package errors."""


class SymbolSyntaxError(BergspecError):
    """Raised when symbol text does not conform to the grammar.

    :param message: human-readable description
    :param offset: byte offset of the offending token in the input
    :param expected: token descriptions that would have been legal here
    :param found: description of what was found instead
    """

    def __init__(self, message, offset, expected=(), found=""):
        self.offset = int(offset)
        self.expected = tuple(expected)
        self.found = found
        detail = f"{message} at offset {self.offset}"
        if self.expected:
            detail += " (expected " + " | ".join(self.expected) + ")"
        if found:
            detail += f", found {found!r}"
        super().__init__(detail)


class ArityError(BergspecError):
    """Variable usage does not match what the operation requires."""


class CapExceededError(BergspecError):
    """A size parameter is beyond the documented cap."""


class SolverError(BergspecError):
    """A numerical solver failed to converge.

    :param message: description including any iteration count the backend reported
    """


class IllConditionedWindingError(BergspecError):
    """The sampled curve passes too close to the query point for a
    trustworthy winding number."""


class DegenerateGridError(BergspecError):
    """Rectangle bounds or resolution do not define a usable grid."""


class EmptyRegionError(BergspecError):
    """An operation that needs a non-empty point cloud received an empty one."""


class ProbeLocationError(BergspecError):
    """A probe point sits too close to the region boundary to classify."""
