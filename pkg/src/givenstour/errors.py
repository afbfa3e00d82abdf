"""Exception hierarchy shared by all modules."""


class TourError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(TourError, ValueError):
    """Malformed arguments: wrong shapes, non-finite entries, bad indices."""


class DegenerateInputError(TourError, ValueError):
    """Input is well-formed but rank-deficient or constant."""


class SharedSubspaceError(DegenerateInputError):
    """The target frame has no component outside the span of the start frame."""


class SubspaceViolationError(TourError, ValueError):
    """A frame does not lie in the span of a preprojection basis."""


class NumericalFailureError(TourError, ArithmeticError):
    """An iterative routine failed to converge or a factorization broke down."""


class DataFormatError(InvalidInputError):
    """A data file could not be parsed; carries the offending location."""

    def __init__(self, message, path=None, row=None, column=None):
        self.path = path
        self.row = row
        self.column = column
        loc = []
        if path is not None:
            loc.append(str(path))
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column!r}")
        super().__init__(f"{': '.join([', '.join(loc), message]) if loc else message}")
