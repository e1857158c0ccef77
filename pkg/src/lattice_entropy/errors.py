"""Exception types shared across the package."""


class LatticeEntropyError(Exception):
    """Base class for all errors raised by this package."""


class UnsupportedDimensionError(LatticeEntropyError):
    """Ambient dimension outside {1, 2, 3}."""


class UnsupportedConfigurationError(LatticeEntropyError):
    """A geometric configuration the exact routines do not handle."""


class InvalidInputError(LatticeEntropyError, ValueError):
    pass


class ResourceLimitError(LatticeEntropyError):
    """An enumeration would exceed its configured cap."""


class NotApplicableError(LatticeEntropyError):
    """An operation whose hypotheses are not met by its arguments."""


class ParseError(LatticeEntropyError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class UndefinedAngleError(LatticeEntropyError):
    """Vertex angle requested on a segment or a point."""


class WindowExhaustedError(LatticeEntropyError):
    """An orbit ran out of support before the requested step."""
