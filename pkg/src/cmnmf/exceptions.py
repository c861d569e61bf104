"""Exception types shared across the package.

Everything raised on purpose derives from :class:`CmnmfError`, so callers
(and the command-line front end) can tell expected failures apart from bugs.
"""


class CmnmfError(Exception):
    """Base class for all errors raised by this package."""


class ShapeMismatchError(CmnmfError, ValueError):
    """Operands have incompatible dimensions."""


class ParseError(CmnmfError, ValueError):
    """An input file is malformed."""

    def __init__(self, message, path=None, line=None):
        loc = ""
        if path is not None:
            loc += f"{path}"
        if line is not None:
            loc += f":{line}"
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = path
        self.line = line


class EmptyInputError(CmnmfError, ValueError):
    """An input file contained no usable records."""


class CycleError(CmnmfError, ValueError):
    """The hierarchy edges contain a directed cycle."""

    def __init__(self, member):
        super().__init__(f"hierarchy contains a cycle through term {member!r}")
        self.member = member


class UnknownTermError(CmnmfError, KeyError):
    """A referenced identifier is absent from the hierarchy."""


class LevelError(CmnmfError, ValueError):
    """A requested ontology level is invalid or has no terms."""


class EmptyViewError(CmnmfError, ValueError):
    """Level splitting produced an association matrix with no entries."""


class NumericalError(CmnmfError, ArithmeticError):
    """An update produced a NaN or Inf entry."""

    def __init__(self, message, iteration=None):
        if iteration is not None:
            message = f"{message} (iteration {iteration})"
        super().__init__(message)
        self.iteration = iteration


class ParameterError(CmnmfError, ValueError):
    """A hyperparameter or generator parameter is out of range."""


class UniverseError(CmnmfError, ValueError):
    """A gene pair references identifiers outside the evaluation universe."""
