"""Exception hierarchy shared by all rcimflow modules.

Every domain failure derives from RcimError so the CLI can map it to
exit code 1; anything else escaping is a genuine bug.
"""


class RcimError(Exception):
    """Base class for all domain errors raised by this package."""


class ParseError(RcimError):
    """Malformed input file. Carries a position when one is known."""

    def __init__(self, message, *, path=None, line=None, offset=None):
        self.path = path
        self.line = line
        self.offset = offset
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"byte {offset}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class UnsupportedSequential(ParseError):
    """Input contains latches/registers; only combinational logic is handled."""


class UnsupportedConstruct(ParseError):
    """Input uses an HDL construct outside the supported subset."""


class ShapeError(RcimError):
    """Simulation vector width does not match the circuit."""


class LibraryError(RcimError):
    """The rewrite structure library is missing or corrupt."""


class EmptyOptionsError(RcimError):
    """Recipe enumeration was asked for an empty transformation set."""


class InfeasibleError(RcimError):
    """No topology satisfies the memory sizing rule."""

    def __init__(self, message, required_bits=None):
        self.required_bits = required_bits
        super().__init__(message)


class CapacityError(RcimError):
    """Placement ran out of array slots."""

    def __init__(self, message, level=None):
        self.level = level
        super().__init__(message)


class ScheduleError(RcimError):
    """A schedule failed legality validation before execution."""

    def __init__(self, message, diagnostics=()):
        self.diagnostics = list(diagnostics)
        super().__init__(message)


class CalibrationError(RcimError):
    """Calibration fit could not be performed on the given fixtures."""


class DegenerateError(RcimError):
    """Inductor sizing was asked for a zero-capacitance array."""


class ConstraintError(RcimError):
    """No exploration candidate satisfies the user constraints."""

    def __init__(self, message, nearest=None):
        self.nearest = nearest
        super().__init__(message)


class UsageError(RcimError):
    """Bad command-line invocation (maps to exit code 2)."""
