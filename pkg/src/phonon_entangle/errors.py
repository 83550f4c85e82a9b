"""Exception hierarchy shared by every module."""


class PhononEntangleError(Exception):
    """Base class for all errors raised by the package."""


class InvalidArgumentError(PhononEntangleError, ValueError):
    pass


class NumericFailure(PhononEntangleError, ArithmeticError):
    pass


class TrackingFailure(PhononEntangleError):
    """A mode root could not be followed continuously under displacement."""


class CutoffViolation(PhononEntangleError):
    """An operation would populate a Fock level at or above the cutoff."""


class DimensionMismatch(PhononEntangleError, ValueError):
    pass


class UnreachableTransition(PhononEntangleError):
    """Effective Rabi frequency of a requested multi-phonon order is negligible."""


class ResonanceConflict(PhononEntangleError):
    """A multi-sideband drive is degenerate with another order's resonance."""


class SyncFailure(PhononEntangleError):
    """No synchronizing duration was found within the search depth."""


class ProgramError(PhononEntangleError):
    """A pulse program failed while executing a step."""

    def __init__(self, step_index, cause):
        self.step_index = step_index
        self.cause = cause
        super().__init__(f"step {step_index}: {cause}")


class ScriptError(PhononEntangleError):
    """Syntax or semantic error in a pulse script, tagged with its position."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
