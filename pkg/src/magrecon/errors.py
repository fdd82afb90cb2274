"""Exception hierarchy shared by every module."""


class MagnitudeError(Exception):
    """Base class for all errors raised by magrecon."""


class CapacityError(MagnitudeError):
    """An exhaustive computation would exceed its configured size guard."""


class SamplingError(MagnitudeError):
    """Rejection sampling ran out of retries."""


class SingularityError(MagnitudeError):
    """The similarity matrix is numerically singular at the requested scale."""


class DegenerateError(MagnitudeError):
    """Input is degenerate for the requested formula (zero denominator, bad roots)."""


class WrongSizeError(MagnitudeError):
    """An operation defined for a fixed point count got another size."""


class ConvergenceError(MagnitudeError):
    """Numeric exponent extraction failed to settle."""


class ReconstructionError(MagnitudeError):
    """The inverse problem could not be solved from the supplied data."""


class ExhaustionError(ReconstructionError):
    pass


class AmbiguityError(ReconstructionError):
    pass


class InconsistencyError(ReconstructionError):
    pass


class MultiplicityError(ReconstructionError):
    pass


class SvtiViolationError(ReconstructionError):
    pass


class CaseResolutionError(ReconstructionError):
    pass


class MismatchError(ReconstructionError):
    pass


class ParseError(MagnitudeError):
    """Malformed input file; carries an optional line/column position."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)
