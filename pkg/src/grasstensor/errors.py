"""Exception hierarchy. CLI exit codes hang off these classes."""


class GrasstensorError(Exception):
    exit_code = 1


class ShapeError(GrasstensorError, ValueError):
    """Invalid profile, camera shape, or mismatched dimensions."""

    exit_code = 3


class AssumptionViolated(GrasstensorError):
    """The centers are not in the position an operation requires."""

    exit_code = 4


class CertificationError(GrasstensorError):
    """Rank certificates contradict each other."""

    exit_code = 5


class SamplingError(GrasstensorError):
    exit_code = 5


class ParseError(GrasstensorError, ValueError):
    exit_code = 2
