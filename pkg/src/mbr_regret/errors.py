"""Exception hierarchy for the regret lab.

Every error subclasses ``ValueError`` so numerical callers can catch
generically; the CLI maps ``MBRRegretError`` to exit code 2.
"""


class MBRRegretError(ValueError):
    """Base exception for user-facing lab errors."""

    pass


class DistributionError(MBRRegretError):
    """Raised when a hypothesis space or distribution is malformed."""

    pass


class SamplingError(MBRRegretError):
    """Raised when a sampling request cannot be served."""

    pass


class UtilityError(MBRRegretError):
    """Raised when a utility model or cost matrix is invalid."""

    pass


class DecodingError(MBRRegretError):
    """Raised when a decoding request is invalid."""

    pass


class TransportError(MBRRegretError):
    """Raised when a transport problem is malformed or too large."""

    pass


class BoundInputError(MBRRegretError):
    """Raised when a bound is evaluated outside its domain."""

    pass


class ExperimentConfigError(MBRRegretError):
    """Raised when an experiment configuration cannot be loaded."""

    pass


class ResultsFileError(MBRRegretError):
    """Raised when a results or input data file is missing, malformed or unwritable."""

    pass
