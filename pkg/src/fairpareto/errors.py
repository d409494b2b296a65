"""Exception types shared across the package."""


class FairparetoError(Exception):
    """Base class for all package errors."""


class ConfigError(FairparetoError):
    """Invalid or unknown run-configuration content."""


class SchemaError(FairparetoError):
    """Dataset schema does not match the data it describes."""


class ParseError(SchemaError):
    """A cell could not be parsed; carries the offending row index."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row


class SolverError(FairparetoError):
    """A numerical solve failed to reach its required tolerance."""


class PfsmgAborted(SolverError):
    """Front search aborted mid-run; carries the partial front."""

    def __init__(self, message: str, partial_front=None):
        super().__init__(message)
        self.partial_front = partial_front if partial_front is not None else []
