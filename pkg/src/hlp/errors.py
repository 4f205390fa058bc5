"""Exception hierarchy shared by every layer of the package."""


class HLPError(Exception):
    """Base class for all errors raised by hlp."""


class AmbientMismatchError(HLPError, ValueError):
    pass


class SingularFormError(HLPError, ValueError):
    pass


class SymmetryError(HLPError, ValueError):
    pass


class InclusionError(HLPError, ValueError):
    pass


class NilpotencyError(HLPError, ValueError):
    pass


class HodgeSubstructureError(HLPError, ValueError):
    pass


class RelativeWeightError(HLPError):
    """The pair (M, N) does not satisfy the relative weight condition."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class InvalidPackageError(HLPError):
    """A package violates one of its structural hypotheses."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class InvalidFiberError(HLPError):
    """Fiber data that is inconsistent with the package or not strict."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotSemismallError(HLPError):
    pass


class InputError(HLPError, ValueError):
    pass


class FormatError(HLPError, ValueError):
    """Malformed HLP document; ``location`` points at the offending field."""

    def __init__(self, message, location=""):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location
