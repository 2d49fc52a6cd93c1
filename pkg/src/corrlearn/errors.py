"""Exception hierarchy.

``InputError`` covers malformed values (bad pmf, out-of-range category,
unparsable file). ``PreconditionError`` covers well-formed inputs that do not
satisfy an operation's precondition (dimension mismatch, non-integral mean,
instance too large for enumeration). The CLI maps them to exit codes 2 and 3.
"""


class CorrectionError(ValueError):
    pass


class InputError(CorrectionError):
    pass


class PreconditionError(CorrectionError):
    pass


class DimensionMismatchError(PreconditionError):
    pass


class IntegralityError(PreconditionError):
    """Raised when N * theta0 is not an integer but a closed form needs it."""


class InstanceTooLargeError(PreconditionError):
    pass
