"""Exception hierarchy.

Everything raised deliberately by the library derives from :class:`SadicError`
so callers (and the command line front end) can tell mathematical domain
errors apart from programming errors.
"""


class SadicError(Exception):
    """Base class for domain errors."""


class UnsupportedFieldError(SadicError):
    """Raised for number-field parameters outside the rational instantiation."""


class SingularMatrixError(SadicError):
    pass


class RankDeficiencyError(SadicError):
    """A list of vectors expected to be independent is not.

    ``index`` is the position of the first vector lying in the span of the
    preceding ones.
    """

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"vector {index} is dependent on the preceding vectors")


class NotPositiveDefiniteError(SadicError):
    pass


class ZeroContentError(SadicError):
    pass


class InconsistentConditionsError(SadicError):
    pass


class SpanOverlapError(SadicError):
    pass


class PreconditionError(SadicError):
    pass


class IterationLimitError(SadicError):
    pass


class FalsificationError(SadicError):
    """A verified inequality failed; ``report`` carries the counterexample."""

    def __init__(self, report, message=None):
        self.report = report
        super().__init__(message or f"check failed: {report!r}")
