class TfgError(Exception):
    code = "error"


class InvalidCodebook(TfgError):
    code = "invalid-codebook"


class CodebookOverflow(TfgError):
    code = "codebook-overflow"


class DomainMismatch(TfgError):
    code = "domain-mismatch"


class OffLanguage(TfgError):
    code = "off-language"


class ReadOutOfWindow(TfgError):
    """Raised when an evaluation reads outside the materialized window."""
    code = "read-out-of-window"


class NotInjective(TfgError):
    code = "not-injective"

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotSurjective(TfgError):
    code = "not-surjective"

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class SearchBudgetExceeded(TfgError):
    code = "search-budget-exceeded"


class InternalInconsistency(TfgError):
    code = "internal-inconsistency"


class NotReduced(TfgError):
    code = "not-reduced"


class ConstraintUnsatisfiable(TfgError):
    code = "constraint-unsatisfiable"


class NotFound(TfgError):
    code = "not-found"


class UsageError(TfgError):
    code = "usage"


class BoundsUnsound(TfgError):
    code = "bounds-unsound"


class EmptySupport(TfgError):
    code = "empty-support"


class NonCommuting(TfgError):
    code = "non-commuting"

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotTransitive(TfgError):
    code = "not-transitive"


class NoMovingPeriodicPoint(TfgError):
    code = "no-moving-periodic-point"


class CertificateInvalid(TfgError, AssertionError):
    code = "certificate-invalid"
