"""Exception types shared across the package."""


class KwTopoError(Exception):
    """Base class for all package errors."""


class CompositeModulus(KwTopoError):
    """Raised when field-only linear algebra is requested over Z_q with q not prime."""


class ModulusMismatch(KwTopoError):
    pass


class BudgetExceeded(KwTopoError):
    """Raised when an enumeration would visit more states than the configured cap."""


class IncompleteAssignment(KwTopoError):
    pass


class HalfEdgesPresent(KwTopoError):
    pass


class IntermediateTableTooLarge(KwTopoError):
    pass


class AssumptionViolated(KwTopoError):
    """The NFG mixes non-indicator local functions of degree > 1 or has stray half-edges."""


class InvalidNfg(KwTopoError):
    pass


class InvalidHoleIndex(KwTopoError):
    pass


class BoundaryConditionViolated(KwTopoError):
    pass


class NotATorus(KwTopoError):
    pass


class UnsupportedEntry(KwTopoError):
    pass


class UnknownCycle(KwTopoError):
    pass


class NonpositiveBeta(KwTopoError):
    pass
