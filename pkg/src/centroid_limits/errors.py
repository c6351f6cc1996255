"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class EnumerationCapExceeded(DomainError):
    """Exhaustive enumeration was requested above the configured cap."""


class BudgetExceeded(RuntimeError):
    """A bounded search ran out of budget before reaching a verdict."""


class ResourceRefusal(RuntimeError):
    """A request would exceed a configured memory or work budget."""
