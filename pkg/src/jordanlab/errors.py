"""Exception types shared across the package."""


class JordanLabError(Exception):
    """Base class for all package errors."""


class DegreeMismatch(JordanLabError, ValueError):
    pass


class CapExceeded(JordanLabError):
    """A computation would exceed an order, element or degree cap.

    Results that hit a cap are uncertified; callers should fall back to a
    shortcut path or report bounds only.
    """


class BudgetExceeded(CapExceeded):
    """The wall-clock budget for a task ran out."""


class NotNormal(JordanLabError, ValueError):
    pass


class InvalidAction(JordanLabError, ValueError):
    """Semidirect action data does not define a homomorphism into Aut(N)."""
