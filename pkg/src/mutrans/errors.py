"""Exception types shared across the package."""


class MutransError(Exception):
    """Base class for all package-specific errors."""


class GridError(MutransError, ValueError):
    """Grid construction or compatibility problem."""


class SymbolError(MutransError, ValueError):
    """Symbol expression or symbol property problem (parse errors,
    ambiguous homogeneity order, invalid parameters)."""

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class EllipticityError(MutransError, ArithmeticError):
    """The symbol vanishes, winds, or otherwise fails the conditions
    needed by a factorization or solve."""


class DomainError(MutransError, ValueError):
    """Argument outside the validity range of a numerical method."""
