from __future__ import annotations


class DomainError(ArithmeticError):
    """Raised when an expression is evaluated or simplified outside its domain.

    ``subexpr`` is the offending sub-expression (e.g. the base of a square root
    that evaluated negative, or a denominator that vanished).
    """

    def __init__(self, message: str, subexpr=None):
        super().__init__(message)
        self.subexpr = subexpr


class SamplingError(RuntimeError):
    """Every sampled point of a numeric zero test hit a domain error."""
