"""Exception types shared across the package."""


class PolynomialParseError(ValueError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class DimensionMismatch(ValueError):
    pass


class NotHomogeneous(ValueError):
    pass


class NonIntegralQuotient(ArithmeticError):
    """Raised when an exact division leaves a remainder on some coefficient."""

    def __init__(self, index, coefficient, divisor):
        super().__init__(
            f"coefficient {coefficient} of x^{list(index)} is not divisible by {divisor}"
        )
        self.index = index
        self.coefficient = coefficient
        self.divisor = divisor


class BudgetExceeded(RuntimeError):
    """An enumeration would exceed its configured point or node budget."""

    def __init__(self, what, needed, budget):
        super().__init__(f"{what}: needs {needed} > budget {budget}")
        self.needed = needed
        self.budget = budget


class HenselFailure(ValueError):
    pass


class MissingRootData(KeyError):
    pass


class ResolutionError(ValueError):
    pass


class ParameterError(ValueError):
    pass
