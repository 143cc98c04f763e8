"""Exception hierarchy shared by all numerical routines."""


class CcritError(ArithmeticError):
    """Base class for every computation error raised by the package."""


class CcritDomainError(CcritError, ValueError):
    """An argument lies outside the documented domain of a function."""


class PoleError(CcritError):
    """A Gamma or zeta factor is evaluated at (or too close to) a pole.

    ``factor`` names the offending factor, e.g. ``"Gamma(nu - 1/2)"``.
    """

    def __init__(self, factor, argument, message=None):
        self.factor = factor
        self.argument = argument
        if message is None:
            message = f"{factor} has a pole at argument {argument!r}"
        super().__init__(message)


class NonconvergenceError(CcritError):
    """A defining series does not converge for the requested parameters."""


class BudgetError(CcritError):
    """The truncation budget was exhausted before the tolerance was met."""


class NoSolutionError(CcritError):
    """The gap equation has no disordered-phase root.

    ``defect`` holds the defect value at the smallest mass probed.
    """

    def __init__(self, message, defect):
        self.defect = defect
        super().__init__(message)
