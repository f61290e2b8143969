"""Exception hierarchy.

Everything derives from :class:`SpectraLabError`.  The CLI maps
:class:`ValidationError` to exit code 2 and :class:`NumericalError` to 3.
"""


class SpectraLabError(Exception):
    pass


class ValidationError(SpectraLabError, ValueError):
    """Bad input: wrong shapes, out-of-model parameters, failed invariants."""


class NumericalError(SpectraLabError, ArithmeticError):
    """An iterative or numerical routine did not produce a usable answer."""


class InvalidArity(ValidationError):
    pass


class ArityTooLarge(ValidationError):
    pass


class NotTwoEigenvalue(ValidationError):
    pass


class Degenerate(ValidationError):
    pass


class MixedEigenvalues(ValidationError):
    pass


class ArityMismatch(ValidationError):
    pass


class UnbalancedNegation(ValidationError):
    pass


class NotBalanced(ValidationError):
    pass


class BudgetExceeded(ValidationError):
    pass


class NearPole(ValidationError):
    pass


class NonIntegerMultiplicity(ValidationError):
    pass


class CardinalityMismatch(ValidationError):
    pass


class BallTooLarge(ValidationError):
    pass


class SupportTouchesBoundary(ValidationError):
    pass


class ZeroVector(ValidationError):
    pass


class TooLarge(ValidationError):
    pass


class NotSymmetric(ValidationError):
    pass


class OutOfModel(ValidationError):
    pass


class NoConvergence(NumericalError):
    pass
