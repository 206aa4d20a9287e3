"""Exception hierarchy.

Every error carries an ``exit_code`` so the command-line front end can map
failures onto its documented exit statuses without a lookup table.
"""


class HefError(Exception):
    """Base class for all library errors."""

    exit_code = 2


class InvalidInput(HefError, ValueError):
    exit_code = 2


class NumericalFailure(HefError, ArithmeticError):
    exit_code = 3


# curves
class BadArity(InvalidInput):
    pass


class MultipleRoots(InvalidInput):
    pass


class AtBranchPoint(InvalidInput):
    pass


class AtInfinity(InvalidInput):
    pass


class NotFamilyCurve(InvalidInput):
    pass


# periods
class QuadratureNoConvergence(NumericalFailure):
    pass


class IllConditioned(NumericalFailure):
    pass


class CharacteristicSearchFailed(NumericalFailure):
    pass


# theta / sigma
class TauNotPositive(InvalidInput):
    pass


class OnThetaDivisor(InvalidInput):
    """The requested point is a pole of the p-functions."""


# abel
class PathThroughBranchPoint(NumericalFailure):
    pass


class DegenerateConfiguration(InvalidInput):
    pass


# bielliptic
class DegenerateFamily(InvalidInput):
    def __init__(self, condition):
        super().__init__(f"degenerate family: {condition}")
        self.condition = condition


class AtPole(InvalidInput):
    pass


# reduction
class DenominatorVanishes(InvalidInput):
    def __init__(self, which):
        super().__init__(f"denominator vanishes: {which}")
        self.which = which


class NearDegenerate(InvalidInput):
    pass


class DivisionRemainderTooLarge(NumericalFailure):
    pass


class SingularGMatrix(NumericalFailure):
    pass
