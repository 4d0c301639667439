"""Exception hierarchy.

Every error carries the CLI exit code it maps to:
2 input error, 3 budget exceeded, 4 unsupported request, 5 numerical failure.
"""


class ResilockError(Exception):
    exit_code = 2


class InvalidInput(ResilockError, ValueError):
    exit_code = 2


class IndexOutOfRange(InvalidInput):
    pass


class DuplicateIndex(InvalidInput):
    pass


class NotUnitVector(InvalidInput):
    pass


class NotOrthonormalRows(InvalidInput):
    pass


class DegenerateRange(InvalidInput):
    pass


class ZeroDistance(InvalidInput):
    pass


class UnknownFixture(InvalidInput):
    pass


class CombinatorialBudgetExceeded(ResilockError):
    exit_code = 3


class UnsupportedOrder(ResilockError):
    exit_code = 4


class NumericalFailure(ResilockError, ArithmeticError):
    exit_code = 5


class NotPositiveDefinite(NumericalFailure):
    pass


class NotPositiveSemidefinite(NumericalFailure):
    pass


class RiccatiFailure(NumericalFailure):
    pass


class SingularGram(NumericalFailure):
    pass


class LambdaAtLeastOne(NumericalFailure):
    pass


class NotWellDefined(NumericalFailure):
    """The resilient law needs ``B B^T`` invertible."""


class NotEventuallyReachable(NumericalFailure):
    pass


class NonFiniteState(NumericalFailure):
    pass


class PiSingular(NumericalFailure):
    pass


class NoFeasibleMu(NumericalFailure):
    pass
