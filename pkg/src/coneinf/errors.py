"""Exception hierarchy.  The CLI maps every ``ConeInfError`` to exit code 3."""


class ConeInfError(Exception):
    pass


class EvaluationError(ConeInfError):
    """A function returned a non-finite value at a quadrature node."""


class InvalidTangent(ConeInfError):
    pass


class RankDeficiency(ConeInfError):
    pass


class NumericalFailure(ConeInfError):
    """An iterative solver hit its iteration cap; ``best`` holds the last iterate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class DegenerateModel(ConeInfError):
    pass


class InvalidPath(ConeInfError):
    def __init__(self, message, minimal_n=None):
        super().__init__(message)
        self.minimal_n = minimal_n


class CannotSample(ConeInfError):
    pass


class ConditionNotMet(ConeInfError):
    pass


class PremiseViolated(ConeInfError):
    pass


class SymmetryViolation(ConeInfError):
    pass


class InvalidProbability(ConeInfError):
    pass
