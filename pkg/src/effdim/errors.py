"""Exception hierarchy shared by all modules."""


class EffDimError(Exception):
    """Base class for numerical and contract failures."""

    def to_json(self):
        return {"error": type(self).__name__, "message": str(self)}


class MissingWeight(EffDimError, KeyError):
    pass


class CapExceeded(EffDimError):
    pass


class ConditionViolated(EffDimError):
    pass


class EmptySubset(EffDimError, ValueError):
    pass


class DomainTooLarge(EffDimError, ValueError):
    """Raised when epsilon is too large for the asymptotic regime."""


class OutOfDomain(EffDimError, ValueError):
    pass


class EvaluationError(EffDimError):
    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class NumericalInconsistency(EffDimError):
    pass


class ConstantFunction(EffDimError):
    pass


class ZeroMeanUndefined(EffDimError):
    pass


class MissingDerivatives(EffDimError):
    pass


class MeanNotZero(EffDimError, ValueError):
    pass


class ZeroFunction(EffDimError, ValueError):
    pass
