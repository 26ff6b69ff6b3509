"""Exception hierarchy shared by all modules."""


class GeofixError(Exception):
    pass


class DomainError(GeofixError, ValueError):
    """Argument outside the domain of an operation (bad t, mismatched point kind, ...)."""


class UnsupportedCapability(GeofixError):
    """The space does not provide what the operation needs (no modulus, no half-spaces)."""


class ConstructionError(GeofixError, ValueError):
    """A descriptor failed validation when it was built."""


class NumericFailure(GeofixError, ArithmeticError):
    def __init__(self, step: int, message: str = "non-finite value encountered"):
        super().__init__(f"{message} at step {step}")
        self.step = step
