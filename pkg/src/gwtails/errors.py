"""Exception hierarchy.

Every error carries the module and operation that raised it so the CLI can
report provenance and map the failure onto an exit code.
"""

from __future__ import annotations


class GWTailsError(Exception):
    """Base class. ``module`` and ``operation`` name the failing call site."""

    exit_code = 3

    def __init__(self, message: str, module: str = "", operation: str = ""):
        self.module = module
        self.operation = operation
        where = f"{module}.{operation}: " if module or operation else ""
        super().__init__(where + message)


class ValidationError(GWTailsError):
    exit_code = 2


class NegativeCoefficient(ValidationError):
    pass


class MultipleZero(ValidationError):
    pass


class HypothesisViolation(GWTailsError):
    exit_code = 4


class NotApplicable(HypothesisViolation):
    pass


class NumericError(GWTailsError):
    exit_code = 3


class PoleOfG(NumericError):
    pass


class RootFindFailure(NumericError):
    pass


class Divergence(NumericError):
    pass


class NonConvergence(NumericError):
    pass


class BranchAmbiguity(NumericError):
    pass


class StripViolation(NumericError):
    pass


class Overflow(NumericError):
    pass


class DegenerateDerivative(NumericError):
    pass


class LogOfZero(NumericError):
    pass
