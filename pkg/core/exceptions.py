from django.core.exceptions import ValidationError


class NotConvergedError(RuntimeError):
    """An iterative solver hit its iteration cap without meeting its tolerance."""


class StepSolveError(ArithmeticError):
    """The regularised natural-gradient system could not be solved."""


class IncompatibleCheckpointError(ValidationError):
    """A transfer source does not match the requested model, size or ansatz."""
