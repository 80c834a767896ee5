"""Exception types shared by the numerical modules.

Input problems are plain ``ValueError`` (or ``WeightSpecError``); failures of the
numerics themselves derive from ``NumericalError`` so callers can tell a bad request
from a computation that could not be certified.
"""


class WeightSpecError(ValueError):
    """A weight specification string could not be parsed."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to reach its requested accuracy."""


class QuadratureError(NumericalError):
    """Adaptive quadrature exhausted its subdivision budget."""

    def __init__(self, message: str, estimate: float, error_bound: float):
        super().__init__(f"{message} (estimate={estimate!r}, error_bound={error_bound!r})")
        self.estimate = estimate
        self.error_bound = error_bound


class SeriesTruncationError(NumericalError):
    """A series needs more moments than the sequence provides."""

    def __init__(self, message: str, required_index: int):
        super().__init__(f"{message} (required moment index N={required_index})")
        self.required_index = required_index
