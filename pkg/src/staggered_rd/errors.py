"""Exception types raised by the solver."""


class StateError(ValueError):
    """Non-physical thermodynamic state (non-positive density or pressure)."""


class PositivityError(RuntimeError):
    """A step produced non-positive density, energy or correction weights."""


class BlowUpError(RuntimeError):
    """Non-finite degrees of freedom appeared during a run."""

    def __init__(self, message: str, step: int | None = None, time: float | None = None):
        super().__init__(message)
        self.step = step
        self.time = time


class ConvergenceError(RuntimeError):
    """An iterative solve did not converge."""


class VacuumError(RuntimeError):
    """Riemann data generates vacuum."""


class ConfigError(ValueError):
    """Invalid run configuration; ``key`` names the offending entry."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key
