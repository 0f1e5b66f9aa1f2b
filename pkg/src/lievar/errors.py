class LievarError(Exception):
    """Base class for solver-side failures."""


class DegenerateError(LievarError):
    """A Hessian or bordered matrix needed by a solve is numerically singular."""


class IntegrationError(LievarError):
    """A flow produced non-finite values or left its constraint manifold."""

    def __init__(self, message: str, last_good_time: float | None = None):
        super().__init__(message)
        self.last_good_time = last_good_time


class ConvergenceError(LievarError):
    """Newton-type iteration failed; ``best`` holds the best iterate seen."""

    def __init__(self, message: str, best=None, residual: float | None = None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class ConfigError(ValueError):
    """Scenario configuration is malformed or incomplete."""
