"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration or parameter outside its validated range."""


class AccuracyError(RuntimeError):
    """A quadrature or refinement loop failed to reach its tolerance."""


class ConvergenceError(RuntimeError):
    """A fixed-point iteration exceeded its iteration budget."""

    def __init__(self, message, contraction_factor=None):
        super().__init__(message)
        self.contraction_factor = contraction_factor


class StepSizeError(RuntimeError):
    """The explicit-step stability monitor tripped."""


class VerificationError(RuntimeError):
    """A theorem-verification experiment found a violated bound."""
