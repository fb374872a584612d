"""Exception types shared across the package."""


class DomainError(ValueError):
    """Mathematical domain violated (e.g. a wave speed below the minimal one)."""


class ParameterError(ValueError):
    """A numerical parameter is out of its usable range."""


class WindowError(RuntimeError):
    """The moving spatial window failed to bracket the front."""


class InstabilityError(RuntimeError):
    """The time stepper left the admissible value range."""

    def __init__(self, step, t, lo, hi):
        self.step = step
        self.t = t
        super().__init__(
            f"profile left [-1e-6, 1+1e-6] at step {step} (t={t:.6g}): "
            f"min={lo:.3e}, max={hi:.3e}"
        )


class PrecisionError(RuntimeError):
    """A quadrature or Monte Carlo estimate failed to reach the requested accuracy."""
