"""Exception hierarchy. Config problems and numerical failures map to
distinct CLI exit codes, so they are kept as separate branches."""


class BohmctxError(Exception):
    """Base class for all package errors."""


class ConfigError(BohmctxError):
    """Invalid configuration, rejected input, or precondition violation."""


class NumericalFailure(BohmctxError):
    """The simulation itself broke down (NaN, guard violation, ...)."""


class PropagationBlowup(NumericalFailure):
    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"non-finite field values at step {step}")


class SupportGuardViolation(NumericalFailure):
    """Probability density reached the grid boundary band."""

    def __init__(self, step: int, ratio: float):
        self.step = step
        self.ratio = ratio
        super().__init__(
            f"boundary density {ratio:.3e} of peak exceeds 1e-8 at step {step}"
        )


class SeparationError(NumericalFailure):
    """Wavepacket branches failed to separate within the configured time."""
