"""Unit system. Everything runs in hbar = mass = 1 by default; rescaling to
physical units is the caller's job."""

from dataclasses import dataclass

from .errors import ConfigError


@dataclass(frozen=True)
class UnitsConfig:
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0.0 and self.mass > 0.0):
            raise ConfigError("hbar and mass must be strictly positive")


DEFAULT_UNITS = UnitsConfig()
