"""bohmctx: de Broglie-Bohm trajectory simulation of measurement scenarios
where the outcome is decided by the measured system's position, by the
apparatus positions, or by a compromise between them."""

__version__ = "0.1.0"

from .units import UnitsConfig, DEFAULT_UNITS
from .grids import SpatialGrid
from .fields import (ComplexField, SpinorField, GaussianPacketSpec,
                     make_gaussian, norm, overlap)
from .propagation import PotentialSpec, propagate
from .guidance import (VelocityModel, velocity_scalar, velocity_spinor,
                       gordon_velocity)
from .sampling import EquilibriumSample, sample_equilibrium
from .trajectories import Trajectory, integrate_trajectories
from .pointer import (Branch, PointerModelConfig, ConfigPoint,
                      branch_local_weight, pointer_velocity,
                      apparatus_overlap, system_overlap, classify_outcome,
                      predictor_system, predictor_apparatus)
from .report import EnsembleReport
from .errors import (BohmctxError, ConfigError, NumericalFailure,
                     SupportGuardViolation, SeparationError)

__all__ = [
    "UnitsConfig", "DEFAULT_UNITS", "SpatialGrid", "ComplexField",
    "SpinorField", "GaussianPacketSpec", "make_gaussian", "norm", "overlap",
    "PotentialSpec", "propagate", "VelocityModel", "velocity_scalar",
    "velocity_spinor", "gordon_velocity", "EquilibriumSample",
    "sample_equilibrium", "Trajectory", "integrate_trajectories", "Branch",
    "PointerModelConfig", "ConfigPoint", "branch_local_weight",
    "pointer_velocity", "apparatus_overlap", "system_overlap",
    "classify_outcome", "predictor_system", "predictor_apparatus",
    "EnsembleReport", "BohmctxError", "ConfigError", "NumericalFailure",
    "SupportGuardViolation", "SeparationError",
]
