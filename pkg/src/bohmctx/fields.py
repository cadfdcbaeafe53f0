"""Complex scalar and spinor fields on a grid, plus Gaussian packet
construction and inner products.

Width convention: the sigma of a GaussianPacketSpec is the standard
deviation of |psi|^2, i.e. psi ~ exp(-(x-c)^2 / (4 sigma^2)).  This is
what all overlap formulas in the package assume.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .grids import SpatialGrid
from .units import UnitsConfig, DEFAULT_UNITS


@dataclass(frozen=True)
class ComplexField:
    grid: SpatialGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != self.grid.shape:
            raise ConfigError(f"values shape {v.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(v.view(np.float64))):
            raise ConfigError("field values must be finite")
        v = v.copy()
        v.setflags(write=False)  # fields are immutable after construction
        object.__setattr__(self, "values", v)

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2


@dataclass(frozen=True)
class SpinorField:
    up: ComplexField
    down: ComplexField

    def __post_init__(self):
        if not self.up.grid.same_as(self.down.grid):
            raise ConfigError("spinor components must share one grid")

    @property
    def grid(self) -> SpatialGrid:
        return self.up.grid

    def density(self) -> np.ndarray:
        return self.up.density() + self.down.density()


FieldLike = ComplexField | SpinorField


@dataclass(frozen=True)
class GaussianPacketSpec:
    """center, sigma and momentum are scalars in 1D, length-2 sequences in 2D."""

    center: tuple[float, ...]
    sigma: tuple[float, ...]
    momentum: tuple[float, ...]
    phase: float = 0.0

    @classmethod
    def make(cls, center, sigma, momentum, phase: float = 0.0) -> "GaussianPacketSpec":
        c = tuple(np.atleast_1d(np.asarray(center, dtype=float)))
        s = tuple(np.atleast_1d(np.asarray(sigma, dtype=float)))
        k = tuple(np.atleast_1d(np.asarray(momentum, dtype=float)))
        return cls(c, s, k, float(phase))

    def validate_on(self, grid: SpatialGrid) -> None:
        if not (len(self.center) == len(self.sigma) == len(self.momentum) == grid.dims):
            raise ConfigError("packet spec dimensionality does not match grid")
        for i in range(grid.dims):
            if not self.sigma[i] > 0.0:
                raise ConfigError("sigma must be positive")
            lo = self.center[i] - 5.0 * self.sigma[i]
            hi = self.center[i] + 5.0 * self.sigma[i]
            if lo < grid.x_min[i] or hi > grid.x_max[i]:
                raise ConfigError(
                    f"packet support (center +- 5 sigma) leaves the domain on axis {i}"
                )


def make_gaussian(grid: SpatialGrid, spec: GaussianPacketSpec,
                  units: UnitsConfig = DEFAULT_UNITS) -> ComplexField:
    """Normalized Gaussian packet exp(-(x-c)^2/(4 sigma^2) + i k.(x-c) + i phase)."""
    spec.validate_on(grid)
    psi = np.full(grid.shape, np.exp(1j * spec.phase), dtype=np.complex128)
    for i, mesh in enumerate(grid.meshes):
        d = mesh - spec.center[i]
        psi = psi * np.exp(-d * d / (4.0 * spec.sigma[i] ** 2) + 1j * spec.momentum[i] * d)
    nrm = np.sqrt(np.sum(np.abs(psi) ** 2) * grid.cell_volume)
    return ComplexField(grid, psi / nrm)


def norm(f: FieldLike) -> float:
    """L2 norm; for spinors the joint norm over both components."""
    if isinstance(f, SpinorField):
        n2 = (np.sum(f.up.density()) + np.sum(f.down.density())) * f.grid.cell_volume
    else:
        n2 = np.sum(f.density()) * f.grid.cell_volume
    return float(np.sqrt(n2))


def overlap(a: FieldLike, b: FieldLike) -> complex:
    """Inner product <a|b>; spinor overlap sums both components."""
    if isinstance(a, SpinorField) != isinstance(b, SpinorField):
        raise ConfigError("cannot overlap a scalar field with a spinor field")
    if isinstance(a, SpinorField):
        if not a.grid.same_as(b.grid):
            raise ConfigError("overlap requires a shared grid")
        acc = (np.vdot(a.up.values, b.up.values)
               + np.vdot(a.down.values, b.down.values))
        return complex(acc * a.grid.cell_volume)
    if not a.grid.same_as(b.grid):
        raise ConfigError("overlap requires a shared grid")
    return complex(np.vdot(a.values, b.values) * a.grid.cell_volume)


def position_expectation(f: FieldLike) -> np.ndarray:
    rho = f.density()
    grid = f.grid
    w = rho * grid.cell_volume
    total = np.sum(w)
    return np.array([float(np.sum(w * m)) / total for m in grid.meshes])


def position_std(f: FieldLike) -> np.ndarray:
    """Per-axis standard deviation of |psi|^2."""
    rho = f.density()
    grid = f.grid
    w = rho * grid.cell_volume
    total = np.sum(w)
    out = []
    for m in grid.meshes:
        mu = np.sum(w * m) / total
        out.append(float(np.sqrt(np.sum(w * (m - mu) ** 2) / total)))
    return np.array(out)


def spatial_overlap(a: ComplexField, b: ComplexField) -> float:
    """Bhattacharyya coefficient of the two densities: integral of
    sqrt(rho_a rho_b).  Measures shared support, not phase coherence."""
    if not a.grid.same_as(b.grid):
        raise ConfigError("spatial overlap requires a shared grid")
    na2 = np.sum(a.density()) * a.grid.cell_volume
    nb2 = np.sum(b.density()) * b.grid.cell_volume
    acc = np.sum(np.sqrt(a.density() * b.density())) * a.grid.cell_volume
    return float(acc / np.sqrt(na2 * nb2))


def write_text(f: FieldLike, path) -> None:
    """Plain-text dump (coordinates plus re/im columns) for debugging."""
    if isinstance(f, SpinorField):
        cols = [*f.grid.meshes, f.up.values.real, f.up.values.imag,
                f.down.values.real, f.down.values.imag]
        names = _coord_names(f.grid) + ["up_re", "up_im", "down_re", "down_im"]
    else:
        cols = [*f.grid.meshes, f.values.real, f.values.imag]
        names = _coord_names(f.grid) + ["re", "im"]
    flat = np.column_stack([np.ravel(c) for c in cols])
    header = " ".join(names)
    np.savetxt(path, flat, header=header, fmt="%.17g")


def read_text(path, grid: SpatialGrid) -> FieldLike:
    data = np.loadtxt(path)
    ncoord = grid.dims
    if data.shape[1] == ncoord + 4:
        up = (data[:, ncoord] + 1j * data[:, ncoord + 1]).reshape(grid.shape)
        dn = (data[:, ncoord + 2] + 1j * data[:, ncoord + 3]).reshape(grid.shape)
        return SpinorField(ComplexField(grid, up), ComplexField(grid, dn))
    vals = (data[:, ncoord] + 1j * data[:, ncoord + 1]).reshape(grid.shape)
    return ComplexField(grid, vals)


def _coord_names(grid: SpatialGrid) -> list[str]:
    return ["x"] if grid.dims == 1 else ["y", "z"]
