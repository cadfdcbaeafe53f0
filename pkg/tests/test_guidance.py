import numpy as np
import pytest

from bohmctx import (ComplexField, ConfigError, GaussianPacketSpec,
                     SpatialGrid, SpinorField, make_gaussian, velocity_scalar,
                     velocity_spinor, gordon_velocity)
from bohmctx.guidance import VelocityModel, build_stacks, current_and_density


def normalized_spinor(grid, up_vals, down_vals):
    n2 = (np.sum(np.abs(up_vals) ** 2 + np.abs(down_vals) ** 2)
          * grid.cell_volume)
    s = 1.0 / np.sqrt(n2)
    return SpinorField(ComplexField(grid, up_vals * s),
                       ComplexField(grid, down_vals * s))


def test_plane_wave_velocity(line_grid):
    L = 40.0
    k = 2 * np.pi * 19 / L  # ~3.0, exactly on the lattice
    x = line_grid.axis(0)
    pw = ComplexField(line_grid, np.exp(1j * k * x) / np.sqrt(L))
    pts = np.array([[-7.3], [0.1], [4.4]])
    v = velocity_scalar(pw, pts)
    assert np.abs(v[:, 0] - k).max() <= 1e-8


def test_stationary_gaussian_zero_velocity(unit_gaussian):
    v = velocity_scalar(unit_gaussian, np.array([[-1.0], [0.5]]))
    assert np.abs(v).max() <= 1e-10


def test_boosted_gaussian_uniform_velocity(line_grid):
    psi = make_gaussian(line_grid, GaussianPacketSpec.make(0.0, 1.0, 2.0))
    v = velocity_scalar(psi, np.array([[-2.1], [0.0], [1.7]]))
    assert np.abs(v[:, 0] - 2.0).max() <= 1e-6


def test_spinor_single_component_reduction(line_grid):
    psi = make_gaussian(line_grid, GaussianPacketSpec.make(0.0, 1.0, 1.2))
    sp = SpinorField(psi, ComplexField(line_grid, np.zeros(line_grid.shape,
                                                           dtype=complex)))
    pts = np.array([[-1.0], [0.3], [2.0]])
    assert np.array_equal(velocity_spinor(sp, pts), velocity_scalar(psi, pts))


def test_spinor_equal_components_reduction(line_grid):
    psi = make_gaussian(line_grid, GaussianPacketSpec.make(0.0, 1.0, -0.8))
    half = ComplexField(line_grid, psi.values / np.sqrt(2))
    sp = SpinorField(half, half)
    pts = np.array([[-0.5], [1.1]])
    assert np.allclose(velocity_spinor(sp, pts), velocity_scalar(psi, pts),
                       atol=1e-12)


def test_spinor_counterpropagating_zero_at_equal_amplitudes(line_grid):
    # components with k = +-1; where |psi_+| = |psi_-| the convective
    # velocity vanishes.  Oracle: centered finite differences of the
    # defining formula on the analytic state.
    sigma = 1.0

    def up_f(x):
        return np.exp(-x ** 2 / (4 * sigma ** 2) + 1j * x)

    def down_f(x):
        return np.exp(-x ** 2 / (4 * sigma ** 2) - 1j * x)

    grid = SpatialGrid.line(1024, -20.0, 20.0)
    x = grid.axis(0)
    sp = normalized_spinor(grid, up_f(x), down_f(x))
    pts = np.array([[0.0], [0.9], [-1.4]])  # equal amplitudes everywhere
    v = velocity_spinor(sp, pts)
    assert np.abs(v).max() <= 1e-6

    h = 1e-6
    for xq in pts[:, 0]:
        num = np.imag(np.conj(up_f(xq)) * (up_f(xq + h) - up_f(xq - h))
                      + np.conj(down_f(xq)) * (down_f(xq + h) - down_f(xq - h))) / (2 * h)
        den = abs(up_f(xq)) ** 2 + abs(down_f(xq)) ** 2
        assert abs(v[list(pts[:, 0]).index(xq), 0] - num / den) <= 1e-6


def plane_grid():
    return SpatialGrid.plane(128, (-8.0, 8.0), 128, (-8.0, 8.0))


def test_gordon_zero_for_z_eigenstate():
    grid = plane_grid()
    g = make_gaussian(grid, GaussianPacketSpec.make((0, 0), (1, 1), (0, 0)))
    sp = SpinorField(g, ComplexField(grid, np.zeros(grid.shape, dtype=complex)))
    v = gordon_velocity(sp, np.array([[0.2, -0.4], [1.0, 1.0]]))
    assert np.abs(v).max() <= 1e-10


def test_gordon_zero_for_uniform_spinor():
    grid = plane_grid()
    L2 = 16.0 * 16.0
    ones = np.ones(grid.shape, dtype=complex) / np.sqrt(2 * L2)
    sp = SpinorField(ComplexField(grid, ones), ComplexField(grid, ones))
    v = gordon_velocity(sp, np.array([[0.0, 0.0], [2.0, -3.0]]))
    assert np.abs(v).max() <= 1e-10


def test_gordon_matches_finite_difference_curl():
    # 50/50 spinor with Gaussian envelopes; oracle is a centered finite
    # difference of s_x = 2 Re(u* d) on the analytic state, evaluated at
    # grid points where interpolation is exact.
    grid = plane_grid()

    def u_f(y, z):
        return np.exp(-(y ** 2 + z ** 2) / 4.0) * np.exp(0.31j * z)

    def d_f(y, z):
        return np.exp(-(y ** 2 + (z - 0.4) ** 2) / 4.0) * np.exp(-0.27j * z)

    Y, Z = grid.meshes
    n2 = np.sum(np.abs(u_f(Y, Z)) ** 2 + np.abs(d_f(Y, Z)) ** 2) * grid.cell_volume
    sp = SpinorField(ComplexField(grid, u_f(Y, Z) / np.sqrt(n2)),
                     ComplexField(grid, d_f(Y, Z) / np.sqrt(n2)))

    def s_x(y, z):
        return 2 * np.real(np.conj(u_f(y, z)) * d_f(y, z)) / n2

    def rho(y, z):
        return (np.abs(u_f(y, z)) ** 2 + np.abs(d_f(y, z)) ** 2) / n2

    h = 1e-5
    pts = np.array([[0.25, -0.75], [1.0, 0.5], [-0.5, 1.0]])  # grid points
    v = gordon_velocity(sp, pts)
    for (y, z), vi in zip(pts, v):
        oracle = 0.5 / rho(y, z) * np.array([
            (s_x(y, z + h) - s_x(y, z - h)) / (2 * h),
            -(s_x(y + h, z) - s_x(y - h, z)) / (2 * h)])
        assert np.abs(vi - oracle).max() <= 1e-5


def test_gordon_rejects_1d(line_grid, unit_gaussian):
    sp = SpinorField(unit_gaussian,
                     ComplexField(line_grid, np.zeros(line_grid.shape,
                                                      dtype=complex)))
    with pytest.raises(ConfigError):
        gordon_velocity(sp, 0.0)


def test_gordon_consistency_additive():
    # spinor_with_gordon current = convective current + gordon current,
    # exactly, so the combined velocity equals the sum at shared density
    grid = plane_grid()
    g = make_gaussian(grid, GaussianPacketSpec.make((0, 0), (1, 1), (0.4, -0.2)))
    sp = SpinorField(ComplexField(grid, g.values * np.sqrt(0.5)),
                     ComplexField(grid, g.values * np.sqrt(0.5) * np.exp(0.9j)))
    rho_c, g_conv = current_and_density(sp, VelocityModel.SPINOR)
    rho_g, g_full = current_and_density(sp, VelocityModel.SPINOR_GORDON)
    from bohmctx.guidance import gordon_current
    gy, gz = gordon_current(sp)
    assert np.array_equal(rho_c, rho_g)
    assert np.array_equal(g_full[0], g_conv[0] + gy)
    assert np.array_equal(g_full[1], g_conv[1] + gz)


def test_node_flagging(line_grid):
    psi = make_gaussian(line_grid, GaussianPacketSpec.make(0.0, 0.4, 0.0))
    v, flags = velocity_scalar(psi, np.array([[15.0]]), with_flags=True)
    assert flags[0]
    assert np.all(np.isfinite(v))


def test_out_of_domain_rejected(unit_gaussian):
    with pytest.raises(ConfigError):
        velocity_scalar(unit_gaussian, 25.0)


def test_scalar_model_rejects_spinor(line_grid, unit_gaussian):
    sp = SpinorField(unit_gaussian, unit_gaussian)
    with pytest.raises(ConfigError):
        build_stacks([sp, sp], np.array([0.0, 1.0]), VelocityModel.SCALAR)
