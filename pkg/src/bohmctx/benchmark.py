"""Benchmark the numba kernels against the pure-numpy fallback.

Run with `python -m bohmctx.benchmark`.  Each kernel is timed on a
representative workload after a warm-up call (which also covers JIT
compilation), and the two backends are checked against each other.
"""

import time

import numpy as np

from . import _kernels
from .config import OpticalSGConfig
from .fields import GaussianPacketSpec, make_gaussian
from .grids import SpatialGrid
from .guidance import VelocityModel, build_stacks
from .pointer import integrate_pointer_ensemble, sample_model_equilibrium
from .propagation import PotentialSpec, propagate
from .scenarios import build_optical_sg_model
from .trajectories import integrate_over_stacks


def _time(fn, repeats: int = 3) -> float:
    fn()  # warm-up / compile
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_grid(n_traj: int = 1000) -> dict:
    grid = SpatialGrid.line(1024, -32.0, 32.0)
    psi = make_gaussian(grid, GaussianPacketSpec.make(0.0, 1.0, 2.0))
    prop = propagate(psi, PotentialSpec.free(), 0.002, 1000, frame_stride=5)
    stacks = build_stacks(prop.frames, prop.times, VelocityModel.SCALAR)
    rng = np.random.default_rng(0)
    x0 = rng.normal(0.0, 1.0, n_traj)
    out = {}
    for backend in _available_backends():
        out[backend] = _time(lambda b=backend: integrate_over_stacks(
            stacks, x0, 0.005, backend=b))
    return out


def bench_pointer(n_traj: int = 500, N: int = 64) -> dict:
    cfg = OpticalSGConfig()
    model = build_optical_sg_model(cfg, N).block_model()
    init = sample_model_equilibrium(model, n_traj, seed=0)
    out = {}
    for backend in _available_backends():
        out[backend] = _time(lambda b=backend: integrate_pointer_ensemble(
            model, init, cfg.dt_traj, record_stride=10, backend=b))
    return out


def _available_backends() -> list[str]:
    return ["numba", "numpy"] if _kernels.HAVE_NUMBA else ["numpy"]


def main() -> int:
    print(f"active backend: {_kernels.ACTIVE_BACKEND}")
    rows = [("grid RK4, 1000 trajectories", bench_grid()),
            ("pointer RK4, 500 x (1+64) coords", bench_pointer())]
    for name, timings in rows:
        parts = [f"{backend}: {seconds * 1e3:8.1f} ms"
                 for backend, seconds in timings.items()]
        if len(timings) == 2:
            speedup = timings["numpy"] / timings["numba"]
            parts.append(f"speedup x{speedup:.1f}")
        print(f"{name:36s} " + "  ".join(parts))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
