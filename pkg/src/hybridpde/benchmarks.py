"""Benchmark definitions: grids, physical parameters, monitor settings,
and surrogate choices for the four reference problems.

Desk-scale ensemble sizes are deliberately small; they exercise the same
machinery as large production ensembles at laptop cost.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .controller import HybridConfig
from .grids import Grid
from .pdes import ALLENCAHN2D, BURGERS1D, BURGERS2D, DIRICHLET0, HEAT3D, PERIODIC, PdeSpec
from .sampling import BLOB3D, FILTERED2D, GRF1D, MATERN2D, IcSpec, default_ic_spec, sample_ic
from .solvers import SolverConfig, default_solver_config, solve_trajectory
from .surrogates import CoarseSpectralSurrogate, fit_linear_surrogate

TEST_INDEX_BASE = 10_000  # keeps test draws disjoint from training draws


@dataclass(frozen=True)
class BenchmarkDef:
    name: str
    pde_kind: str
    ic_kind: str
    ema_a: float
    gamma: float
    k_steps: int = 10
    horizon: float = 1.0
    dt_save: float = 0.01
    train_count: int = 0
    test_count: int = 10
    train_horizon: float = 0.5
    surrogate_kind: str = "coarse"   # "coarse" | "linear"
    linear_m: int = 24
    linear_ridge: float = 0.0
    linear_center: bool = True
    linear_burn_in: int = 3
    coarsen: int = 2
    coarse_scheme: str = "etd1"
    mode_cut: int | None = None
    dissipation_scale: float = 1.0


_TABLE = {
    # 101 grid points do not halve, so the 1d surrogate coarsens in time
    # only: one first-order exponential step per save interval.
    "burgers1d": BenchmarkDef(
        name="burgers1d", pde_kind=BURGERS1D, ic_kind=GRF1D,
        ema_a=0.1, gamma=2.0,
        surrogate_kind="coarse", coarsen=1, coarse_scheme="etd1", mode_cut=3,
    ),
    "burgers2d": BenchmarkDef(
        name="burgers2d", pde_kind=BURGERS2D, ic_kind=MATERN2D,
        ema_a=0.02, gamma=2.0,
        surrogate_kind="coarse", coarsen=2, coarse_scheme="etd1",
        dissipation_scale=1.15,
    ),
    "allencahn2d": BenchmarkDef(
        name="allencahn2d", pde_kind=ALLENCAHN2D, ic_kind=FILTERED2D,
        ema_a=0.01, gamma=3.0,
        surrogate_kind="coarse", coarsen=2, coarse_scheme="etd1", mode_cut=3,
    ),
    "heat3d": BenchmarkDef(
        name="heat3d", pde_kind=HEAT3D, ic_kind=BLOB3D,
        ema_a=0.01, gamma=3.0,
        surrogate_kind="linear", linear_m=64, linear_center=False,
        linear_ridge=1e-4, linear_burn_in=3,
        train_count=120, train_horizon=0.33,
    ),
}

BENCHMARK_NAMES = tuple(_TABLE)


def benchmark(name: str) -> BenchmarkDef:
    try:
        return _TABLE[name]
    except KeyError:
        raise ValueError(f"unknown benchmark {name!r}; choose from {BENCHMARK_NAMES}") from None


def l_shaped_mask(points: tuple[int, int, int]) -> np.ndarray:
    """Box minus the x > Lx/2, y > Ly/2 quadrant (full z extent)."""
    nx, ny, nz = points
    active = np.ones(points, dtype=bool)
    active[nx // 2:, ny // 2:, :] = False
    return active


def build_grid(bench: BenchmarkDef) -> Grid:
    if bench.pde_kind == BURGERS1D:
        return Grid(points=(101,), extents=(1.0,), periodic=(True,))
    if bench.pde_kind == BURGERS2D:
        return Grid(points=(64, 64), extents=(1.0, 1.0), periodic=(True, True))
    if bench.pde_kind == ALLENCAHN2D:
        return Grid(points=(32, 32), extents=(1.0, 1.0), periodic=(True, True))
    # Heat runs in grid-index units (spacing 1), which is the regime where
    # an explicit step of dt_save is stable and the blob width is meaningful.
    points = (32, 32, 16)
    extents = tuple(float(n - 1) for n in points)
    return Grid(points=points, extents=extents, periodic=(False,) * 3,
                active=l_shaped_mask(points))


def build_spec(bench: BenchmarkDef, grid: Grid | None = None) -> PdeSpec:
    grid = grid if grid is not None else build_grid(bench)
    if bench.pde_kind == HEAT3D:
        return PdeSpec(kind=HEAT3D, grid=grid, alpha=1.0, bc=DIRICHLET0)
    if bench.pde_kind == ALLENCAHN2D:
        return PdeSpec(kind=ALLENCAHN2D, grid=grid, epsilon=0.05, bc=PERIODIC)
    return PdeSpec(kind=bench.pde_kind, grid=grid, nu=0.01, bc=PERIODIC)


def build_solver_config(bench: BenchmarkDef, spec: PdeSpec) -> SolverConfig:
    return default_solver_config(spec, dt_save=bench.dt_save)


def build_ic_spec(bench: BenchmarkDef, seed: int = 0) -> IcSpec:
    return default_ic_spec(bench.ic_kind, seed=seed)


def training_trajectories(bench: BenchmarkDef, spec: PdeSpec, cfg: SolverConfig,
                          ic: IcSpec, count: int | None = None):
    count = bench.train_count if count is None else count
    grid = spec.grid
    out = []
    for i in range(count):
        f0 = sample_ic(ic, grid, sample_index=i)
        out.append(solve_trajectory(spec, cfg, f0, bench.train_horizon))
    return out


def build_surrogate(bench: BenchmarkDef, spec: PdeSpec, cfg: SolverConfig,
                    ic: IcSpec | None = None, train_count: int | None = None):
    if bench.surrogate_kind == "coarse":
        return CoarseSpectralSurrogate(spec, dt_save=cfg.dt_save,
                                       coarsen=bench.coarsen, scheme=bench.coarse_scheme,
                                       mode_cut=bench.mode_cut,
                                       dissipation_scale=bench.dissipation_scale)
    if ic is None:
        raise ValueError(f"{bench.name}: fitted surrogate needs an ic spec")
    records = training_trajectories(bench, spec, cfg, ic, count=train_count)
    return fit_linear_surrogate(records, m=bench.linear_m, ridge=bench.linear_ridge,
                                dt_save=cfg.dt_save, center=bench.linear_center,
                                burn_in=bench.linear_burn_in)


def build_hybrid_config(bench: BenchmarkDef, spec: PdeSpec, cfg: SolverConfig,
                        surrogate) -> HybridConfig:
    return HybridConfig(
        spec=spec, solver_cfg=cfg, surrogate=surrogate,
        ema_a=bench.ema_a, gamma=bench.gamma, k_steps=bench.k_steps,
        horizon=bench.horizon,
        echo={
            "benchmark": bench.name,
            "ema_a": bench.ema_a,
            "gamma": bench.gamma,
            "k_steps": bench.k_steps,
            "horizon": bench.horizon,
            "dt_save": cfg.dt_save,
            "dt_internal": cfg.dt_internal,
            "surrogate": getattr(surrogate, "descriptor", str(type(surrogate))),
        },
    )


def with_overrides(bench: BenchmarkDef, **kwargs) -> BenchmarkDef:
    return replace(bench, **kwargs)
