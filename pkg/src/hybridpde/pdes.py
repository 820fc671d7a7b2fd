"""PDE right-hand sides and their linear/nonlinear Fourier splitting.

Supported equations, all on the unit-style box of their benchmark:

  burgers1d    u_t = -1/2 (u^2)_x + nu u_xx            periodic
  burgers2d    u_t = -1/2 (u^2)_x - 1/2 (u^2)_y + nu (u_xx + u_yy)   periodic
  allencahn2d  u_t = eps^2 (u_xx + u_yy) - (u^3 - u)   periodic
  heat3d       T_t = alpha (T_xx + T_yy + T_zz)        Dirichlet-0, optional mask

Periodic equations are evaluated pseudospectrally with 2/3-rule dealiasing
of the quadratic/cubic products; the heat equation uses the 7-point
second-order stencil with masked neighbours read as zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import GridMismatchError, NoSpectralSplitError, NonFiniteFieldError
from .grids import FieldState, Grid

BURGERS1D = "burgers1d"
BURGERS2D = "burgers2d"
ALLENCAHN2D = "allencahn2d"
HEAT3D = "heat3d"

PERIODIC = "periodic"
DIRICHLET0 = "dirichlet0"

SPECTRAL_KINDS = (BURGERS1D, BURGERS2D, ALLENCAHN2D)


@dataclass(frozen=True, eq=False)
class PdeSpec:
    """Which PDE, on which grid, with which physical parameters."""

    kind: str
    grid: Grid
    nu: float = 0.01
    epsilon: float = 0.05
    alpha: float = 1.0
    bc: str = PERIODIC

    def __post_init__(self):
        if self.kind in (BURGERS1D, BURGERS2D):
            param, want_bc = self.nu, PERIODIC
        elif self.kind == ALLENCAHN2D:
            param, want_bc = self.epsilon, PERIODIC
        elif self.kind == HEAT3D:
            param, want_bc = self.alpha, DIRICHLET0
        else:
            raise ValueError(f"unknown pde kind {self.kind!r}")
        if param <= 0:
            raise ValueError(f"{self.kind}: physical parameter must be positive")
        if self.bc != want_bc:
            raise ValueError(f"{self.kind} requires bc={want_bc!r}")
        want_dims = {BURGERS1D: 1, BURGERS2D: 2, ALLENCAHN2D: 2, HEAT3D: 3}[self.kind]
        if self.grid.dims != want_dims:
            raise GridMismatchError(f"{self.kind} needs a {want_dims}d grid")
        if self.kind != HEAT3D and not all(self.grid.periodic):
            raise GridMismatchError(f"{self.kind} needs a fully periodic grid")
        if self.kind == HEAT3D and any(self.grid.periodic):
            raise GridMismatchError("heat3d grid must be non-periodic")

    def cache_key(self):
        g = self.grid
        return (self.kind, g.points, g.extents, g.periodic,
                self.nu, self.epsilon, self.alpha)


@dataclass(frozen=True)
class SpectralOps:
    """Precomputed wavenumber tables for one periodic spec."""

    lhat: np.ndarray        # linear symbol, real, shape = grid shape
    ik_flux: np.ndarray     # i * (sum of first-derivative symbols)
    k2: np.ndarray
    dealias: np.ndarray     # boolean keep-mask, 2/3 rule per axis
    kind: str


@lru_cache(maxsize=None)
def _spectral_ops(kind, points, extents, nu, epsilon) -> SpectralOps:
    axes_k = [2.0 * np.pi * np.fft.fftfreq(n, d=l / n) for n, l in zip(points, extents)]
    mesh = np.meshgrid(*axes_k, indexing="ij")
    k2 = sum(k * k for k in mesh)
    ik_flux = 1j * sum(mesh)
    keep = np.ones(points, dtype=bool)
    for ax, n in enumerate(points):
        idx = np.abs(np.fft.fftfreq(n, d=1.0 / n))
        cut = idx <= (n // 3)
        shape = [1] * len(points)
        shape[ax] = n
        keep &= cut.reshape(shape)
    if kind in (BURGERS1D, BURGERS2D):
        lhat = -nu * k2
    elif kind == ALLENCAHN2D:
        lhat = -epsilon * epsilon * k2
    else:
        raise NoSpectralSplitError(f"{kind} has no Fourier splitting")
    return SpectralOps(lhat=lhat, ik_flux=ik_flux, k2=k2, dealias=keep, kind=kind)


def spectral_ops(spec: PdeSpec) -> SpectralOps:
    if spec.kind not in SPECTRAL_KINDS:
        raise NoSpectralSplitError(f"{spec.kind} has no Fourier splitting")
    g = spec.grid
    return _spectral_ops(spec.kind, g.points, g.extents, spec.nu, spec.epsilon)


def nonlinear_hat(spec: PdeSpec, uhat: np.ndarray) -> np.ndarray:
    """Spectral-space nonlinear term N(u) evaluated from spectral-space u."""
    ops = spectral_ops(spec)
    ud = np.fft.ifftn(np.where(ops.dealias, uhat, 0.0)).real
    if spec.kind in (BURGERS1D, BURGERS2D):
        phat = np.fft.fftn(ud * ud)
        return -0.5 * ops.ik_flux * np.where(ops.dealias, phat, 0.0)
    # Allen-Cahn reaction -(u^3 - u); the linear +u part needs no dealiasing.
    what = np.fft.fftn(ud * ud * ud)
    return -np.where(ops.dealias, what, 0.0) + uhat


@dataclass(frozen=True)
class SplitOperator:
    """Linear Fourier symbol plus physical-space nonlinear evaluation."""

    lhat: np.ndarray
    spec: PdeSpec

    def nonlinear_eval(self, f: FieldState) -> FieldState:
        _check_field(self.spec, f)
        nhat = nonlinear_hat(self.spec, np.fft.fftn(f.values))
        return f.with_values(np.fft.ifftn(nhat).real)


def split(spec: PdeSpec) -> SplitOperator:
    return SplitOperator(lhat=spectral_ops(spec).lhat, spec=spec)


def _check_field(spec: PdeSpec, f: FieldState) -> None:
    if not f.grid.compatible(spec.grid):
        raise GridMismatchError("field grid does not match pde spec grid")


def _heat_pinned(grid: Grid) -> np.ndarray:
    pinned = np.zeros(grid.shape, dtype=bool)
    for ax in range(grid.dims):
        sl = [slice(None)] * grid.dims
        sl[ax] = 0
        pinned[tuple(sl)] = True
        sl[ax] = -1
        pinned[tuple(sl)] = True
    if grid.active is not None:
        pinned |= ~grid.active
    return pinned


@lru_cache(maxsize=None)
def _heat_pinned_cached(points, extents, periodic, mask_bytes):
    if mask_bytes is None:
        grid = Grid(points, extents, periodic)
    else:
        mask = np.frombuffer(mask_bytes, dtype=bool).reshape(points)
        grid = Grid(points, extents, periodic, active=mask)
    return _heat_pinned(grid)


def heat_pinned_mask(grid: Grid) -> np.ndarray:
    mask_bytes = None if grid.active is None else np.ascontiguousarray(grid.active).tobytes()
    return _heat_pinned_cached(grid.points, grid.extents, grid.periodic, mask_bytes)


def heat_laplacian(grid: Grid, values: np.ndarray) -> np.ndarray:
    """7-point Laplacian; pinned (boundary/masked) nodes get 0."""
    h = grid.spacing
    lap = np.zeros_like(values)
    core = (slice(1, -1),) * grid.dims
    for ax in range(grid.dims):
        lo = [slice(1, -1)] * grid.dims
        hi = [slice(1, -1)] * grid.dims
        lo[ax] = slice(0, -2)
        hi[ax] = slice(2, None)
        lap[core] += (values[tuple(hi)] - 2.0 * values[core] + values[tuple(lo)]) / h[ax] ** 2
    lap[heat_pinned_mask(grid)] = 0.0
    return lap


def rhs(spec: PdeSpec, f: FieldState) -> FieldState:
    """Evaluate the spatial operator N(u) for the given state."""
    _check_field(spec, f)
    if spec.kind == HEAT3D:
        out = spec.alpha * heat_laplacian(spec.grid, f.values)
    else:
        ops = spectral_ops(spec)
        uhat = np.fft.fftn(f.values)
        out = np.fft.ifftn(ops.lhat * uhat + nonlinear_hat(spec, uhat)).real
    if not np.all(np.isfinite(out)):
        raise NonFiniteFieldError(f"{spec.kind}: rhs evaluation produced non-finite values")
    return f.with_values(out)
