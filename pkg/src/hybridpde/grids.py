"""Structured grids, field containers, and transfer operators.

Everything here is geometry bookkeeping shared by the solvers, the
surrogates, and the residual estimator.  Grids are uniform per axis, with
an optional boolean activity mask for non-rectangular domains (inactive
nodes are held at exactly zero by every operation).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyDomainError, GridMismatchError, NonFiniteFieldError


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform structured grid on a box [0, L1] x ... x [0, Ld].

    points: nodes per axis.
    extents: box side length per axis.
    periodic: periodicity flag per axis.  Spacing is L/n on periodic axes
        (no duplicated endpoint) and L/(n-1) otherwise.
    active: optional boolean mask marking nodes that belong to the domain;
        None means the full box.
    """

    points: tuple[int, ...]
    extents: tuple[float, ...]
    periodic: tuple[bool, ...]
    active: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if not (len(self.points) == len(self.extents) == len(self.periodic)):
            raise GridMismatchError("points/extents/periodic lengths differ")
        if any(n < 2 for n in self.points):
            raise GridMismatchError("need at least 2 nodes per axis")
        if any(l <= 0 for l in self.extents):
            raise GridMismatchError("extents must be positive")
        if self.active is not None:
            mask = np.asarray(self.active, bool)
            if mask.shape != self.points:
                raise GridMismatchError("active mask shape does not match grid")
            if not mask.any():
                raise EmptyDomainError("active mask has no active nodes")
            mask.flags.writeable = False
            object.__setattr__(self, "active", mask)

    @property
    def dims(self) -> int:
        return len(self.points)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(
            l / n if per else l / (n - 1)
            for n, l, per in zip(self.points, self.extents, self.periodic)
        )

    def axis_coords(self, axis: int) -> np.ndarray:
        n, l, per = self.points[axis], self.extents[axis], self.periodic[axis]
        if per:
            return np.arange(n) * (l / n)
        return np.linspace(0.0, l, n)

    def meshgrid(self) -> list[np.ndarray]:
        return list(np.meshgrid(*(self.axis_coords(i) for i in range(self.dims)), indexing="ij"))

    def compatible(self, other: "Grid") -> bool:
        if self.points != other.points or self.periodic != other.periodic:
            return False
        if any(abs(a - b) > 1e-12 * max(a, b) for a, b in zip(self.extents, other.extents)):
            return False
        if (self.active is None) != (other.active is None):
            return False
        if self.active is not None and not np.array_equal(self.active, other.active):
            return False
        return True

    def __eq__(self, other):
        return isinstance(other, Grid) and self.compatible(other)


@dataclass(frozen=True, eq=False)
class FieldState:
    """A scalar field sampled on a grid at one physical time."""

    grid: Grid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise GridMismatchError(
                f"values shape {vals.shape} does not match grid {self.grid.shape}"
            )
        if self.grid.active is not None:
            vals = np.where(self.grid.active, vals, 0.0)
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "time", float(self.time))

    def with_values(self, values: np.ndarray, time: float | None = None) -> "FieldState":
        return FieldState(self.grid, values, self.time if time is None else time)

    def active_values(self) -> np.ndarray:
        if self.grid.active is None:
            return self.values.ravel()
        return self.values[self.grid.active]


def norm_l2(f: FieldState) -> float:
    """Unweighted discrete l2 norm over active nodes.

    All downstream uses are ratios of norms on one grid, so no mesh
    weighting is applied.
    """
    vals = f.active_values()
    if not np.all(np.isfinite(vals)):
        raise NonFiniteFieldError("field has non-finite active values")
    return float(np.sqrt(np.dot(vals, vals)))


def u0_max(f: FieldState) -> float:
    """Maximum absolute field value over active nodes."""
    vals = f.active_values()
    if vals.size == 0:
        raise EmptyDomainError("no active nodes")
    if not np.all(np.isfinite(vals)):
        raise NonFiniteFieldError("field has non-finite active values")
    return float(np.max(np.abs(vals)))


def _axis_stride(n_fine: int, n_coarse: int, periodic: bool) -> int:
    if periodic:
        if n_fine % n_coarse:
            raise GridMismatchError(
                f"coarse axis {n_coarse} does not divide fine axis {n_fine}"
            )
        return n_fine // n_coarse
    if (n_fine - 1) % (n_coarse - 1):
        raise GridMismatchError(
            f"coarse nodes {n_coarse} do not align with fine nodes {n_fine}"
        )
    return (n_fine - 1) // (n_coarse - 1)


def restrict(f: FieldState, coarse: Grid) -> FieldState:
    """Injection sampling onto a coarser, node-aligned grid."""
    g = f.grid
    if g.dims != coarse.dims or g.periodic != coarse.periodic:
        raise GridMismatchError("restrict: incompatible dimensions or periodicity")
    if any(abs(a - b) > 1e-12 * max(a, b) for a, b in zip(g.extents, coarse.extents)):
        raise GridMismatchError("restrict: extents differ")
    slices = tuple(
        slice(None, None, _axis_stride(nf, nc, per))
        for nf, nc, per in zip(g.points, coarse.points, g.periodic)
    )
    return FieldState(coarse, f.values[slices], f.time)


def _pad_spectrum_axis(spec: np.ndarray, axis: int, n_fine: int) -> np.ndarray:
    n_c = spec.shape[axis]
    if n_fine == n_c:
        return spec
    shape = list(spec.shape)
    shape[axis] = n_fine
    out = np.zeros(shape, dtype=complex)
    kmax = (n_c - 1) // 2

    def idx(lo, hi):
        s = [slice(None)] * spec.ndim
        s[axis] = slice(lo, hi)
        return tuple(s)

    out[idx(0, kmax + 1)] = spec[idx(0, kmax + 1)]
    if kmax:
        out[idx(n_fine - kmax, n_fine)] = spec[idx(n_c - kmax, n_c)]
    if n_c % 2 == 0:
        # Split the Nyquist bin symmetrically so real fields stay real.
        ny = [slice(None)] * spec.ndim
        ny[axis] = n_c // 2
        half = 0.5 * spec[tuple(ny)]
        lo = list(ny)
        lo[axis] = n_c // 2
        hi = list(ny)
        hi[axis] = n_fine - n_c // 2
        out[tuple(lo)] = half
        out[tuple(hi)] = half
    return out


def prolong(f: FieldState, fine: Grid) -> FieldState:
    """Interpolate onto a finer grid.

    Fully periodic grids use Fourier zero-padding (exact for resolved
    modes); otherwise multilinear interpolation.
    """
    g = f.grid
    if g.dims != fine.dims or g.periodic != fine.periodic:
        raise GridMismatchError("prolong: incompatible dimensions or periodicity")
    if any(abs(a - b) > 1e-12 * max(a, b) for a, b in zip(g.extents, fine.extents)):
        raise GridMismatchError("prolong: extents differ")
    for nf, nc, per in zip(fine.points, g.points, g.periodic):
        _axis_stride(nf, nc, per)
    if g.points == fine.points:
        return FieldState(fine, f.values, f.time)

    if all(g.periodic):
        spec = np.fft.fftn(f.values)
        for ax in range(g.dims):
            spec = _pad_spectrum_axis(spec, ax, fine.points[ax])
        scale = np.prod([nf / nc for nf, nc in zip(fine.points, g.points)])
        vals = np.fft.ifftn(spec).real * scale
        return FieldState(fine, vals, f.time)

    from scipy.interpolate import RegularGridInterpolator

    interp = RegularGridInterpolator(
        tuple(g.axis_coords(i) for i in range(g.dims)), f.values, method="linear"
    )
    mesh = fine.meshgrid()
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    vals = interp(pts).reshape(fine.shape)
    return FieldState(fine, vals, f.time)


def grid_to_dict(grid: Grid) -> dict:
    out = {
        "points": list(grid.points),
        "extents": list(grid.extents),
        "periodic": list(grid.periodic),
    }
    if grid.active is not None:
        out["active_packed_hex"] = np.packbits(grid.active.ravel()).tobytes().hex()
    return out


def grid_from_dict(d: dict) -> Grid:
    active = None
    if "active_packed_hex" in d:
        points = tuple(d["points"])
        n = int(np.prod(points))
        bits = np.unpackbits(np.frombuffer(bytes.fromhex(d["active_packed_hex"]), dtype=np.uint8))
        active = bits[:n].astype(bool).reshape(points)
    return Grid(
        points=tuple(int(p) for p in d["points"]),
        extents=tuple(float(e) for e in d["extents"]),
        periodic=tuple(bool(p) for p in d["periodic"]),
        active=active,
    )


# --- flat snapshot files -----------------------------------------------------
#
# 64-byte ASCII header: magic, dims, comma-joined shape, time as C99 hex
# float; then the field as little-endian float64 in C order.

_MAGIC = "FPSNAP01"
_HEADER_LEN = 64


def save_field(f: FieldState, path) -> None:
    shape = ",".join(str(n) for n in f.grid.shape)
    header = f"{_MAGIC} {f.grid.dims} {shape} {float(f.time).hex()}"
    raw = header.encode("ascii")
    if len(raw) > _HEADER_LEN - 1:
        raise ValueError("snapshot header overflow")
    raw = raw.ljust(_HEADER_LEN - 1) + b"\n"
    with open(path, "wb") as fh:
        fh.write(raw)
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def read_field_raw(path) -> tuple[np.ndarray, float]:
    """Read a snapshot file without grid metadata."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER_LEN).decode("ascii")
        parts = header.split()
        if not parts or parts[0] != _MAGIC:
            raise ValueError(f"not a snapshot file: {path}")
        dims = int(parts[1])
        shape = tuple(int(s) for s in parts[2].split(","))
        if len(shape) != dims:
            raise ValueError(f"corrupt snapshot header: {path}")
        time = float.fromhex(parts[3])
        vals = np.frombuffer(fh.read(), dtype="<f8").reshape(shape)
    return vals.astype(float), time


def load_field(path, grid: Grid) -> FieldState:
    vals, time = read_field_raw(path)
    if vals.shape != grid.shape:
        raise GridMismatchError(f"snapshot shape {vals.shape} != grid {grid.shape}")
    return FieldState(grid, vals, time)
