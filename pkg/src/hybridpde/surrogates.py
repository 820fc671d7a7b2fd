"""Fast autoregressive steppers that stand in for a learned operator.

Each surrogate exposes step(field) -> field advancing exactly one save
interval.  They are deliberately cheap and imperfect: accurate over short
horizons, with compounding drift over long rollouts, which is the failure
mode the gated controller corrects.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import InsufficientRankError, SurrogateDivergedError
from .grids import FieldState, Grid, grid_from_dict, grid_to_dict, prolong, restrict
from .pdes import PdeSpec, spectral_ops
from .records import RolloutRecord
from .solvers import SolverConfig, etdrk4_precompute, solver_step


def surrogate_step(surrogate, f: FieldState) -> FieldState:
    """Advance one save interval, guarding against blow-up."""
    out = surrogate.step(f)
    if not np.all(np.isfinite(out.values)):
        raise SurrogateDivergedError(f"{surrogate.descriptor}: non-finite state")
    return out


class SolverSurrogate:
    """The high-fidelity solver behind the surrogate interface (for
    degenerate-gate experiments: a 'surrogate' with zero model error)."""

    def __init__(self, spec: PdeSpec, cfg: SolverConfig):
        self.spec = spec
        self.cfg = cfg
        self.dt_save = cfg.dt_save
        self.descriptor = f"solver-wrapper({spec.kind})"

    def step(self, f: FieldState) -> FieldState:
        return solver_step(self.spec, self.cfg, f)


class CoarseSpectralSurrogate:
    """Single exponential-integrator step per save interval on a reduced
    periodic representation.

    The reduction is grid coarsening (coarsen > 1), a Galerkin truncation
    of the nonlinear interactions to modes |k| <= mode_cut (the linear part
    still acts on every mode), or both.  dissipation_scale != 1 mistunes
    the effective diffusion coefficient, the way coarse models carry
    numerical viscosity.  scheme "etd1" is exponential Euler (first order
    in the nonlinear term); "etdrk4" reuses the fourth-order machinery.
    Either way the step is one large dt_save stride on the reduced
    representation, so it is fast and accumulates truncation drift.
    """

    def __init__(self, spec: PdeSpec, dt_save: float = 0.01,
                 coarsen: int = 2, scheme: str = "etd1",
                 mode_cut: int | None = None, dissipation_scale: float = 1.0,
                 contour_points: int = 32):
        if scheme not in ("etd1", "etdrk4"):
            raise ValueError(f"unknown scheme {scheme!r}")
        if coarsen < 1:
            raise ValueError("coarsen must be >= 1")
        g = spec.grid
        if not all(g.periodic):
            raise ValueError("coarse spectral surrogate needs a periodic grid")
        if any(n % coarsen for n in g.points):
            raise ValueError("grid points must divide by the coarsening factor")
        self.fine_grid = g
        self.coarse_grid = Grid(
            points=tuple(n // coarsen for n in g.points),
            extents=g.extents,
            periodic=g.periodic,
        )
        self.spec = PdeSpec(kind=spec.kind, grid=self.coarse_grid, nu=spec.nu,
                            epsilon=spec.epsilon, alpha=spec.alpha, bc=spec.bc)
        self.dt_save = dt_save
        self.scheme = scheme
        self.mode_cut = mode_cut
        self.dissipation_scale = dissipation_scale
        self.contour_points = contour_points
        parts = [f"/{coarsen}" if coarsen > 1 else "/1"]
        if mode_cut is not None:
            parts.append(f"nl|k|<={mode_cut}")
        if dissipation_scale != 1.0:
            parts.append(f"diss*{dissipation_scale:g}")
        self.descriptor = f"coarse-spectral({spec.kind}, {','.join(parts)}, {scheme})"
        self._keep = None
        if mode_cut is not None:
            keep = np.ones(self.coarse_grid.points, dtype=bool)
            for ax, n in enumerate(self.coarse_grid.points):
                idx = np.abs(np.fft.fftfreq(n, d=1.0 / n))
                shape = [1] * len(self.coarse_grid.points)
                shape[ax] = n
                keep &= (idx <= mode_cut).reshape(shape)
            self._keep = keep
        lhat = dissipation_scale * spectral_ops(self.spec).lhat
        self._lhat = lhat
        if scheme == "etd1":
            z = dt_save * lhat
            m = contour_points
            ring = np.exp(1j * np.pi * (np.arange(1, m + 1) - 0.5) / m)
            lr = z[..., None] + ring
            self._E = np.exp(z)
            self._phi1 = dt_save * np.mean((np.exp(lr) - 1.0) / lr, axis=-1).real
        else:
            self._coeffs = etdrk4_precompute(lhat, dt_save, contour_points)

    def _nonlinear(self, vhat: np.ndarray) -> np.ndarray:
        from .pdes import nonlinear_hat

        if self._keep is None:
            return nonlinear_hat(self.spec, vhat)
        nhat = nonlinear_hat(self.spec, np.where(self._keep, vhat, 0.0))
        return np.where(self._keep, nhat, 0.0)

    def step(self, f: FieldState) -> FieldState:
        coarse = restrict(f, self.coarse_grid)
        vhat = np.fft.fftn(coarse.values)
        if self.scheme == "etd1":
            vhat = self._E * vhat + self._phi1 * self._nonlinear(vhat)
        else:
            c = self._coeffs
            Nv = self._nonlinear(vhat)
            a = c.E2 * vhat + c.Q * Nv
            Na = self._nonlinear(a)
            b = c.E2 * vhat + c.Q * Na
            Nb = self._nonlinear(b)
            cc = c.E2 * a + c.Q * (2.0 * Nb - Nv)
            Nc = self._nonlinear(cc)
            vhat = c.E * vhat + c.f1 * Nv + 2.0 * c.f2 * (Na + Nb) + c.f3 * Nc
        stepped = FieldState(self.coarse_grid, np.fft.ifftn(vhat).real, f.time + self.dt_save)
        return prolong(stepped, self.fine_grid)


class LinearMapSurrogate:
    """Reduced linear one-step map fitted to training trajectories.

    state -> mean + V A V^T (state - mean), with V the leading principal
    directions of the training snapshots and A the least-squares one-step
    map on reduced coefficients.
    """

    def __init__(self, grid: Grid, mean: np.ndarray, basis: np.ndarray,
                 amatrix: np.ndarray, dt_save: float, fit_residual: float = 0.0):
        self.grid = grid
        self.mean = np.asarray(mean, float).ravel()
        self.basis = np.asarray(basis, float)
        self.amatrix = np.asarray(amatrix, float)
        self.dt_save = dt_save
        self.fit_residual = float(fit_residual)
        m = self.amatrix.shape[0]
        if self.amatrix.shape != (m, m) or self.basis.shape[1] != m:
            raise ValueError("basis / map shapes are inconsistent")
        if self.basis.shape[0] != int(np.prod(grid.points)):
            raise ValueError("basis rows do not match the grid size")
        self.descriptor = f"linear-map(m={m})"

    @property
    def m(self) -> int:
        return self.amatrix.shape[0]

    def encode(self, f: FieldState) -> np.ndarray:
        return self.basis.T @ (f.values.ravel() - self.mean)

    def decode(self, coeffs: np.ndarray, time: float) -> FieldState:
        vals = (self.mean + self.basis @ coeffs).reshape(self.grid.shape)
        return FieldState(self.grid, vals, time)

    def step(self, f: FieldState) -> FieldState:
        return self.decode(self.amatrix @ self.encode(f), f.time + self.dt_save)


def _snapshot_matrix(trajectories) -> tuple[np.ndarray, list[int], Grid, float]:
    columns = []
    lengths = []
    grid = None
    dt = None
    for rec in trajectories:
        if isinstance(rec, RolloutRecord):
            snaps = rec.snapshots
            if not snaps:
                raise ValueError("training record carries no snapshots")
        else:
            snaps = rec
        if grid is None:
            grid = snaps[0].grid
        if len(snaps) >= 2 and dt is None:
            dt = snaps[1].time - snaps[0].time
        columns.extend(s.values.ravel() for s in snaps)
        lengths.append(len(snaps))
    if grid is None:
        raise ValueError("no training trajectories supplied")
    return np.stack(columns, axis=1), lengths, grid, float(dt if dt else 0.0)


def fit_linear_surrogate(trajectories, m: int, ridge: float = 0.0,
                         dt_save: float | None = None,
                         center: bool = True, burn_in: int = 0) -> LinearMapSurrogate:
    """Fit basis and one-step map from training rollouts.

    Needs at least two trajectories and more total snapshots than m.  Raises
    InsufficientRankError when the centred snapshots cannot support m modes.

    center=False fixes the mean field at zero, which keeps the map
    amplitude-equivariant (the right model class for linear dynamics
    through zero, like the Dirichlet heat problem).  burn_in drops that many
    leading state pairs per trajectory from the map regression: initial
    transients are high-leverage outliers there (the basis still sees every
    snapshot).  ridge is relative to the mean diagonal of the gram matrix.
    """
    if len(trajectories) < 2:
        raise ValueError("need at least two training trajectories")
    X, lengths, grid, dt_seen = _snapshot_matrix(trajectories)
    total = X.shape[1]
    if total <= m:
        raise ValueError(f"need more than m={m} snapshots, got {total}")
    mean = X.mean(axis=1) if center else np.zeros(X.shape[0])
    Xc = X - mean[:, None] if center else X
    u, s, _ = np.linalg.svd(Xc, full_matrices=False)
    if s.size < m or s[m - 1] <= max(X.shape) * np.finfo(float).eps * s[0]:
        raise InsufficientRankError(
            f"snapshot rank below requested m={m}; reduce m"
        )
    basis = u[:, :m]
    coeffs = basis.T @ Xc
    ys, yps = [], []
    offset = 0
    for length in lengths:
        block = coeffs[:, offset:offset + length]
        offset += length
        if length - burn_in >= 2:
            ys.append(block[:, burn_in:-1])
            yps.append(block[:, burn_in + 1:])
    if not ys:
        raise ValueError("burn_in leaves no state pairs to fit")
    y = np.concatenate(ys, axis=1)
    yp = np.concatenate(yps, axis=1)
    gram = y @ y.T
    if ridge > 0:
        gram = gram + ridge * (np.trace(gram) / m) * np.eye(m)
        amatrix = np.linalg.solve(gram, y @ yp.T).T
    else:
        amatrix = np.linalg.lstsq(y.T, yp.T, rcond=None)[0].T
    resid = float(np.linalg.norm(yp - amatrix @ y) / max(np.linalg.norm(yp), 1e-300))
    return LinearMapSurrogate(grid, mean, basis, amatrix,
                              dt_save if dt_save is not None else dt_seen,
                              fit_residual=resid)


# --- archives -----------------------------------------------------------------


def save_surrogate(surrogate, path_base: str) -> None:
    """Write <base>.json (+ <base>.bin for fitted maps)."""
    if isinstance(surrogate, LinearMapSurrogate):
        meta = {
            "type": "linear_map",
            "m": surrogate.m,
            "dt_save": surrogate.dt_save,
            "fit_residual": surrogate.fit_residual,
            "grid": grid_to_dict(surrogate.grid),
            "sections": {
                "mean": list(surrogate.mean.shape),
                "basis": list(surrogate.basis.shape),
                "amatrix": list(surrogate.amatrix.shape),
            },
        }
        with open(path_base + ".bin", "wb") as fh:
            for arr in (surrogate.mean, surrogate.basis, surrogate.amatrix):
                fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        with open(path_base + ".json", "w") as fh:
            json.dump(meta, fh, indent=1)
        return
    if isinstance(surrogate, CoarseSpectralSurrogate):
        meta = {
            "type": "coarse_spectral",
            "kind": surrogate.spec.kind,
            "dt_save": surrogate.dt_save,
            "scheme": surrogate.scheme,
            "coarsen": surrogate.fine_grid.points[0] // surrogate.coarse_grid.points[0],
            "mode_cut": surrogate.mode_cut,
            "dissipation_scale": surrogate.dissipation_scale,
            "nu": surrogate.spec.nu,
            "epsilon": surrogate.spec.epsilon,
            "alpha": surrogate.spec.alpha,
            "bc": surrogate.spec.bc,
            "fine_grid": grid_to_dict(surrogate.fine_grid),
        }
        with open(path_base + ".json", "w") as fh:
            json.dump(meta, fh, indent=1)
        return
    raise TypeError(f"cannot archive surrogate of type {type(surrogate).__name__}")


def load_surrogate(path_base: str):
    with open(path_base + ".json") as fh:
        meta = json.load(fh)
    if meta["type"] == "linear_map":
        grid = grid_from_dict(meta["grid"])
        shapes = meta["sections"]
        with open(path_base + ".bin", "rb") as fh:
            raw = fh.read()
        arrays = {}
        offset = 0
        for name in ("mean", "basis", "amatrix"):
            shape = tuple(shapes[name])
            count = int(np.prod(shape))
            arrays[name] = np.frombuffer(raw, dtype="<f8", count=count,
                                         offset=offset).reshape(shape).copy()
            offset += count * 8
        return LinearMapSurrogate(grid, arrays["mean"], arrays["basis"],
                                  arrays["amatrix"], meta["dt_save"],
                                  fit_residual=meta.get("fit_residual", 0.0))
    if meta["type"] == "coarse_spectral":
        grid = grid_from_dict(meta["fine_grid"])
        spec = PdeSpec(kind=meta["kind"], grid=grid, nu=meta["nu"],
                       epsilon=meta["epsilon"], alpha=meta["alpha"], bc=meta["bc"])
        return CoarseSpectralSurrogate(spec, dt_save=meta["dt_save"],
                                       coarsen=meta["coarsen"], scheme=meta["scheme"],
                                       mode_cut=meta.get("mode_cut"),
                                       dissipation_scale=meta.get("dissipation_scale", 1.0))
    raise ValueError(f"unknown surrogate archive type {meta['type']!r}")
