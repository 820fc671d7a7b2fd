"""Online error monitoring for autoregressive rollouts.

The monitor tracks an exponential moving average of the normalized PDE
residual of consecutive states and compares it against a time-decaying
trigger level.  Nothing here needs a reference solution: the residual is
computable from the rollout itself, which is what makes the gate usable
during inference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import TrajectoryGapError
from .grids import FieldState, norm_l2
from .pdes import PdeSpec, rhs

NORM_FLOOR_DEFAULT = 1e-12


@dataclass(frozen=True)
class EstimatorState:
    """EMA of the normalized residual.

    The first update seeds the average as a * r_hat (so the estimate ramps
    up from zero weight on no history); afterwards
    eta <- a * r_hat + (1 - a) * eta.
    """

    a: float
    eta: float = 0.0
    initialized: bool = False
    norm_floor: float = NORM_FLOOR_DEFAULT

    def __post_init__(self):
        if not 0.0 < self.a <= 1.0:
            raise ValueError("smoothing parameter a must lie in (0, 1]")
        if self.norm_floor <= 0:
            raise ValueError("norm_floor must be positive")
        if not (np.isfinite(self.eta) and self.eta >= 0):
            raise ValueError("eta must be finite and non-negative")


def ema_update(state: EstimatorState, r_hat: float) -> EstimatorState:
    if not (np.isfinite(r_hat) and r_hat >= 0):
        raise ValueError(f"r_hat must be finite and non-negative, got {r_hat!r}")
    if not state.initialized:
        return replace(state, eta=state.a * r_hat, initialized=True)
    return replace(state, eta=state.a * r_hat + (1.0 - state.a) * state.eta)


@dataclass(frozen=True)
class ThresholdPolicy:
    """Decaying trigger level u0max * exp(-gamma t) * exp(-u0max).

    u0max is the peak magnitude of the initial condition; the decay keeps
    the gate sensitive while the solution amplitude shrinks.
    """

    u0max: float
    gamma: float

    def __post_init__(self):
        if self.u0max < 0:
            raise ValueError("u0max must be non-negative")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")


def threshold_at(policy: ThresholdPolicy, t: float) -> float:
    if t < 0:
        raise ValueError("threshold evaluated at negative time")
    return policy.u0max * math.exp(-policy.gamma * t) * math.exp(-policy.u0max)


def pde_residual(spec: PdeSpec, f_prev: FieldState, f_curr: FieldState,
                 dt: float) -> FieldState:
    """Backward-difference residual r = (u^t - u^{t-1}) / dt - N(u^t)."""
    if dt <= 0:
        raise TrajectoryGapError("dt must be positive")
    if not f_prev.grid.compatible(f_curr.grid):
        raise TrajectoryGapError("residual states live on different grids")
    if abs((f_prev.time + dt) - f_curr.time) > 1e-9 * max(dt, 1.0):
        raise TrajectoryGapError(
            f"states are not dt apart: {f_prev.time} + {dt} != {f_curr.time}"
        )
    du_dt = (f_curr.values - f_prev.values) / dt
    return f_curr.with_values(du_dt - rhs(spec, f_curr).values)


def normalized_residual(r: FieldState, u: FieldState,
                        floor: float = NORM_FLOOR_DEFAULT) -> float:
    """||r|| / max(||u||, floor); the floor guards deep-decay states."""
    if not r.grid.compatible(u.grid):
        raise TrajectoryGapError("residual and state grids differ")
    return norm_l2(r) / max(norm_l2(u), floor)


def residual_ratio(spec: PdeSpec, f_prev: FieldState, f_curr: FieldState,
                   dt: float, floor: float = NORM_FLOOR_DEFAULT) -> float:
    """normalized_residual(pde_residual(...), f_curr) without intermediate
    field containers; used in rollout hot loops.  Identical arithmetic."""
    from .pdes import HEAT3D, heat_laplacian, nonlinear_hat, spectral_ops

    prev = f_prev.values
    curr = f_curr.values
    if spec.kind == HEAT3D:
        rhs_vals = spec.alpha * heat_laplacian(spec.grid, curr)
    else:
        ops = spectral_ops(spec)
        uhat = np.fft.fftn(curr)
        rhs_vals = np.fft.ifftn(ops.lhat * uhat + nonlinear_hat(spec, uhat)).real
    # Inactive cells hold exact zeros in states and rhs, so full-array
    # norms equal active-cell norms here.
    resid = (curr - prev) / dt - rhs_vals
    r_norm = float(np.sqrt(np.sum(resid * resid)))
    u_norm = float(np.sqrt(np.sum(curr * curr)))
    if not (np.isfinite(r_norm) and np.isfinite(u_norm)):
        raise TrajectoryGapError("non-finite state in residual evaluation")
    return r_norm / max(u_norm, floor)
