"""Evaluation metrics and timing capture."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateReferenceError, UndefinedCorrelationError
from .grids import FieldState, norm_l2


def relative_l2(truth: FieldState, pred: FieldState) -> float:
    """||truth - pred|| / ||truth||; 0 when both fields are identically zero."""
    if not truth.grid.compatible(pred.grid):
        raise DegenerateReferenceError("truth and prediction grids differ")
    denom = norm_l2(truth)
    diff = norm_l2(truth.with_values(truth.values - pred.values))
    if denom == 0.0:
        if diff == 0.0:
            return 0.0
        raise DegenerateReferenceError("reference is identically zero but prediction is not")
    return diff / denom


def pearson(x, y) -> float:
    """Sample Pearson correlation coefficient of two equal-length series."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != ya.shape or xa.ndim != 1 or xa.size < 2:
        raise ValueError("pearson needs two 1d series of equal length >= 2")
    xc = xa - xa.mean()
    yc = ya - ya.mean()
    sx = float(np.dot(xc, xc))
    sy = float(np.dot(yc, yc))
    if sx == 0.0 or sy == 0.0:
        raise UndefinedCorrelationError("constant series has no correlation")
    r = float(np.dot(xc, yc) / np.sqrt(sx * sy))
    return min(1.0, max(-1.0, r))


def time_block(label: str, thunk):
    """Run thunk(), returning (result, wall_seconds on the monotonic clock)."""
    t0 = time.perf_counter()
    result = thunk()
    seconds = time.perf_counter() - t0
    return result, seconds


@dataclass
class FrameworkResult:
    """One framework's rollout against the shared reference."""

    name: str
    errors: list[float]
    wall_seconds: float
    surrogate_fraction: float = 1.0
    intervention_count: int = 0

    @property
    def final_error(self) -> float:
        return self.errors[-1]

    @property
    def max_error(self) -> float:
        return max(self.errors)


@dataclass
class ComparisonReport:
    """Side-by-side rollouts from one initial condition.

    rho_corr is measured on the surrogate-only companion (estimator vs true
    error, no interventions); rho_corr_hybrid is the same diagnostic on the
    gated rollout.
    """

    sample_index: int
    times: list[float]
    solver_seconds: float
    surrogate: FrameworkResult | None = None
    hybrid: FrameworkResult | None = None
    rho_corr: float | None = None
    rho_corr_hybrid: float | None = None
    u0max: float = 0.0
    first_trigger_step: int | None = None
    error_at_first_trigger: float | None = None
    config_echo: dict = field(default_factory=dict)
    records: dict = field(default_factory=dict)

    def summary_dict(self) -> dict:
        out = {
            "sample": self.sample_index,
            "u0max": self.u0max,
            "solver_seconds": self.solver_seconds,
            "rho_corr": self.rho_corr,
            "rho_corr_hybrid": self.rho_corr_hybrid,
            "first_trigger_step": self.first_trigger_step,
            "error_at_first_trigger": self.error_at_first_trigger,
        }
        for res in (self.surrogate, self.hybrid):
            if res is None:
                continue
            out[f"{res.name}_seconds"] = res.wall_seconds
            out[f"{res.name}_final_error"] = res.final_error
            out[f"{res.name}_max_error"] = res.max_error
        if self.hybrid is not None:
            out["hybrid_surrogate_fraction"] = self.hybrid.surrogate_fraction
            out["hybrid_interventions"] = self.hybrid.intervention_count
        return out
