"""Gated hybrid rollouts: surrogate-primary stepping with solver takeovers.

Each saved step is advanced by the current engine.  The gate is evaluated
before every non-committed step from the previously recorded estimate and
threshold: if eta exceeded the threshold at the last step, the solver takes
over for the next k_steps saves, after which control returns to the
surrogate (and the gate may fire again immediately).  The estimator keeps
updating through solver segments, so the estimate relaxes while the solver
is in charge.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

from .errors import (
    EstimatorCorruptError,
    SolverDivergedError,
    SurrogateDivergedError,
    UndefinedCorrelationError,
)
from .estimator import (
    EstimatorState,
    ThresholdPolicy,
    ema_update,
    residual_ratio,
    threshold_at,
)
from .grids import FieldState, u0_max
from .metrics import ComparisonReport, FrameworkResult, pearson, relative_l2
from .pdes import PdeSpec
from .records import ENGINE_INIT, ENGINE_SOLVER, ENGINE_SURROGATE, RolloutRecord
from .solvers import SolverConfig, n_save_steps, solve_trajectory, solver_step
from .surrogates import surrogate_step


@dataclass
class HybridConfig:
    """Everything a gated rollout needs besides the initial condition."""

    spec: PdeSpec
    solver_cfg: SolverConfig
    surrogate: object
    ema_a: float
    gamma: float
    k_steps: int = 10
    horizon: float = 1.0
    norm_floor: float = 1e-12
    threshold_override: Optional[float] = None
    echo: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.k_steps < 1:
            raise ValueError("k_steps must be at least 1")
        n_save_steps(self.horizon, self.solver_cfg.dt_save)


def hybrid_rollout(cfg: HybridConfig, f0: FieldState,
                   reference: RolloutRecord | None = None) -> RolloutRecord:
    """Run the gated rollout; with threshold_override=inf this is exactly a
    surrogate-only rollout (same arithmetic, gate never fires)."""
    spec = cfg.spec
    dt = cfg.solver_cfg.dt_save
    steps = n_save_steps(cfg.horizon, dt)
    policy = ThresholdPolicy(u0max=u0_max(f0), gamma=cfg.gamma)

    def gate_level(t: float) -> float:
        if cfg.threshold_override is not None:
            return cfg.threshold_override
        return threshold_at(policy, t)

    est = EstimatorState(a=cfg.ema_a, norm_floor=cfg.norm_floor)
    rec = RolloutRecord()
    ref_snaps = reference.snapshots if reference is not None else None
    if ref_snaps is not None and len(ref_snaps) < steps + 1:
        raise ValueError("reference trajectory is shorter than the rollout")

    def err_against_ref(i, f):
        if ref_snaps is None:
            return None
        return relative_l2(ref_snaps[i], f)

    rec.append(f0.time, ENGINE_INIT, 0.0, gate_level(f0.time), 0.0,
               rel_l2=err_against_ref(0, f0), snapshot=f0)

    f = f0
    solver_remaining = 0
    current_intervention = None  # [start_row, length]

    for i in range(1, steps + 1):
        if solver_remaining > 0:
            engine = ENGINE_SOLVER
            solver_remaining -= 1
        elif rec.eta_series[i - 1] > rec.threshold_series[i - 1]:
            engine = ENGINE_SOLVER
            solver_remaining = cfg.k_steps - 1
            current_intervention = [i, 0]
            rec.interventions.append(current_intervention)
        else:
            engine = ENGINE_SURROGATE

        t0 = time.perf_counter()
        if engine == ENGINE_SURROGATE:
            try:
                f_next = surrogate_step(cfg.surrogate, f)
            except SurrogateDivergedError:
                # Forced takeover: redo this step with the solver.
                engine = ENGINE_SOLVER
                solver_remaining = cfg.k_steps - 1
                current_intervention = [i, 0]
                rec.interventions.append(current_intervention)
                f_next = solver_step(spec, cfg.solver_cfg, f)
        else:
            try:
                f_next = solver_step(spec, cfg.solver_cfg, f)
            except SolverDivergedError as err:
                raise SolverDivergedError(f"hybrid rollout step {i}: {err}") from err
        seconds = time.perf_counter() - t0
        if engine == ENGINE_SOLVER and current_intervention is not None:
            current_intervention[1] += 1

        r_hat = residual_ratio(spec, f, f_next, dt, cfg.norm_floor)
        est = ema_update(est, r_hat)
        if not math.isfinite(est.eta):
            raise EstimatorCorruptError(f"estimate became non-finite at step {i}")

        f = f_next
        rec.append(f.time, engine, est.eta, gate_level(f.time), seconds,
                   rel_l2=err_against_ref(i, f), snapshot=f)
    rec.interventions = [(s, length) for s, length in rec.interventions]
    return rec


def surrogate_rollout(cfg: HybridConfig, f0: FieldState,
                      reference: RolloutRecord | None = None) -> RolloutRecord:
    """Ungated rollout of the surrogate with full estimator bookkeeping."""
    import dataclasses

    ungated = dataclasses.replace(cfg, threshold_override=float("inf"))
    return hybrid_rollout(ungated, f0, reference)


def replay_gate(rec: RolloutRecord, k_steps: int) -> list[str]:
    """Recompute engine tags from the recorded (eta, threshold) series.

    Yields the tags an exact replay of the gate would produce; divergence
    forced takeovers are the only event this cannot reconstruct.
    """
    tags = [ENGINE_INIT]
    solver_remaining = 0
    for i in range(1, len(rec.times)):
        if solver_remaining > 0:
            tags.append(ENGINE_SOLVER)
            solver_remaining -= 1
        elif rec.eta_series[i - 1] > rec.threshold_series[i - 1]:
            tags.append(ENGINE_SOLVER)
            solver_remaining = k_steps - 1
        else:
            tags.append(ENGINE_SURROGATE)
    return tags


def attach_errors(rec: RolloutRecord, reference: RolloutRecord) -> RolloutRecord:
    """Fill the rel_l2 column of a completed record against a reference
    trajectory (offline evaluation; rollouts never see the reference)."""
    if rec.snapshots is None or reference.snapshots is None:
        raise ValueError("both records need snapshots to compare")
    if len(rec.snapshots) > len(reference.snapshots):
        raise ValueError("reference trajectory is shorter than the rollout")
    rec.error_series = [
        relative_l2(ref, got)
        for ref, got in zip(reference.snapshots, rec.snapshots)
    ]
    return rec


def time_bare_rollout(surrogate, f0: FieldState, steps: int) -> float:
    """Wall seconds for an unmonitored autoregressive rollout."""
    t0 = time.perf_counter()
    f = f0
    for _ in range(steps):
        f = surrogate_step(surrogate, f)
    return time.perf_counter() - t0


def compare_rollouts(cfg: HybridConfig, f0: FieldState,
                     sample_index: int = 0) -> ComparisonReport:
    """Solver-only reference, surrogate-only, and gated rollouts from the
    same initial condition, with errors measured against the reference.

    Wall clocks are for the online work only: the bare surrogate loop, the
    bare solver trajectory, and the gated rollout including its monitoring;
    reference errors are attached afterwards.
    """
    steps = n_save_steps(cfg.horizon, cfg.solver_cfg.dt_save)

    t0 = time.perf_counter()
    reference = solve_trajectory(cfg.spec, cfg.solver_cfg, f0, cfg.horizon)
    solver_seconds = time.perf_counter() - t0

    surr_seconds = time_bare_rollout(cfg.surrogate, f0, steps)
    surr_rec = attach_errors(surrogate_rollout(cfg, f0), reference)

    t0 = time.perf_counter()
    hyb_rec = hybrid_rollout(cfg, f0)
    hyb_seconds = time.perf_counter() - t0
    attach_errors(hyb_rec, reference)

    report = ComparisonReport(
        sample_index=sample_index,
        times=list(reference.times),
        solver_seconds=solver_seconds,
        u0max=u0_max(f0),
        config_echo=dict(cfg.echo),
    )
    report.surrogate = FrameworkResult(
        name="surrogate", errors=list(surr_rec.error_series),
        wall_seconds=surr_seconds, surrogate_fraction=1.0)
    report.hybrid = FrameworkResult(
        name="hybrid", errors=list(hyb_rec.error_series),
        wall_seconds=hyb_seconds,
        surrogate_fraction=hyb_rec.surrogate_fraction(),
        intervention_count=len(hyb_rec.interventions))
    try:
        report.rho_corr = pearson(surr_rec.eta_series[1:], surr_rec.error_series[1:])
    except UndefinedCorrelationError:
        report.rho_corr = None
    try:
        report.rho_corr_hybrid = pearson(hyb_rec.eta_series[1:], hyb_rec.error_series[1:])
    except UndefinedCorrelationError:
        report.rho_corr_hybrid = None
    if hyb_rec.interventions:
        first = hyb_rec.interventions[0][0]
        report.first_trigger_step = first
        report.error_at_first_trigger = hyb_rec.error_series[first - 1]
    report.records = {"reference": reference, "surrogate": surr_rec, "hybrid": hyb_rec}
    return report
