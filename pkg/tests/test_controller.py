import dataclasses

import numpy as np
import pytest

from hybridpde.benchmarks import (
    TEST_INDEX_BASE,
    benchmark,
    build_grid,
    build_hybrid_config,
    build_solver_config,
    build_spec,
    build_surrogate,
)
from hybridpde.controller import (
    HybridConfig,
    attach_errors,
    compare_rollouts,
    hybrid_rollout,
    replay_gate,
    surrogate_rollout,
)
from hybridpde.grids import FieldState
from hybridpde.records import ENGINE_SOLVER, ENGINE_SURROGATE
from hybridpde.sampling import default_ic_spec, sample_ic
from hybridpde.solvers import solve_trajectory
from hybridpde.surrogates import SolverSurrogate, surrogate_step


def burgers_setup(seed=7, **overrides):
    b = benchmark("burgers1d")
    if overrides:
        from hybridpde.benchmarks import with_overrides

        b = with_overrides(b, **overrides)
    grid = build_grid(b)
    spec = build_spec(b, grid)
    cfg = build_solver_config(b, spec)
    ic = default_ic_spec("grf1d", seed=seed)
    sur = build_surrogate(b, spec, cfg, ic)
    return b, grid, spec, cfg, ic, sur


class NudgeSurrogate:
    """Steps by adding a fixed tiny bump: breaks the zero fixed point."""

    descriptor = "nudge"

    def __init__(self, grid, dt_save, eps=1e-6):
        self.grid = grid
        self.dt_save = dt_save
        self.eps = eps

    def step(self, f):
        bump = self.eps * np.sin(2 * np.pi * self.grid.axis_coords(0))
        return f.with_values(f.values + bump, time=f.time + self.dt_save)


def test_zero_ic_gate_fires_on_first_nonzero_eta():
    _, grid, spec, cfg, _, _ = burgers_setup()
    f0 = FieldState(grid, np.zeros(grid.shape))
    hcfg = HybridConfig(spec=spec, solver_cfg=cfg,
                        surrogate=NudgeSurrogate(grid, cfg.dt_save),
                        ema_a=0.1, gamma=2.0, k_steps=10, horizon=0.5)
    rec = hybrid_rollout(hcfg, f0)
    # u0max = 0 so the threshold is identically zero; eta turns positive at
    # step 1, and the strict > gate then keeps the solver in charge forever
    assert all(th == 0.0 for th in rec.threshold_series)
    assert rec.engine_tags[1] == ENGINE_SURROGATE
    assert rec.eta_series[1] > 0.0
    assert set(rec.engine_tags[2:]) == {ENGINE_SOLVER}


def test_infinite_threshold_equals_bare_surrogate_rollout():
    _, grid, spec, cfg, ic, sur = burgers_setup()
    f0 = sample_ic(ic, grid, sample_index=TEST_INDEX_BASE)
    hcfg = build_hybrid_config(benchmark("burgers1d"), spec, cfg, sur)
    gated = hybrid_rollout(dataclasses.replace(hcfg, threshold_override=float("inf")), f0)
    assert set(gated.engine_tags[1:]) == {ENGINE_SURROGATE}
    f = f0
    for i in range(1, len(gated.snapshots)):
        f = surrogate_step(sur, f)
        assert np.array_equal(gated.snapshots[i].values, f.values)
    assert np.array_equal(
        np.asarray(surrogate_rollout(hcfg, f0).eta_series),
        np.asarray(gated.eta_series))


def test_eta_initialization_at_first_step():
    from hybridpde.estimator import residual_ratio

    _, grid, spec, cfg, ic, sur = burgers_setup()
    f0 = sample_ic(ic, grid, sample_index=TEST_INDEX_BASE)
    hcfg = build_hybrid_config(benchmark("burgers1d"), spec, cfg, sur)
    rec = hybrid_rollout(hcfg, f0)
    f1 = surrogate_step(sur, f0)
    r1 = residual_ratio(spec, f0, f1, cfg.dt_save)
    assert rec.eta_series[0] == 0.0
    assert rec.eta_series[1] == pytest.approx(hcfg.ema_a * r1, rel=1e-12)


def test_gate_replay_and_intervention_shape():
    b, grid, spec, cfg, ic, sur = burgers_setup()
    hcfg = build_hybrid_config(b, spec, cfg, sur)
    f0 = sample_ic(ic, grid, sample_index=TEST_INDEX_BASE + 1)
    rec = hybrid_rollout(hcfg, f0)
    assert rec.interventions, "benchmark sample should trigger"
    assert replay_gate(rec, hcfg.k_steps) == rec.engine_tags
    for start, length in rec.interventions[:-1]:
        assert length == hcfg.k_steps
    last_start, last_len = rec.interventions[-1]
    assert last_len == min(hcfg.k_steps, len(rec.times) - last_start)
    # every maximal solver run is a chain of committed interventions
    for start, length in rec.solver_runs():
        if start + length < len(rec.times):
            assert length % hcfg.k_steps == 0


def test_trigger_soundness_from_recorded_series():
    b, grid, spec, cfg, ic, sur = burgers_setup(seed=11)
    hcfg = build_hybrid_config(b, spec, cfg, sur)
    f0 = sample_ic(ic, grid, sample_index=TEST_INDEX_BASE + 2)
    rec = hybrid_rollout(hcfg, f0)
    committed = 0
    for i in range(1, len(rec.times)):
        fired = rec.eta_series[i - 1] > rec.threshold_series[i - 1]
        if committed > 0:
            assert rec.engine_tags[i] == ENGINE_SOLVER
            committed -= 1
        elif fired:
            assert rec.engine_tags[i] == ENGINE_SOLVER
            committed = hcfg.k_steps - 1
        else:
            assert rec.engine_tags[i] == ENGINE_SURROGATE


def test_forced_takeover_on_surrogate_divergence():
    class DivergeAt:
        descriptor = "diverge-at"

        def __init__(self, inner, at_step):
            self.inner = inner
            self.dt_save = inner.dt_save
            self.at = at_step
            self.calls = 0

        def step(self, f):
            self.calls += 1
            out = self.inner.step(f)
            if self.calls == self.at:
                return out.with_values(np.full(out.grid.shape, np.inf))
            return out

    b, grid, spec, cfg, ic, sur = burgers_setup()
    hcfg = build_hybrid_config(b, spec, cfg, DivergeAt(sur, at_step=5))
    f0 = sample_ic(ic, grid, sample_index=TEST_INDEX_BASE + 3)
    rec = hybrid_rollout(hcfg, f0)
    assert rec.engine_tags[5] == ENGINE_SOLVER
    assert (5, 10) in [tuple(iv) for iv in rec.interventions]
    assert np.all(np.isfinite(rec.snapshots[-1].values))


def test_rollout_determinism_bitwise():
    b, grid, spec, cfg, ic, sur = burgers_setup()
    hcfg = build_hybrid_config(b, spec, cfg, sur)
    f0 = sample_ic(ic, grid, sample_index=TEST_INDEX_BASE + 4)
    a = hybrid_rollout(hcfg, f0)
    c = hybrid_rollout(hcfg, f0)
    assert a.engine_tags == c.engine_tags
    assert np.array_equal(np.asarray(a.eta_series), np.asarray(c.eta_series))
    for sa, sc in zip(a.snapshots, c.snapshots):
        assert np.array_equal(sa.values, sc.values)


def test_zero_ic_comparison_all_zero():
    b, grid, spec, cfg, ic, sur = burgers_setup()
    hcfg = dataclasses.replace(build_hybrid_config(b, spec, cfg, sur), horizon=0.1)
    f0 = FieldState(grid, np.zeros(grid.shape))
    rep = compare_rollouts(hcfg, f0)
    assert rep.surrogate.errors == [0.0] * 11
    assert rep.hybrid.errors == [0.0] * 11


def test_self_surrogate_never_triggers_and_zero_error():
    b, grid, spec, cfg, ic, _ = burgers_setup()
    hcfg = build_hybrid_config(b, spec, cfg, SolverSurrogate(spec, cfg))
    f0 = sample_ic(ic, grid, sample_index=TEST_INDEX_BASE)
    rep = compare_rollouts(hcfg, f0)
    assert rep.hybrid.intervention_count == 0
    assert max(rep.hybrid.errors) == 0.0
    assert max(rep.surrogate.errors) == 0.0


def test_attach_errors_requires_snapshots():
    b, grid, spec, cfg, ic, sur = burgers_setup()
    hcfg = dataclasses.replace(build_hybrid_config(b, spec, cfg, sur), horizon=0.05)
    f0 = sample_ic(ic, grid, sample_index=TEST_INDEX_BASE)
    rec = hybrid_rollout(hcfg, f0)
    short_ref = solve_trajectory(spec, cfg, f0, 0.02)
    with pytest.raises(ValueError):
        attach_errors(rec, short_ref)
