"""Desk-scale acceptance suite.

Each test checks one gate of the benchmark contract at its stated
tolerance and prints a PASS line (run with -s or -rA to see them).  The
per-benchmark comparison runs are computed once per session and shared.
"""

import dataclasses
import math
import time

import numpy as np
import pytest

import hybridpde as hp
from hybridpde.benchmarks import (
    TEST_INDEX_BASE,
    benchmark,
    build_grid,
    build_hybrid_config,
    build_solver_config,
    build_spec,
    build_surrogate,
)
from hybridpde.controller import compare_rollouts, hybrid_rollout, replay_gate
from hybridpde.grids import FieldState, norm_l2
from hybridpde.records import ENGINE_SOLVER, ENGINE_SURROGATE
from hybridpde.sampling import sample_ic
from hybridpde.solvers import SolverConfig, default_solver_config, solve_trajectory
from hybridpde.surrogates import SolverSurrogate

N_SAMPLES = 10
SEED = 7          # reference desk ensemble
PDES = ("burgers1d", "burgers2d", "allencahn2d", "heat3d")

_CACHE = {}


def desk_run(name):
    """Ten-sample comparison suite for one benchmark (cached per session)."""
    if name in _CACHE:
        return _CACHE[name]
    t_start = time.perf_counter()
    b = benchmark(name)
    grid = build_grid(b)
    spec = build_spec(b, grid)
    cfg = build_solver_config(b, spec)
    ic = hp.default_ic_spec(b.ic_kind, seed=SEED)
    t0 = time.perf_counter()
    surrogate = build_surrogate(b, spec, cfg, ic)
    fit_seconds = time.perf_counter() - t0
    hcfg = build_hybrid_config(b, spec, cfg, surrogate)
    reports = []
    records = []
    for s in range(N_SAMPLES):
        f0 = sample_ic(ic, grid, sample_index=TEST_INDEX_BASE + s)
        rep = compare_rollouts(hcfg, f0, sample_index=s)
        records.append(rep.records)
        rep.records = {}
        reports.append(rep)
    out = {
        "bench": b, "cfg": cfg, "spec": spec, "grid": grid, "ic": ic,
        "hcfg": hcfg, "reports": reports, "records": records,
        "fit_seconds": fit_seconds,
        "total_seconds": time.perf_counter() - t_start,
    }
    _CACHE[name] = out
    return out


def ok(line):
    print(f"ACCEPTANCE PASS: {line}")


# --- criterion: estimator exactness -------------------------------------------


def test_estimator_exactness():
    st = hp.ema_update(hp.EstimatorState(a=1.0, eta=5.0, initialized=True), 0.2)
    assert abs(st.eta - 0.2) <= 1e-12
    st = hp.ema_update(hp.EstimatorState(a=0.5), 1.0)
    assert abs(st.eta - 0.5) <= 1e-12
    st = hp.ema_update(st, 1.0)
    assert abs(st.eta - 0.75) <= 1e-12
    pol = hp.ThresholdPolicy(u0max=1.0, gamma=2.0)
    assert abs(hp.threshold_at(pol, 0.0) - math.exp(-1.0)) <= 1e-12
    assert abs(hp.threshold_at(pol, 0.5) - math.exp(-2.0)) <= 1e-12
    assert hp.threshold_at(hp.ThresholdPolicy(u0max=0.0, gamma=2.0), 0.7) == 0.0
    ok("estimator exactness: EMA updates and threshold values to 1e-12")


# --- criterion: solver verification --------------------------------------------


def test_solver_heat_analytic_decay():
    grid = hp.Grid(points=(32, 32, 16), extents=(1.0, 1.0, 1.0),
                   periodic=(False,) * 3)
    spec = hp.PdeSpec(kind="heat3d", grid=grid, alpha=1.0, bc="dirichlet0")
    cfg = default_solver_config(spec)
    xs = grid.meshgrid()
    mode = np.sin(np.pi * xs[0]) * np.sin(np.pi * xs[1]) * np.sin(np.pi * xs[2])
    got = hp.solver_step(spec, cfg, FieldState(grid, mode))
    want = math.exp(-3 * math.pi ** 2 * 0.01) * mode
    rel = norm_l2(got.with_values(got.values - want)) / norm_l2(got.with_values(want))
    assert rel < 2e-2
    ok(f"solver verification (a): heat sine-mode decay rel L2 = {rel:.2e} < 2e-2")


def test_solver_etdrk4_convergence_order():
    b = benchmark("burgers1d")
    spec = build_spec(b, build_grid(b))
    x = spec.grid.axis_coords(0)
    f0 = FieldState(spec.grid, 0.5 * np.sin(2 * np.pi * x) + 0.25 * np.cos(4 * np.pi * x))

    def run(dt):
        return hp.solver_step(spec, SolverConfig(dt_internal=dt, dt_save=0.2), f0).values

    ref = run(0.01 / 8)
    order = np.log2(np.linalg.norm(run(0.01) - ref) / np.linalg.norm(run(0.005) - ref))
    assert 3.5 <= order <= 4.5
    ok(f"solver verification (b): ETDRK4 self-convergence order = {order:.2f} in [3.5, 4.5]")


def test_solver_burgers_mean_drift():
    run = desk_run("burgers1d")
    worst = 0.0
    for recs in run["records"][:3]:
        ref = recs["reference"]
        drift = abs(float(ref.snapshots[-1].values.mean() - ref.snapshots[0].values.mean()))
        worst = max(worst, drift)
    assert worst < 1e-8
    ok(f"solver verification (c): periodic mean drift = {worst:.2e} < 1e-8 over t in [0,1]")


# --- criterion: correlation property --------------------------------------------


@pytest.mark.parametrize("name", PDES)
def test_correlation_property(name):
    run = desk_run(name)
    rhos = [r.rho_corr for r in run["reports"]]
    assert len(rhos) >= 10
    med, lo = float(np.median(rhos)), float(min(rhos))
    assert med >= 0.9, f"{name}: median rho {med:.3f} < 0.9"
    assert lo >= 0.6, f"{name}: min rho {lo:.3f} < 0.6"
    budget = 60.0 if name == "burgers1d" else 900.0
    assert run["total_seconds"] < budget
    ok(f"correlation[{name}]: median rho = {med:.3f} >= 0.9, min = {lo:.3f} >= 0.6 "
       f"({run['total_seconds']:.0f}s < {budget:.0f}s)")


# --- criterion: boundedness and dominance ---------------------------------------


@pytest.mark.parametrize("name", PDES)
def test_boundedness_property(name):
    run = desk_run(name)
    ratios = []
    for rep in run["reports"]:
        assert rep.first_trigger_step is not None, \
            f"{name} sample {rep.sample_index}: gate never fired"
        ratios.append(rep.hybrid.max_error / rep.error_at_first_trigger)
    worst = max(ratios)
    assert worst <= 1.25, f"{name}: max/err-at-trigger {worst:.3f} > 1.25"
    dom = np.mean([r.hybrid.final_error < r.surrogate.final_error
                   for r in run["reports"]])
    assert dom >= 0.9, f"{name}: dominance rate {dom:.2f} < 0.9"
    ok(f"boundedness[{name}]: worst max/trigger ratio = {worst:.3f} <= 1.25, "
       f"dominance = {dom:.0%} >= 90%")


# --- criterion: trigger soundness ------------------------------------------------


@pytest.mark.parametrize("name", PDES)
def test_trigger_soundness(name):
    run = desk_run(name)
    k = run["bench"].k_steps
    assert k == 10
    for recs in run["records"]:
        rec = recs["hybrid"]
        assert replay_gate(rec, k) == rec.engine_tags
        for start, length in rec.interventions[:-1]:
            assert length == k
        if rec.interventions:
            start, length = rec.interventions[-1]
            assert length == min(k, len(rec.times) - start)
    ok(f"trigger soundness[{name}]: gate replay reproduces engine tags; "
       f"every intervention spans K=10 (final may truncate)")


# --- criterion: timing ordering ---------------------------------------------------


@pytest.mark.parametrize("name", ["burgers2d", "allencahn2d", "heat3d"])
def test_timing_ordering(name):
    run = desk_run(name)
    reports = run["reports"]
    surr = sum(r.surrogate.wall_seconds for r in reports)
    hyb = sum(r.hybrid.wall_seconds for r in reports)
    sol = sum(r.solver_seconds for r in reports)
    assert surr < hyb < sol, f"{name}: ordering violated {surr:.2f}/{hyb:.2f}/{sol:.2f}"
    mean_frac = float(np.mean([r.hybrid.surrogate_fraction for r in reports]))
    note = ""
    if mean_frac >= 0.5:
        assert hyb < 0.8 * sol, f"{name}: hybrid {hyb:.2f} not < 0.8 x solver {sol:.2f}"
        note = f"; hybrid/solver = {hyb / sol:.2f} < 0.8 at {mean_frac:.0%} surrogate steps"
    ok(f"timing[{name}]: surrogate {surr:.2f}s < hybrid {hyb:.2f}s < solver {sol:.2f}s{note}")


def test_per_step_surrogate_speed_contract():
    for name in ("burgers2d", "allencahn2d", "heat3d"):
        run = desk_run(name)
        steps = 100 * len(run["reports"])
        surr = sum(r.surrogate.wall_seconds for r in run["reports"]) / steps
        sol = sum(r.solver_seconds for r in run["reports"]) / steps
        assert surr < sol
    ok("surrogate speed contract: per-step surrogate < per-step solver on 2d/3d")


# --- criterion: degenerate gates ---------------------------------------------------


def test_degenerate_zero_ic():
    b = benchmark("burgers1d")
    grid = build_grid(b)
    spec = build_spec(b, grid)
    cfg = build_solver_config(b, spec)

    class Nudge:
        descriptor = "nudge"
        dt_save = cfg.dt_save

        def step(self, f):
            bump = 1e-7 * np.sin(2 * np.pi * grid.axis_coords(0))
            return f.with_values(f.values + bump, time=f.time + cfg.dt_save)

    hcfg = hp.HybridConfig(spec=spec, solver_cfg=cfg, surrogate=Nudge(),
                           ema_a=b.ema_a, gamma=b.gamma, k_steps=10, horizon=0.3)
    rec = hybrid_rollout(hcfg, FieldState(grid, np.zeros(grid.shape)))
    assert all(t == 0.0 for t in rec.threshold_series)
    assert rec.engine_tags[1] == ENGINE_SURROGATE
    assert set(rec.engine_tags[2:]) == {ENGINE_SOLVER}
    ok("degenerate gate: zero IC gives zero threshold; solver takes over on "
       "the first nonzero estimate")


@pytest.mark.parametrize("name", PDES)
def test_degenerate_self_surrogate(name):
    b = benchmark(name)
    grid = build_grid(b)
    spec = build_spec(b, grid)
    cfg = build_solver_config(b, spec)
    ic = hp.default_ic_spec(b.ic_kind, seed=SEED)
    hcfg = build_hybrid_config(b, spec, cfg, SolverSurrogate(spec, cfg))
    f0 = sample_ic(ic, grid, sample_index=TEST_INDEX_BASE)
    rec = hybrid_rollout(hcfg, f0)
    assert not rec.interventions, f"{name}: exact surrogate tripped the gate"
    assert set(rec.engine_tags[1:]) == {ENGINE_SURROGATE}
    ref = solve_trajectory(spec, cfg, f0, b.horizon)
    for a, c in zip(rec.snapshots, ref.snapshots):
        assert np.array_equal(a.values, c.values)
    ok(f"degenerate gate[{name}]: exact-solver surrogate never triggers and "
       f"matches the reference bitwise")


def test_degenerate_infinite_threshold():
    run = desk_run("burgers1d")
    hcfg = run["hcfg"]
    f0 = sample_ic(run["ic"], run["grid"], sample_index=TEST_INDEX_BASE)
    gated = hybrid_rollout(dataclasses.replace(hcfg, threshold_override=float("inf")), f0)
    bare = run["records"][0]["surrogate"]
    assert gated.engine_tags == bare.engine_tags
    for a, c in zip(gated.snapshots, bare.snapshots):
        assert np.array_equal(a.values, c.values)
    ok("degenerate gate: threshold=+inf reproduces the surrogate-only rollout bitwise")


# --- criterion: smoke-suite budget ---------------------------------------------------


def test_smoke_suite_under_budget(tmp_path):
    from hybridpde.cli import main

    t0 = time.perf_counter()
    rc = main(["bench", "--benchmark", "burgers1d", "--test-count", "5",
               "--seed", str(SEED), "--out-dir", str(tmp_path / "smoke")])
    elapsed = time.perf_counter() - t0
    assert rc == 0
    assert elapsed < 60.0
    ok(f"smoke suite: 5-sample 1d bench in {elapsed:.1f}s < 60s")
