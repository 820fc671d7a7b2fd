"""Walk one benchmark sample through all three frameworks.

Runs the high-fidelity reference, the bare surrogate rollout, and the
gated hybrid rollout from the same initial condition, then prints how the
errors and the online estimate evolved.
"""

import numpy as np

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
from hybridpde.controller import compare_rollouts

BENCH = "burgers1d"

bench = benchmark(BENCH)
grid = build_grid(bench)
spec = build_spec(bench, grid)
solver_cfg = build_solver_config(bench, spec)
ic = hp.default_ic_spec(bench.ic_kind, seed=7)

print(f"benchmark: {BENCH}  grid={grid.points}  dt_save={solver_cfg.dt_save}  "
      f"substeps={solver_cfg.substeps}")

surrogate = build_surrogate(bench, spec, solver_cfg, ic)
print(f"surrogate: {surrogate.descriptor}")

cfg = build_hybrid_config(bench, spec, solver_cfg, surrogate)
f0 = hp.sample_ic(ic, grid, sample_index=TEST_INDEX_BASE)
print(f"initial condition: |u0|_max = {hp.u0_max(f0):.3f}")

report = compare_rollouts(cfg, f0)
hyb = report.records["hybrid"]

print(f"\nfirst trigger at t = {hyb.times[report.first_trigger_step]:.2f} "
      f"(rel error there: {report.error_at_first_trigger:.4f})")
print(f"interventions: {len(hyb.interventions)}, "
      f"surrogate handled {report.hybrid.surrogate_fraction:.0%} of steps")
print(f"estimator-vs-error correlation (surrogate-only): {report.rho_corr:.3f}")

print("\n   t    engine  estimate  threshold  rel_err(hybrid)  rel_err(surr-only)")
surr_err = report.surrogate.errors
for i in range(0, 101, 10):
    print(f"  {hyb.times[i]:.2f}  {hyb.engine_tags[i]:>9s}  {hyb.eta_series[i]:8.4f} "
          f"{hyb.threshold_series[i]:10.4f}  {report.hybrid.errors[i]:14.4f} "
          f"{surr_err[i]:14.4f}")

print(f"\nwall clocks: solver {report.solver_seconds:.2f}s | "
      f"surrogate {report.surrogate.wall_seconds:.3f}s | "
      f"hybrid {report.hybrid.wall_seconds:.2f}s")
print(f"final errors: hybrid {report.hybrid.final_error:.4f} vs "
      f"surrogate-only {report.surrogate.final_error:.4f}")
