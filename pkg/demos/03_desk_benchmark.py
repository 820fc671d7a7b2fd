"""Run a small benchmark ensemble and print the aggregate table.

Equivalent to `python -m hybridpde bench --benchmark <name> ...` but driven
through the library API so the intermediate objects are inspectable.
Pass a benchmark name and optional sample count on the command line.
"""

import sys

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

name = sys.argv[1] if len(sys.argv) > 1 else "heat3d"
count = int(sys.argv[2]) if len(sys.argv) > 2 else 5

bench = benchmark(name)
grid = build_grid(bench)
spec = build_spec(bench, grid)
solver_cfg = build_solver_config(bench, spec)
ic = hp.default_ic_spec(bench.ic_kind, seed=7)
surrogate = build_surrogate(bench, spec, solver_cfg, ic)
cfg = build_hybrid_config(bench, spec, solver_cfg, surrogate)

print(f"{name}: {count} samples, surrogate = {surrogate.descriptor}")
print("\n sample  u0max   rho    trig_t  max/trig  final_hyb  final_surr  surr%")
rows = []
for s in range(count):
    f0 = hp.sample_ic(ic, grid, sample_index=TEST_INDEX_BASE + s)
    rep = compare_rollouts(cfg, f0, sample_index=s)
    rows.append(rep)
    trig = rep.records["hybrid"].times[rep.first_trigger_step] if rep.first_trigger_step else float("nan")
    ratio = (rep.hybrid.max_error / rep.error_at_first_trigger
             if rep.error_at_first_trigger else float("nan"))
    print(f"  {s:4d}  {rep.u0max:6.3f}  {rep.rho_corr:5.3f}  {trig:5.2f}  "
          f"{ratio:8.3f}  {rep.hybrid.final_error:9.4f}  {rep.surrogate.final_error:9.4f}  "
          f"{rep.hybrid.surrogate_fraction:5.0%}")

rhos = [r.rho_corr for r in rows]
sol = sum(r.solver_seconds for r in rows)
hyb = sum(r.hybrid.wall_seconds for r in rows)
sur = sum(r.surrogate.wall_seconds for r in rows)
print(f"\nmedian rho = {np.median(rhos):.3f}; "
      f"wall solver/surrogate/hybrid = {sol:.2f}/{sur:.3f}/{hyb:.2f} s "
      f"(hybrid at {hyb / sol:.0%} of the solver)")
