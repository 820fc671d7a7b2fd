"""Command-line experiment drivers.

Subcommands:
  generate       sample initial conditions and write reference trajectories
  fit-surrogate  fit/instantiate a surrogate and write its archive
  rollout        run gated rollouts from a manifest of initial conditions
  evaluate       aggregate rollout CSVs into a summary
  bench          end-to-end benchmark: generate, fit, compare, summarize

Every run writes a config echo so results can be reproduced exactly.  The
HYBRIDPDE_OUT environment variable prefixes relative output directories.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import benchmarks as bm
from .controller import compare_rollouts, hybrid_rollout
from .grids import grid_from_dict, grid_to_dict
from .metrics import pearson
from .records import RolloutRecord
from .sampling import IcSpec, sample_ic
from .solvers import solve_trajectory
from .surrogates import load_surrogate, save_surrogate

SUMMARY_SCHEMA = 1


def _out_dir(path: str) -> Path:
    root = os.environ.get("HYBRIDPDE_OUT", "")
    p = Path(path)
    if root and not p.is_absolute():
        p = Path(root) / p
    p.mkdir(parents=True, exist_ok=True)
    return p


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)


def _load_config_file(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    """Apply config-file values for flags the user left at their defaults."""
    if not getattr(args, "config", None):
        return
    with open(args.config) as fh:
        cfg = json.load(fh)
    defaults = {a.dest: a.default for a in parser._actions}
    for key, value in cfg.items():
        if not hasattr(args, key):
            raise SystemExit(f"config key {key!r} is not a known option")
        if getattr(args, key) == defaults.get(key):
            setattr(args, key, value)


def _bench_setup(args):
    bench = bm.benchmark(args.benchmark)
    overrides = {}
    for field in ("k_steps", "horizon", "test_count", "train_count"):
        val = getattr(args, field, None)
        if val is not None:
            overrides[field] = val
    if getattr(args, "a", None) is not None:
        overrides["ema_a"] = args.a
    if getattr(args, "gamma", None) is not None:
        overrides["gamma"] = args.gamma
    if overrides:
        bench = bm.with_overrides(bench, **overrides)
    grid = bm.build_grid(bench)
    spec = bm.build_spec(bench, grid)
    cfg = bm.build_solver_config(bench, spec)
    ic = bm.build_ic_spec(bench, seed=args.seed)
    return bench, grid, spec, cfg, ic


def _sample_indices(bench, split: str, count: int, start: int) -> list[int]:
    base = bm.TEST_INDEX_BASE if split == "test" else 0
    return [base + start + i for i in range(count)]


def _generate_one(payload):
    (bench, spec, cfg, ic, index, horizon, out, keep_fields) = payload
    f0 = sample_ic(ic, spec.grid, sample_index=index)
    try:
        rec = solve_trajectory(spec, cfg, f0, horizon)
    except Exception as err:
        raise RuntimeError(f"sample {index} failed: {err}") from err
    sample_dir = Path(out) / f"sample_{index:05d}"
    sample_dir.mkdir(parents=True, exist_ok=True)
    rec.to_csv(sample_dir / "trajectory.csv")
    files = []
    if keep_fields:
        files = [str(Path(p).relative_to(out))
                 for p in rec.save_snapshots(str(sample_dir))]
    return {
        "index": index,
        "dir": sample_dir.name,
        "snapshots": len(rec.snapshots),
        "files": files,
    }


def cmd_generate(args, parser) -> int:
    _load_config_file(args, parser)
    bench, grid, spec, cfg, ic = _bench_setup(args)
    horizon = args.horizon if args.horizon is not None else (
        bench.train_horizon if args.split == "train" else bench.horizon)
    out = _out_dir(args.out_dir)
    indices = _sample_indices(bench, args.split, args.count, args.start)
    tasks = [(bench, spec, cfg, ic, i, horizon, str(out), args.save_fields)
             for i in indices]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            entries = list(pool.map(_generate_one, tasks))
    else:
        entries = [_generate_one(t) for t in tasks]
    entries.sort(key=lambda e: e["index"])
    manifest = {
        "schema": SUMMARY_SCHEMA,
        "benchmark": bench.name,
        "split": args.split,
        "seed": args.seed,
        "horizon": horizon,
        "dt_save": cfg.dt_save,
        "ic_spec": asdict(ic),
        "grid": grid_to_dict(grid),
        "samples": entries,
        "config_echo": _echo(args),
    }
    _write_json(out / "manifest.json", manifest)
    print(f"generate: wrote {len(entries)} trajectories to {out}")
    return 0


def _echo(args) -> dict:
    skip = {"func", "config"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def _manifest_ics(manifest: dict):
    ic = IcSpec(**manifest["ic_spec"])
    grid = grid_from_dict(manifest["grid"])
    return ic, grid, [entry["index"] for entry in manifest["samples"]]


def cmd_fit_surrogate(args, parser) -> int:
    _load_config_file(args, parser)
    bench, grid, spec, cfg, ic = _bench_setup(args)
    out = _out_dir(args.out_dir)
    if bench.surrogate_kind == "coarse":
        surrogate = bm.build_surrogate(bench, spec, cfg)
    elif args.manifest:
        with open(args.manifest) as fh:
            manifest = json.load(fh)
        m_ic, m_grid, indices = _manifest_ics(manifest)
        records = []
        for index in indices:
            f0 = sample_ic(m_ic, m_grid, sample_index=index)
            records.append(solve_trajectory(spec, cfg, f0, manifest["horizon"]))
        from .surrogates import fit_linear_surrogate

        surrogate = fit_linear_surrogate(
            records, m=bench.linear_m, ridge=bench.linear_ridge,
            dt_save=cfg.dt_save, center=bench.linear_center,
            burn_in=bench.linear_burn_in)
    else:
        surrogate = bm.build_surrogate(bench, spec, cfg, ic)
    base = str(out / "surrogate")
    save_surrogate(surrogate, base)
    _write_json(out / "fit_config.json", _echo(args))
    print(f"fit-surrogate: {surrogate.descriptor} -> {base}.json")
    return 0


def _rollout_one(payload):
    (hcfg, ic, grid, index, save_fields, out) = payload
    f0 = sample_ic(ic, grid, sample_index=index)
    rec = hybrid_rollout(hcfg, f0)
    sample_dir = Path(out) / f"sample_{index:05d}"
    sample_dir.mkdir(parents=True, exist_ok=True)
    rec.to_csv(sample_dir / "hybrid.csv")
    if save_fields:
        rec.save_snapshots(str(sample_dir), prefix="hybrid")
    return {
        "index": index,
        "dir": sample_dir.name,
        "interventions": len(rec.interventions),
        "surrogate_fraction": rec.surrogate_fraction(),
        "final_eta": rec.eta_series[-1],
    }


def cmd_rollout(args, parser) -> int:
    _load_config_file(args, parser)
    bench, grid, spec, cfg, ic = _bench_setup(args)
    surrogate = (load_surrogate(args.surrogate_archive)
                 if args.surrogate_archive else bm.build_surrogate(bench, spec, cfg, ic))
    hcfg = bm.build_hybrid_config(bench, spec, cfg, surrogate)
    out = _out_dir(args.out_dir)
    if args.ic_manifest:
        with open(args.ic_manifest) as fh:
            manifest = json.load(fh)
        ic, grid, indices = _manifest_ics(manifest)
    else:
        indices = _sample_indices(bench, "test", args.count, args.start)
    tasks = [(hcfg, ic, grid, i, args.save_fields, str(out)) for i in indices]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            entries = list(pool.map(_rollout_one, tasks))
    else:
        entries = [_rollout_one(t) for t in tasks]
    entries.sort(key=lambda e: e["index"])
    summary = {
        "schema": SUMMARY_SCHEMA,
        "benchmark": bench.name,
        "samples": entries,
        "config_echo": _echo(args),
    }
    _write_json(out / "summary.json", summary)
    print(f"rollout: {len(entries)} rollouts -> {out}")
    return 0


def _compare_one(payload):
    (hcfg, ic, grid, index, save_fields, out) = payload
    f0 = sample_ic(ic, grid, sample_index=index)
    report = compare_rollouts(hcfg, f0, sample_index=index)
    sample_dir = Path(out) / f"sample_{index:05d}"
    sample_dir.mkdir(parents=True, exist_ok=True)
    for name, rec in report.records.items():
        rec.to_csv(sample_dir / f"{name}.csv")
        if save_fields:
            rec.save_snapshots(str(sample_dir), prefix=name)
    report.records = {}
    return report


def cmd_bench(args, parser) -> int:
    _load_config_file(args, parser)
    bench, grid, spec, cfg, ic = _bench_setup(args)
    out = _out_dir(args.out_dir)
    _write_json(out / "config.json", _echo(args))
    indices = _sample_indices(bench, "test", bench.test_count, args.start)
    if not indices:
        _write_json(out / "summary.json", {
            "schema": SUMMARY_SCHEMA, "benchmark": bench.name,
            "samples": [], "aggregate": {}, "config_echo": _echo(args)})
        print("bench: no samples requested; wrote empty summary", file=sys.stderr)
        return 0
    surrogate = bm.build_surrogate(bench, spec, cfg, ic)
    save_surrogate(surrogate, str(out / "surrogate"))
    hcfg = bm.build_hybrid_config(bench, spec, cfg, surrogate)
    manifest = {
        "schema": SUMMARY_SCHEMA,
        "benchmark": bench.name,
        "split": "test",
        "seed": args.seed,
        "horizon": bench.horizon,
        "dt_save": cfg.dt_save,
        "ic_spec": asdict(ic),
        "grid": grid_to_dict(grid),
        "samples": [{"index": i, "dir": f"sample_{i:05d}"} for i in indices],
        "config_echo": _echo(args),
    }
    _write_json(out / "manifest.json", manifest)
    tasks = [(hcfg, ic, grid, i, args.save_fields, str(out / "samples"))
             for i in indices]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(_compare_one, tasks))
    else:
        reports = [_compare_one(t) for t in tasks]
    reports.sort(key=lambda r: r.sample_index)
    summary = summarize_reports(bench.name, reports, _echo(args))
    _write_json(out / "summary.json", summary)
    agg = summary["aggregate"]
    print(f"bench[{bench.name}]: median rho={agg['median_rho_corr']:.3f} "
          f"bounded={agg['bounded_rate']:.2f} dominance={agg['dominance_rate']:.2f} "
          f"wall solver/surrogate/hybrid = {agg['solver_seconds']:.2f}/"
          f"{agg['surrogate_seconds']:.3f}/{agg['hybrid_seconds']:.2f} s")
    return 0


def summarize_reports(name: str, reports, echo: dict) -> dict:
    samples = [r.summary_dict() for r in reports]
    rhos = [r.rho_corr for r in reports if r.rho_corr is not None]
    bounded = []
    dominated = []
    for r in reports:
        if r.error_at_first_trigger is not None:
            bounded.append(r.hybrid.max_error <= 1.25 * r.error_at_first_trigger)
        dominated.append(r.hybrid.final_error < r.surrogate.final_error)
    aggregate = {
        "n_samples": len(reports),
        "median_rho_corr": float(np.median(rhos)) if rhos else None,
        "min_rho_corr": float(min(rhos)) if rhos else None,
        "bounded_rate": float(np.mean(bounded)) if bounded else None,
        "triggered_count": len(bounded),
        "dominance_rate": float(np.mean(dominated)) if dominated else None,
        "solver_seconds": float(sum(r.solver_seconds for r in reports)),
        "surrogate_seconds": float(sum(r.surrogate.wall_seconds for r in reports)),
        "hybrid_seconds": float(sum(r.hybrid.wall_seconds for r in reports)),
        "mean_surrogate_fraction": float(np.mean(
            [r.hybrid.surrogate_fraction for r in reports])),
        "intervention_counts": [r.hybrid.intervention_count for r in reports],
    }
    return {"schema": SUMMARY_SCHEMA, "benchmark": name,
            "samples": samples, "aggregate": aggregate, "config_echo": echo}


def cmd_evaluate(args, parser) -> int:
    _load_config_file(args, parser)
    out = _out_dir(args.out_dir)
    sample_dirs = sorted(Path(args.rollout_dir).glob("sample_*"))
    rows = []
    for sdir in sample_dirs:
        entry = {"dir": sdir.name}
        for kind in ("hybrid", "surrogate", "reference"):
            path = sdir / f"{kind}.csv"
            if not path.exists():
                continue
            rec = RolloutRecord.from_csv(path)
            entry[f"{kind}_steps"] = len(rec) - 1
            entry[f"{kind}_seconds"] = sum(rec.step_seconds)
            if rec.error_series is not None:
                entry[f"{kind}_final_error"] = rec.error_series[-1]
                entry[f"{kind}_max_error"] = max(rec.error_series)
                try:
                    entry[f"{kind}_rho_corr"] = pearson(
                        rec.eta_series[1:], rec.error_series[1:])
                except Exception:
                    entry[f"{kind}_rho_corr"] = None
        rows.append(entry)
    payload = {"schema": SUMMARY_SCHEMA, "samples": rows, "config_echo": _echo(args)}
    _write_json(out / "evaluation.json", payload)
    print(f"evaluate: {len(rows)} samples -> {out / 'evaluation.json'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridpde",
        description="Hybrid surrogate/solver PDE rollouts with residual-gated corrections.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--benchmark", "--pde", dest="benchmark", required=True,
                       choices=list(bm.BENCHMARK_NAMES))
        p.add_argument("--seed", type=int, default=7,
                       help="ensemble seed (7 is the reference ensemble)")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--out-dir", default="out")
        p.add_argument("--config", help="JSON config file; explicit flags win")
        p.add_argument("--save-fields", action="store_true",
                       help="also write binary snapshot files")
        p.add_argument("--k-steps", type=int, default=None)
        p.add_argument("--horizon", type=float, default=None)
        p.add_argument("--a", type=float, default=None,
                       help="estimator smoothing parameter override")
        p.add_argument("--gamma", type=float, default=None,
                       help="threshold decay rate override")

    p = sub.add_parser("generate", help="sample ICs and write solver trajectories")
    common(p)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--split", choices=("train", "test"), default="test")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("fit-surrogate", help="fit or instantiate the benchmark surrogate")
    common(p)
    p.add_argument("--manifest", help="training manifest from `generate`")
    p.add_argument("--train-count", type=int, default=None)
    p.set_defaults(func=cmd_fit_surrogate)

    p = sub.add_parser("rollout", help="gated rollouts from a manifest or fresh draws")
    common(p)
    p.add_argument("--surrogate-archive", help="archive base path (no extension)")
    p.add_argument("--ic-manifest")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--start", type=int, default=0)
    p.set_defaults(func=cmd_rollout)

    p = sub.add_parser("evaluate", help="aggregate rollout CSVs into a summary")
    p.add_argument("--rollout-dir", required=True)
    p.add_argument("--out-dir", default="out")
    p.add_argument("--config", help="JSON config file; explicit flags win")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="end-to-end benchmark run")
    common(p)
    p.add_argument("--test-count", type=int, default=None)
    p.add_argument("--train-count", type=int, default=None)
    p.add_argument("--start", type=int, default=0)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args, parser)


if __name__ == "__main__":
    sys.exit(main())
