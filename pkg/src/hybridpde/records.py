"""Per-rollout trajectory records and their CSV serialization."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .grids import FieldState, save_field

ENGINE_INIT = "init"
ENGINE_SURROGATE = "surrogate"
ENGINE_SOLVER = "solver"

CSV_COLUMNS = ["step", "time", "engine", "eta", "threshold", "rel_l2", "step_seconds"]


@dataclass
class RolloutRecord:
    """Everything recorded about one rollout, one row per saved state.

    Row 0 is the initial condition (engine tag "init", eta 0); row i >= 1
    describes the step that produced snapshot i.  `interventions` lists
    (start_row, length) for each solver takeover that was scheduled;
    back-to-back takeovers appear as separate entries even though their
    engine tags merge into one run.
    """

    times: list[float] = field(default_factory=list)
    engine_tags: list[str] = field(default_factory=list)
    eta_series: list[float] = field(default_factory=list)
    threshold_series: list[float] = field(default_factory=list)
    error_series: list[float] | None = None
    step_seconds: list[float] = field(default_factory=list)
    snapshots: list[FieldState] | None = None
    interventions: list[tuple[int, int]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.times)

    def append(self, time, engine, eta, threshold, seconds, rel_l2=None, snapshot=None):
        self.times.append(float(time))
        self.engine_tags.append(engine)
        self.eta_series.append(float(eta))
        self.threshold_series.append(float(threshold))
        self.step_seconds.append(float(seconds))
        if rel_l2 is not None:
            if self.error_series is None:
                self.error_series = []
            self.error_series.append(float(rel_l2))
        if snapshot is not None:
            if self.snapshots is None:
                self.snapshots = []
            self.snapshots.append(snapshot)

    def validate_lengths(self) -> None:
        n = len(self.times)
        lengths = [len(self.engine_tags), len(self.eta_series),
                   len(self.threshold_series), len(self.step_seconds)]
        if self.error_series is not None:
            lengths.append(len(self.error_series))
        if self.snapshots is not None:
            lengths.append(len(self.snapshots))
        if any(m != n for m in lengths):
            raise ValueError(f"inconsistent record series lengths: {lengths} vs {n}")

    def solver_runs(self) -> list[tuple[int, int]]:
        """Maximal runs of consecutive solver-tagged rows as (start, length)."""
        runs = []
        start = None
        for i, tag in enumerate(self.engine_tags):
            if tag == ENGINE_SOLVER:
                if start is None:
                    start = i
            elif start is not None:
                runs.append((start, i - start))
                start = None
        if start is not None:
            runs.append((start, len(self.engine_tags) - start))
        return runs

    def surrogate_fraction(self) -> float:
        steps = [t for t in self.engine_tags if t != ENGINE_INIT]
        if not steps:
            return 0.0
        return sum(t == ENGINE_SURROGATE for t in steps) / len(steps)

    def to_csv(self, path) -> None:
        self.validate_lengths()
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for i in range(len(self)):
                err = "" if self.error_series is None else repr(self.error_series[i])
                writer.writerow([
                    i,
                    repr(self.times[i]),
                    self.engine_tags[i],
                    repr(self.eta_series[i]),
                    repr(self.threshold_series[i]),
                    err,
                    repr(self.step_seconds[i]),
                ])

    @classmethod
    def from_csv(cls, path) -> "RolloutRecord":
        rec = cls()
        errors: list[float] = []
        has_errors = False
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != CSV_COLUMNS:
                raise ValueError(f"unexpected rollout CSV columns: {reader.fieldnames}")
            for row in reader:
                rec.times.append(float(row["time"]))
                rec.engine_tags.append(row["engine"])
                rec.eta_series.append(float(row["eta"]))
                rec.threshold_series.append(float(row["threshold"]))
                rec.step_seconds.append(float(row["step_seconds"]))
                if row["rel_l2"]:
                    has_errors = True
                    errors.append(float(row["rel_l2"]))
        if has_errors:
            if len(errors) != len(rec.times):
                raise ValueError("rel_l2 column is partially filled")
            rec.error_series = errors
        return rec

    def save_snapshots(self, directory, prefix="snap") -> list[str]:
        if self.snapshots is None:
            raise ValueError("record carries no snapshots")
        paths = []
        for i, snap in enumerate(self.snapshots):
            path = f"{directory}/{prefix}_{i:05d}.fld"
            save_field(snap, path)
            paths.append(path)
        return paths


def engine_array(rec: RolloutRecord) -> np.ndarray:
    return np.asarray(rec.engine_tags, dtype=object)
