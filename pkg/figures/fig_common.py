"""Shared readers for the experiment file formats.

Everything here parses the on-disk outputs (rollout CSVs, summary JSON,
flat snapshot files) directly; nothing imports the simulation package.
"""

import csv
import json
import pathlib

import numpy as np

SNAPSHOT_MAGIC = "FPSNAP01"
HEADER_LEN = 64


def read_rollout_csv(path):
    """Rollout CSV -> dict of column arrays (rel_l2 is None when blank)."""
    times, engine, eta, threshold, rel, secs = [], [], [], [], [], []
    has_rel = False
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            times.append(float(row["time"]))
            engine.append(row["engine"])
            eta.append(float(row["eta"]))
            threshold.append(float(row["threshold"]))
            secs.append(float(row["step_seconds"]))
            if row["rel_l2"]:
                has_rel = True
                rel.append(float(row["rel_l2"]))
    return {
        "times": np.asarray(times),
        "engine": engine,
        "eta": np.asarray(eta),
        "threshold": np.asarray(threshold),
        "rel_l2": np.asarray(rel) if has_rel else None,
        "step_seconds": np.asarray(secs),
    }


def read_summary(path):
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("schema") != 1:
        raise SystemExit(f"{path}: unsupported summary schema {payload.get('schema')!r}")
    return payload


def read_snapshot(path):
    """Flat snapshot file -> (values array, time)."""
    with open(path, "rb") as fh:
        header = fh.read(HEADER_LEN).decode("ascii")
        parts = header.split()
        if not parts or parts[0] != SNAPSHOT_MAGIC:
            raise SystemExit(f"{path}: not a snapshot file")
        dims = int(parts[1])
        shape = tuple(int(s) for s in parts[2].split(","))
        if len(shape) != dims:
            raise SystemExit(f"{path}: corrupt snapshot header")
        time = float.fromhex(parts[3])
        values = np.frombuffer(fh.read(), dtype="<f8").reshape(shape)
    return values, time


def read_snapshot_series(directory, prefix):
    paths = sorted(pathlib.Path(directory).glob(f"{prefix}_*.fld"))
    if not paths:
        raise SystemExit(f"no {prefix}_*.fld snapshots under {directory}")
    frames, times = [], []
    for p in paths:
        vals, t = read_snapshot(p)
        frames.append(vals)
        times.append(t)
    return np.asarray(times), np.stack(frames)


def solver_cells(engine):
    """Boolean per CSV row: True where the solver produced the state."""
    return np.asarray([tag == "solver" for tag in engine])


def solver_spans(times, engine):
    """Contiguous solver intervals as (t_start, t_end) pairs.

    Row i >= 1 covers the step from times[i-1] to times[i]; spans are the
    unions of consecutive solver rows.
    """
    cells = solver_cells(engine)
    spans = []
    start = None
    for i in range(1, len(times)):
        if cells[i] and start is None:
            start = times[i - 1]
        elif not cells[i] and start is not None:
            spans.append((start, times[i - 1]))
            start = None
    if start is not None:
        spans.append((start, times[-1]))
    return spans


def cells_from_spans(times, spans):
    """Inverse of solver_spans for checking: which rows fall in a span."""
    flags = np.zeros(len(times), dtype=bool)
    for start, end in spans:
        for i in range(1, len(times)):
            if times[i - 1] >= start - 1e-12 and times[i] <= end + 1e-12:
                flags[i] = True
    return flags
