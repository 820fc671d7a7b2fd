import numpy as np
import pytest

from hybridpde.errors import DegenerateReferenceError, UndefinedCorrelationError
from hybridpde.grids import FieldState, Grid
from hybridpde.metrics import pearson, relative_l2, time_block
from hybridpde.records import RolloutRecord


def pair(truth, pred):
    g = Grid(points=(len(truth),), extents=(1.0,), periodic=(True,))
    return FieldState(g, np.asarray(truth, float)), FieldState(g, np.asarray(pred, float))


def test_relative_l2_examples():
    t, p = pair([3.0, 4.0], [3.0, 4.0])
    assert relative_l2(t, p) == 0.0
    t, p = pair([3.0, 4.0], [0.0, 0.0])
    assert relative_l2(t, p) == pytest.approx(1.0)
    t, p = pair([1.0, 0.0], [1.0, 0.1])
    assert relative_l2(t, p) == pytest.approx(0.1)


def test_relative_l2_zero_cases():
    t, p = pair([0.0, 0.0], [0.0, 0.0])
    assert relative_l2(t, p) == 0.0
    t, p = pair([0.0, 0.0], [1.0, 0.0])
    with pytest.raises(DegenerateReferenceError):
        relative_l2(t, p)


def test_relative_l2_scale_invariance():
    rng = np.random.default_rng(2)
    truth = rng.standard_normal(64)
    pred = truth + 0.05 * rng.standard_normal(64)
    t, p = pair(truth, pred)
    base = relative_l2(t, p)
    for c in (1e-8, 7.0, 1e8):
        tc, pc = pair(c * truth, c * pred)
        assert relative_l2(tc, pc) == pytest.approx(base, rel=1e-12)


def test_pearson_perfect_lines():
    x = np.linspace(0.0, 1.0, 30)
    assert pearson(x, 2 * x + 3) == pytest.approx(1.0, abs=1e-12)
    assert pearson(x, -x) == pytest.approx(-1.0, abs=1e-12)


def test_pearson_affine_invariance():
    rng = np.random.default_rng(3)
    x = rng.standard_normal(100)
    y = rng.standard_normal(100)
    base = pearson(x, y)
    assert pearson(3.5 * x + 1.0, y) == pytest.approx(base, abs=1e-10)
    assert pearson(x, 0.02 * y - 9.0) == pytest.approx(base, abs=1e-10)


def test_pearson_undefined_for_constant():
    with pytest.raises(UndefinedCorrelationError):
        pearson([1.0, 1.0, 1.0], [0.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        pearson([1.0], [2.0])


def test_time_block_returns_result_and_nonnegative_seconds():
    out, secs = time_block("trivial", lambda: 41 + 1)
    assert out == 42
    assert secs >= 0.0


def test_rollout_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(4)
    rec = RolloutRecord()
    rec.append(0.0, "init", 0.0, 0.31, 0.0, rel_l2=0.0)
    for i in range(1, 40):
        rec.append(i * 0.01, "surrogate" if i % 7 else "solver",
                   float(rng.uniform(0, 1)), float(rng.uniform(0, 1)),
                   float(rng.uniform(0, 1e-3)), rel_l2=float(rng.uniform(0, 1)))
    path = tmp_path / "r.csv"
    rec.to_csv(path)
    back = RolloutRecord.from_csv(path)
    for name in ("times", "eta_series", "threshold_series", "step_seconds", "error_series"):
        a = np.asarray(getattr(rec, name))
        b = np.asarray(getattr(back, name))
        assert np.max(np.abs(a - b)) <= 1e-15 * max(1.0, np.max(np.abs(a)))
        assert np.array_equal(a, b)        # repr round-trips exactly
    assert back.engine_tags == rec.engine_tags


def test_rollout_csv_without_errors(tmp_path):
    rec = RolloutRecord()
    rec.append(0.0, "init", 0.0, 0.1, 0.0)
    rec.append(0.01, "surrogate", 0.05, 0.09, 1e-4)
    path = tmp_path / "r.csv"
    rec.to_csv(path)
    back = RolloutRecord.from_csv(path)
    assert back.error_series is None


def test_solver_runs_segmentation():
    rec = RolloutRecord()
    tags = ["init"] + ["surrogate"] * 3 + ["solver"] * 10 + ["surrogate"] + ["solver"] * 4
    for i, tag in enumerate(tags):
        rec.append(i * 0.01, tag, 0.0, 0.0, 0.0)
    assert rec.solver_runs() == [(4, 10), (15, 4)]
    assert rec.surrogate_fraction() == pytest.approx(4 / 18)
