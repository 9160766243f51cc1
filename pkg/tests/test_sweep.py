import numpy as np
import pandas as pd
import pytest

from src.analysis import SweepGrid, evaluate_point, force_for_buckling_number, run_sweep, split_timings
from src.analysis.sweep import TIMING_COLUMN, axes_from_config, failed_count, grid_matrix, resolve_point
from src.errors import InvalidArgumentError
from src.filament import MaterialParams
from src.network import NetworkSpec, Topology
from src.reservoir import RidgeConfig
from src.signals import SignalSpec

from tests.conftest import FAST_SAFETY

FIBER = MaterialParams()


def _grid(axes, **kwargs) -> SweepGrid:
    options = dict(
        base=NetworkSpec(topology=Topology.parse("crosshatch:2"), node_spacing=0.1),
        axes=axes,
        signal=SignalSpec(seed=1, knot_rate=5.0, duration=2.0, sample_rate=50.0),
        ridge=RidgeConfig(alpha=0.01, washout=0.5),
        horizon=0.2,
        max_order=3,
        safety=FAST_SAFETY,
        seed=7,
    )
    options.update(kwargs)
    return SweepGrid(**options)


@pytest.mark.parametrize(
    "axes",
    [
        {},
        {"mass": [1.0]},
        {"size": []},
        {"force": [0.1], "deflection": [1e-3]},
        {"length": [0.3], "spacing": [0.1]},
    ],
)
def test_grid_rejects_bad_axes(axes):
    with pytest.raises(InvalidArgumentError):
        _grid(axes)


def test_grid_rejects_unknown_task():
    with pytest.raises(InvalidArgumentError):
        _grid({"size": [2]}, tasks=("entropy",))


def test_points_are_row_major():
    grid = _grid({"size": [2, 3], "pretension": [0.0, 0.01, 0.02]})
    points = grid.points()
    assert len(grid) == 6 == len(points)
    assert points[0] == {"size": 2, "pretension": 0.0}
    assert points[1] == {"size": 2, "pretension": 0.01}
    assert points[3] == {"size": 3, "pretension": 0.0}


def test_resolve_size_and_length():
    spec = resolve_point(_grid({"size": [3]}), {"size": 3, "length": 0.4})
    assert spec.topology.label == "crosshatch:3"
    assert spec.node_spacing == pytest.approx(0.1)


def test_resolve_spacing_and_pretension():
    spec = resolve_point(_grid({"spacing": [0.05]}), {"spacing": 0.05, "pretension": 0.0})
    assert spec.node_spacing == 0.05
    assert spec.pretension == 0.0


def test_resolve_force_axes():
    grid = _grid({"force": [0.2]})
    assert resolve_point(grid, {"force": 0.2}).input_force_max == 0.2
    assert resolve_point(grid, {"buckling_number": 1.0}).input_force_max == pytest.approx(
        force_for_buckling_number(1.0, 0.1, FIBER.youngs_modulus, FIBER.second_moment)
    )
    assert resolve_point(grid, {"deflection": 13.3e-3}).input_force_max == pytest.approx(0.0501398, rel=1e-5)


def test_buckling_number_axis_uses_the_point_spacing():
    spec = resolve_point(_grid({"spacing": [0.05]}), {"spacing": 0.05, "buckling_number": 2.0})
    assert spec.input_force_max == pytest.approx(
        force_for_buckling_number(2.0, 0.05, FIBER.youngs_modulus, FIBER.second_moment)
    )


def test_length_axis_needs_crosshatch():
    with pytest.raises(InvalidArgumentError):
        resolve_point(_grid({"length": [0.3]}), {"topology": "polygon:5", "length": 0.3})


def test_unsettled_point_becomes_failed_row():
    grid = _grid({"pretension": [0.01]}, settle_max_time=0.01)
    row = evaluate_point(grid, 0, {"pretension": 0.01})
    assert row["status"] == "failed"
    assert row["error"].startswith("NonConvergenceError")
    assert row["point"] == 0 and row["topology"] == "crosshatch:2"
    assert row[TIMING_COLUMN] >= 0.0


def test_invalid_point_becomes_failed_row():
    grid = _grid({"topology": ["polygon:5"], "length": [0.3]})
    row = evaluate_point(grid, 3, {"topology": "polygon:5", "length": 0.3})
    assert row["status"] == "failed"
    assert "InvalidArgumentError" in row["error"]


def test_run_sweep_keeps_failed_points():
    grid = _grid({"pretension": [0.0, 0.01]}, settle_max_time=0.01)
    frame = run_sweep(grid)
    assert list(frame["point"]) == [0, 1]
    assert list(frame.columns[:3]) == ["point", "pretension", "topology"]
    assert frame.columns[-1] == TIMING_COLUMN
    assert failed_count(frame) == 2
    results, timings = split_timings(frame)
    assert TIMING_COLUMN not in results.columns
    assert list(timings.columns) == ["point", TIMING_COLUMN]


def test_run_sweep_single_point():
    frame = run_sweep(_grid({"force": [0.05]}))
    row = frame.iloc[0]
    assert row["status"] == "ok" and row["error"] == ""
    assert 0.0 <= row["C_nl"] <= 1.0
    assert 0.0 <= row["C_m"] <= 1.0
    assert {"legendre_1", "legendre_3", "memory_0.00", "memory_0.20"} <= set(frame.columns)
    assert row["buckling_number"] > 0.0


@pytest.mark.slow
def test_parallel_sweep_matches_serial():
    grid = _grid({"pretension": [0.0, 0.02], "force": [0.02, 0.05]})
    serial, _ = split_timings(run_sweep(grid, workers=1))
    parallel, _ = split_timings(run_sweep(grid, workers=2))
    pd.testing.assert_frame_equal(serial, parallel)


def test_grid_matrix_masks_failed_points():
    frame = pd.DataFrame(
        {
            "point": [0, 1, 2, 3],
            "node_spacing": [0.05, 0.05, 0.1, 0.1],
            "force_max": [0.01, 0.02, 0.01, 0.02],
            "status": ["ok", "failed", "ok", "ok"],
            "C_nl": [0.1, np.nan, 0.3, 0.4],
        }
    )
    values, rows, cols = grid_matrix(frame, "C_nl", "node_spacing", "force_max")
    assert rows == [0.05, 0.1] and cols == [0.01, 0.02]
    assert values[0, 0] == 0.1 and np.isnan(values[0, 1])
    np.testing.assert_allclose(values[1], [0.3, 0.4])


def test_axes_from_config_drops_empty_axes():
    assert axes_from_config({"force": [0.1, 0.2], "size": None, "spacing": []}) == {"force": (0.1, 0.2)}
