"""Trend-level reproductions on full-size networks. All of these take minutes; run with ``-m slow``."""
import io

import numpy as np
import pandas as pd
import pytest

from src.analysis import FeatureGroup, SweepGrid, compare_feature_groups, run_sweep, split_timings
from src.network import NetworkSpec, Topology, assemble, settle, simulate
from src.reservoir import NarmaConfig, RidgeConfig, evaluate_narma, narma_series
from src.signals import SignalSpec, generate_spline_input

pytestmark = pytest.mark.slow

SHORT = SignalSpec(seed=0, duration=30.0)
LONG = SignalSpec(seed=0, duration=100.0)


def _crosshatch(n: int, spacing: float = 0.1, **kwargs) -> NetworkSpec:
    return NetworkSpec(topology=Topology.parse(f"crosshatch:{n}"), node_spacing=spacing, **kwargs)


def _sweep(base: NetworkSpec, axes) -> pd.DataFrame:
    frame = run_sweep(SweepGrid(base=base, axes=axes, signal=SHORT, seed=0))
    assert (frame["status"] == "ok").all(), frame["error"].tolist()
    return frame


def _csv_bytes(frame) -> bytes:
    results, _ = split_timings(frame)
    buffer = io.StringIO()
    results.to_csv(buffer, index=False, float_format="%.12g", lineterminator="\n")
    return buffer.getvalue().encode()


@pytest.fixture(scope="module")
def buckling_sweep():
    return _sweep(_crosshatch(4), {"buckling_number": [0.5, 0.9, 1.5]})


def test_capacity_peaks_below_buckling(buckling_sweep):
    c_nl = dict(zip(buckling_sweep["buckling_number"].round(6), buckling_sweep["C_nl"]))
    assert c_nl[0.9] > c_nl[0.5]
    assert c_nl[1.5] < 0.5 * c_nl[0.9]


def test_sweep_is_reproducible(buckling_sweep):
    again = _sweep(_crosshatch(4), {"buckling_number": [0.5, 0.9, 1.5]})
    assert _csv_bytes(again) == _csv_bytes(buckling_sweep)


def test_larger_networks_compute_more():
    # matched central deflection at 60 mm pitch
    frame = _sweep(
        _crosshatch(2, spacing=0.06),
        {"topology": ["crosshatch:2", "crosshatch:4", "crosshatch:6", "polygon:6"], "deflection": [13.3e-3]},
    )
    c_nl = dict(zip(frame["topology"], frame["C_nl"]))
    assert c_nl["crosshatch:6"] > c_nl["crosshatch:4"] > c_nl["crosshatch:2"]
    assert c_nl["crosshatch:4"] > c_nl["polygon:6"]


def test_memory_peaks_at_moderate_pretension():
    frame = _sweep(_crosshatch(4), {"pretension": [0.01, 1.0, 5.0]})
    c_nl, c_m = list(frame["C_nl"]), list(frame["C_m"])
    assert c_nl[0] >= c_nl[1] >= c_nl[2]
    assert c_m[1] > c_m[0] and c_m[1] > c_m[2]


@pytest.fixture(scope="module")
def six_by_six_trace():
    network = settle(assemble(_crosshatch(6)), seed=0)
    return simulate(network, generate_spline_input(LONG))


def test_midpoint_lateral_keeps_most_capacity(six_by_six_trace):
    scores = compare_feature_groups(six_by_six_trace, ["midpoint_lateral"])
    lateral = next(s for s in scores if s.group is FeatureGroup.MIDPOINT_LATERAL)
    assert (lateral.columns, lateral.total_columns) == (84, 240)
    assert lateral.c_nl_ratio >= 0.85
    assert lateral.c_m_ratio >= 0.80


def test_narma_on_simulated_network(six_by_six_trace):
    assert narma_series(np.zeros(400), NarmaConfig(order=2))[-1] == pytest.approx(0.14589, abs=1e-4)
    ridge = RidgeConfig()
    results = {
        n: evaluate_narma(six_by_six_trace, ridge, NarmaConfig(order=n), with_baseline=n == 2) for n in (2, 5, 10)
    }
    assert results[2].rmse <= 0.7 * results[2].baseline_rmse
    assert results[2].rmse < results[5].rmse < results[10].rmse
