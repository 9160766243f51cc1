import numpy as np
import pandas as pd
import pytest

from src.analysis import FeatureGroup, GroupScore
from src.analysis import plots
from src.reservoir import RidgeConfig, build_report
from src.reservoir.tasks import NarmaResult

from tests.conftest import delay_line_trace, white_signal


@pytest.fixture(scope="module")
def report():
    trace = delay_line_trace(white_signal(duration=10.0), 5)
    return build_report(trace, RidgeConfig(washout=0.5), ["legendre", "memory"], horizon=0.3, max_order=3)


def _sweep_frame() -> pd.DataFrame:
    spacings, forces = [0.05, 0.1, 0.15], [0.01, 0.05, 0.1]
    rows = []
    for i, (s, f) in enumerate((s, f) for s in spacings for f in forces):
        failed = i == 4
        rows.append(
            {
                "point": i,
                "node_spacing": s,
                "force_max": f,
                "buckling_number": f * s,
                "status": "failed" if failed else "ok",
                "C_nl": np.nan if failed else 0.1 * i,
                "C_m": np.nan if failed else 0.05 * i,
            }
        )
    return pd.DataFrame(rows)


def _is_svg(path) -> bool:
    text = path.read_text()
    return text.lstrip().startswith("<?xml") and "</svg>" in text


def test_report_figures(tmp_path, report):
    assert _is_svg(plots.plot_legendre(report, tmp_path / "legendre.svg"))
    assert _is_svg(plots.plot_memory_curve(report, tmp_path / "memory.svg"))


def test_figures_are_byte_stable(tmp_path, report):
    first = plots.plot_memory_curve(report, tmp_path / "a.svg").read_bytes()
    second = plots.plot_memory_curve(report, tmp_path / "b.svg").read_bytes()
    assert first == second


def test_legendre_plot_needs_legendre_curve(tmp_path):
    trace = delay_line_trace(white_signal(duration=10.0), 5)
    memory_only = build_report(trace, RidgeConfig(washout=0.5), ["memory"], horizon=0.3)
    with pytest.raises(ValueError):
        plots.plot_legendre(memory_only, tmp_path / "x.svg")


def test_narma_plot(tmp_path):
    rng = np.random.default_rng(0)
    target = rng.uniform(0.1, 0.3, 300)
    result = NarmaResult(2, 0.01, 0.2, 0.001, target + 0.01, target)
    assert _is_svg(plots.plot_narma([result], tmp_path / "narma.svg"))
    with pytest.raises(ValueError):
        plots.plot_narma([], tmp_path / "none.svg")


@pytest.mark.parametrize("metric", ["C_nl", "C_m"])
def test_heatmap_with_failed_cell(tmp_path, metric):
    path = plots.plot_capacity_heatmap(_sweep_frame(), metric, tmp_path / f"{metric}.svg")
    assert _is_svg(path)


def test_capacity_vs_buckling(tmp_path):
    assert _is_svg(plots.plot_capacity_vs_buckling(_sweep_frame(), tmp_path / "b.svg"))


def test_feature_group_bars(tmp_path):
    scores = [
        GroupScore(FeatureGroup.ALL, 32, 32, 0.4, 0.3, 1.0, 1.0),
        GroupScore(FeatureGroup.MIDPOINT_LATERAL, 12, 32, 0.36, 0.27, 0.9, 0.9),
    ]
    assert _is_svg(plots.plot_feature_groups(scores, tmp_path / "groups.svg"))
