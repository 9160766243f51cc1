import json
from pathlib import Path

import pandas as pd
import pytest

from src.cli.main import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, EXIT_PARTIAL, main
from src.network import NetworkSpec, Topology, assemble
from src.reservoir.trace import save_trace

from tests.conftest import FAST_SAFETY, delay_line_trace, registry_trace, white_signal

TINY = {
    "network": {"topology": "crosshatch:2", "node_spacing": 0.1},
    "signal": {"knot_rate": 5.0, "duration": 2.0, "sample_rate": 50.0},
    "ridge": {"alpha": 0.01, "washout": 0.5},
    "integration": {"safety": FAST_SAFETY},
    "tasks": ["legendre", "memory"],
    "task_options": {"max_order": 3, "horizon": 0.2},
    "features": {"groups": ["midpoint_lateral"], "alpha": 1e-4},
    "sweep": {"axes": {"pretension": [0.0, 0.01]}},
    "run": {"seed": 3},
}


@pytest.fixture(autouse=True)
def clean_env(monkeypatch: pytest.MonkeyPatch):
    for name in ("FIBERWEB_CONFIG_FILE", "FIBERWEB_WORKERS", "FIBERWEB_SEED", "FIBERWEB_OUT_DIR",
                 "FIBERWEB_TRACE_FORMAT", "LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")


def _config(tmp_path: Path, **sections) -> str:
    data = json.loads(json.dumps(TINY))
    for name, value in sections.items():
        data[name] = {**data.get(name, {}), **value} if isinstance(value, dict) else value
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


@pytest.fixture
def delay_trace(tmp_path: Path) -> Path:
    data_path, _ = save_trace(delay_line_trace(white_signal(duration=10.0), 5), tmp_path / "delay" / "trace")
    return data_path


def test_no_command_prints_help(capsys):
    assert main([]) == EXIT_CONFIG
    assert "simulate" in capsys.readouterr().out


def test_missing_config_file(tmp_path: Path, capsys):
    assert main(["simulate", "--config", str(tmp_path / "absent.json")]) == EXIT_CONFIG
    assert "not found" in capsys.readouterr().out


def test_invalid_config_lists_issues(tmp_path: Path, capsys):
    config = _config(tmp_path, network={"topology": "crosshatch:1"})
    assert main(["simulate", "--config", config, "--out", str(tmp_path / "out")]) == EXIT_CONFIG
    out = capsys.readouterr().out
    assert "network.topology" in out
    assert not (tmp_path / "out").exists()


def test_simulate_writes_bundle(tmp_path: Path):
    out = tmp_path / "sim"
    code = main(["simulate", "--config", _config(tmp_path), "--out", str(out), "--format", "csv"])
    assert code == EXIT_OK
    for name in ("trace.csv", "trace.json", "input.csv", "config.json", "provenance.json"):
        assert (out / name).exists(), name
    provenance = json.loads((out / "provenance.json").read_text())
    assert provenance["command"] == "simulate"
    assert provenance["seed"] == 3
    assert provenance["finished"] == "1970-01-01T00:00:00+00:00"
    echoed = json.loads((out / "config.json").read_text())
    assert echoed["network"]["topology"] == "crosshatch:2"
    assert echoed["output"]["format"] == "csv"
    frame = pd.read_csv(out / "trace.csv")
    assert len(frame) == 100


def test_settle_failure_exits_numerical(tmp_path: Path, capsys):
    config = _config(tmp_path, settle={"max_time": 0.01})
    assert main(["simulate", "--config", config, "--out", str(tmp_path / "out")]) == EXIT_NUMERICAL
    assert "NonConvergenceError" in capsys.readouterr().out


def test_evaluate_is_byte_identical(tmp_path: Path, delay_trace: Path):
    config = _config(tmp_path)
    outputs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["evaluate", str(delay_trace), "--config", config, "--out", str(out)]) == EXIT_OK
        outputs.append(out)
    for name in ("capacity_report.json", "capacity_report.csv", "legendre_capacity.svg", "memory_curve.svg",
                 "provenance.json"):
        assert (outputs[0] / name).read_bytes() == (outputs[1] / name).read_bytes(), name


def test_evaluate_task_override_and_no_plots(tmp_path: Path, delay_trace: Path):
    out = tmp_path / "mem"
    args = ["evaluate", str(delay_trace), "--config", _config(tmp_path), "--out", str(out), "--tasks", "memory",
            "--no-plots"]
    assert main(args) == EXIT_OK
    report = json.loads((out / "capacity_report.json").read_text())
    assert report["legendre"] is None
    assert report["C_m"] > 0.0
    assert not list(out.glob("*.svg"))


def test_evaluate_from_sidecar(tmp_path: Path, delay_trace: Path):
    sidecar = delay_trace.with_suffix(".json")
    args = ["evaluate", str(sidecar), "--config", _config(tmp_path), "--out", str(tmp_path / "o"), "--no-plots"]
    assert main(args) == EXIT_OK


def test_evaluate_missing_trace(tmp_path: Path, capsys):
    args = ["evaluate", str(tmp_path / "nope.npz"), "--config", _config(tmp_path), "--out", str(tmp_path / "o")]
    assert main(args) == EXIT_CONFIG
    assert "SchemaError" in capsys.readouterr().out


def test_evaluate_rejects_unknown_task(tmp_path: Path, delay_trace: Path):
    args = ["evaluate", str(delay_trace), "--config", _config(tmp_path), "--tasks", "entropy"]
    assert main(args) == EXIT_CONFIG


def test_features_command(tmp_path: Path):
    registry = assemble(NetworkSpec(topology=Topology.parse("crosshatch:2"))).registry.to_dict()
    data_path, _ = save_trace(registry_trace(registry, white_signal(duration=20.0)), tmp_path / "net" / "trace")
    out = tmp_path / "features"
    args = ["features", str(data_path), "--config", _config(tmp_path), "--out", str(out),
            "--groups", "all", "h_mid_y"]
    assert main(args) == EXIT_OK
    frame = pd.read_csv(out / "feature_groups.csv")
    assert list(frame["group"]) == ["all", "h_mid_y"]
    assert (out / "feature_groups.svg").exists()
    assert json.loads((out / "feature_groups.json").read_text())["rows"][0]["C_nl_ratio"] == pytest.approx(1.0)


def test_features_needs_registry(tmp_path: Path, delay_trace: Path):
    args = ["features", str(delay_trace), "--config", _config(tmp_path), "--out", str(tmp_path / "o")]
    assert main(args) == EXIT_CONFIG


def test_sweep_with_failed_points_exits_partial(tmp_path: Path):
    out = tmp_path / "sweep"
    config = _config(tmp_path, settle={"max_time": 0.01})
    assert main(["sweep", "--config", config, "--out", str(out)]) == EXIT_PARTIAL
    results = pd.read_csv(out / "sweep_results.csv")
    assert list(results["status"]) == ["failed", "failed"]
    assert "wall_time_s" not in results.columns
    assert list(pd.read_csv(out / "sweep_timings.csv").columns) == ["point", "wall_time_s"]
    assert len(json.loads((out / "sweep_results.json").read_text())["rows"]) == 2


def test_sweep_needs_axes(tmp_path: Path):
    config = _config(tmp_path, sweep={"axes": {}})
    assert main(["sweep", "--config", config, "--out", str(tmp_path / "o")]) == EXIT_CONFIG


@pytest.mark.slow
def test_sweep_writes_figures(tmp_path: Path):
    out = tmp_path / "sweep"
    config = _config(tmp_path, sweep={"axes": {"spacing": [0.08, 0.1], "force": [0.02, 0.05]}})
    assert main(["sweep", "--config", config, "--out", str(out), "--workers", "2"]) == EXIT_OK
    assert len(pd.read_csv(out / "sweep_results.csv")) == 4
    for name in ("heatmap_C_nl.svg", "heatmap_C_m.svg", "capacity_vs_B.svg"):
        assert (out / name).exists(), name
