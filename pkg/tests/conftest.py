import sys
from pathlib import Path

import numpy as np
import pytest

# Ensure repo root is on sys.path so tests can import `src` and `fiberweb_config`
ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from src.network.topology import NetworkSpec, Topology  # noqa: E402
from src.reservoir.readout import RidgeConfig  # noqa: E402
from src.reservoir.trace import FeatureColumn, ReservoirTrace  # noqa: E402
from src.signals.spline_input import InputSignal, SignalSpec  # noqa: E402
from src.reservoir.tasks import delayed  # noqa: E402

FAST_SAFETY = 0.5


def white_signal(duration: float = 20.0, sample_rate: float = 50.0, seed: int = 3) -> InputSignal:
    """IID uniform drive: lags carry no information about each other."""
    spec = SignalSpec(seed=seed, knot_rate=1.0, duration=duration, sample_rate=sample_rate)
    samples = np.random.default_rng(seed).uniform(-1.0, 1.0, spec.sample_count)
    return InputSignal(samples, sample_rate, spec)


def delay_line_trace(signal: InputSignal, taps: int) -> ReservoirTrace:
    """Column k holds u(t - k samples), zero before the signal starts."""
    u = np.asarray(signal.samples)
    features = np.column_stack([np.nan_to_num(delayed(u, k)) for k in range(taps)])
    return ReservoirTrace.from_columns(features, [f"tap{k}" for k in range(taps)], signal, kind="delay")


def registry_trace(registry: dict, signal: InputSignal, seed: int = 0) -> ReservoirTrace:
    """Synthetic trace whose columns follow a real readout registry.

    Each column is a random mix of the drive and a few of its delays plus a
    quadratic term, so every group carries some memory and some nonlinearity.
    """
    rng = np.random.default_rng(seed)
    u = np.asarray(signal.samples)
    basis = np.column_stack([np.nan_to_num(delayed(u, k)) for k in range(6)] + [u**2, u**3])
    n_cols = 2 * len(registry["points"])
    features = basis @ rng.normal(size=(basis.shape[1], n_cols)) * 1e-3
    meta = []
    for i, p in enumerate(registry["points"]):
        meta.append(FeatureColumn(f"p{i}_{p['kind']}_x", i, p["kind"], "x"))
        meta.append(FeatureColumn(f"p{i}_{p['kind']}_y", i, p["kind"], "y"))
    return ReservoirTrace(signal.times(), features, meta, signal, registry=registry)


@pytest.fixture
def small_spec() -> NetworkSpec:
    return NetworkSpec(topology=Topology.parse("crosshatch:2"), node_spacing=0.1)


@pytest.fixture
def short_ridge() -> RidgeConfig:
    return RidgeConfig(alpha=0.01, washout=0.5)


@pytest.fixture
def white() -> InputSignal:
    return white_signal()
