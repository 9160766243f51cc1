import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.errors import InvalidArgumentError, SchemaError
from src.signals import (
    InputSignal,
    SignalSpec,
    decimate,
    generate_spline_input,
    normalize_to_range,
    scale_force,
    signal_from_csv,
    signal_to_csv,
)
from src.signals.spline_input import knot_times, rescale_overshoot


def test_spec_counts():
    spec = SignalSpec(duration=100.0, knot_rate=5.0, sample_rate=250.0)
    assert spec.knot_count == 500
    assert spec.sample_count == 25000


@pytest.mark.parametrize(
    "kwargs",
    [
        {"duration": 0.0},
        {"knot_rate": 250.0, "sample_rate": 250.0},
        {"knot_rate": -1.0},
        {"amplitude": 1.5},
        {"amplitude": 0.0},
    ],
)
def test_spec_validation(kwargs):
    with pytest.raises(InvalidArgumentError):
        SignalSpec(**kwargs)


def test_too_few_knots_rejected():
    with pytest.raises(InvalidArgumentError):
        generate_spline_input(SignalSpec(duration=0.5, knot_rate=5.0))


def test_same_seed_same_samples():
    spec = SignalSpec(seed=11, duration=4.0, sample_rate=100.0)
    a = generate_spline_input(spec)
    b = generate_spline_input(spec)
    np.testing.assert_array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, generate_spline_input(SignalSpec(seed=12, duration=4.0,
                                                                          sample_rate=100.0)).samples)


def test_samples_pass_through_knots():
    spec = SignalSpec(duration=2.0, knot_rate=5.0, sample_rate=50.0)
    knots = np.array([0.0, 0.5, -0.5, 0.25, -0.25, 0.1, -0.1, 0.3, -0.3, 0.0, 0.2])
    u = generate_spline_input(spec, knot_values=knots)
    # every 10th sample lands on a knot; the closing knot sits at t = duration
    np.testing.assert_allclose(u.samples[::10], knots[:-1], atol=1e-12)


def test_overshoot_is_rescaled_to_unit_peak():
    spec = SignalSpec(duration=2.0, knot_rate=5.0, sample_rate=200.0)
    knots = np.array([1.0, -1.0] * 5 + [1.0])
    u = generate_spline_input(spec, knot_values=knots)
    assert np.abs(u.samples).max() == pytest.approx(1.0)


def test_knot_value_shape_checked():
    with pytest.raises(InvalidArgumentError):
        generate_spline_input(SignalSpec(duration=2.0), knot_values=[0.0, 1.0])


def test_constant_knots_give_constant_drive():
    spec = SignalSpec(duration=2.0, knot_rate=5.0, sample_rate=50.0, amplitude=0.5)
    u = generate_spline_input(spec, knot_values=np.full(11, 0.4))
    np.testing.assert_allclose(u.samples, 0.2, atol=1e-12)


def test_knots_cover_every_sample():
    spec = SignalSpec(duration=100.0)
    times = knot_times(spec)
    assert times.size == spec.knot_count + 1
    assert times[-2] == pytest.approx(99.8)
    assert times[-1] == 100.0
    assert (spec.sample_count - 1) / spec.sample_rate <= times[-1]


def test_non_integer_knot_span_still_closes():
    spec = SignalSpec(duration=2.05, knot_rate=5.0, sample_rate=100.0)
    times = knot_times(spec)
    assert np.all(np.diff(times) > 0.0)
    u = generate_spline_input(spec)
    assert np.all(np.isfinite(u.samples))


@pytest.mark.parametrize("seed", [0, 4, 10])
def test_full_length_drive_keeps_its_amplitude(seed):
    # these seeds used to overshoot past the last knot and shrink the whole series
    u = generate_spline_input(SignalSpec(seed=seed))
    peak = np.abs(u.samples).max()
    assert 0.95 <= peak <= 1.0 + 1e-12


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5.0, 5.0), min_size=1, max_size=40))
def test_rescale_overshoot_is_idempotent(values):
    v = np.array(values)
    once = rescale_overshoot(v)
    np.testing.assert_array_equal(rescale_overshoot(once), once)
    assert np.abs(once).max() <= 1.0


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), amplitude=st.floats(0.05, 1.0))
def test_samples_stay_within_amplitude(seed, amplitude):
    u = generate_spline_input(SignalSpec(seed=seed, duration=2.0, sample_rate=100.0, amplitude=amplitude))
    assert np.abs(u.samples).max() <= amplitude + 1e-12
    assert len(u) == 200
    assert u.times()[-1] == pytest.approx(1.99)


def test_samples_are_read_only():
    u = generate_spline_input(SignalSpec(duration=2.0, sample_rate=50.0))
    with pytest.raises(ValueError):
        u.samples[0] = 0.0


def test_signal_outside_its_range_rejected():
    with pytest.raises(InvalidArgumentError):
        InputSignal(np.array([0.0, 1.2]), 10.0, SignalSpec(sample_rate=10.0, knot_rate=1.0))


def test_normalize_to_range_maps_endpoints():
    spec = SignalSpec(sample_rate=10.0, knot_rate=1.0)
    u = InputSignal(np.array([-1.0, 0.0, 1.0]), 10.0, spec)
    v = normalize_to_range(u, 0.0, 0.5)
    np.testing.assert_allclose(v.samples, [0.0, 0.25, 0.5])
    assert v.value_range == (0.0, 0.5)


def test_normalize_rejects_empty_range():
    u = generate_spline_input(SignalSpec(duration=2.0, sample_rate=50.0))
    with pytest.raises(InvalidArgumentError):
        normalize_to_range(u, 0.5, 0.5)


def test_scale_force():
    u = InputSignal(np.array([-1.0, 0.5]), 10.0, SignalSpec(sample_rate=10.0, knot_rate=1.0))
    np.testing.assert_allclose(scale_force(u, 0.1), [-0.1, 0.05])


def test_decimate_signal_truncates_remainder():
    u = generate_spline_input(SignalSpec(duration=2.0, sample_rate=50.0))
    d = decimate(u, 3)
    assert len(d) == 34
    assert d.sample_rate == pytest.approx(50.0 / 3)
    np.testing.assert_array_equal(d.samples, u.samples[::3])
    assert decimate(u, 1) is u


@pytest.mark.parametrize("factor", [0, -2, 1.5])
def test_decimate_rejects_bad_factor(factor):
    u = generate_spline_input(SignalSpec(duration=2.0, sample_rate=50.0))
    with pytest.raises(InvalidArgumentError):
        decimate(u, factor)


def test_decimate_unknown_type():
    with pytest.raises(TypeError):
        decimate([1, 2, 3], 2)


def test_csv_round_trip(tmp_path):
    spec = SignalSpec(duration=2.0, sample_rate=50.0)
    u = generate_spline_input(spec)
    path = signal_to_csv(u, tmp_path / "input.csv")
    assert path.read_text().splitlines()[0] == "time_s,value"
    back = signal_from_csv(path, spec)
    np.testing.assert_allclose(back.samples, u.samples, atol=1e-9)


def test_csv_rejects_wrong_columns(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t,u\n0,0\n0.02,0.1\n")
    with pytest.raises(SchemaError):
        signal_from_csv(path, SignalSpec(duration=2.0, sample_rate=50.0))


def test_csv_rejects_wrong_rate(tmp_path):
    path = tmp_path / "rate.csv"
    path.write_text("time_s,value\n0,0\n0.1,0.1\n0.2,0.2\n")
    with pytest.raises(SchemaError):
        signal_from_csv(path, SignalSpec(duration=2.0, sample_rate=50.0))
