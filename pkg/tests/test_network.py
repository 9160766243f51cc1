import numpy as np
import pytest

from src.errors import InvalidArgumentError, NonConvergenceError
from src.filament import MaterialParams
from src.network import (
    NetworkSpec,
    ReadoutKind,
    ReadoutRegistry,
    TensionMode,
    Topology,
    TopologyKind,
    Zone,
    actuation_force,
    assemble,
    coupling_forces,
    pack,
    readout_state,
    settle,
    simulate,
    stable_network_dt,
)
from src.signals import SignalSpec, generate_spline_input

from tests.conftest import FAST_SAFETY


@pytest.fixture(scope="module")
def settled_small():
    spec = NetworkSpec(topology=Topology.parse("crosshatch:2"), node_spacing=0.1)
    return settle(assemble(spec), safety=FAST_SAFETY, seed=7)


def test_topology_parse_and_label():
    topo = Topology.parse(" Crosshatch : 4")
    assert topo.kind is TopologyKind.CROSSHATCH
    assert topo.size == 4
    assert topo.label == "crosshatch:4"
    assert topo.fiber_count == 8
    assert Topology.parse("polygon:6").fiber_count == 9


@pytest.mark.parametrize("text", ["crosshatch", "grid:3", "crosshatch:1", "polygon:3", "crosshatch:x"])
def test_topology_parse_rejects(text):
    with pytest.raises(InvalidArgumentError):
        Topology.parse(text)


@pytest.mark.parametrize("overrides", [{"node_spacing": 0.0}, {"pretension": -1.0}, {"elements_per_segment": 3},
                                       {"actuation_fiber": 4}, {"input_force_max": -0.1}])
def test_network_spec_validation(overrides):
    with pytest.raises(InvalidArgumentError):
        NetworkSpec(topology=Topology.parse("crosshatch:2"), **overrides)


def test_from_total_length_sets_pitch():
    spec = NetworkSpec.from_total_length(Topology.parse("crosshatch:4"), 0.5)
    assert spec.node_spacing == pytest.approx(0.1)
    with pytest.raises(InvalidArgumentError):
        NetworkSpec.from_total_length(Topology.parse("polygon:5"), 0.5)


def test_spec_dict_round_trip():
    spec = NetworkSpec(topology=Topology.parse("polygon:5"), node_spacing=0.2, tension_mode="spring")
    assert NetworkSpec.from_dict(spec.to_dict()) == spec


@pytest.mark.parametrize("n", range(2, 13))
def test_crosshatch_readout_counts(n):
    assembly = assemble(NetworkSpec(topology=Topology(TopologyKind.CROSSHATCH, n)))
    counts = assembly.registry.counts()
    assert counts == {"crossing": n * n, "h_midpoint": n * (n + 1), "v_midpoint": n * (n + 1)}
    assert assembly.feature_count == 6 * n * n + 4 * n
    assert len(assembly.couplings) == n * n
    assert len(assembly.fibers) == 2 * n


def _point_set(points: np.ndarray) -> np.ndarray:
    return np.unique(np.round(points, 12), axis=0)


@pytest.mark.parametrize("n", [3, 5])
def test_crosshatch_geometry_mirrors_about_actuated_fiber(n):
    assembly = assemble(NetworkSpec(topology=Topology(TopologyKind.CROSSHATCH, n)))
    act = assembly.actuation
    cx, cy = assembly.fibers[act.fiber_id].node_positions[act.node_id]
    nodes = _point_set(np.vstack([f.node_positions for f in assembly.fibers]))
    readouts = _point_set(assembly.registry.baselines())
    for sign in ((1.0, -1.0), (-1.0, 1.0)):
        flip = np.array(sign)
        centre = np.array([cx, cy])
        np.testing.assert_array_equal(_point_set(centre + (nodes - centre) * flip), nodes)
        np.testing.assert_array_equal(_point_set(centre + (readouts - centre) * flip), readouts)


def test_crosshatch_mesh_is_aligned_at_crossings():
    assembly = assemble(NetworkSpec(topology=Topology.parse("crosshatch:3")))
    for c in assembly.couplings:
        a = assembly.fibers[c.fiber_a].node_positions[c.node_a]
        b = assembly.fibers[c.fiber_b].node_positions[c.node_b]
        np.testing.assert_allclose(a, b, atol=1e-12)


def test_registry_order_crossings_then_midpoints():
    kinds = [p.kind for p in assemble(NetworkSpec(topology=Topology.parse("crosshatch:2"))).readouts]
    assert kinds == [ReadoutKind.CROSSING] * 4 + [ReadoutKind.H_MIDPOINT] * 6 + [ReadoutKind.V_MIDPOINT] * 6


def test_clamps_and_end_loads():
    assembly = assemble(NetworkSpec(topology=Topology.parse("crosshatch:2"), pretension=0.02))
    for fiber, load in zip(assembly.fibers, assembly.tension_loads):
        assert fiber.clamp_flags[0] and not fiber.clamp_flags[1:].any()
        assert load.node_id == fiber.node_count - 1
        assert load.magnitude == 0.02
        assert load.mode is TensionMode.CONSTANT


def test_spring_mode_anchor_gives_initial_pretension():
    spec = NetworkSpec(topology=Topology.parse("crosshatch:2"), pretension=0.02, tension_mode=TensionMode.SPRING)
    assembly = assemble(spec)
    for fiber, load in zip(assembly.fibers, assembly.tension_loads):
        end = fiber.node_positions[load.node_id]
        pull = load.stiffness * (np.asarray(load.anchor) - end)
        np.testing.assert_allclose(pull, 0.02 * np.asarray(load.direction), atol=1e-12)


def test_actuation_at_centre_of_central_fiber():
    assembly = assemble(NetworkSpec(topology=Topology.parse("crosshatch:3")))
    act = assembly.actuation
    assert act.fiber_id == 1
    position = assembly.fibers[act.fiber_id].node_positions[act.node_id]
    np.testing.assert_allclose(position, [0.2, 0.2], atol=1e-12)
    assert act.direction == pytest.approx((0.0, 1.0))


def test_pentagon_chords_cross_five_times():
    assembly = assemble(NetworkSpec(topology=Topology.parse("polygon:5"), node_spacing=0.2))
    assert len(assembly.fibers) == 5
    assert assembly.registry.counts()["crossing"] == 5
    assert len(assembly.couplings) == 5


def test_hexagon_concurrent_diagonals_share_one_readout():
    assembly = assemble(NetworkSpec(topology=Topology.parse("polygon:6"), node_spacing=0.2))
    # 15 crossing chord pairs; the three long diagonals meet at the centre
    assert len(assembly.couplings) == 15
    assert assembly.registry.counts()["crossing"] == 13
    centre = [p for p in assembly.readouts if p.kind is ReadoutKind.CROSSING and len(p.stations) == 3]
    assert len(centre) == 1


def test_coupling_forces_cancel():
    assembly = assemble(NetworkSpec(topology=Topology.parse("crosshatch:2")))
    c = assembly.couplings[0]
    assembly.fibers[c.fiber_a].node_positions[c.node_a] += [1e-4, -2e-4]
    forces = coupling_forces(assembly)
    total = sum(f.sum(axis=0) for f in forces)
    np.testing.assert_allclose(total, 0.0, atol=1e-12)
    assert np.linalg.norm(forces[c.fiber_a][c.node_a]) > 0.0


def test_registry_dict_round_trip():
    registry = assemble(NetworkSpec(topology=Topology.parse("crosshatch:2"))).registry
    assert ReadoutRegistry.from_dict(registry.to_dict()) == registry


def test_registry_from_dict_rejects_malformed():
    with pytest.raises(InvalidArgumentError):
        ReadoutRegistry.from_dict({"points": []})


def test_near_actuation_radius_zero_is_the_actuation_midpoint():
    registry = assemble(NetworkSpec(topology=Topology.parse("crosshatch:2"))).registry
    assert registry.near_actuation(0.0) == [5]
    assert registry.points[5].kind is ReadoutKind.H_MIDPOINT


def test_near_springs_band_is_inclusive():
    registry = assemble(NetworkSpec(topology=Topology.parse("crosshatch:2"))).registry
    assert registry.near_springs(0.0) == []
    # three crossings one pitch from a free end plus the last midpoint of every fiber
    assert len(registry.near_springs(1.0)) == 7


def test_zone_negative_radius_rejected():
    registry = assemble(NetworkSpec(topology=Topology.parse("crosshatch:2"))).registry
    with pytest.raises(InvalidArgumentError):
        registry.near_actuation(-1.0)
    with pytest.raises(InvalidArgumentError):
        registry.near_springs(-0.5)


def test_zones_are_assigned_with_actuation_precedence():
    registry = assemble(NetworkSpec(topology=Topology.parse("crosshatch:3"))).registry
    near_act = set(registry.near_actuation())
    for index, point in enumerate(registry.points):
        if index in near_act:
            assert point.zone is Zone.NEAR_ACTUATION


@pytest.mark.parametrize("u", [1.5, -1.01, float("nan")])
def test_actuation_force_rejects_bad_samples(u):
    assembly = assemble(NetworkSpec(topology=Topology.parse("crosshatch:2")))
    with pytest.raises(InvalidArgumentError):
        actuation_force(assembly, u, 0.05)


def test_actuation_force_is_a_point_load():
    assembly = assemble(NetworkSpec(topology=Topology.parse("crosshatch:2")))
    forces = actuation_force(assembly, -0.5, 0.1)
    act = assembly.actuation
    np.testing.assert_allclose(forces[act.fiber_id][act.node_id], [0.0, -0.05], atol=1e-15)
    assert sum(np.count_nonzero(f) for f in forces) == 1


def test_stable_network_dt_rejects_bad_safety():
    packed = pack(assemble(NetworkSpec(topology=Topology.parse("crosshatch:2"))))
    with pytest.raises(InvalidArgumentError):
        stable_network_dt(packed, 0.0)
    assert stable_network_dt(packed, 0.5) == pytest.approx(0.5 * stable_network_dt(packed, 1.0))


def test_settle_records_perturbed_baselines(settled_small):
    assert settled_small.settled
    np.testing.assert_array_equal(readout_state(settled_small), 0.0)
    unsettled = assemble(settled_small.spec)
    shift = settled_small.registry.baselines() - unsettled.registry.baselines()
    assert np.abs(shift).max() > 0.0


def test_settle_gives_up_after_max_time():
    assembly = assemble(NetworkSpec(topology=Topology.parse("crosshatch:2")))
    with pytest.raises(NonConvergenceError):
        settle(assembly, max_time=0.01, safety=FAST_SAFETY)


def test_settle_requires_damping():
    spec = NetworkSpec(topology=Topology.parse("crosshatch:2"), material=MaterialParams(viscous_damping=0.0))
    with pytest.raises(InvalidArgumentError):
        settle(assemble(spec))


def test_simulate_requires_settled_network():
    assembly = assemble(NetworkSpec(topology=Topology.parse("crosshatch:2")))
    signal = generate_spline_input(SignalSpec(duration=1.0, sample_rate=50.0))
    with pytest.raises(InvalidArgumentError):
        simulate(assembly, signal)


def test_simulate_trace_shape_and_determinism(settled_small):
    signal = generate_spline_input(SignalSpec(seed=1, duration=1.0, sample_rate=50.0))
    first = simulate(settled_small, signal, safety=FAST_SAFETY)
    second = simulate(settled_small, signal, safety=FAST_SAFETY)
    assert first.features.shape == (50, 32)
    np.testing.assert_array_equal(first.features, second.features)
    assert first.column_names[:2] == ["p0_crossing_x", "p0_crossing_y"]
    assert first.registry["topology"] == "crosshatch:2"
    assert np.abs(first.features).max() > 0.0


def test_zero_force_leaves_settled_network_nearly_still(settled_small):
    signal = generate_spline_input(SignalSpec(seed=1, duration=1.0, sample_rate=50.0))
    trace = simulate(settled_small, signal, force_max=0.0, safety=FAST_SAFETY)
    driven = simulate(settled_small, signal, force_max=0.05, safety=FAST_SAFETY)
    assert np.abs(trace.features).max() < 0.01 * np.abs(driven.features).max()


@pytest.mark.slow
def test_unit_pretension_settles_to_axial_strain():
    spec = NetworkSpec(topology=Topology.parse("crosshatch:2"), pretension=1.0)
    settled = settle(assemble(spec), safety=FAST_SAFETY, perturbation=0.0)
    expected = 1.0 / spec.material.axial_stiffness
    assert expected == pytest.approx(3.18e-3, rel=1e-3)
    for fiber in settled.fibers:
        lengths = np.linalg.norm(np.diff(fiber.node_positions, axis=0), axis=1)
        assert lengths.sum() / fiber.rest_lengths.sum() - 1.0 == pytest.approx(expected, rel=0.02)
