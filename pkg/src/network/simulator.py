"""Time integration of an assembled network.

The network is packed into the flat arrays the compiled kernels expect; the
packed state is unpacked back into per-fiber meshes after each run so an
assembly stays a plain value.
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from src.errors import DivergenceError, InvalidArgumentError, NonConvergenceError, NumericalDegeneracyError
from src.filament import kernels
from src.filament.mesh import DEFAULT_SAFETY, rod_arrays
from src.network.assembly import NetworkAssembly
from src.network.topology import TensionMode
from src.reservoir.trace import FeatureColumn, ReservoirTrace
from src.signals.spline_input import InputSignal, scale_force

logger = logging.getLogger(__name__)

DEFAULT_SETTLE_TOLERANCE = 1e-9
DEFAULT_SETTLE_MAX_TIME = 10.0
SETTLE_CHUNK = 0.01
PERTURBATION = 1e-6


@dataclass
class PackedNetwork:
    """Flat kernel arrays for a whole network; node ``j`` of fiber ``f`` is row ``offsets[f] + j``."""

    offsets: NDArray[np.int64]
    pos: NDArray[np.float64]
    vel: NDArray[np.float64]
    inv_mass: NDArray[np.float64]
    free: NDArray[np.float64]
    e_i: NDArray[np.int64]
    e_j: NDArray[np.int64]
    e_rest: NDArray[np.float64]
    e_ea: NDArray[np.float64]
    b_a: NDArray[np.int64]
    b_b: NDArray[np.int64]
    b_c: NDArray[np.int64]
    b_coef: NDArray[np.float64]
    c_a: NDArray[np.int64]
    c_b: NDArray[np.int64]
    c_k: NDArray[np.float64]
    c_c: NDArray[np.float64]
    t_node: NDArray[np.int64]
    t_force: NDArray[np.float64]
    t_k: NDArray[np.float64]
    t_anchor: NDArray[np.float64]
    act_node: int
    act_dir: NDArray[np.float64]
    damping: float

    def flat(self, fiber_id: int, node_id: int) -> int:
        return int(self.offsets[fiber_id] + node_id)

    def topology_args(self) -> tuple:
        return (
            self.e_i, self.e_j, self.e_rest, self.e_ea,
            self.b_a, self.b_b, self.b_c, self.b_coef,
            self.c_a, self.c_b, self.c_k, self.c_c,
            self.t_node, self.t_force, self.t_k, self.t_anchor,
            self.act_node, self.act_dir,
        )

    def kinetic_energy(self) -> float:
        return float(kernels.kinetic_energy(self.vel, self.inv_mass))


def pack(assembly: NetworkAssembly) -> PackedNetwork:
    counts = [f.node_count for f in assembly.fibers]
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(np.int64)
    rods = [rod_arrays(f, int(o)) for f, o in zip(assembly.fibers, offsets)]

    def cat(name: str, dtype) -> np.ndarray:
        return np.concatenate([getattr(r, name) for r in rods]).astype(dtype)

    pos = np.concatenate([f.node_positions for f in assembly.fibers])
    vel = np.concatenate([f.node_velocities for f in assembly.fibers])
    free = np.repeat((~np.concatenate([f.clamp_flags for f in assembly.fibers]))[:, None], 2, axis=1)
    free = free.astype(np.float64)
    for g in assembly.guides:
        free[offsets[g.fiber_id] + g.node_id, g.component] = 0.0
    vel *= free

    n_c = len(assembly.couplings)
    c_a = np.array([offsets[c.fiber_a] + c.node_a for c in assembly.couplings], dtype=np.int64)
    c_b = np.array([offsets[c.fiber_b] + c.node_b for c in assembly.couplings], dtype=np.int64)

    loads = assembly.tension_loads
    t_node = np.array([offsets[t.fiber_id] + t.node_id for t in loads], dtype=np.int64)
    t_force = np.zeros((len(loads), 2))
    t_k = np.zeros(len(loads))
    t_anchor = np.zeros((len(loads), 2))
    for k, t in enumerate(loads):
        if t.mode is TensionMode.SPRING:
            t_k[k] = t.stiffness
            t_anchor[k] = t.anchor
        else:
            t_force[k] = np.multiply(t.magnitude, t.direction)

    act = assembly.actuation
    return PackedNetwork(
        offsets=offsets,
        pos=pos,
        vel=vel,
        inv_mass=1.0 / cat("masses", np.float64),
        free=free,
        e_i=cat("e_i", np.int64),
        e_j=cat("e_j", np.int64),
        e_rest=cat("e_rest", np.float64),
        e_ea=cat("e_ea", np.float64),
        b_a=cat("b_a", np.int64),
        b_b=cat("b_b", np.int64),
        b_c=cat("b_c", np.int64),
        b_coef=cat("b_coef", np.float64),
        c_a=c_a.reshape(n_c),
        c_b=c_b.reshape(n_c),
        c_k=np.full(n_c, assembly.coupling_stiffness),
        c_c=np.full(n_c, assembly.coupling_damping),
        t_node=t_node.reshape(len(loads)),
        t_force=t_force,
        t_k=t_k,
        t_anchor=t_anchor,
        act_node=int(offsets[act.fiber_id] + act.node_id),
        act_dir=np.asarray(act.direction, dtype=np.float64),
        damping=assembly.fibers[0].material.viscous_damping,
    )


def unpack(packed: PackedNetwork, assembly: NetworkAssembly, **changes) -> NetworkAssembly:
    out = replace(assembly.copy(), **changes)
    for fiber, offset in zip(out.fibers, packed.offsets):
        n = fiber.node_count
        fiber.node_positions[:] = packed.pos[offset : offset + n]
        fiber.node_velocities[:] = packed.vel[offset : offset + n]
    return out


def stable_network_dt(packed: PackedNetwork, safety: float = DEFAULT_SAFETY) -> float:
    """Gershgorin bound on the highest natural frequency, ``safety * 2 / omega_max``.

    For an isolated fiber without hinges this equals the axial CFL bound.
    """
    if not 0.0 < safety <= 1.0:
        raise InvalidArgumentError(f"safety must lie in (0, 1], got {safety!r}")
    row = np.zeros(packed.pos.shape[0])
    k_e = packed.e_ea / packed.e_rest
    np.add.at(row, packed.e_i, 2.0 * k_e)
    np.add.at(row, packed.e_j, 2.0 * k_e)
    if packed.b_a.size:
        l1 = np.linalg.norm(packed.pos[packed.b_b] - packed.pos[packed.b_a], axis=1)
        l2 = np.linalg.norm(packed.pos[packed.b_c] - packed.pos[packed.b_b], axis=1)
        k_b = 8.0 * packed.b_coef / np.minimum(l1, l2) ** 2
        for idx in (packed.b_a, packed.b_b, packed.b_c):
            np.add.at(row, idx, k_b)
    np.add.at(row, packed.c_a, 2.0 * packed.c_k)
    np.add.at(row, packed.c_b, 2.0 * packed.c_k)
    np.add.at(row, packed.t_node, packed.t_k)
    movable = packed.free.max(axis=1) > 0.0
    omega_sq = float(np.max(row[movable] * packed.inv_mass[movable])) if movable.any() else 0.0
    if omega_sq <= 0.0:
        raise InvalidArgumentError("network has no stiffness on any free node")
    return safety * 2.0 / math.sqrt(omega_sq)


def _raise_for_status(packed: PackedNetwork, status: int, step_index: int) -> None:
    if status == kernels.STATUS_OK:
        return
    if status == kernels.STATUS_NONFINITE:
        raise DivergenceError(step_index, "non-finite network state")
    length = float(np.linalg.norm(packed.pos[packed.e_j[status]] - packed.pos[packed.e_i[status]]))
    raise NumericalDegeneracyError(int(status), length)


def hold(
    packed: PackedNetwork, duration: float, dt: float, fmag: float = 0.0, step_offset: int = 0
) -> int:
    """Advance ``packed`` in place for ``duration`` under a constant actuation magnitude."""
    n_steps = max(1, int(math.ceil(duration / dt - 1e-9)))
    ext = np.zeros_like(packed.pos)
    status, steps = kernels.advance(
        packed.pos, packed.vel, packed.inv_mass, packed.free, *packed.topology_args(),
        float(fmag), n_steps, dt, math.exp(-packed.damping * dt), ext,
    )
    _raise_for_status(packed, int(status), step_offset + int(steps))
    return int(steps)


def settle(
    assembly: NetworkAssembly,
    tolerance: float = DEFAULT_SETTLE_TOLERANCE,
    max_time: float = DEFAULT_SETTLE_MAX_TIME,
    safety: float = DEFAULT_SAFETY,
    perturbation: float = PERTURBATION,
    seed: int = 0,
    hold_force: float = 0.0,
) -> NetworkAssembly:
    """Relax the network under its end loads and record readout baselines.

    Converged once the kinetic energy is below ``tolerance`` at two
    consecutive check points (a single check can land on a turning point).
    Each free coordinate then receives a seeded offset of at most
    ``perturbation`` m, and the perturbed positions become the baselines.
    ``hold_force`` keeps a constant actuation force on during the relaxation.
    """
    if assembly.fibers[0].material.viscous_damping <= 0.0:
        raise InvalidArgumentError("settling needs viscous_damping > 0")
    packed = pack(assembly)
    dt = stable_network_dt(packed, safety)
    elapsed = 0.0
    steps = 0
    quiet = 0
    while True:
        steps += hold(packed, SETTLE_CHUNK, dt, hold_force, steps)
        elapsed += SETTLE_CHUNK
        kinetic = packed.kinetic_energy()
        logger.debug("settle t=%.3f s kinetic=%.3e J", elapsed, kinetic)
        quiet = quiet + 1 if kinetic < tolerance else 0
        if quiet >= 2:
            break
        if elapsed >= max_time:
            raise NonConvergenceError(kinetic, max_time)

    if perturbation > 0.0:
        rng = np.random.default_rng(seed)
        packed.pos += rng.uniform(-perturbation, perturbation, size=packed.pos.shape) * packed.free
    logger.info("Settled after %.2f s (%d steps, dt=%.3e s)", elapsed, steps, dt)

    settled = unpack(packed, assembly, settled=True)
    positions = [settled.fibers[p.fiber_id].node_positions[p.node_id] for p in settled.readouts]
    settled.registry = settled.registry.with_baselines(positions)
    return settled


def actuation_force(assembly: NetworkAssembly, u_t: float, force_max: float) -> List[NDArray[np.float64]]:
    """Per-fiber external forces: ``force_max * u_t`` along the actuated fiber's lateral direction."""
    if not math.isfinite(u_t):
        raise InvalidArgumentError(f"input sample must be finite, got {u_t!r}")
    if abs(u_t) > 1.0 + 1e-12:
        raise InvalidArgumentError(f"input sample must satisfy |u| <= 1, got {u_t!r}")
    out = [np.zeros_like(f.node_positions) for f in assembly.fibers]
    act = assembly.actuation
    out[act.fiber_id][act.node_id] = force_max * u_t * np.asarray(act.direction)
    return out


def readout_state(assembly: NetworkAssembly) -> NDArray[np.float64]:
    """``[dx, dy]`` per readout point relative to its baseline, flattened in registry order."""
    current = np.array([assembly.fibers[p.fiber_id].node_positions[p.node_id] for p in assembly.readouts])
    return (current - assembly.registry.baselines()).reshape(-1)


def run_drive(
    assembly: NetworkAssembly,
    drive: Sequence[float],
    sample_rate: float,
    probes: Sequence[Tuple[int, int]],
    baseline: Optional[NDArray[np.float64]] = None,
    safety: float = DEFAULT_SAFETY,
    chunk_samples: int = 2500,
) -> Tuple[NDArray[np.float64], NetworkAssembly]:
    """Drive the actuation node with ``drive`` (N, one value per sample) and record probe displacements.

    Returns ``(record, final_assembly)``; ``record`` has one row per sample and
    ``[dx, dy]`` per ``(fiber, node)`` probe, relative to ``baseline`` (the
    probes' starting positions when omitted).
    """
    drive = np.ascontiguousarray(drive, dtype=np.float64)
    if drive.ndim != 1 or drive.size < 1:
        raise InvalidArgumentError("drive must be a non-empty 1-D series")
    if not np.all(np.isfinite(drive)):
        raise InvalidArgumentError("drive contains non-finite samples")
    packed = pack(assembly)
    probe_nodes = np.array([packed.flat(f, n) for f, n in probes], dtype=np.int64)
    if baseline is None:
        baseline = packed.pos[probe_nodes].copy()
    baseline = np.ascontiguousarray(baseline, dtype=np.float64).reshape(len(probes), 2)

    period = 1.0 / sample_rate
    bound = stable_network_dt(packed, safety)
    substeps = max(1, int(math.ceil(period / bound)))
    dt = period / substeps
    decay = math.exp(-packed.damping * dt)
    ext = np.zeros_like(packed.pos)
    logger.info(
        "Integrating %d samples at %.4g Hz: %d substeps/sample, dt=%.3e s", drive.size, sample_rate, substeps, dt
    )

    record = np.zeros((drive.size, 2 * len(probes)))
    start = 0
    steps = 0
    while True:
        stop = min(start + chunk_samples, drive.size - 1)
        status, taken = kernels.integrate(
            packed.pos, packed.vel, packed.inv_mass, packed.free, *packed.topology_args(),
            drive[start : stop + 1], substeps, dt, decay, ext, probe_nodes, baseline, record[start : stop + 1],
        )
        steps += int(taken)
        _raise_for_status(packed, int(status), steps)
        if stop >= drive.size - 1:
            break
        logger.debug("integrated %d/%d samples", stop, drive.size - 1)
        start = stop
    return record, unpack(packed, assembly)


def simulate(
    assembly: NetworkAssembly,
    signal: InputSignal,
    force_max: Optional[float] = None,
    safety: float = DEFAULT_SAFETY,
) -> ReservoirTrace:
    """Drive a settled network with ``force_max * u(t)`` and capture every readout displacement."""
    if not assembly.settled:
        raise InvalidArgumentError("simulate needs a settled assembly; call settle() first")
    if force_max is None:
        if assembly.spec is None:
            raise InvalidArgumentError("force_max is required for an assembly without a network spec")
        force_max = assembly.spec.input_force_max
    probes = [(p.fiber_id, p.node_id) for p in assembly.readouts]
    features, _ = run_drive(
        assembly, scale_force(signal, force_max), signal.sample_rate, probes, assembly.registry.baselines(), safety
    )
    columns = []
    for index, point in enumerate(assembly.readouts):
        x_name, y_name = point.column_names(index)
        columns.append(FeatureColumn(x_name, index, point.kind.value, "x"))
        columns.append(FeatureColumn(y_name, index, point.kind.value, "y"))
    return ReservoirTrace(
        times=signal.times(),
        features=features,
        feature_meta=columns,
        input=signal,
        registry=assembly.registry.to_dict(),
        metadata={
            "network": assembly.spec.to_dict() if assembly.spec is not None else None,
            "force_max": float(force_max),
            "coupling_stiffness": assembly.coupling_stiffness,
            "coupling_damping": assembly.coupling_damping,
        },
    )
