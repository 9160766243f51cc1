"""Buckling detection on the nonlinear simulator, plus single-span reference problems."""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from src.errors import InvalidArgumentError
from src.filament.material import MaterialParams
from src.filament.mesh import build_filament
from src.network.assembly import (
    ActuationSite,
    Guide,
    NetworkAssembly,
    crossings_on,
    fiber_axis,
    midpoints_on,
    partner_node,
)
from src.network.readouts import ReadoutKind, ReadoutPoint, ReadoutRegistry
from src.network.simulator import run_drive, settle

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD_FRACTION = 0.05
COLUMN_ELEMENTS = 32

Probe = Tuple[int, int, NDArray[np.float64]]


@dataclass(frozen=True)
class BucklingDrive:
    """Smooth ramp to ``peak_force`` (N) at the actuation node, then a hold."""

    peak_force: float
    ramp_time: float = 0.5
    hold_time: float = 2.0
    sample_rate: float = 1000.0

    def profile(self) -> NDArray[np.float64]:
        n_ramp = max(1, int(round(self.ramp_time * self.sample_rate)))
        n_hold = int(round(self.hold_time * self.sample_rate))
        s = np.arange(n_ramp + 1) / n_ramp
        ramp = s * s * (3.0 - 2.0 * s)
        return self.peak_force * np.concatenate([ramp, np.ones(n_hold)])


@dataclass(frozen=True)
class BucklingResult:
    buckled: bool
    max_excursion: float
    threshold: float
    peak_force: float


def _single_fiber(
    span: float,
    material: MaterialParams,
    elements: int,
    actuation_node: int,
    direction: Tuple[float, float],
    clamp_far_end: bool,
) -> NetworkAssembly:
    if elements < 4 or elements % 2:
        raise InvalidArgumentError(f"elements must be even and >= 4, got {elements!r}")
    mesh = build_filament(span, elements, material)
    mesh.clamp_flags[0] = True
    guides = []
    if clamp_far_end:
        mesh.clamp_flags[-1] = True
    else:
        guides.append(Guide(0, elements, 1))
    mid = elements // 2
    registry = ReadoutRegistry(
        points=[ReadoutPoint(0, mid, ReadoutKind.H_MIDPOINT, stations=((0, span / 2.0),))],
        fiber_lengths=[span],
        actuation_station=(0, float(mesh.node_positions[actuation_node, 0])),
        segment_length=span,
        topology="column",
    )
    registry = registry.with_zones().with_baselines([mesh.node_positions[mid]])
    return NetworkAssembly(
        spec=None,
        fibers=[mesh],
        couplings=[],
        tension_loads=[],
        actuation=ActuationSite(0, actuation_node, direction),
        registry=registry,
        coupling_stiffness=0.0,
        coupling_damping=0.0,
        guides=guides,
    )


def pinned_column(span: float, material: Optional[MaterialParams] = None, elements: int = COLUMN_ELEMENTS):
    """Straight fiber along +x, pinned at x=0, on an axial roller at x=span.

    The actuation pushes the roller end along -x, so a positive drive is a
    compressive axial load.
    """
    material = material or MaterialParams()
    return _single_fiber(span, material, elements, elements, (-1.0, 0.0), clamp_far_end=False)


def column_drive(force_max: float, **kwargs) -> BucklingDrive:
    """Drive for a single column carrying the flank share P = F_max/2 of a network load."""
    return BucklingDrive(peak_force=force_max / 2.0, **kwargs)


def flanking_probes(assembly: NetworkAssembly) -> List[Probe]:
    """Midpoints next to the crossings that flank the actuation node, with their fiber's transverse direction.

    A network without bonds probes the midpoints of the actuated fiber itself.
    """
    act = assembly.actuation
    if not assembly.couplings:
        lateral = _lateral(assembly, act.fiber_id)
        return [(act.fiber_id, assembly.readouts[i].node_id, lateral) for i in midpoints_on(assembly, act.fiber_id)]

    bonds = crossings_on(assembly, act.fiber_id)
    below = [b for b in bonds if b[0] <= act.node_id]
    above = [b for b in bonds if b[0] >= act.node_id]
    flanks = set()
    if below:
        flanks.add(max(below))
    if above:
        flanks.add(min(above))

    probes: List[Probe] = []
    for node_on_actuated, other in sorted(flanks):
        lateral = _lateral(assembly, other)
        bond_node = partner_node(assembly, act.fiber_id, node_on_actuated, other)
        nodes = [assembly.readouts[i].node_id for i in midpoints_on(assembly, other)]
        lower = [n for n in nodes if n < bond_node]
        upper = [n for n in nodes if n > bond_node]
        for n in ([max(lower)] if lower else []) + ([min(upper)] if upper else []):
            probes.append((other, n, lateral))
    return probes


def _lateral(assembly: NetworkAssembly, fiber_id: int) -> NDArray[np.float64]:
    axis = fiber_axis(assembly.fibers[fiber_id])
    return np.array([-axis[1], axis[0]])


def detect_buckling(
    assembly: NetworkAssembly,
    drive: BucklingDrive,
    threshold: Optional[float] = None,
    probes: Optional[Sequence[Probe]] = None,
) -> BucklingResult:
    """Ramp to the peak load, hold, and compare the largest transverse probe excursion with ``threshold``.

    ``threshold`` defaults to 5% of the registry's segment length. Divergence
    of the simulation propagates as :class:`DivergenceError`.
    """
    if not assembly.settled:
        raise InvalidArgumentError("detect_buckling needs a settled, perturbed assembly")
    if threshold is None:
        threshold = DEFAULT_THRESHOLD_FRACTION * assembly.registry.segment_length
    probes = list(probes) if probes is not None else flanking_probes(assembly)
    if not probes:
        raise InvalidArgumentError("no probe points to monitor")
    record, _ = run_drive(assembly, drive.profile(), drive.sample_rate, [(f, n) for f, n, _ in probes])
    transverse = [np.abs(record[:, 2 * k : 2 * k + 2] @ lateral) for k, (_, _, lateral) in enumerate(probes)]
    excursion = float(np.max(transverse))
    result = BucklingResult(excursion > threshold, excursion, float(threshold), drive.peak_force)
    logger.info(
        "Buckling check at %.4g N: excursion %.3e m vs threshold %.3e m -> %s",
        drive.peak_force, excursion, threshold, "buckled" if result.buckled else "straight",
    )
    return result


def static_midpoint_deflection(
    span: float,
    force: float,
    material: Optional[MaterialParams] = None,
    elements: int = COLUMN_ELEMENTS,
    damping: float = 200.0,
    max_time: float = 5.0,
) -> float:
    """Settled transverse deflection (m) of a pinned-pinned span under a constant central load."""
    material = (material or MaterialParams()).with_damping(damping)
    mid = elements // 2
    column = _single_fiber(span, material, elements, mid, (0.0, 1.0), clamp_far_end=True)
    # settle to a tiny fraction of the expected strain energy
    expected = force * span**3 / (48.0 * material.bending_stiffness)
    tolerance = max(1e-8 * abs(force) * expected, 1e-30)
    loaded = settle(column, tolerance=tolerance, max_time=max_time, perturbation=0.0, hold_force=force)
    deflection = float(loaded.fibers[0].node_positions[mid, 1])
    logger.debug("Static deflection %.4e m (beam theory %.4e m)", deflection, expected)
    return deflection
