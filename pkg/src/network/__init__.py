"""Fiber-network assembly and simulation."""
from .assembly import (
    ActuationSite,
    Coupling,
    Guide,
    NetworkAssembly,
    TensionLoad,
    assemble,
    coupling_forces,
)
from .readouts import ReadoutKind, ReadoutPoint, ReadoutRegistry, Zone
from .simulator import (
    PackedNetwork,
    actuation_force,
    pack,
    readout_state,
    run_drive,
    settle,
    simulate,
    stable_network_dt,
)
from .topology import NetworkSpec, TensionMode, Topology, TopologyKind

__all__ = [
    "ActuationSite",
    "Coupling",
    "Guide",
    "NetworkAssembly",
    "NetworkSpec",
    "PackedNetwork",
    "ReadoutKind",
    "ReadoutPoint",
    "ReadoutRegistry",
    "TensionLoad",
    "TensionMode",
    "Topology",
    "TopologyKind",
    "Zone",
    "actuation_force",
    "assemble",
    "coupling_forces",
    "pack",
    "readout_state",
    "run_drive",
    "settle",
    "simulate",
    "stable_network_dt",
]
