"""Drive-signal generation and resampling."""
from .spline_input import (
    InputSignal,
    SignalSpec,
    decimate,
    generate_spline_input,
    normalize_to_range,
    scale_force,
    signal_from_csv,
    signal_to_csv,
)

__all__ = [
    "InputSignal",
    "SignalSpec",
    "decimate",
    "generate_spline_input",
    "normalize_to_range",
    "scale_force",
    "signal_from_csv",
    "signal_to_csv",
]
