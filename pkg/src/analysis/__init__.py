"""Design predictors, buckling checks, feature groups and sweeps.

``plots`` is imported on demand so the numerical modules stay free of matplotlib.
"""
from .buckling import (
    BucklingDrive,
    BucklingResult,
    column_drive,
    detect_buckling,
    flanking_probes,
    pinned_column,
    static_midpoint_deflection,
)
from .features import FeatureGroup, GroupScore, compare_feature_groups, parse_group, scores_frame, select_features
from .predictors import (
    BucklingQuery,
    buckling_number,
    critical_spacing,
    deflection_for_force,
    force_for_buckling_number,
    force_for_deflection,
)
from .sweep import SweepGrid, evaluate_point, run_sweep, split_timings

__all__ = [
    "BucklingDrive",
    "BucklingQuery",
    "BucklingResult",
    "FeatureGroup",
    "GroupScore",
    "SweepGrid",
    "buckling_number",
    "column_drive",
    "compare_feature_groups",
    "critical_spacing",
    "deflection_for_force",
    "detect_buckling",
    "evaluate_point",
    "flanking_probes",
    "force_for_buckling_number",
    "force_for_deflection",
    "parse_group",
    "pinned_column",
    "run_sweep",
    "scores_frame",
    "select_features",
    "split_timings",
    "static_midpoint_deflection",
]
