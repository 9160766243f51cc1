"""Readout feature groups and the down-selection comparison."""
import enum
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence

import pandas as pd

from src.errors import InvalidArgumentError, InvalidGroupError
from src.network.readouts import DEFAULT_ACTUATION_RADIUS, DEFAULT_SPRING_BAND, ReadoutKind, ReadoutRegistry
from src.reservoir.readout import RidgeConfig, RidgeSolver
from src.reservoir.tasks import DEFAULT_HORIZON, DEFAULT_LAG_STEP, memory_capacity, nonlinear_capacity
from src.reservoir.trace import ReservoirTrace

logger = logging.getLogger(__name__)

FEATURE_ALPHA = 0.1


class FeatureGroup(str, enum.Enum):
    CROSSINGS_X = "crossings_x"
    CROSSINGS_Y = "crossings_y"
    H_MID_X = "h_mid_x"
    H_MID_Y = "h_mid_y"
    V_MID_X = "v_mid_x"
    V_MID_Y = "v_mid_y"
    MIDPOINT_LATERAL = "midpoint_lateral"
    NEAR_ACTUATION = "near_actuation"
    NEAR_SPRINGS = "near_springs"
    ALL = "all"


ELEMENTARY = {
    FeatureGroup.CROSSINGS_X: (ReadoutKind.CROSSING, 0),
    FeatureGroup.CROSSINGS_Y: (ReadoutKind.CROSSING, 1),
    FeatureGroup.H_MID_X: (ReadoutKind.H_MIDPOINT, 0),
    FeatureGroup.H_MID_Y: (ReadoutKind.H_MIDPOINT, 1),
    FeatureGroup.V_MID_X: (ReadoutKind.V_MIDPOINT, 0),
    FeatureGroup.V_MID_Y: (ReadoutKind.V_MIDPOINT, 1),
}


def parse_group(name) -> FeatureGroup:
    try:
        return FeatureGroup(name)
    except ValueError as e:
        valid = ", ".join(g.value for g in FeatureGroup)
        raise InvalidGroupError(f"unknown feature group {name!r}; expected one of: {valid}") from e


def _both(points: Iterable[int]) -> List[int]:
    return sorted(c for p in points for c in (2 * p, 2 * p + 1))


def select_features(
    registry: ReadoutRegistry,
    group: FeatureGroup,
    radius: float = DEFAULT_ACTUATION_RADIUS,
    band: float = DEFAULT_SPRING_BAND,
) -> List[int]:
    """Sorted column indices of ``group``; ``radius``/``band`` are in segments."""
    group = parse_group(group)
    if group in ELEMENTARY:
        kind, component = ELEMENTARY[group]
        columns = [2 * i + component for i, p in enumerate(registry.points) if p.kind is kind]
    elif group is FeatureGroup.MIDPOINT_LATERAL:
        columns = sorted(
            select_features(registry, FeatureGroup.H_MID_Y) + select_features(registry, FeatureGroup.V_MID_X)
        )
    elif group is FeatureGroup.NEAR_ACTUATION:
        columns = _both(registry.near_actuation(radius))
    elif group is FeatureGroup.NEAR_SPRINGS:
        columns = _both(registry.near_springs(band))
    else:
        columns = list(range(registry.feature_count))
    if not columns:
        raise InvalidGroupError(f"feature group {group.value!r} selects no columns on {registry.topology}")
    return columns


def registry_of(trace: ReservoirTrace) -> ReadoutRegistry:
    if trace.registry is None:
        raise InvalidArgumentError("trace carries no readout registry; feature groups need a simulated trace")
    return ReadoutRegistry.from_dict(trace.registry)


def dedupe_groups(groups: Sequence[str]) -> List[FeatureGroup]:
    seen: List[FeatureGroup] = []
    for name in groups:
        group = parse_group(name)
        if group in seen:
            logger.warning("Duplicate feature group %s ignored", group.value)
            continue
        seen.append(group)
    return seen


@dataclass
class GroupScore:
    group: FeatureGroup
    columns: int
    total_columns: int
    c_nl: float
    c_m: float
    c_nl_ratio: Optional[float] = None
    c_m_ratio: Optional[float] = None


def compare_feature_groups(
    trace: ReservoirTrace,
    groups: Sequence[str],
    ridge: Optional[RidgeConfig] = None,
    radius: float = DEFAULT_ACTUATION_RADIUS,
    band: float = DEFAULT_SPRING_BAND,
    horizon: float = DEFAULT_HORIZON,
    lag_step: float = DEFAULT_LAG_STEP,
) -> List[GroupScore]:
    """C_nl and C_m per group, with ratios to the all-features baseline."""
    ridge = ridge or RidgeConfig(alpha=FEATURE_ALPHA)
    registry = registry_of(trace)
    wanted = dedupe_groups(list(groups))
    order = [FeatureGroup.ALL] + [g for g in wanted if g is not FeatureGroup.ALL]
    scores: Dict[FeatureGroup, GroupScore] = {}
    for group in order:
        columns = select_features(registry, group, radius, band)
        sub = trace.select(columns)
        solver = RidgeSolver.for_trace(sub, ridge)
        c_nl = nonlinear_capacity(sub, ridge, solver=solver).aggregate
        c_m = memory_capacity(sub, ridge, horizon, lag_step, solver=solver).aggregate
        scores[group] = GroupScore(group, len(columns), registry.feature_count, c_nl, c_m)
        logger.info("Group %s: %d of %d columns", group.value, len(columns), registry.feature_count)
    base = scores[FeatureGroup.ALL]
    for score in scores.values():
        score.c_nl_ratio = score.c_nl / base.c_nl if base.c_nl > 0 else None
        score.c_m_ratio = score.c_m / base.c_m if base.c_m > 0 else None
    return [scores[g] for g in (wanted if wanted else [FeatureGroup.ALL])]


def scores_frame(scores: Sequence[GroupScore]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "group": s.group.value,
                "columns": s.columns,
                "total_columns": s.total_columns,
                "C_nl": s.c_nl,
                "C_m": s.c_m,
                "C_nl_ratio": s.c_nl_ratio,
                "C_m_ratio": s.c_m_ratio,
            }
            for s in scores
        ]
    )
