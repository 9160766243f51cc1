"""SVG figures for capacity reports, sweeps and feature comparisons.

Every figure is rendered with the Agg backend into memory and written
atomically. SVG ids are salted with a fixed string and the date metadata is
dropped, so the same data always produces the same bytes.
"""
import io
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from src.analysis.features import GroupScore  # noqa: E402
from src.analysis.predictors import critical_spacing, force_for_deflection  # noqa: E402
from src.analysis.sweep import grid_matrix  # noqa: E402
from src.filament.material import MaterialParams  # noqa: E402
from src.files import write_bytes_atomic  # noqa: E402
from src.reservoir.report import CapacityReport  # noqa: E402
from src.reservoir.tasks import NarmaResult  # noqa: E402

logger = logging.getLogger(__name__)

REFERENCE_DEFLECTION = 13.3e-3
plt.rcParams["svg.hashsalt"] = "fiberweb"


def save_svg(fig: plt.Figure, path: Union[str, Path]) -> Path:
    buffer = io.BytesIO()
    fig.savefig(buffer, format="svg", metadata={"Date": None})
    plt.close(fig)
    out = write_bytes_atomic(path, buffer.getvalue())
    logger.info("Wrote figure %s", out)
    return out


def _values(items: Sequence[Optional[float]]) -> np.ndarray:
    return np.array([np.nan if v is None else v for v in items], dtype=float)


def plot_legendre(report: CapacityReport, path: Union[str, Path]) -> Path:
    """Per-order Legendre capacities with C_nl in the title."""
    curve = report.legendre
    if curve is None:
        raise ValueError("report carries no Legendre capacities")
    fig, ax = plt.subplots(figsize=(6, 4))
    orders = [int(k) for k in curve.keys()]
    ax.bar(orders, np.clip(_values(curve.tests()), 0.0, None), color="tab:blue")
    ax.set_xticks(orders)
    ax.set_xlabel("Legendre order")
    ax.set_ylabel("test capacity")
    ax.set_ylim(0.0, 1.0)
    ax.set_title(f"Nonlinear capacity C_nl = {report.c_nl:.3f}")
    return save_svg(fig, path)


def plot_memory_curve(report: CapacityReport, path: Union[str, Path]) -> Path:
    curve = report.memory
    if curve is None:
        raise ValueError("report carries no memory capacities")
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(curve.keys(), np.clip(_values(curve.tests()), 0.0, None), marker="o", markersize=3, color="tab:orange")
    ax.set_xlabel("lag (s)")
    ax.set_ylabel("test capacity")
    ax.set_ylim(0.0, 1.05)
    ax.set_title(f"Memory capacity C_m = {report.c_m:.3f}")
    return save_svg(fig, path)


def plot_narma(results: Sequence[NarmaResult], path: Union[str, Path], window: int = 200) -> Path:
    """Prediction overlay for each order (left) and the error summary across orders (right)."""
    if not results:
        raise ValueError("no NARMA results to plot")
    fig, (ax_trace, ax_err) = plt.subplots(1, 2, figsize=(11, 4), gridspec_kw={"width_ratios": [2, 1]})
    for r in results:
        if r.predictions is None:
            continue
        n = min(window, len(r.target))
        if r is results[0]:
            ax_trace.plot(np.arange(n), r.target[:n], color="black", linewidth=1.2, label="target")
        ax_trace.plot(np.arange(n), r.predictions[:n], linewidth=0.9, label=f"NARMA-{r.order}")
    ax_trace.set_xlabel("test step")
    ax_trace.set_ylabel("y")
    ax_trace.legend(fontsize="small")

    labels = [f"{r.order}" for r in results]
    x = np.arange(len(results))
    ax_err.bar(x - 0.25, [r.rmse for r in results], width=0.25, label="RMSE")
    ax_err.bar(x, [r.idr for r in results], width=0.25, label="IDR")
    ax_err.bar(x + 0.25, [abs(r.bias) for r in results], width=0.25, label="|bias|")
    ax_err.set_xticks(x)
    ax_err.set_xticklabels(labels)
    ax_err.set_xlabel("NARMA order")
    ax_err.legend(fontsize="small")
    fig.tight_layout()
    return save_svg(fig, path)


def _edges(centers: Sequence[float]) -> np.ndarray:
    c = np.asarray(centers, dtype=float)
    if len(c) == 1:
        half = 0.5 * abs(c[0]) if c[0] else 0.5
        return np.array([c[0] - half, c[0] + half])
    mids = 0.5 * (c[1:] + c[:-1])
    return np.concatenate([[c[0] - (mids[0] - c[0])], mids, [c[-1] + (c[-1] - mids[-1])]])


def plot_capacity_heatmap(
    frame: pd.DataFrame,
    metric: str,
    path: Union[str, Path],
    material: Optional[MaterialParams] = None,
    deflection: float = REFERENCE_DEFLECTION,
) -> Path:
    """``metric`` over (force_max, node_spacing); failed points are masked and crossed.

    The constant-deflection force curve and the B = 1 contour are overlaid.
    """
    material = material or MaterialParams()
    values, spacings, forces = grid_matrix(frame, metric, "node_spacing", "force_max")
    fig, ax = plt.subplots(figsize=(6.5, 5))
    mesh = ax.pcolormesh(_edges(forces), _edges(spacings), np.ma.masked_invalid(values), cmap="viridis", shading="flat")
    fig.colorbar(mesh, ax=ax, label=metric)

    failed = frame[frame["status"] != "ok"]
    if len(failed):
        ax.scatter(failed["force_max"], failed["node_spacing"], marker="x", color="red", label="failed")

    e_mod, inertia = material.youngs_modulus, material.second_moment
    s_line = np.linspace(min(spacings), max(spacings), 100)
    ax.plot(
        [force_for_deflection(deflection, e_mod, inertia, s) for s in s_line],
        s_line,
        color="white",
        linestyle="--",
        label=f"{deflection * 1e3:.1f} mm deflection",
    )
    f_line = np.linspace(max(min(forces), 1e-12), max(forces), 100)
    ax.plot(f_line, [critical_spacing(f, e_mod, inertia) for f in f_line], color="tab:red", label="B = 1")
    ax.set_xlim(_edges(forces)[[0, -1]])
    ax.set_ylim(_edges(spacings)[[0, -1]])
    ax.set_xlabel("F_max (N)")
    ax.set_ylabel("spacing (m)")
    ax.legend(fontsize="small", loc="upper left")
    return save_svg(fig, path)


def plot_capacity_vs_buckling(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    ok = frame[frame["status"] == "ok"]
    fig, ax = plt.subplots(figsize=(6, 4))
    for metric, color in (("C_nl", "tab:blue"), ("C_m", "tab:orange")):
        if metric in ok:
            ax.scatter(ok["buckling_number"], ok[metric], s=14, color=color, label=metric)
    ax.axvline(1.0, color="gray", linestyle=":", label="B = 1")
    ax.set_xlabel("buckling number B")
    ax.set_ylabel("capacity")
    ax.legend(fontsize="small")
    return save_svg(fig, path)


def plot_feature_groups(scores: Sequence[GroupScore], path: Union[str, Path]) -> Path:
    labels: List[str] = [f"{s.group.value}\n{s.columns}/{s.total_columns}" for s in scores]
    x = np.arange(len(scores))
    fig, ax = plt.subplots(figsize=(max(6, 1.1 * len(scores)), 4))
    ax.bar(x - 0.2, [s.c_nl for s in scores], width=0.4, label="C_nl")
    ax.bar(x + 0.2, [s.c_m for s in scores], width=0.4, label="C_m")
    ax.set_xticks(x)
    ax.set_xticklabels(labels, fontsize="small")
    ax.set_ylabel("capacity")
    ax.legend(fontsize="small")
    fig.tight_layout()
    return save_svg(fig, path)
