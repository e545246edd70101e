"""Static plotly figures rendered from the result CSVs of a results directory.

Each figure is written as a standalone HTML file under `<dir>/figures/`.
Error bars are the 95% confidence half-widths from aggregate.csv.
"""

import logging
from pathlib import Path

import pandas as pd
import plotly.express as px
import plotly.graph_objects as go

from src.metrics.report import CELL_CLASS, read_csv

logger = logging.getLogger(__name__)

_FONT = dict(family="Inter,-apple-system,BlinkMacSystemFont,'Segoe UI',sans-serif", size=12, color="#374151")
_MARGIN = dict(l=4, r=4, t=40, b=4)
_COLORS = ["#1E3A5F", "#2563EB", "#0EA5E9", "#06B6D4", "#10B981", "#8B5CF6", "#F59E0B", "#EF4444"]

# KPI -> (axis title, display scale)
_KPI_AXES: dict[str, tuple[str, float]] = {
    "mean_delay": ("Mean delay (ms)", 1e3),
    "p95_delay": ("95th percentile delay (ms)", 1e3),
    "violation_ratio": ("Deadline violation ratio", 1.0),
    "gbr_satisfaction": ("GBR satisfaction", 1.0),
    "throughput": ("Throughput (Mbit/s)", 1e-6),
    "jain_index": ("Jain index (raw)", 1.0),
    "jain_index_fair": ("Jain index (fair-share)", 1.0),
}


def _base_layout(**kw) -> dict:
    _ax = dict(showgrid=True, gridcolor="#F1F5F9", linecolor="#E2E8F0", tickcolor="rgba(0,0,0,0)")
    layout = {
        "plot_bgcolor": "white", "paper_bgcolor": "white",
        "font": _FONT, "margin": _MARGIN,
        "showlegend": kw.pop("showlegend", True),
        "xaxis": {**_ax, **kw.pop("xaxis", {})},
        "yaxis": {**_ax, **kw.pop("yaxis", {})},
    }
    layout.update(kw)
    return layout


def _scaled(df: pd.DataFrame, kpi: str) -> tuple[pd.DataFrame, str]:
    title, scale = _KPI_AXES.get(kpi, (kpi, 1.0))
    return df.assign(mean=df["mean"] * scale, ci95=df["ci95"] * scale), title


def class_kpi_figure(kpis: pd.DataFrame, kpi: str) -> go.Figure:
    """Grouped bars: one group per traffic class, one bar per scheduler."""
    rows = kpis[(kpis["kpi"] == kpi) & (kpis["class"] != CELL_CLASS)].dropna(subset=["mean"])
    rows, title = _scaled(rows, kpi)
    fig = px.bar(
        rows, x="class", y="mean", color="scheduler", error_y="ci95",
        barmode="group", color_discrete_sequence=_COLORS,
    )
    fig.update_layout(**_base_layout(title=title, xaxis_title="", yaxis_title=title))
    return fig


def fairness_figure(kpis: pd.DataFrame) -> go.Figure:
    rows = kpis[kpis["kpi"].isin(["jain_index", "jain_index_fair"])].dropna(subset=["mean"])
    fig = px.bar(
        rows, x="scheduler", y="mean", color="kpi", error_y="ci95",
        barmode="group", color_discrete_sequence=_COLORS,
    )
    fig.update_layout(**_base_layout(
        title="Jain fairness index", xaxis_title="", yaxis_title="Jain index",
        yaxis=dict(range=[0, 1.05]),
    ))
    return fig


def sensitivity_figure(table: pd.DataFrame) -> go.Figure:
    """Relative change against the balanced weights for delay and fairness KPIs."""
    picked = table[
        ((table["kpi"] == "mean_delay") & (table["class"] != CELL_CLASS))
        | (table["kpi"] == "jain_index_fair")
    ].dropna(subset=["change_vs_balanced"])
    picked = picked.assign(
        metric=picked["class"] + " " + picked["kpi"],
        change=picked["change_vs_balanced"] * 100,
    )
    fig = px.bar(
        picked, x="metric", y="change", color="config",
        barmode="group", color_discrete_sequence=_COLORS,
    )
    fig.update_layout(**_base_layout(
        title="Change vs balanced weights", xaxis_title="", yaxis_title="Change (%)",
    ))
    return fig


def scalability_figure(table: pd.DataFrame) -> go.Figure:
    rows = table.assign(
        mean_us=table["mean_runtime"] * 1e6,
        p99_us=table["p99_runtime"] * 1e6,
    )
    fig = px.line(
        rows, x="ues", y="mean_us", color="scheduler", markers=True,
        log_x=True, log_y=True, color_discrete_sequence=_COLORS,
    )
    fig.update_layout(**_base_layout(
        title="Scheduling-call runtime", xaxis_title="UEs", yaxis_title="Mean runtime (us)",
    ))
    return fig


def _save(fig: go.Figure, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.write_html(path, include_plotlyjs="cdn", full_html=True)
    logger.info("Wrote %s", path)
    return path


def render_all(result_dir: Path) -> list[Path]:
    """Render every figure whose source CSV exists in a results directory.

    Raises:
        FileNotFoundError: If the directory holds none of the result CSVs.
    """
    out = result_dir / "figures"
    written: list[Path] = []

    aggregate = result_dir / "aggregate.csv"
    if aggregate.exists():
        kpis = read_csv(aggregate)
        for kpi in ("mean_delay", "violation_ratio", "gbr_satisfaction", "throughput"):
            written.append(_save(class_kpi_figure(kpis, kpi), out / f"{kpi}.html"))
        written.append(_save(fairness_figure(kpis), out / "fairness.html"))

    sensitivity = result_dir / "sensitivity.csv"
    if sensitivity.exists():
        written.append(_save(sensitivity_figure(read_csv(sensitivity)), out / "sensitivity.html"))

    scalability = result_dir / "scalability.csv"
    if scalability.exists():
        written.append(_save(scalability_figure(read_csv(scalability)), out / "scalability.html"))

    if not written:
        raise FileNotFoundError(
            f"no aggregate.csv, sensitivity.csv or scalability.csv in {result_dir}"
        )
    return written
