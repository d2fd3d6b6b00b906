"""Figure builders for the simulator artifacts.

Everything renders through the Agg backend with a fixed style, so a given
set of input files always produces the same bytes. Builders return the
Figure so tests can inspect structure (lines, markers, annotations) without
decoding images; key elements carry gids for that purpose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .artifacts import (ArtifactError, discover, load_cells,  # noqa: E402
                        load_grover_reports, load_scenario)

WEATHER_COLORS = {
    "clear": "#1f77b4",
    "fog": "#7f7f7f",
    "rain": "#2ca02c",
    "snow": "#9467bd",
}
FALLBACK_COLOR = "#d62728"

VERDICT_COLORS = {
    "secure": "#2ca02c",
    "abort_quantum": "#ff7f0e",
    "reject_classical": "#d62728",
    "abort_both": "#7f0000",
}

SWEEP_METRICS = [
    ("mean_sifted_len", "mean sifted key length (bits)"),
    ("mean_qber", "mean QBER"),
    ("abort_rate", "abort rate"),
    ("auth_success_rate", "auth success rate"),
]


@dataclass(frozen=True)
class PlotSpec:
    """One rendering job: where to read, where to write, how to encode."""

    in_dir: Path
    out_dir: Path
    fmt: str = "png"
    dpi: int = 120

    def __post_init__(self):
        if self.fmt not in ("png", "svg"):
            raise ValueError(f"unsupported format {self.fmt!r}, use png or svg")
        if self.dpi < 30:
            raise ValueError("dpi too small to render text")


def save_figure(fig, path: str | Path, fmt: str = "png", dpi: int = 120) -> Path:
    """Write the figure without volatile metadata (no embedded dates)."""
    path = Path(path)
    metadata = {"Date": None} if fmt == "svg" else None
    fig.savefig(path, format=fmt, dpi=dpi, metadata=metadata,
                facecolor="white")
    return path


def scenario_panel(ax, doc: dict) -> None:
    """One scenario as a QBER bar against the abort threshold, plus badges."""
    threshold = float(doc["qber_threshold"])
    qber = doc["qber"]
    color = VERDICT_COLORS.get(doc["verdict"], FALLBACK_COLOR)
    if qber is None:
        ax.bar([0], [0], width=0.5, color="none", edgecolor=color, hatch="//")
        ax.text(0, 0.02, "no estimate", ha="center", fontsize=8)
    else:
        ax.bar([0], [float(qber)], width=0.5, color=color)
    line = ax.axhline(threshold, color="#d62728", linestyle="--", linewidth=1)
    line.set_gid("threshold-line")
    ax.text(0.42, threshold, f"threshold {threshold}", fontsize=7,
            va="bottom", color="#d62728")

    if doc["sig_ok"] is None:
        auth = "no package"
    else:
        auth = (f"sig {'ok' if doc['sig_ok'] else 'BAD'} / "
                f"hmac {'ok' if doc['hmac_ok'] else 'BAD'}")
    badge = ax.text(0.5, 0.92, doc["verdict"], transform=ax.transAxes,
                    ha="center", fontsize=10, fontweight="bold", color=color)
    badge.set_gid("verdict-badge")
    ax.text(0.5, 0.84, auth, transform=ax.transAxes, ha="center", fontsize=8)

    ax.set_title(f"scenario {doc['scenario']}")
    ax.set_xlim(-0.75, 0.75)
    ax.set_ylim(0.0, 0.35)
    ax.set_xticks([])
    ax.set_ylabel("QBER")


def plot_scenario(doc: dict):
    """Single scenario panel figure."""
    fig, ax = plt.subplots(figsize=(3.2, 3.2), constrained_layout=True)
    scenario_panel(ax, doc)
    return fig


def plot_scenarios(docs: list[dict]):
    """Combined grid of scenario panels, two per row."""
    if not docs:
        raise ValueError("no scenario outcomes given")
    cols = min(2, len(docs))
    rows = math.ceil(len(docs) / cols)
    fig, axes = plt.subplots(rows, cols, figsize=(3.2 * cols, 3.2 * rows),
                             constrained_layout=True, squeeze=False)
    flat = [ax for row in axes for ax in row]
    for ax, doc in zip(flat, docs):
        scenario_panel(ax, doc)
    for ax in flat[len(docs):]:
        ax.set_visible(False)
    return fig


def plot_grover(report: dict):
    """Detection curve P(k) for k = 0..7 with the first-peak marker."""
    probs = [float(p) for p in report["probs"]]
    ks = list(range(len(probs)))
    fig, ax = plt.subplots(figsize=(4.2, 3.2), constrained_layout=True)
    curve, = ax.plot(ks, probs, marker="o", color="#1f77b4")
    curve.set_gid("grover-curve")
    k_star = report["k_star"]
    if k_star is not None:
        marker, = ax.plot([k_star], [probs[k_star]], marker="*",
                          markersize=16, color="#d62728", linestyle="none")
        marker.set_gid("kstar-marker")
        ax.annotate(f"k*={k_star}", (k_star, probs[k_star]),
                    textcoords="offset points", xytext=(8, -2), fontsize=9)
    ax.set_xticks(ks)
    ax.set_ylim(0.0, 1.0)
    ax.set_xlabel("iterations k")
    ax.set_ylabel("P(success)")
    ax.set_title(f"N={report['n']}  M={report['m']}")
    ax.grid(True, alpha=0.3)
    return fig


def plot_sweep(cells: list[dict]):
    """2x2 metric grid over distance, one line per weather condition."""
    weathers = sorted({c["weather"] for c in cells})
    fig, axes = plt.subplots(2, 2, figsize=(9.0, 6.5), constrained_layout=True)
    for ax, (metric, label) in zip(axes.flat, SWEEP_METRICS):
        for weather in weathers:
            series = sorted((c["distance_km"], c[metric]) for c in cells
                            if c["weather"] == weather)
            xs = [d for d, _ in series]
            # None (no surviving estimate in the cell) breaks the line
            ys = [math.nan if v is None else v for _, v in series]
            line, = ax.plot(xs, ys, marker="o", label=weather,
                            color=WEATHER_COLORS.get(weather, FALLBACK_COLOR))
            line.set_gid(f"sweep-{metric}-{weather}")
        ax.set_title(label)
        ax.set_xlabel("distance (km)")
        ax.grid(True, alpha=0.3)
        if metric in ("abort_rate", "auth_success_rate"):
            ax.set_ylim(-0.05, 1.05)
    axes.flat[0].legend(loc="best", fontsize=8)
    return fig


def render_all(spec: PlotSpec) -> list[Path]:
    """Render every figure the input directory supports; return paths."""
    found = discover(spec.in_dir)
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def emit(fig, stem: str) -> None:
        path = spec.out_dir / f"{stem}.{spec.fmt}"
        save_figure(fig, path, spec.fmt, spec.dpi)
        plt.close(fig)
        written.append(path)

    grover_reports: dict[tuple, dict] = {}

    if "scenarios" in found:
        docs = [load_scenario(p) for p in found["scenarios"]]
        for doc in docs:
            emit(plot_scenario(doc), f"scenario_{doc['scenario']}")
            report = doc.get("grover")
            if report is not None:
                grover_reports.setdefault((report["n"], report["m"]), report)
        emit(plot_scenarios(docs), "scenarios_grid")

    if "grover" in found:
        for report in load_grover_reports(found["grover"]):
            grover_reports.setdefault((report["n"], report["m"]), report)

    for (n, m), report in sorted(grover_reports.items()):
        emit(plot_grover(report), f"grover_n{n}_m{m}")

    if "cells" in found:
        emit(plot_sweep(load_cells(found["cells"])), "sweep_grid")

    return written
