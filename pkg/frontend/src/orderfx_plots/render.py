"""Render orderfx result CSVs into the six figure layouts.

This package is a pure consumer of the result-CSV schema; it never imports
the simulation engine.  Each figure is a set of panels (one panel per
metric x variant combination); each panel draws one error-bar line per
predictor, with the points taken from the CSV rows in file order -- the
renderer never reorders or edits the numbers, and the round-trip test
recovers the CSV rows exactly from the drawn artists.

Output is deterministic byte-for-byte for a fixed input and matplotlib
version: the Agg backend is forced, SVG ids are salted with a constant, and
date metadata is stripped.

Command line::

    render_figures <csv> <figure-id> <out-dir>
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "orderfx-plots"

import matplotlib.pyplot as plt

# The public result-CSV schema (the contract with the engine).
CSV_COLUMNS = [
    "scenario",
    "m",
    "n",
    "f_dist",
    "g_dist",
    "variance_mode",
    "gamma_star",
    "predictor",
    "metric",
    "value",
    "std_error",
    "replications",
    "seed",
]

METRIC_LABELS = {
    "total_ordered_loss": "total ordered squared-error loss",
    "mse_max": "MSE of the largest ordered effect",
}

# One style per predictor token; every token present in a CSV must map to
# exactly one series.
SERIES_STYLES = {
    "direct": dict(color="tab:gray", linestyle="-", marker="o"),
    "linear@star": dict(color="tab:red", linestyle=":", marker="o"),
    "linear@sqrt_star": dict(color="black", linestyle="-", marker="s"),
    "linear@opt": dict(color="tab:blue", linestyle="--", marker="^"),
    "linear@approx": dict(color="tab:purple", linestyle="-.", marker="v"),
    "empirical_best": dict(color="tab:green", linestyle="--", marker="d"),
    "shen_louis": dict(color="tab:orange", linestyle="-.", marker="x"),
}

# figure id -> which CSV columns distinguish panels within a metric
PANEL_KEYS = {
    "fig1": ("m",),
    "fig2": ("f_dist",),
    "fig3": ("f_dist",),
    "fig1S": ("g_dist", "m"),
    "fig2S": ("m",),
    "fig3S": ("m",),
}


class RenderError(ValueError):
    """Raised for schema mismatches, empty inputs, or unknown figures."""


@dataclass(frozen=True)
class Series:
    predictor: str
    gamma_star: tuple[float, ...]
    value: tuple[float, ...]
    std_error: tuple[float, ...]


@dataclass(frozen=True)
class Panel:
    figure_id: str
    metric: str
    key: tuple[tuple[str, str], ...]  # ((column, value), ...)
    series: tuple[Series, ...]

    @property
    def slug(self) -> str:
        parts = [self.figure_id, self.metric] + [f"{col}{val}" for col, val in self.key]
        return "_".join(parts)

    @property
    def title(self) -> str:
        keys = ", ".join(f"{col}={val}" for col, val in self.key)
        return f"{self.figure_id}: {METRIC_LABELS.get(self.metric, self.metric)} ({keys})"


def read_rows(csv_path) -> list[dict]:
    path = Path(csv_path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_COLUMNS:
            raise RenderError(
                f"{path}: expected columns {CSV_COLUMNS}, found {reader.fieldnames}"
            )
        rows = list(reader)
    if not rows:
        raise RenderError(f"{path}: no rows")
    return rows


def build_panels(rows: list[dict], figure_id: str) -> list[Panel]:
    """Group CSV rows into panels, preserving row order within each series."""
    if figure_id not in PANEL_KEYS:
        known = ", ".join(sorted(PANEL_KEYS))
        raise RenderError(f"unknown figure id {figure_id!r}; known: {known}")
    rows = [r for r in rows if r["scenario"] == figure_id]
    if not rows:
        raise RenderError(f"no rows for scenario {figure_id!r}")
    key_cols = PANEL_KEYS[figure_id]
    unknown = {r["predictor"] for r in rows} - set(SERIES_STYLES)
    if unknown:
        raise RenderError(f"no series style for predictors: {sorted(unknown)}")

    panels: dict[tuple, dict[str, list[tuple[float, float, float]]]] = {}
    panel_order: list[tuple] = []
    for r in rows:
        key = (r["metric"], tuple((c, r[c]) for c in key_cols))
        if key not in panels:
            panels[key] = {}
            panel_order.append(key)
        bucket = panels[key].setdefault(r["predictor"], [])
        bucket.append((float(r["gamma_star"]), float(r["value"]), float(r["std_error"])))

    out = []
    for key in panel_order:
        metric, panel_key = key
        series = tuple(
            Series(
                predictor=token,
                gamma_star=tuple(p[0] for p in pts),
                value=tuple(p[1] for p in pts),
                std_error=tuple(p[2] for p in pts),
            )
            for token, pts in panels[key].items()
        )
        out.append(Panel(figure_id=figure_id, metric=metric, key=panel_key, series=series))
    return out


def build_figure(panel: Panel):
    """Draw one panel; returns (figure, {predictor: Line2D}) for inspection."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=120)
    lines = {}
    for series in panel.series:
        container = ax.errorbar(
            series.gamma_star,
            series.value,
            yerr=series.std_error,
            label=series.predictor,
            capsize=2.0,
            markersize=3.5,
            linewidth=1.2,
            **SERIES_STYLES[series.predictor],
        )
        lines[series.predictor] = container.lines[0]
    ax.set_xlabel("shrinkage coefficient of the best linear predictor")
    ax.set_ylabel(METRIC_LABELS.get(panel.metric, panel.metric))
    ax.set_title(panel.title, fontsize=10)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig, lines


def render(csv_path, figure_id: str, out_dir) -> list[Path]:
    """Render every panel of ``figure_id`` from ``csv_path`` into ``out_dir``.

    Emits one PNG and one SVG per panel; returns the written paths.
    """
    rows = read_rows(csv_path)
    panels = build_panels(rows, figure_id)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for panel in panels:
        fig, _ = build_figure(panel)
        for ext in ("png", "svg"):
            path = out_dir / f"{panel.slug}.{ext}"
            fig.savefig(path, format=ext, metadata=_clean_metadata(ext))
            written.append(path)
        plt.close(fig)
    return written


def _clean_metadata(ext: str) -> dict:
    # strip run-dependent metadata so output bytes depend only on the input
    if ext == "svg":
        return {"Date": None}
    return {"Software": "orderfx-plots"}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render_figures", description="Render orderfx result CSVs to figure panels."
    )
    parser.add_argument("csv")
    parser.add_argument("figure_id")
    parser.add_argument("out_dir")
    args = parser.parse_args(argv)
    try:
        written = render(args.csv, args.figure_id, args.out_dir)
    except (RenderError, OSError) as exc:
        print(f"render_figures: error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
