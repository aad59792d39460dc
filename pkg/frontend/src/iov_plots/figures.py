"""Chart construction from the simulator's frozen CSV result table.

This package is a pure consumer of the table: it never imports the
simulator and never writes anything except the requested image files.
Every plotted number is the CSV value verbatim; absent values become
gaps, never zeros.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib as mpl
import numpy as np
from matplotlib.figure import Figure

# frozen interface: the simulator's result-table header, column for column
CSV_HEADER = (
    "n_vehicles",
    "algorithm",
    "interruptions_mean",
    "pdr",
    "ber_mean",
    "throughput_bps",
    "delay_mean_s",
    "path_len_mean",
    "composite_score",
)

# fixed style so repeated renders of the same table are byte-identical
STYLE = {
    "figure.figsize": (6.4, 4.0),
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "font.size": 10.0,
    "font.family": "DejaVu Sans",
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.6,
    "lines.markersize": 5.0,
    "legend.framealpha": 0.9,
    "axes.prop_cycle": mpl.cycler(
        color=["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    ),
}

_MARKERS = ("o", "s", "^", "d", "v")


class SchemaError(ValueError):
    """The CSV does not carry the frozen result-table header."""


@dataclass(frozen=True)
class FigureSpec:
    """One renderable chart: which column, how to label it, where it goes."""

    metric: str
    ylabel: str
    filename: str
    kind: str = "line"  # "line" or "bar"

    def __post_init__(self) -> None:
        if self.metric not in CSV_HEADER:
            raise SchemaError(f"metric '{self.metric}' is not a result column")


FIGURES = (
    FigureSpec("interruptions_mean", "Mean interruptions per episode",
               "interruptions_mean.png"),
    FigureSpec("pdr", "Packet delivery ratio", "pdr.png"),
    FigureSpec("ber_mean", "Mean bit error rate", "ber_mean.png"),
    FigureSpec("throughput_bps", "Throughput (bit/s)", "throughput_bps.png"),
    FigureSpec("delay_mean_s", "Mean end-to-end delay (s)", "delay_mean_s.png"),
    FigureSpec("path_len_mean", "Mean delivered path length (hops)",
               "path_len_mean.png"),
    FigureSpec("composite_score", "Composite score (0-100)",
               "composite_score.png", kind="bar"),
)

_METRICS = {spec.metric: spec for spec in FIGURES}


def read_table(csv_path: str | Path) -> list[dict]:
    """Parse the result table; empty fields become None, not zero."""
    csv_path = Path(csv_path)
    with csv_path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        found = tuple(reader.fieldnames or ())
        if found != CSV_HEADER:
            missing = [c for c in CSV_HEADER if c not in found]
            unexpected = [c for c in found if c not in CSV_HEADER]
            parts = []
            if missing:
                parts.append(f"missing column(s): {', '.join(missing)}")
            if unexpected:
                parts.append(f"unexpected column(s): {', '.join(unexpected)}")
            if not parts:
                parts.append("columns are out of order")
            raise SchemaError(f"bad result header in {csv_path}: {'; '.join(parts)}")
        rows = []
        for rec in reader:
            row = {"n_vehicles": int(rec["n_vehicles"]),
                   "algorithm": rec["algorithm"]}
            for column in CSV_HEADER[2:]:
                cell = rec[column]
                row[column] = None if cell == "" else float(cell)
            rows.append(row)
    return rows


def _algorithms(rows: list[dict]) -> list[str]:
    """Algorithm names in first-appearance order."""
    seen: dict[str, None] = {}
    for row in rows:
        seen.setdefault(row["algorithm"], None)
    return list(seen)


def _series(rows: list[dict], algorithm: str, metric: str):
    """Density-sorted (x, y) arrays for one algorithm; gaps become NaN."""
    points = sorted(
        (row["n_vehicles"], row[metric])
        for row in rows if row["algorithm"] == algorithm
    )
    x = np.array([p[0] for p in points], dtype=float)
    y = np.array([np.nan if p[1] is None else p[1] for p in points], dtype=float)
    return x, y


def build_figure(rows: list[dict], spec: FigureSpec) -> Figure:
    """Assemble one chart; separated from file output for inspectability."""
    with mpl.rc_context(STYLE):
        fig = Figure()
        ax = fig.subplots()
        if spec.kind == "bar":
            _draw_bars(ax, rows, spec)
        else:
            _draw_lines(ax, rows, spec)
        ax.set_ylabel(spec.ylabel)
        ax.set_xlabel("Number of vehicles")
        if _algorithms(rows):
            ax.legend()
        fig.tight_layout()
    return fig


def _draw_lines(ax, rows: list[dict], spec: FigureSpec) -> None:
    for idx, algorithm in enumerate(_algorithms(rows)):
        x, y = _series(rows, algorithm, spec.metric)
        ax.plot(x, y, marker=_MARKERS[idx % len(_MARKERS)], label=algorithm)


def _draw_bars(ax, rows: list[dict], spec: FigureSpec) -> None:
    algorithms = _algorithms(rows)
    densities = sorted({row["n_vehicles"] for row in rows})
    if not algorithms or not densities:
        return
    group = np.arange(len(densities), dtype=float)
    width = 0.8 / len(algorithms)
    for idx, algorithm in enumerate(algorithms):
        values = dict(
            (row["n_vehicles"], row[spec.metric])
            for row in rows if row["algorithm"] == algorithm
        )
        offsets, heights = [], []
        for pos, density in zip(group, densities):
            value = values.get(density)
            if value is None:
                continue  # a gap: no bar is drawn for an absent score
            offsets.append(pos + (idx - (len(algorithms) - 1) / 2.0) * width)
            heights.append(value)
        ax.bar(offsets, heights, width=width, label=algorithm)
    ax.set_xticks(group)
    ax.set_xticklabels([str(d) for d in densities])


def render_one(csv_path: str | Path, metric: str, out_path: str | Path) -> Path:
    """Render the single figure for one metric column."""
    spec = _METRICS.get(metric)
    if spec is None:
        raise SchemaError(
            f"unknown metric '{metric}'; choose from {', '.join(_METRICS)}"
        )
    rows = read_table(csv_path)
    out_path = Path(out_path)
    build_figure(rows, spec).savefig(out_path)
    return out_path


def render_all(csv_path: str | Path, out_dir: str | Path) -> list[Path]:
    """Render every figure into a directory; returns the written paths."""
    rows = read_table(csv_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for spec in FIGURES:
        path = out_dir / spec.filename
        build_figure(rows, spec).savefig(path)
        written.append(path)
    return written
