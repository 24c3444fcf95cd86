"""Learning-curve figures from metrics CSVs.

Input is the training harness's metrics format, one row per evaluation:

    step,mean_score,std_score,condition,seed

Each condition becomes one line (the mean) with a translucent band at
mean +/- one standard deviation. The plotter draws exactly what the
rows say; any cross-seed aggregation has to happen upstream, so a file
holding several seeds of the same condition is rejected rather than
silently averaged.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

EXPECTED_HEADER = ("step", "mean_score", "std_score", "condition", "seed")

# Fixed so identical inputs render to identical bytes.
FIGURE_SIZE = (6.4, 4.0)
FIGURE_DPI = 150
BAND_ALPHA = 0.25
PNG_METADATA = {"Software": "plot-curves"}


class MetricsFormatError(ValueError):
    """A metrics CSV does not follow the expected format."""


@dataclass(frozen=True)
class CurveSeries:
    """One condition's curve: parallel, step-ordered points."""

    condition: str
    steps: tuple[int, ...]
    means: tuple[float, ...]
    stds: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.condition:
            raise ValueError("condition label must be non-empty")
        if not (len(self.steps) == len(self.means) == len(self.stds)):
            raise ValueError("steps, means and stds must be the same length")
        if not self.steps:
            raise ValueError("a curve needs at least one point")
        if any(b <= a for a, b in zip(self.steps, self.steps[1:])):
            raise ValueError("steps must be strictly increasing")
        if any(s < 0 for s in self.stds):
            raise ValueError("standard deviations must be non-negative")


def _parse_row(path: str, line_number: int, row: list[str]):
    if len(row) != len(EXPECTED_HEADER):
        raise MetricsFormatError(
            f"{path}:{line_number}: expected {len(EXPECTED_HEADER)} fields,"
            f" got {len(row)}"
        )
    step_text, mean_text, std_text, condition, _seed = row
    try:
        step = int(step_text)
        mean = float(mean_text)
        std = float(std_text)
    except ValueError:
        raise MetricsFormatError(
            f"{path}:{line_number}: non-numeric step/mean/std in {row!r}"
        ) from None
    if not condition:
        raise MetricsFormatError(f"{path}:{line_number}: empty condition label")
    if std < 0:
        raise MetricsFormatError(
            f"{path}:{line_number}: negative std {std}"
        )
    return step, mean, std, condition


def load_series(csv_paths: list[str]) -> list[CurveSeries]:
    """Read metrics CSVs into one CurveSeries per condition label.

    Conditions accumulate across files in encounter order. Any format
    problem raises MetricsFormatError naming the file and line,
    including out-of-order or duplicated steps within a condition.
    """
    points: dict[str, list[tuple[int, float, float]]] = {}
    last_seen: dict[str, tuple[int, str, int]] = {}
    for path in csv_paths:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise MetricsFormatError(f"{path}:1: file is empty") from None
            if tuple(header) != EXPECTED_HEADER:
                raise MetricsFormatError(
                    f"{path}:1: header {','.join(header)!r} does not match"
                    f" {','.join(EXPECTED_HEADER)!r}"
                )
            for line_number, row in enumerate(reader, start=2):
                if not row:
                    continue
                step, mean, std, condition = _parse_row(path, line_number, row)
                if condition in last_seen:
                    prev_step, prev_path, prev_line = last_seen[condition]
                    if step <= prev_step:
                        raise MetricsFormatError(
                            f"{path}:{line_number}: step {step} for"
                            f" {condition!r} does not increase (previous"
                            f" {prev_step} at {prev_path}:{prev_line});"
                            " aggregate multi-seed data before plotting"
                        )
                points.setdefault(condition, []).append((step, mean, std))
                last_seen[condition] = (step, path, line_number)
    return [
        CurveSeries(
            condition=condition,
            steps=tuple(p[0] for p in rows),
            means=tuple(p[1] for p in rows),
            stds=tuple(p[2] for p in rows),
        )
        for condition, rows in points.items()
    ]


def draw_figure(series: list[CurveSeries], title: str = ""):
    """Build the figure; returns (figure, {condition: {line, band}}).

    The artists are returned so tests can read the plotted arrays back
    instead of comparing pixels.
    """
    if not series:
        raise ValueError("nothing to plot")
    fig, ax = plt.subplots(figsize=FIGURE_SIZE)
    artists = {}
    for curve in series:
        steps = np.asarray(curve.steps, dtype=float)
        means = np.asarray(curve.means, dtype=float)
        stds = np.asarray(curve.stds, dtype=float)
        (line,) = ax.plot(steps, means, label=curve.condition)
        band = ax.fill_between(
            steps,
            means - stds,
            means + stds,
            alpha=BAND_ALPHA,
            color=line.get_color(),
            linewidth=0,
        )
        artists[curve.condition] = {"line": line, "band": band}
    ax.set_xlabel("training steps")
    ax.set_ylabel("score")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    return fig, artists


def render_curves(
    csv_paths: list[str], output_path: str, title: str = ""
) -> None:
    """Render the CSVs to a raster image at output_path."""
    series = load_series(csv_paths)
    if not series:
        raise MetricsFormatError(
            f"{csv_paths[0]}: no data rows in any input"
            if csv_paths
            else "no input files"
        )
    fig, _ = draw_figure(series, title)
    try:
        fig.savefig(output_path, dpi=FIGURE_DPI, metadata=PNG_METADATA)
    finally:
        plt.close(fig)
