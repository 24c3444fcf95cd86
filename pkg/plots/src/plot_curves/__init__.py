"""Learning-curve figures from training metrics CSVs."""

from .curves import (
    CurveSeries,
    EXPECTED_HEADER,
    MetricsFormatError,
    draw_figure,
    load_series,
    render_curves,
)

__version__ = "0.1.0"

__all__ = [
    "CurveSeries",
    "EXPECTED_HEADER",
    "MetricsFormatError",
    "draw_figure",
    "load_series",
    "render_curves",
    "__version__",
]
