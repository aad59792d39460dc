"""Figure rendering for the simulator's frozen result tables."""

from .figures import (
    CSV_HEADER,
    FIGURES,
    FigureSpec,
    SchemaError,
    read_table,
    render_all,
    render_one,
)

__version__ = "0.1.0"

__all__ = [
    "CSV_HEADER",
    "FIGURES",
    "FigureSpec",
    "SchemaError",
    "read_table",
    "render_all",
    "render_one",
    "__version__",
]
