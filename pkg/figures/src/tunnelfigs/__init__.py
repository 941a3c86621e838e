"""Figure rendering for tunneltime sweep outputs.

Reads the CSV schemas written by the simulation package and renders
static plots of the momentum-width sweep, the traversal-time sweep, and
single-run delay densities.  Never recomputes physics: every number on
a figure exists verbatim in the CSV (or its JSON sidecar).
"""

__version__ = "0.1.0"

from .render import (
    EmptyDataError,
    FigureSpec,
    SchemaError,
    render,
    render_figure,
)

__all__ = [
    "FigureSpec",
    "render",
    "render_figure",
    "SchemaError",
    "EmptyDataError",
]
