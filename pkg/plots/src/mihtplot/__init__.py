"""Figure rendering for miht experiment CSV artifacts."""

from .render import (FIGURE_KINDS, FigureInputError, FigureJob, load_table,
                     plotted_series, render)

__version__ = "0.1.0"

__all__ = ["FIGURE_KINDS", "FigureInputError", "FigureJob", "load_table",
           "plotted_series", "render", "__version__"]
