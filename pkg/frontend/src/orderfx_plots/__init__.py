"""Figure renderer for orderfx result CSVs."""

from .render import Panel, RenderError, Series, build_figure, build_panels, read_rows, render

__version__ = "0.1.0"
