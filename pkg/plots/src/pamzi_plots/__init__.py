"""Panel rendering for the interferometer figure CSVs."""

from .layouts import PanelLayout, PanelSpec, layout_for
from .render import MissingColumnError, MissingFileError, render

__all__ = ["PanelLayout", "PanelSpec", "layout_for", "render",
           "MissingColumnError", "MissingFileError"]
