from .bar import (
    BarGeometry,
    BarStyle,
    RenderError,
    bar_geometry,
    highlight_columns,
    marker_x,
    render_highlights,
    render_progress_bar,
    render_strip,
)

__all__ = [
    "BarGeometry",
    "BarStyle",
    "RenderError",
    "bar_geometry",
    "highlight_columns",
    "marker_x",
    "render_highlights",
    "render_progress_bar",
    "render_strip",
]
