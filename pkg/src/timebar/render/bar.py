"""Progress-bar strip compositing.

Each annotated frame is the untouched video raster with a strip appended
underneath. Strip layout, top to bottom: the current-time label centered
over the marker, the track with its circular marker (and any highlight
band), then the ``0`` and total-duration labels under the track ends.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np

from ..core import Frame, FrameSequence, IntervalSet
from . import font

MIN_WIDTH = 64
PAD = 2
BAND_EXTRA = 6

RGB = tuple[int, int, int]


class RenderError(ValueError):
    pass


@dataclass(frozen=True)
class BarStyle:
    bar_strip_height: int = 60
    track_margin_frac: float = 0.05
    track_thickness: int = 8
    marker_radius: int = 7
    track_color: RGB = (200, 200, 200)
    marker_color: RGB = (230, 60, 60)
    highlight_color: RGB = (60, 200, 90)
    label_color: RGB = (255, 255, 255)
    background_color: RGB = (0, 0, 0)
    timestamp_format: str = "integer-seconds"  # or "one-decimal"

    def __post_init__(self):
        if self.highlight_color == self.track_color:
            raise ValueError("highlight_color must differ from track_color")
        if self.marker_color == self.track_color:
            raise ValueError("marker_color must differ from track_color")
        if self.timestamp_format not in ("integer-seconds", "one-decimal"):
            raise ValueError(f"unknown timestamp_format {self.timestamp_format!r}")
        if not 0 <= self.track_margin_frac < 0.5:
            raise ValueError("track_margin_frac must be in [0, 0.5)")
        if self.track_thickness < 1 or self.marker_radius < 1:
            raise ValueError("track_thickness and marker_radius must be >= 1")
        label_h = font.text_size("0")[1]
        floor = max(
            self.track_thickness + 2 * self.marker_radius + label_h, self.layout_height
        )
        if self.bar_strip_height < floor:
            raise ValueError(f"bar_strip_height must be >= {floor} for this style")

    @property
    def band_half(self) -> int:
        return (self.track_thickness + BAND_EXTRA + 1) // 2

    @property
    def track_row(self) -> int:
        """Track center row, relative to the top of the strip."""
        label_h = font.text_size("0")[1]
        return PAD + label_h + PAD + max(self.marker_radius, self.band_half)

    @property
    def layout_height(self) -> int:
        label_h = font.text_size("0")[1]
        return self.track_row + max(self.marker_radius, self.band_half) + PAD + label_h + PAD

    def format_time(self, t: float) -> str:
        if self.timestamp_format == "one-decimal":
            return f"{_round_half_up(t * 10) / 10:.1f}"
        return str(_round_half_up(t))

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def with_overrides(self, **kw) -> BarStyle:
        return replace(self, **kw)


@dataclass(frozen=True)
class BarGeometry:
    track_x0: int
    track_x1: int
    track_y: int
    strip_y0: int


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def bar_geometry(width: int, content_height: int, style: BarStyle) -> BarGeometry:
    if width < MIN_WIDTH:
        raise RenderError(f"frame too narrow for labels: {width} < {MIN_WIDTH} px")
    x0 = _round_half_up(style.track_margin_frac * width)
    x1 = min(width - x0, width - 1)
    if x0 >= x1:
        raise RenderError("track margins leave no room for the track")
    return BarGeometry(x0, x1, content_height + style.track_row, content_height)


def marker_x(t: float, duration: float, geom: BarGeometry) -> int:
    if duration <= 0:
        raise RenderError("duration must be > 0")
    t = min(max(t, 0.0), duration)
    return _round_half_up(geom.track_x0 + (t / duration) * (geom.track_x1 - geom.track_x0))


def _fill_rect(img, x0, x1, y0, y1, color):
    """Inclusive column range, half-open row range, clipped."""
    H, W = img.shape[:2]
    x0, x1 = max(x0, 0), min(x1, W - 1)
    y0, y1 = max(y0, 0), min(y1, H)
    if x0 <= x1 and y0 < y1:
        img[y0:y1, x0 : x1 + 1] = color


def _fill_disc(img, cx, cy, r, color):
    H, W = img.shape[:2]
    ys, xs = np.ogrid[-r : r + 1, -r : r + 1]
    disc = xs * xs + ys * ys <= r * r
    y0, x0 = cy - r, cx - r
    ya, yb = max(y0, 0), min(y0 + 2 * r + 1, H)
    xa, xb = max(x0, 0), min(x0 + 2 * r + 1, W)
    if ya < yb and xa < xb:
        img[ya:yb, xa:xb][disc[ya - y0 : yb - y0, xa - x0 : xb - x0]] = color


def _label_x(center: int, text: str, width: int) -> int:
    w = font.text_size(text)[0]
    return min(max(center - w // 2, 0), max(width - w, 0))


def highlight_columns(moments: IntervalSet, duration: float, geom: BarGeometry) -> list[tuple[int, int]]:
    """Inclusive tinted column ranges, one per interval."""
    return [(marker_x(iv.start, duration, geom), marker_x(iv.end, duration, geom)) for iv in moments]


def render_strip(
    width: int, t: float, duration: float, style: BarStyle, moments: IntervalSet = IntervalSet()
) -> np.ndarray:
    geom = bar_geometry(width, 0, style)
    strip = np.empty((style.bar_strip_height, width, 3), dtype=np.uint8)
    strip[:] = style.background_color
    ty = geom.track_y
    top = ty - style.track_thickness // 2
    _fill_rect(strip, geom.track_x0, geom.track_x1, top, top + style.track_thickness, style.track_color)
    for a, b in highlight_columns(moments, duration, geom):
        _fill_rect(strip, a, b, ty - style.band_half, ty + style.band_half, style.highlight_color)

    label_h = font.text_size("0")[1]
    below = ty + max(style.marker_radius, style.band_half) + PAD
    end_label = style.format_time(duration)
    font.draw_text(strip, "0", _label_x(geom.track_x0, "0", width), below, style.label_color)
    font.draw_text(strip, end_label, _label_x(geom.track_x1, end_label, width), below, style.label_color)

    mx = marker_x(t, duration, geom)
    _fill_disc(strip, mx, ty, style.marker_radius, style.marker_color)
    now = style.format_time(t)
    above = ty - max(style.marker_radius, style.band_half) - PAD - label_h
    font.draw_text(strip, now, _label_x(mx, now, width), above, style.label_color)
    return strip


def _annotate(frame: Frame, duration: float, style: BarStyle, moments: IntervalSet) -> Frame:
    content = frame.content
    strip = render_strip(frame.width, frame.timestamp, duration, style, moments)
    return Frame(np.vstack([content, strip]), frame.timestamp, style.bar_strip_height, moments)


def render_progress_bar(frames: FrameSequence, style: BarStyle = BarStyle()) -> FrameSequence:
    """Append a progress strip to every frame.

    Frames that already carry a strip get it re-rendered from their video
    region, keeping their highlights.
    """
    if not len(frames):
        raise RenderError("no frames to render")
    duration = frames.source_duration
    if duration <= 0:
        raise RenderError("source duration must be > 0")
    return frames.with_frames(_annotate(f, duration, style, f.highlights) for f in frames)


def render_highlights(
    frames: FrameSequence, moments: IntervalSet, style: BarStyle = BarStyle()
) -> FrameSequence:
    """Draw the bar with ``moments`` tinted, replacing any previous highlights."""
    if not len(frames):
        raise RenderError("no frames to render")
    duration = frames.source_duration
    for iv in moments:
        if iv.end > duration + 1e-9:
            raise RenderError(f"moment [{iv.start}, {iv.end}) outside [0, {duration}]")
    return frames.with_frames(_annotate(f, duration, style, moments) for f in frames)
