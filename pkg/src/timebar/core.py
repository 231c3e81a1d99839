"""Interval arithmetic, frame types and the versioned video memory.

All times are seconds of original-video time. Intervals are half-open
``[start, end)``; touching intervals merge on normalization.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True, order=True)
class Interval:
    start: float
    end: float

    def __post_init__(self):
        for v in (self.start, self.end):
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"interval bounds must be finite seconds >= 0, got {v!r}")
        if not self.start < self.end:
            raise ValueError(f"empty interval [{self.start}, {self.end})")

    @property
    def length(self) -> float:
        return self.end - self.start

    def to_list(self) -> list[float]:
        return [self.start, self.end]


@dataclass(frozen=True)
class IntervalSet:
    """Sorted, disjoint, non-touching intervals. Build with :func:`normalize`."""

    intervals: tuple[Interval, ...] = ()

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)

    def __bool__(self):
        return bool(self.intervals)

    @property
    def measure(self) -> float:
        return sum(iv.length for iv in self.intervals)

    def intersect(self, other: IntervalSet) -> IntervalSet:
        out = []
        i = j = 0
        a, b = self.intervals, other.intervals
        while i < len(a) and j < len(b):
            lo = max(a[i].start, b[j].start)
            hi = min(a[i].end, b[j].end)
            if lo < hi:
                out.append(Interval(lo, hi))
            if a[i].end < b[j].end:
                i += 1
            else:
                j += 1
        return normalize(out)

    def union(self, other: IntervalSet) -> IntervalSet:
        return normalize(self.intervals + other.intervals)

    def clip(self, lo: float, hi: float) -> IntervalSet:
        if hi <= lo:
            return IntervalSet()
        return self.intersect(IntervalSet((Interval(lo, hi),)))

    def to_json(self) -> list[list[float]]:
        return [iv.to_list() for iv in self.intervals]

    @classmethod
    def from_json(cls, data: Iterable[Sequence[float]]) -> IntervalSet:
        ivs = []
        for pair in data:
            if len(pair) != 2:
                raise ValueError(f"expected [start, end] pair, got {pair!r}")
            ivs.append(Interval(float(pair[0]), float(pair[1])))
        return normalize(ivs)


def normalize(intervals: Iterable[Interval]) -> IntervalSet:
    ordered = sorted(intervals)
    merged: list[Interval] = []
    for iv in ordered:
        if merged and iv.start <= merged[-1].end:
            if iv.end > merged[-1].end:
                merged[-1] = Interval(merged[-1].start, iv.end)
        else:
            merged.append(iv)
    return IntervalSet(tuple(merged))


def interval_iou(a: IntervalSet, b: IntervalSet) -> float:
    """Union-based IoU in seconds. Two empty sets score 0."""
    inter = a.intersect(b).measure
    union = a.measure + b.measure - inter
    if union <= 0:
        return 0.0
    return min(1.0, max(0.0, inter / union))


@dataclass(frozen=True, eq=False)
class Frame:
    """An RGB raster tied to its original-video timestamp.

    ``bar_rows`` counts rows at the bottom that belong to a rendered progress
    strip; ``highlights`` are the moments drawn into that strip.
    """

    pixels: np.ndarray
    timestamp: float
    bar_rows: int = 0
    highlights: IntervalSet = field(default_factory=IntervalSet)

    def __post_init__(self):
        px = self.pixels
        if px.ndim != 3 or px.shape[2] != 3 or px.dtype != np.uint8:
            raise ValueError(f"frame must be HxWx3 uint8, got {px.shape} {px.dtype}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("frame must be at least 1x1")
        if not math.isfinite(self.timestamp) or self.timestamp < 0:
            raise ValueError(f"bad timestamp {self.timestamp!r}")
        if not 0 <= self.bar_rows < px.shape[0]:
            raise ValueError("bar_rows out of range")
        px.flags.writeable = False

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def content(self) -> np.ndarray:
        """The video region, without any appended strip."""
        return self.pixels[: self.height - self.bar_rows]


@dataclass(frozen=True)
class FrameSequence:
    frames: tuple[Frame, ...]
    source_duration: float

    def __post_init__(self):
        if not math.isfinite(self.source_duration) or self.source_duration < 0:
            raise ValueError(f"bad source duration {self.source_duration!r}")
        prev = -1.0
        for f in self.frames:
            if f.timestamp <= prev:
                raise ValueError("frame timestamps must be strictly increasing")
            if f.timestamp > self.source_duration:
                raise ValueError(
                    f"timestamp {f.timestamp} beyond source duration {self.source_duration}"
                )
            prev = f.timestamp

    def __len__(self):
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)

    def __getitem__(self, i):
        return self.frames[i]

    @property
    def timestamps(self) -> list[float]:
        return [f.timestamp for f in self.frames]

    def with_frames(self, frames: Iterable[Frame]) -> FrameSequence:
        return replace(self, frames=tuple(frames))


@dataclass(frozen=True)
class VideoMemory:
    """The session's current frame set.

    ``window`` is the span of original-video time the frames cover; it starts
    as the whole video and shrinks on cuts.
    """

    current: FrameSequence
    window: Interval
    version: int = 0
    lineage: tuple[tuple[int, str], ...] = ()

    @classmethod
    def initial(cls, frames: FrameSequence, window: Interval | None = None) -> VideoMemory:
        if not len(frames):
            raise ValueError("video memory needs at least one frame")
        if window is None:
            window = Interval(0.0, frames.source_duration)
        return cls(current=frames, window=window)


def memory_update(
    memory: VideoMemory,
    frames: FrameSequence,
    cause: str,
    window: Interval | None = None,
) -> VideoMemory:
    if not len(frames):
        raise ValueError("cannot update video memory with an empty frame sequence")
    version = memory.version + 1
    return VideoMemory(
        current=frames,
        window=window if window is not None else memory.window,
        version=version,
        lineage=memory.lineage + ((version, cause),),
    )
