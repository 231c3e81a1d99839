"""Frame sampling from frame directories or (via an external decoder) video files.

A frame directory holds ``frame_<ms:09d>.png`` rasters plus ``manifest.json``
with ``{"duration_s": ..., "fps": ...}``. Video files are decoded one frame
at a time by a configurable subprocess that writes PNG bytes to stdout.
"""
from __future__ import annotations

import bisect
import functools
import io
import json
import logging
import math
import re
import shlex
import subprocess
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .core import Frame, FrameSequence, Interval

log = logging.getLogger(__name__)

DEFAULT_DECODER = "ffmpeg -v error -ss {t} -i {path} -frames:v 1 -f image2pipe -vcodec png -"
DEFAULT_PROBE = "ffprobe -v error -show_entries format=duration -of csv=p=0 {path}"

FRAME_RE = re.compile(r"^frame_(\d{9})\.png$")
MANIFEST = "manifest.json"


class IngestError(RuntimeError):
    pass


@dataclass(frozen=True)
class SamplingSpec:
    n_frames: int = 32
    long_side: int = 480

    def __post_init__(self):
        if self.n_frames < 1:
            raise ValueError("n_frames must be >= 1")
        if self.long_side < 16:
            raise ValueError("long_side must be >= 16")


@dataclass(frozen=True)
class VideoSource:
    kind: str  # "frame-directory" | "video-file"
    path: Path
    duration: float
    decoder_command: str = DEFAULT_DECODER
    _index: tuple[int, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("frame-directory", "video-file"):
            raise ValueError(f"unknown source kind {self.kind!r}")
        if not math.isfinite(self.duration) or self.duration <= 0:
            raise ValueError(f"source duration must be > 0, got {self.duration!r}")

    @property
    def video_id(self) -> str:
        return self.path.stem if self.kind == "video-file" else self.path.name


def open_source(
    path: str | Path,
    decoder_command: str = DEFAULT_DECODER,
    probe_command: str = DEFAULT_PROBE,
) -> VideoSource:
    path = Path(path)
    if path.is_dir():
        return open_frame_directory(path)
    if path.is_file():
        return VideoSource(
            "video-file", path, probe_duration(path, probe_command), decoder_command
        )
    raise IngestError(f"unreadable source: {path}")


def open_frame_directory(path: str | Path) -> VideoSource:
    path = Path(path)
    try:
        manifest = json.loads((path / MANIFEST).read_text())
        duration = float(manifest["duration_s"])
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise IngestError(f"unreadable frame directory manifest in {path}: {e}") from e
    index = []
    for p in path.iterdir():
        m = FRAME_RE.match(p.name)
        if m:
            index.append(int(m.group(1)))
    if not index:
        raise IngestError(f"no frame_<ms>.png files in {path}")
    try:
        return VideoSource("frame-directory", path, duration, _index=tuple(sorted(index)))
    except ValueError as e:
        raise IngestError(str(e)) from e


def write_frame_directory(
    path: str | Path, frames: list[tuple[float, np.ndarray]], duration: float, fps: float
) -> VideoSource:
    """Write (timestamp, raster) pairs in the frame-directory layout."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    for t, px in frames:
        name = f"frame_{int(round(t * 1000)):09d}.png"
        Image.fromarray(px).save(path / name, compress_level=1)
    (path / MANIFEST).write_text(json.dumps({"duration_s": duration, "fps": fps}))
    return open_frame_directory(path)


def probe_duration(path: Path, probe_command: str = DEFAULT_PROBE) -> float:
    out = _run(probe_command, path=path, t=0)
    try:
        return float(out.decode().strip().splitlines()[0])
    except (ValueError, IndexError) as e:
        raise IngestError(f"could not parse duration from probe output {out[:200]!r}") from e


_locks: dict[Path, threading.Lock] = {}
_locks_guard = threading.Lock()


def _path_lock(path: Path) -> threading.Lock:
    with _locks_guard:
        return _locks.setdefault(path.resolve(), threading.Lock())


def _run(template: str, **fields) -> bytes:
    argv = [a.format(**{k: str(v) for k, v in fields.items()}) for a in shlex.split(template)]
    try:
        proc = subprocess.run(argv, capture_output=True, timeout=120)
    except (OSError, subprocess.TimeoutExpired) as e:
        raise IngestError(f"decoder failed to run: {argv[0]}: {e}") from e
    if proc.returncode != 0:
        diag = proc.stderr.decode(errors="replace").strip()
        raise IngestError(f"decoder exited with {proc.returncode}: {diag}")
    return proc.stdout


def _decode_png(data: bytes) -> np.ndarray:
    with Image.open(io.BytesIO(data)) as im:
        return np.asarray(im.convert("RGB"))


@functools.lru_cache(maxsize=256)
def _read_png(path: str, mtime_ns: int) -> np.ndarray:
    try:
        with Image.open(path) as im:
            px = np.asarray(im.convert("RGB"))
    except OSError as e:
        raise IngestError(f"unreadable frame {path}: {e}") from e
    px.flags.writeable = False
    return px


def _load_raw(source: VideoSource, t: float) -> np.ndarray:
    """Raster shown at time ``t``: the nearest frame at or before ``t``."""
    if source.kind == "frame-directory":
        ms = source._index
        i = bisect.bisect_right(ms, int(math.floor(t * 1000 + 1e-6))) - 1
        p = source.path / f"frame_{ms[max(i, 0)]:09d}.png"
        try:
            mtime = p.stat().st_mtime_ns
        except OSError as e:
            raise IngestError(f"unreadable frame {p}: {e}") from e
        return _read_png(str(p), mtime)
    with _path_lock(source.path):
        data = _run(source.decoder_command, path=source.path, t=f"{t:.3f}")
    try:
        return _decode_png(data)
    except OSError as e:
        raise IngestError(f"decoder output at t={t:.3f} is not an image") from e


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def resize_long_side(px: np.ndarray, long_side: int) -> np.ndarray:
    h, w = px.shape[:2]
    if h >= w:
        nh, nw = long_side, max(1, _round_half_up(w * long_side / h))
    else:
        nh, nw = max(1, _round_half_up(h * long_side / w)), long_side
    if (nh, nw) == (h, w):
        return px
    return np.asarray(Image.fromarray(px).resize((nw, nh), Image.BILINEAR))


def _frames_at(source: VideoSource, times: list[float], long_side: int) -> FrameSequence:
    frames = [
        Frame(resize_long_side(_load_raw(source, t), long_side), t) for t in times
    ]
    return FrameSequence(tuple(frames), source.duration)


def sample_frames(
    source: VideoSource, spec: SamplingSpec = SamplingSpec(), window: Interval | None = None
) -> FrameSequence:
    """Center-of-bin uniform sampling of ``spec.n_frames`` frames over ``window``."""
    if window is None:
        lo, hi = 0.0, source.duration
    else:
        lo, hi = window.start, window.end
        if hi > source.duration + 1e-9:
            raise IngestError(
                f"window [{lo}, {hi}) outside video duration {source.duration}"
            )
    step = (hi - lo) / spec.n_frames
    times = [lo + (j + 0.5) * step for j in range(spec.n_frames)]
    return _frames_at(source, times, spec.long_side)


def sample_at_fps(source: VideoSource, fps: float, long_side: int = 480) -> FrameSequence:
    if fps <= 0:
        raise ValueError("fps must be > 0")
    count = math.floor(source.duration * fps + 1e-9)
    if count < 1:
        raise IngestError(
            f"no frames: duration {source.duration}s at {fps} fps yields {count}"
        )
    return _frames_at(source, [j / fps for j in range(count)], long_side)
