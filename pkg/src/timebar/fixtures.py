"""Synthetic videos with planted token moments.

Frames are stored at 1 fps; the frame for second ``j`` shows token ``v`` when
a planted moment ``(v, s, e)`` has ``s <= j < e``. Ground truth is then
exactly ``[s, e)`` in seconds.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .backends.embeddings import VOCAB, plant_token
from .core import Frame, FrameSequence, IntervalSet, Interval, normalize
from .ingest import VideoSource, write_frame_directory


@dataclass(frozen=True)
class PlantedMoment:
    token: str
    start: int
    end: int


def _background(width: int, height: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    base = rng.integers(40, 120, size=3)
    ramp = np.linspace(0, 60, width)[None, :, None]
    img = np.broadcast_to(base[None, None, :] + ramp, (height, width, 3))
    return img.astype(np.uint8)


def _token_color(token: str) -> tuple[int, int, int]:
    i = VOCAB.index(token)
    return (80 + 10 * i, 255 - 9 * i, 60 + 12 * i)


def render_fixture_frame(
    t: int, duration: int, tokens: list[str], width: int, height: int, background: np.ndarray
) -> np.ndarray:
    px = background.copy()
    # a slow moving bar so consecutive frames differ
    x = int((t / max(duration, 1)) * (width - 8))
    px[height - 12 : height - 4, x : x + 8] = (240, 240, 240)
    for n, token in enumerate(tokens):
        y0 = height // 4 + n * (height // 6)
        px[y0 : y0 + height // 8, width // 3 : width // 3 + width // 4] = _token_color(token)
    plant_token(px, tokens[0] if tokens else None)
    return px


def make_fixture_video(
    path: str | Path,
    duration: int,
    moments: list[PlantedMoment],
    width: int = 480,
    height: int = 270,
    seed: int = 0,
) -> VideoSource:
    for m in moments:
        if not 0 <= m.start < m.end <= duration:
            raise ValueError(f"moment {m} outside [0, {duration}]")
    bg = _background(width, height, seed)
    frames = []
    for j in range(duration):
        tokens = [m.token for m in moments if m.start <= j < m.end]
        frames.append((float(j), render_fixture_frame(j, duration, tokens, width, height, bg)))
    return write_frame_directory(path, frames, float(duration), fps=1.0)


def ground_truth(moments: list[PlantedMoment], token: str) -> IntervalSet:
    return normalize(Interval(m.start, m.end) for m in moments if m.token == token)


def random_fixture_spec(rng: random.Random, min_len: int = 60, max_len: int = 120,
                        moment_len: tuple[int, int] = (15, 40)) -> tuple[int, PlantedMoment]:
    duration = rng.randint(min_len, max_len)
    length = rng.randint(*moment_len)
    start = rng.randint(0, duration - length)
    return duration, PlantedMoment(rng.choice(VOCAB), start, start + length)


def synthetic_frames(n: int = 4, width: int = 320, height: int = 180, duration: float = 40.0) -> FrameSequence:
    """Small deterministic frame sequence, center-sampled over ``duration``."""
    bg = _background(width, height, seed=7)
    step = duration / n
    frames = []
    for j in range(n):
        t = (j + 0.5) * step
        px = render_fixture_frame(int(t), int(duration), [VOCAB[j % len(VOCAB)]], width, height, bg)
        frames.append(Frame(px, t))
    return FrameSequence(tuple(frames), duration)
