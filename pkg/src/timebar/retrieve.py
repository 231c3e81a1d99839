"""Zero-shot moment retrieval by clip/query cosine similarity."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Frame, FrameSequence, Interval, IntervalSet, normalize
from .ingest import VideoSource, sample_at_fps


class RetrievalError(RuntimeError):
    pass


@dataclass(frozen=True)
class RetrievalConfig:
    fps: float = 1.0
    clip_len: int = 8
    k: int = 8

    def __post_init__(self):
        if not self.fps > 0:
            raise ValueError("fps must be > 0")
        if self.clip_len < 1:
            raise ValueError("clip_len must be >= 1")
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass(frozen=True)
class Clip:
    index: int
    frames: tuple[Frame, ...]
    span: Interval


@dataclass(frozen=True)
class ClipScore:
    clip_index: int
    similarity: float


def clip_span(i: int, n_clips: int, cfg: RetrievalConfig, duration: float) -> Interval:
    """Seconds covered by clip ``i``; the last clip runs to the end of the video."""
    start = cfg.clip_len * i / cfg.fps
    end = duration if i == n_clips - 1 else min(cfg.clip_len * (i + 1) / cfg.fps, duration)
    if start >= end:
        raise RetrievalError(f"clip {i} starts at {start}s, past the {duration}s video")
    return Interval(start, end)


def group_clips(frames: FrameSequence, cfg: RetrievalConfig = RetrievalConfig()) -> list[Clip]:
    if not len(frames):
        raise RetrievalError("cannot group an empty frame sequence into clips")
    n = math.ceil(len(frames) / cfg.clip_len)
    return [
        Clip(
            i,
            tuple(frames.frames[i * cfg.clip_len : (i + 1) * cfg.clip_len]),
            clip_span(i, n, cfg, frames.source_duration),
        )
        for i in range(n)
    ]


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("embeddings must be finite")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("zero-norm embedding")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def select_top_k(scores: Sequence[ClipScore], k: int) -> list[int]:
    """Indices of the ``k`` best clips; ties go to the lower index."""
    idx = sorted(s.clip_index for s in scores)
    if idx != list(range(len(idx))):
        raise RetrievalError("scores must cover clip indices 0..N-1 exactly once")
    ranked = sorted(scores, key=lambda s: (-s.similarity, s.clip_index))
    return sorted(s.clip_index for s in ranked[:k])


def top_k_segments(
    scores: Sequence[ClipScore], cfg: RetrievalConfig, duration: float
) -> IntervalSet:
    picked = select_top_k(scores, cfg.k)
    n = len(scores)
    runs: list[list[int]] = []
    for i in picked:
        if runs and runs[-1][1] == i - 1:
            runs[-1][1] = i
        else:
            runs.append([i, i])
    return normalize(
        Interval(clip_span(a, n, cfg, duration).start, clip_span(b, n, cfg, duration).end)
        for a, b in runs
    )


def score_clips(clips: Sequence[Clip], query: str, provider) -> list[ClipScore]:
    if not query.strip():
        raise RetrievalError("empty query")
    q = provider.embed_text(query)
    vecs = provider.embed_clips(clips)
    scores = []
    for clip in clips:
        try:
            scores.append(ClipScore(clip.index, cosine_similarity(vecs[clip.index], q)))
        except (KeyError, ValueError) as e:
            raise RetrievalError(f"clip {clip.index}: bad embedding: {e}") from e
    return scores


def retrieve_moments(
    source: VideoSource,
    query: str,
    provider,
    cfg: RetrievalConfig = RetrievalConfig(),
    long_side: int = 480,
) -> IntervalSet:
    frames = sample_at_fps(source, cfg.fps, long_side)
    clips = group_clips(frames, cfg)
    return top_k_segments(score_clips(clips, query, provider), cfg, source.duration)
