"""Clip/text embedding providers.

``SyntheticEmbeddingProvider`` reads tokens planted in the top-left 4x4 block
of fixture frames, so retrieval results are provable without a real model.
"""
from __future__ import annotations

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Protocol, Sequence

import httpx
import numpy as np

from .wire import encode_png_b64

VOCAB = (
    "cat", "dog", "ball", "door", "car", "bird", "person", "phone",
    "cup", "book", "tree", "boat", "horse", "chair", "guitar", "bike",
)
BLOCK = 4
SIGNATURE = (0xA5, 0x5A)  # G, B of a planted block pixel; R carries the token id
EPSILON = 1e-3


class EmbeddingError(RuntimeError):
    def __init__(self, message: str, clip_index: int | None = None):
        super().__init__(message if clip_index is None else f"clip {clip_index}: {message}")
        self.clip_index = clip_index


class EmbeddingProvider(Protocol):
    dimension: int

    def embed_clips(self, clips: Sequence) -> dict[int, np.ndarray]: ...

    def embed_text(self, query: str) -> np.ndarray: ...


def token_pixel(token: str) -> tuple[int, int, int]:
    return (VOCAB.index(token) + 1, *SIGNATURE)


def plant_token(pixels: np.ndarray, token: str | None) -> None:
    """Write the reserved block in place; ``None`` clears it to background."""
    if token is None:
        pixels[:BLOCK, :BLOCK] = 0
    else:
        pixels[:BLOCK, :BLOCK] = token_pixel(token)


def block_activations(pixels: np.ndarray) -> np.ndarray:
    """Fraction of the reserved block per component: [background, *VOCAB]."""
    block = pixels[:BLOCK, :BLOCK].reshape(-1, 3).astype(np.int64)
    act = np.zeros(len(VOCAB) + 1)
    signed = (block[:, 1] == SIGNATURE[0]) & (block[:, 2] == SIGNATURE[1])
    ids = np.where(signed & (block[:, 0] >= 1) & (block[:, 0] <= len(VOCAB)), block[:, 0], 0)
    np.add.at(act, ids, 1.0)
    return act / len(ids)


def _perturbation(payload: bytes, dim: int) -> np.ndarray:
    digest = hashlib.sha256(payload).digest()
    while len(digest) < 2 * dim:
        digest += hashlib.sha256(digest).digest()
    raw = np.frombuffer(digest[: 2 * dim], dtype=">u2").astype(np.float64)
    return EPSILON * (raw / 65535.0 * 2.0 - 1.0)


class SyntheticEmbeddingProvider:
    dimension = len(VOCAB) + 1

    def embed_clip(self, clip) -> np.ndarray:
        blocks = [f.content[:BLOCK, :BLOCK] for f in clip.frames]
        if not blocks:
            raise EmbeddingError("empty clip", clip.index)
        mean = np.mean([block_activations(b) for b in blocks], axis=0)
        payload = b"".join(np.ascontiguousarray(b).tobytes() for b in blocks)
        return mean + _perturbation(payload, self.dimension)

    def embed_clips(self, clips) -> dict[int, np.ndarray]:
        return {c.index: self.embed_clip(c) for c in clips}

    def embed_text(self, query: str) -> np.ndarray:
        token = query.strip().lower()
        if token not in VOCAB:
            raise EmbeddingError(f"unknown token {query!r}; vocabulary is {', '.join(VOCAB)}")
        v = np.zeros(self.dimension)
        v[VOCAB.index(token) + 1] = 1.0
        return v


class HttpEmbeddingProvider:
    """JSON-over-HTTP embedding service; see docs/wire.md.

    The first response fixes ``dimension``; later responses must match it.
    """

    def __init__(self, endpoint: str, model: str = "", api_key_env: str | None = None,
                 timeout: float = 60.0, max_workers: int = 4, transport=None):
        self.endpoint = endpoint
        self.model = model
        headers = {}
        if api_key_env and os.environ.get(api_key_env):
            headers["Authorization"] = f"Bearer {os.environ[api_key_env]}"
        self._client = httpx.Client(timeout=timeout, headers=headers, transport=transport)
        self.max_workers = max_workers
        self.dimension: int | None = None

    def _post(self, body: dict) -> np.ndarray:
        try:
            resp = self._client.post(self.endpoint, json=body)
            resp.raise_for_status()
            vec = np.asarray(resp.json()["embedding"], dtype=np.float64)
        except (httpx.HTTPError, KeyError, ValueError, TypeError) as e:
            raise EmbeddingError(f"embedding request failed: {e}") from e
        if vec.ndim != 1 or not len(vec):
            raise EmbeddingError("embedding must be a non-empty vector")
        if self.dimension is None:
            self.dimension = len(vec)
        elif len(vec) != self.dimension:
            raise EmbeddingError(f"dimension changed from {self.dimension} to {len(vec)}")
        return vec

    def _embed_clip(self, clip) -> np.ndarray:
        try:
            return self._post({
                "model": self.model,
                "input": {"type": "clip", "frames": [encode_png_b64(f.content) for f in clip.frames]},
            })
        except EmbeddingError as e:
            raise EmbeddingError(str(e), clip.index) from e

    def embed_clips(self, clips) -> dict[int, np.ndarray]:
        with ThreadPoolExecutor(self.max_workers) as pool:
            vecs = list(pool.map(self._embed_clip, clips))
        return {c.index: v for c, v in zip(clips, vecs)}

    def embed_text(self, query: str) -> np.ndarray:
        return self._post({"model": self.model, "input": {"type": "text", "text": query}})
