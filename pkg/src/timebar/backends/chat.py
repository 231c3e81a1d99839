"""Multimodal chat backends: a scripted stand-in and an HTTP client."""
from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass, replace
from typing import Callable, Sequence, Union

import httpx

from ..core import FrameSequence
from .wire import request_body

log = logging.getLogger(__name__)

ROLES = ("system", "user", "assistant", "tool-observation")
RETRY_STATUS = frozenset({429, 500, 502, 503, 504})


class BackendError(RuntimeError):
    pass


@dataclass(frozen=True)
class ChatTurn:
    role: str
    text: str
    frames: FrameSequence | None = None
    step: int | None = None

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        if self.role == "tool-observation" and self.step is None:
            raise ValueError("tool-observation turns must carry the step index")
        if self.frames is not None and self.role not in ("user", "tool-observation"):
            raise ValueError("only user-side turns carry frames")

    def without_frames(self) -> ChatTurn:
        return self if self.frames is None else replace(self, frames=None)


@dataclass(frozen=True)
class BackendRequest:
    turns: tuple[ChatTurn, ...]
    temperature: float = 0.0
    max_tokens: int = 1024

    def __post_init__(self):
        if not any(t.role in ("user", "tool-observation") for t in self.turns):
            raise ValueError("a request needs at least one user turn")


Response = Union[str, Callable[[BackendRequest], str]]


class ScriptedBackend:
    """Replays queued responses in order.

    A queued item may be a callable; it receives the request and returns the
    text, which lets tests script a model that reacts to what it is shown.
    """

    def __init__(self, responses: Sequence[Response]):
        self._responses = list(responses)
        self.calls = 0

    def complete(self, request: BackendRequest) -> str:
        if self.calls >= len(self._responses):
            raise BackendError(f"script exhausted at step {self.calls}")
        item = self._responses[self.calls]
        self.calls += 1
        return item(request) if callable(item) else item


class HttpChatBackend:
    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key_env: str | None = "OPENAI_API_KEY",
        timeout: float = 120.0,
        retries: int = 3,
        backoff: float = 1.0,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.endpoint = endpoint
        self.model = model
        self.retries = retries
        self.backoff = backoff
        self._sleep = sleep
        headers = {}
        if api_key_env and os.environ.get(api_key_env):
            headers["Authorization"] = f"Bearer {os.environ[api_key_env]}"
        self._client = httpx.Client(timeout=timeout, headers=headers, transport=transport)

    def complete(self, request: BackendRequest) -> str:
        body = request_body(request, self.model)
        attempt = 0
        while True:
            try:
                resp = self._client.post(self.endpoint, json=body)
                if resp.status_code in RETRY_STATUS:
                    raise _Retryable(f"HTTP {resp.status_code}")
                break
            except (httpx.TransportError, _Retryable) as e:
                if attempt >= self.retries:
                    raise BackendError(f"backend unreachable after {attempt + 1} attempts: {e}") from e
                delay = self.backoff * 2**attempt
                log.warning("backend request failed (%s); retrying in %.1fs", e, delay)
                self._sleep(delay)
                attempt += 1
        if resp.status_code >= 400:
            raise BackendError(f"backend returned HTTP {resp.status_code}: {resp.text[:500]}")
        return _first_choice_text(resp)


class _Retryable(Exception):
    pass


def _first_choice_text(resp: httpx.Response) -> str:
    try:
        content = resp.json()["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as e:
        raise BackendError(f"response missing text: {e}") from e
    if isinstance(content, list):
        content = "".join(p.get("text", "") for p in content if isinstance(p, dict))
    if not isinstance(content, str):
        raise BackendError("response missing text")
    return content
