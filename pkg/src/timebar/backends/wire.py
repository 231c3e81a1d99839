"""Chat-completions wire encoding. docs/wire.md documents the format."""
from __future__ import annotations

import base64
import io
import re
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

DATA_URL_PREFIX = "data:image/png;base64,"
OBSERVATION_RE = re.compile(r"^\[observation step=(\d+)\]\n", re.S)


def encode_png(pixels: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(np.ascontiguousarray(pixels)).save(buf, format="PNG", compress_level=6)
    return buf.getvalue()


def encode_png_b64(pixels: np.ndarray) -> str:
    return base64.b64encode(encode_png(pixels)).decode("ascii")


def decode_png_b64(data: str) -> np.ndarray:
    with Image.open(io.BytesIO(base64.b64decode(data))) as im:
        return np.asarray(im.convert("RGB"))


def turn_to_message(turn) -> dict:
    role = turn.role
    text = turn.text
    if role == "tool-observation":
        role = "user"
        text = f"[observation step={turn.step}]\n{text}"
    parts: list[dict] = [{"type": "text", "text": text}]
    if turn.frames is not None:
        for f in turn.frames:
            parts.append({
                "type": "image_url",
                "image_url": {"url": DATA_URL_PREFIX + encode_png_b64(f.pixels)},
            })
    return {"role": role, "content": parts}


def request_body(request, model: str) -> dict:
    return {
        "model": model,
        "messages": [turn_to_message(t) for t in request.turns],
        "temperature": request.temperature,
        "max_tokens": request.max_tokens,
    }


@dataclass
class WireTurn:
    role: str
    text: str
    step: int | None = None
    images: list[np.ndarray] = field(default_factory=list)


def parse_messages(body: dict) -> list[WireTurn]:
    """Inverse of :func:`request_body` for the message list."""
    out = []
    for msg in body["messages"]:
        content = msg["content"]
        if isinstance(content, str):
            content = [{"type": "text", "text": content}]
        texts = [p["text"] for p in content if p["type"] == "text"]
        images = [
            decode_png_b64(p["image_url"]["url"][len(DATA_URL_PREFIX):])
            for p in content
            if p["type"] == "image_url"
        ]
        text = "".join(texts)
        role, step = msg["role"], None
        m = OBSERVATION_RE.match(text) if role == "user" else None
        if m:
            role, step, text = "tool-observation", int(m.group(1)), text[m.end():]
        out.append(WireTurn(role, text, step, images))
    return out
