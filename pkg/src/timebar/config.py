"""Line-oriented ``key = value`` configuration with ``#`` comments.

Precedence: command-line flag > config file > built-in default.
"""
from __future__ import annotations

import difflib
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .agent.loop import AgentConfig
from .ingest import DEFAULT_DECODER, DEFAULT_PROBE
from .render import BarStyle
from .retrieve import RetrievalConfig


class ConfigError(ValueError):
    pass


ALIASES = {
    "topk": "k",
    "top_k": "k",
    "T": "max_steps",
    "steps": "max_steps",
    "frames": "n_frames",
    "num_frames": "n_frames",
    "r": "fps",
    "api_key": "api_key_env",
    "temp": "temperature",
}


@dataclass(frozen=True)
class Config:
    # chat backend: "http" or "scripted:<responses.json>"
    backend: str = "http"
    endpoint: str = "https://api.openai.com/v1/chat/completions"
    model: str = "gpt-4o-2024-05-13"
    api_key_env: str = "OPENAI_API_KEY"
    timeout: float = 120.0
    retries: int = 3
    temperature: float = 0.0
    max_tokens: int = 1024
    # embedding provider: "synthetic" or "http"
    provider: str = "synthetic"
    embed_endpoint: str = ""
    embed_model: str = ""
    # agent
    max_steps: int = 3
    n_frames: int = 32
    long_side: int = 480
    tools: str = "progress_bar,highlight,cut"
    prompt_file: str = ""
    # retrieval
    fps: float = 1.0
    clip_len: int = 8
    k: int = 8
    # ingest
    decoder_command: str = DEFAULT_DECODER
    probe_command: str = DEFAULT_PROBE
    # progress bar style
    bar_strip_height: int = 60
    track_margin_frac: float = 0.05
    track_thickness: int = 8
    marker_radius: int = 7
    track_color: str = "200,200,200"
    marker_color: str = "230,60,60"
    highlight_color: str = "60,200,90"
    label_color: str = "255,255,255"
    background_color: str = "0,0,0"
    timestamp_format: str = "integer-seconds"

    def agent(self) -> AgentConfig:
        return AgentConfig(
            max_steps=self.max_steps,
            n_frames=self.n_frames,
            long_side=self.long_side,
            tools=tuple(t.strip() for t in self.tools.split(",") if t.strip()),
            temperature=self.temperature,
            max_tokens=self.max_tokens,
        )

    def retrieval(self) -> RetrievalConfig:
        return RetrievalConfig(fps=self.fps, clip_len=self.clip_len, k=self.k)

    def style(self) -> BarStyle:
        kw = {}
        for name in BarStyle.field_names():
            value = getattr(self, name)
            kw[name] = _rgb(name, value) if name.endswith("_color") else value
        return BarStyle(**kw)

    def to_dict(self) -> dict:
        return asdict(self)


def _rgb(name: str, text: str) -> tuple[int, int, int]:
    try:
        rgb = tuple(int(x) for x in text.split(","))
    except ValueError:
        rgb = ()
    if len(rgb) != 3 or not all(0 <= c <= 255 for c in rgb):
        raise ConfigError(f"{name} must be 'R,G,B' with 0-255 components, got {text!r}")
    return rgb


FIELD_TYPES = {f.name: f.type for f in fields(Config)}


def suggest(key: str) -> str | None:
    if key in ALIASES:
        return ALIASES[key]
    lowered = key.lower().replace("-", "_")
    if lowered in FIELD_TYPES:
        return lowered
    close = difflib.get_close_matches(lowered, FIELD_TYPES, n=1, cutoff=0.5)
    return close[0] if close else None


def _coerce(key: str, value):
    kind = FIELD_TYPES[key]
    if not isinstance(value, str):
        value = str(value)
    try:
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
    except ValueError:
        raise ConfigError(f"{key} expects {kind}, got {value!r}") from None
    return value


def _check_key(key: str, origin: str) -> None:
    if key not in FIELD_TYPES:
        hint = suggest(key)
        msg = f"unknown config key {key!r} in {origin}"
        raise ConfigError(msg + (f"; did you mean {hint!r}?" if hint else ""))


def parse_config_text(text: str, origin: str = "config") -> dict[str, object]:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value'")
        key = key.strip()
        _check_key(key, f"{origin}:{lineno}")
        values[key] = _coerce(key, value.strip())
    return values


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> Config:
    values: dict[str, object] = {}
    if path is not None:
        values.update(parse_config_text(Path(path).read_text(), str(path)))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        _check_key(key, "command line")
        values[key] = _coerce(key, value)
    cfg = Config(**values)
    try:  # surface invalid combinations now, not mid-run
        cfg.agent(), cfg.retrieval(), cfg.style()
    except ValueError as e:
        raise ConfigError(str(e)) from e
    return cfg
