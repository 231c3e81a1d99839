"""The reasoning loop: ask the model, parse its step, run its tool calls,
show it the redrawn frames, repeat until it terminates or runs out of steps."""
from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field

from ..backends.chat import BackendError, BackendRequest, ChatTurn
from ..core import FrameSequence, VideoMemory
from ..ingest import IngestError, SamplingSpec, VideoSource, sample_frames
from ..render import BarStyle
from ..retrieve import RetrievalConfig
from .language import ActionError, ParsedStep, TOOL_SIGNATURES, format_call, parse_action, parse_response
from .prompts import PromptTemplate, fill, load_template
from .tools import ToolContext, ToolError, dispatch, observe

log = logging.getLogger(__name__)

TERMINATED_BY = ("model", "forced-at-T", "error")


@dataclass(frozen=True)
class AgentConfig:
    max_steps: int = 3
    n_frames: int = 32
    long_side: int = 480
    tools: tuple[str, ...] = tuple(TOOL_SIGNATURES)
    temperature: float = 0.0
    max_tokens: int = 1024

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        unknown = set(self.tools) - set(TOOL_SIGNATURES)
        if unknown:
            raise ValueError(f"unknown tools {sorted(unknown)}")


@dataclass
class StepRecord:
    index: int
    response: str
    parsed: ParsedStep
    calls: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)
    memory_version: int = 0
    forced: bool = False

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "response": self.response,
            "parsed": self.parsed.to_dict(),
            "calls": self.calls,
            "errors": self.errors,
            "memory_version": self.memory_version,
            "forced": self.forced,
        }


def _frames_digest(frames: FrameSequence) -> dict:
    h = hashlib.sha256()
    for f in frames:
        h.update(f.pixels.tobytes())
    return {
        "count": len(frames),
        "timestamps": frames.timestamps,
        "shape": list(frames[0].pixels.shape),
        "sha256": h.hexdigest(),
    }


@dataclass
class SessionTrace:
    question: str
    turns: list[ChatTurn] = field(default_factory=list)
    steps: list[StepRecord] = field(default_factory=list)
    final_answer: str | None = None
    terminated_by: str | None = None
    error: str | None = None
    lineage: list[tuple[int, str]] = field(default_factory=list)
    memories: list[VideoMemory] = field(default_factory=list, repr=False)
    config: dict = field(default_factory=dict)

    def append(self, turn: ChatTurn) -> None:
        self.turns.append(turn)

    def to_dict(self) -> dict:
        turns = []
        for t in self.turns:
            d = {"role": t.role, "text": t.text}
            if t.step is not None:
                d["step"] = t.step
            if t.frames is not None:
                d["frames"] = _frames_digest(t.frames)
            turns.append(d)
        return {
            "question": self.question,
            "final_answer": self.final_answer,
            "terminated_by": self.terminated_by,
            "error": self.error,
            "steps": [s.to_dict() for s in self.steps],
            "turns": turns,
            "lineage": [list(x) for x in self.lineage],
            "config": self.config,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def build_init_prompt(
    question: str,
    template: PromptTemplate,
    toolset,
    frames: FrameSequence | None = None,
    retrieval: RetrievalConfig = RetrievalConfig(),
    n_frames: int = 32,
) -> list[ChatTurn]:
    if not question.strip():
        raise ValueError("question must be non-empty")
    toolset = [t for t in TOOL_SIGNATURES if t in set(toolset)]
    if not toolset and "$tool_docs" in template.system_preamble:
        raise ValueError("prompt template lists tools but the toolset is empty")
    values = dict(
        n_frames=n_frames,
        k=retrieval.k,
        clip_seconds=f"{retrieval.clip_len / retrieval.fps:g}",
    )
    docs = "\n".join(fill(template.tool_docs[t], **values) for t in toolset)
    system = fill(template.system_preamble, tool_docs=docs, **values)
    return [
        ChatTurn("system", system),
        ChatTurn("user", question.strip(), frames=frames),
    ]


def _request(turns: list[ChatTurn], cfg: AgentConfig) -> BackendRequest:
    # Only the newest frame-bearing turn keeps its frames: the current memory.
    last = max((i for i, t in enumerate(turns) if t.frames is not None), default=-1)
    return BackendRequest(
        tuple(t if i == last else t.without_frames() for i, t in enumerate(turns)),
        temperature=cfg.temperature,
        max_tokens=cfg.max_tokens,
    )


def run_session(
    source: VideoSource,
    question: str,
    backend,
    provider=None,
    cfg: AgentConfig = AgentConfig(),
    template: PromptTemplate | None = None,
    retrieval: RetrievalConfig = RetrievalConfig(),
    style: BarStyle = BarStyle(),
    config_echo: dict | None = None,
) -> tuple[str | None, SessionTrace]:
    """Answer ``question`` about ``source``.

    Never raises for model misbehaviour: parse and tool errors are shown to
    the model as observations. Backend failures end the session with
    ``terminated_by == "error"`` and the partial trace.
    """
    template = template or load_template()
    trace = SessionTrace(question=question, config=dict(config_echo or {}))
    sampling = SamplingSpec(cfg.n_frames, cfg.long_side)
    memory = VideoMemory.initial(sample_frames(source, sampling))
    trace.memories.append(memory)
    ctx = ToolContext(source, provider, sampling, retrieval, style)
    for t in build_init_prompt(question, template, cfg.tools, memory.current, retrieval, cfg.n_frames):
        trace.append(t)

    def ask() -> str | None:
        try:
            return backend.complete(_request(trace.turns, cfg))
        except BackendError as e:
            trace.terminated_by = "error"
            trace.error = str(e)
            log.error("backend failed: %s", e)
            return None

    for s in range(cfg.max_steps):
        reply = ask()
        if reply is None:
            break
        trace.append(ChatTurn("assistant", reply))
        parsed = parse_response(reply)
        record = StepRecord(s, reply, parsed, memory_version=memory.version)
        trace.steps.append(record)
        if parsed.terminate:
            trace.final_answer = parsed.answer
            trace.terminated_by = "model"
            break

        notes = []
        calls = []
        if parsed.action is None:
            notes.append(f"error: {parsed.diagnostic}")
        else:
            try:
                calls = parse_action(parsed.action, cfg.tools)
            except ActionError as e:
                record.errors.extend(str(d) for d in e.diagnostics)
                notes.append("error: could not parse ACTION:")
                notes.extend(f"  {d}" for d in e.diagnostics)
        for call in calls:
            try:
                memory = dispatch(call, memory, ctx)
            except ToolError as e:
                record.errors.append(str(e))
                notes.append(f"error: {e}")
                continue
            trace.memories.append(memory)
            record.calls.append(format_call(call))
            notes.append(observe(call, memory))
        record.memory_version = memory.version
        trace.append(ChatTurn("tool-observation", "\n".join(notes), frames=memory.current, step=s))
    else:
        trace.append(ChatTurn("user", template.force_answer_suffix, frames=memory.current))
        reply = ask()
        if reply is not None:
            trace.append(ChatTurn("assistant", reply))
            parsed = parse_response(reply)
            trace.steps.append(
                StepRecord(cfg.max_steps, reply, parsed, memory_version=memory.version, forced=True)
            )
            trace.final_answer = parsed.answer if parsed.answer else reply.strip()
            trace.terminated_by = "forced-at-T"

    trace.lineage = list(memory.lineage)
    return trace.final_answer, trace
