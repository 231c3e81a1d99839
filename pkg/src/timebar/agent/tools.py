"""Executing parsed tool calls against the video memory."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..core import Interval, IntervalSet, VideoMemory, memory_update
from ..ingest import IngestError, SamplingSpec, VideoSource, sample_frames
from ..render import BarStyle, RenderError, render_highlights, render_progress_bar
from ..retrieve import RetrievalConfig, RetrievalError, retrieve_moments
from ..backends.embeddings import EmbeddingError
from .language import ToolCall, format_call


class ToolError(RuntimeError):
    pass


@dataclass
class ToolContext:
    source: VideoSource
    provider: object | None = None
    sampling: SamplingSpec = field(default_factory=SamplingSpec)
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    style: BarStyle = field(default_factory=BarStyle)
    _moments: dict = field(default_factory=dict, repr=False)

    def moments(self, query: str, k: int) -> IntervalSet:
        """Retrieval over the full source, memoized per (query, k)."""
        key = (query, k)
        if key not in self._moments:
            if self.provider is None:
                raise ToolError("highlight is unavailable: no embedding provider configured")
            cfg = replace(self.retrieval, k=k)
            self._moments[key] = retrieve_moments(
                self.source, query, self.provider, cfg, self.sampling.long_side
            )
        return self._moments[key]


def _fmt_set(s: IntervalSet) -> str:
    return "[" + ", ".join(f"[{iv.start:g}, {iv.end:g}]" for iv in s) + "]"


def dispatch(call: ToolCall, memory: VideoMemory, ctx: ToolContext) -> VideoMemory:
    try:
        return _dispatch(call, memory, ctx)
    except (IngestError, RenderError, RetrievalError, EmbeddingError, ValueError) as e:
        raise ToolError(f"{format_call(call)} failed: {e}") from e


def _dispatch(call: ToolCall, memory: VideoMemory, ctx: ToolContext) -> VideoMemory:
    args = call.kwargs
    cause = format_call(call)
    frames = memory.current
    if call.name == "progress_bar":
        return memory_update(memory, render_progress_bar(frames, ctx.style), cause)

    if call.name == "highlight":
        query = args["query"]
        if not query.strip():
            raise ToolError("highlight needs a non-empty query")
        found = ctx.moments(query, args.get("k", ctx.retrieval.k))
        visible = found.clip(memory.window.start, memory.window.end)
        return memory_update(memory, render_highlights(frames, visible, ctx.style), cause)

    if call.name == "cut":
        lo = max(args["start"], memory.window.start)
        hi = min(args["end"], memory.window.end)
        if lo >= hi:
            raise ToolError(
                f"cut({args['start']:g}, {args['end']:g}) is empty inside the current window "
                f"[{memory.window.start:g}, {memory.window.end:g}]"
            )
        window = Interval(lo, hi)
        new = sample_frames(ctx.source, ctx.sampling, window)
        if frames[0].bar_rows:
            kept = frames[0].highlights.clip(lo, hi)
            new = render_highlights(new, kept, ctx.style)
        return memory_update(memory, new, cause, window=window)

    raise ToolError(f"unknown tool {call.name!r}")


def observe(call: ToolCall, memory: VideoMemory) -> str:
    """One-line description of the memory after ``call`` succeeded."""
    frames = memory.current
    w = memory.window
    head = f"{format_call(call)} -> memory v{memory.version}: {len(frames)} frames over [{w.start:g}, {w.end:g}] s"
    if call.name == "highlight":
        lit = frames[0].highlights
        if lit:
            return f"{head}; highlighted {_fmt_set(lit)} s"
        return f"{head}; no matching moments inside the current window"
    if frames[0].bar_rows:
        return f"{head}, progress bar shown"
    return head
