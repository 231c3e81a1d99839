"""Command-line entry point.

Exit status: 0 on success, 1 on usage errors, 2 on runtime failures. JSON
results go to stdout; diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from PIL import Image

from . import __version__
from .agent import AgentConfig, load_template, run_session
from .agent.prompts import fill
from .backends import (
    BackendError,
    EmbeddingError,
    HttpChatBackend,
    HttpEmbeddingProvider,
    ScriptedBackend,
    SyntheticEmbeddingProvider,
)
from .config import Config, ConfigError, load_config
from .core import IntervalSet
from .eval import (
    DatasetError,
    GroundingItem,
    QAItem,
    as_interval_set,
    evaluate_grounding,
    evaluate_qa,
    extract_intervals,
    import_dataset,
    judge_records,
    load_predictions,
)
from .fixtures import PlantedMoment, make_fixture_video
from .ingest import IngestError, SamplingSpec, open_source, sample_frames
from .render import RenderError, render_highlights, render_progress_bar, render_strip
from .retrieve import RetrievalError, retrieve_moments

log = logging.getLogger("timebar")

EXIT_USAGE = 1
EXIT_RUNTIME = 2


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ------------------------------------------------------------------ helpers


def _dump(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _config(args) -> Config:
    overrides = dict(kv.split("=", 1) for kv in args.set or [] if "=" in kv)
    bad = [kv for kv in args.set or [] if "=" not in kv]
    if bad:
        raise ConfigError(f"--set expects key=value, got {bad[0]!r}")
    overrides = {k.strip(): v.strip() for k, v in overrides.items()}
    for flag in ("backend", "provider", "model", "endpoint", "k", "fps", "max_steps", "n_frames", "long_side"):
        if getattr(args, flag, None) is not None:
            overrides[flag] = getattr(args, flag)
    return load_config(args.config, overrides)


def make_backend(cfg: Config):
    if cfg.backend.startswith("scripted:"):
        path = Path(cfg.backend.split(":", 1)[1])
        responses = json.loads(path.read_text())
        if not isinstance(responses, list) or not all(isinstance(r, str) for r in responses):
            raise ConfigError(f"{path} must hold a JSON list of response strings")
        return ScriptedBackend(responses)
    if cfg.backend == "http":
        return HttpChatBackend(cfg.endpoint, cfg.model, cfg.api_key_env, cfg.timeout, cfg.retries)
    raise ConfigError(f"backend must be 'http' or 'scripted:<file>', got {cfg.backend!r}")


def make_provider(cfg: Config):
    if cfg.provider == "synthetic":
        return SyntheticEmbeddingProvider()
    if cfg.provider == "http":
        if not cfg.embed_endpoint:
            raise ConfigError("provider 'http' needs embed_endpoint")
        return HttpEmbeddingProvider(cfg.embed_endpoint, cfg.embed_model, cfg.api_key_env, cfg.timeout)
    raise ConfigError(f"provider must be 'synthetic' or 'http', got {cfg.provider!r}")


def _source(path, cfg: Config):
    return open_source(path, cfg.decoder_command, cfg.probe_command)


def contact_sheet(frames, cols: int = 8) -> np.ndarray:
    n = len(frames)
    cols = min(cols, n)
    rows = math.ceil(n / cols)
    h, w = frames[0].pixels.shape[:2]
    sheet = np.zeros((rows * h, cols * w, 3), dtype=np.uint8)
    for i, f in enumerate(frames):
        r, c = divmod(i, cols)
        sheet[r * h : (r + 1) * h, c * w : (c + 1) * w] = f.pixels
    return sheet


def dump_memories(trace, out_dir: Path, video_id: str) -> list[str]:
    """Write ``<video_id>/v<version>_<step>.png`` contact sheets, one per memory version."""
    step_of = {0: 0}
    prev = 0
    for rec in trace.steps:
        for v in range(prev + 1, rec.memory_version + 1):
            step_of[v] = rec.index + 1
        prev = max(prev, rec.memory_version)
    target = out_dir / video_id
    target.mkdir(parents=True, exist_ok=True)
    written = []
    for mem in trace.memories:
        path = target / f"v{mem.version}_{step_of.get(mem.version, 0)}.png"
        Image.fromarray(contact_sheet(mem.current.frames)).save(path)
        written.append(str(path))
    return written


def trace_header(cfg: Config, template) -> dict:
    return {"effective": cfg.to_dict(), "versions": {"timebar": __version__, "prompts": template.version}}


def _session(cfg: Config, source, question: str):
    template = load_template(cfg.prompt_file or None)
    return run_session(
        source,
        question,
        make_backend(cfg),
        make_provider(cfg) if "highlight" in cfg.tools else None,
        cfg.agent(),
        template,
        cfg.retrieval(),
        cfg.style(),
        config_echo=trace_header(cfg, template),
    )


def _write_session_outputs(args, trace, video_id: str) -> None:
    if args.emit_trace:
        Path(args.emit_trace).parent.mkdir(parents=True, exist_ok=True)
        Path(args.emit_trace).write_text(trace.to_json())
    if args.emit_frames:
        dump_memories(trace, Path(args.emit_frames), video_id)


# ---------------------------------------------------------------- commands


def cmd_ask(args) -> int:
    cfg = _config(args)
    source = _source(args.video, cfg)
    answer, trace = _session(cfg, source, args.question)
    _write_session_outputs(args, trace, source.video_id)
    _dump({"answer": answer, "terminated_by": trace.terminated_by, "error": trace.error})
    return EXIT_RUNTIME if trace.terminated_by == "error" else 0


def grounding_question(cfg: Config, query: str) -> str:
    template = load_template(cfg.prompt_file or None)
    return fill(template.grounding_question, query=query)


def cmd_ground(args) -> int:
    cfg = _config(args)
    source = _source(args.video, cfg)
    answer, trace = _session(cfg, source, grounding_question(cfg, args.query))
    _write_session_outputs(args, trace, source.video_id)
    moments = extract_intervals(answer or "").clip(0, source.duration)
    _dump({
        "answer": answer,
        "intervals": moments.to_json(),
        "terminated_by": trace.terminated_by,
        "error": trace.error,
    })
    return EXIT_RUNTIME if trace.terminated_by == "error" else 0


def cmd_retrieve(args) -> int:
    cfg = _config(args)
    source = _source(args.video, cfg)
    moments = retrieve_moments(source, args.query, make_provider(cfg), cfg.retrieval(), cfg.long_side)
    if args.emit_frames:
        frames = sample_frames(source, SamplingSpec(cfg.n_frames, cfg.long_side))
        _write_frames(render_highlights(frames, moments, cfg.style()), Path(args.emit_frames))
    _dump(moments.to_json())
    return 0


def _write_frames(frames, out: Path) -> list[str]:
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for j, f in enumerate(frames):
        p = out / f"frame_{j:03d}_{int(round(f.timestamp * 1000)):09d}.png"
        Image.fromarray(f.pixels).save(p)
        paths.append(str(p))
    return paths


def cmd_render(args) -> int:
    cfg = _config(args)
    source = _source(args.video, cfg)
    style = cfg.style()
    frames = sample_frames(source, SamplingSpec(cfg.n_frames, cfg.long_side))
    if args.highlight:
        moments = IntervalSet.from_json(json.loads(args.highlight))
        out = render_highlights(frames, moments, style)
    else:
        moments = IntervalSet()
        out = render_progress_bar(frames, style)
    dest = Path(args.out)
    paths = _write_frames(out, dest)
    strips = np.vstack([
        render_strip(f.width, f.timestamp, source.duration, style, moments) for f in frames
    ])
    Image.fromarray(strips).save(dest / "strips.png")
    _dump({"frames": paths, "strips": str(dest / "strips.png")})
    return 0


def _run_item(cfg: Config, item, video_root: Path, trace_dir: Path | None):
    source = _source(video_root / item.video_id, cfg)
    if isinstance(item, GroundingItem):
        question = grounding_question(cfg, item.query)
    else:
        question = item.prompt()
    answer, trace = _session(cfg, source, question)
    if trace_dir is not None:
        trace_dir.mkdir(parents=True, exist_ok=True)
        safe = item.item_id.replace("/", "_").replace("#", "_")
        (trace_dir / f"{safe}.json").write_text(trace.to_json())
    if trace.terminated_by == "error":
        log.error("%s: session failed: %s", item.item_id, trace.error)
    return answer or ""


def cmd_eval(args) -> int:
    cfg = _config(args)
    report = import_dataset(args.dataset, args.format)
    for err in report.errors:
        log.warning("skipped %s", err)
    items = report.items
    if args.run_agent:
        if not args.video_root:
            raise UsageError("--run-agent needs --video-root")
        root = Path(args.video_root)
        trace_dir = Path(args.emit_trace_dir) if args.emit_trace_dir else None
        with ThreadPoolExecutor(max(1, args.jobs)) as pool:
            answers = list(pool.map(lambda it: _run_item(cfg, it, root, trace_dir), items))
        raw = {it.item_id: a for it, a in zip(items, answers)}
    else:
        raw = load_predictions(args.predictions)

    grounding = [it for it in items if isinstance(it, GroundingItem)]
    qa = [it for it in items if isinstance(it, QAItem)]
    result: dict = {"import_errors": report.errors}
    if grounding:
        preds = {k: as_interval_set(v) for k, v in raw.items() if k in {g.item_id for g in grounding}}
        result["grounding"] = evaluate_grounding(preds, grounding).to_dict()
    if qa:
        text = {k: str(v) for k, v in raw.items()}
        mc = [it for it in qa if it.options]
        if mc:
            result["qa"] = {"n_items": len(mc), "accuracy": evaluate_qa(text, mc)}
        if args.emit_judge_file:
            open_ended = [it for it in qa if not it.options]
            with open(args.emit_judge_file, "w") as fh:
                for row in judge_records(text, open_ended):
                    fh.write(json.dumps(row, sort_keys=True) + "\n")
    if args.report:
        Path(args.report).write_text(json.dumps(result, indent=2, sort_keys=True))
    _dump(result)
    return 0


def cmd_make_fixture(args) -> int:
    moments = []
    for spec in args.plant:
        try:
            token, span = spec.split(":")
            s, e = span.split("-")
            moments.append(PlantedMoment(token, int(s), int(e)))
        except ValueError:
            raise UsageError(f"--plant expects token:start-end, got {spec!r}") from None
    src = make_fixture_video(args.out, args.duration, moments, seed=args.seed)
    _dump({"path": str(src.path), "duration_s": src.duration})
    return 0


# ------------------------------------------------------------------ parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config key (repeatable)")


def _session_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--video", required=True, help="frame directory or video file")
    p.add_argument("--backend", help="'http' or 'scripted:<responses.json>'")
    p.add_argument("--provider", help="embedding provider: synthetic | http")
    p.add_argument("--model", help="chat model name")
    p.add_argument("--endpoint", help="chat-completions URL")
    p.add_argument("--max-steps", dest="max_steps", type=int, help="tool steps before a forced answer")
    p.add_argument("--n-frames", dest="n_frames", type=int, help="frames shown to the model")
    p.add_argument("--k", type=int, help="clips marked by highlight")
    p.add_argument("--emit-trace", metavar="PATH", help="write the session trace as JSON")
    p.add_argument("--emit-frames", metavar="DIR", help="write one contact sheet per memory version")


def build_parser() -> Parser:
    parser = Parser(prog="timebar", description="Progress-bar visual reasoning over video frames.")
    parser.add_argument("--version", action="version", version=f"timebar {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    p = sub.add_parser("ask", help="answer a question about a video")
    _common(p)
    _session_flags(p)
    p.add_argument("--question", required=True)
    p.set_defaults(func=cmd_ask)

    p = sub.add_parser("ground", help="find when a described event happens")
    _common(p)
    _session_flags(p)
    p.add_argument("--query", required=True)
    p.set_defaults(func=cmd_ground)

    p = sub.add_parser("retrieve", help="rank clips by similarity to a query")
    _common(p)
    p.add_argument("--video", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--fps", type=float)
    p.add_argument("--provider", help="synthetic | http")
    p.add_argument("--emit-frames", metavar="DIR", help="write highlight-rendered frames")
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("render", help="draw the progress bar on sampled frames")
    _common(p)
    p.add_argument("--video", required=True)
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--n-frames", dest="n_frames", type=int)
    p.add_argument("--long-side", dest="long_side", type=int)
    p.add_argument("--highlight", metavar="JSON", help="intervals to tint, e.g. '[[10, 20]]'")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("eval", help="score predictions or agent runs on a dataset")
    _common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--format", required=True, choices=["charades-lines", "jsonl"])
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--predictions", metavar="PATH", help="JSON object: item id -> intervals or answer text")
    src.add_argument("--run-agent", action="store_true", help="run a session per item")
    p.add_argument("--video-root", metavar="DIR", help="where <video_id> sources live (with --run-agent)")
    p.add_argument("--backend", help="'http' or 'scripted:<responses.json>'")
    p.add_argument("--provider", help="synthetic | http")
    p.add_argument("--jobs", type=int, default=1, help="items run in parallel")
    p.add_argument("--report", metavar="PATH", help="write the metrics report JSON")
    p.add_argument("--emit-judge-file", metavar="PATH", help="JSONL rows for open-ended answer judging")
    p.add_argument("--emit-trace-dir", metavar="DIR", help="one trace JSON per item")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("make-fixture", help="write a synthetic frame directory with planted tokens")
    p.add_argument("--out", required=True)
    p.add_argument("--duration", type=int, required=True)
    p.add_argument("--plant", action="append", default=[], metavar="TOKEN:START-END")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_make_fixture)
    return parser


def cli_markdown() -> str:
    # help text wraps to $COLUMNS; pin it so the generated doc is stable
    saved = os.environ.get("COLUMNS")
    os.environ["COLUMNS"] = "100"
    try:
        return _cli_markdown(build_parser())
    finally:
        if saved is None:
            del os.environ["COLUMNS"]
        else:
            os.environ["COLUMNS"] = saved


def _cli_markdown(parser) -> str:
    out = ["# timebar command line", "", "Generated from `--help`; do not edit by hand.", ""]
    out += ["```", parser.format_help().rstrip(), "```", ""]
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for name, p in sub.choices.items():
        out += [f"## {name}", "", "```", p.format_help().rstrip(), "```", ""]
    return "\n".join(out)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (UsageError, ConfigError) as e:
        print(f"timebar: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (
        IngestError, RenderError, RetrievalError, EmbeddingError, BackendError,
        DatasetError, OSError, ValueError,
    ) as e:
        print(f"timebar: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
