"""Grounding and multiple-choice QA evaluation.

Grounding IoU is union-based, so a query whose ground truth is several
disjoint segments is scored against the whole predicted set at once.
"""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .core import Interval, IntervalSet, interval_iou, normalize
from .ingest import VideoSource

log = logging.getLogger(__name__)

THRESHOLDS = (0.3, 0.5, 0.7)

_NUM = r"(\d+(?:\.\d+)?)"
RANGE_RE = re.compile(rf"(?<![\d.]){_NUM}\s*(?:s|sec|secs|seconds?)?\s*(?:to|-|–)\s*{_NUM}(?![\d.])")
BRACKET_RE = re.compile(rf"\[\s*{_NUM}\s*(?:s|seconds?)?\s*,\s*{_NUM}\s*(?:s|seconds?)?\s*\]")
LABEL_RE = re.compile(r"(?<![A-Za-z0-9])([A-E])(?![A-Za-z0-9])")


class DatasetError(ValueError):
    def __init__(self, message: str, errors: list[str] | None = None):
        super().__init__(message)
        self.errors = errors or []


@dataclass(frozen=True)
class GroundingItem:
    item_id: str
    video_id: str
    query: str
    ground_truth: IntervalSet
    source: VideoSource | None = None
    duration: float | None = None

    def __post_init__(self):
        if not self.ground_truth:
            raise ValueError(f"{self.item_id}: empty ground truth")
        d = self.source.duration if self.source is not None else self.duration
        if d is not None and self.ground_truth.intervals[-1].end > d + 1e-6:
            raise ValueError(f"{self.item_id}: ground truth extends past duration {d}")


@dataclass(frozen=True)
class QAItem:
    item_id: str
    video_id: str
    question: str
    correct: str
    options: tuple[tuple[str, str], ...] | None = None
    hint: str | None = None

    def __post_init__(self):
        if self.options is not None:
            labels = [k for k, _ in self.options]
            if len(labels) < 2:
                raise ValueError(f"{self.item_id}: multiple-choice items need >= 2 options")
            if self.correct not in labels:
                raise ValueError(f"{self.item_id}: correct label {self.correct!r} not among {labels}")

    def prompt(self) -> str:
        parts = []
        if self.hint:
            parts.append(f"Hint: {self.hint}")
        parts.append(self.question)
        if self.options:
            parts.extend(f"({k}) {v}" for k, v in self.options)
            parts.append("Answer with the letter of the correct option.")
        return "\n".join(parts)


@dataclass
class MetricsReport:
    n_items: int
    miou: float
    recall_at: dict[float, float]
    per_item: list[tuple[str, float]] = field(default_factory=list)
    missing: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n_items": self.n_items,
            "mIoU": self.miou,
            "recall_at": {f"{m:g}": v for m, v in self.recall_at.items()},
            "per_item": [{"id": i, "iou": v} for i, v in self.per_item],
            "missing": self.missing,
        }


def extract_intervals(text: str) -> IntervalSet:
    ivs = []
    for rx in (BRACKET_RE, RANGE_RE):
        for m in rx.finditer(text):
            a, b = float(m.group(1)), float(m.group(2))
            if a < b:
                ivs.append(Interval(a, b))
    return normalize(ivs)


def report_from_ious(per_item: list[tuple[str, float]], thresholds=THRESHOLDS) -> MetricsReport:
    n = len(per_item)
    ious = [v for _, v in per_item]
    miou = sum(ious) / n if n else 0.0
    recall = {m: (sum(1 for v in ious if v >= m) / n if n else 0.0) for m in thresholds}
    return MetricsReport(n, miou, recall, list(per_item))


def evaluate_grounding(
    predictions: Mapping[str, IntervalSet], items: Iterable[GroundingItem], thresholds=THRESHOLDS
) -> MetricsReport:
    items = list(items)
    ids = [it.item_id for it in items]
    dupes = sorted({i for i in ids if ids.count(i) > 1}) if len(set(ids)) != len(ids) else []
    if dupes:
        raise ValueError(f"duplicate item ids: {', '.join(dupes)}")
    per_item, missing = [], []
    for it in items:
        pred = predictions.get(it.item_id)
        if pred is None:
            log.warning("no prediction for %s; scoring it as empty", it.item_id)
            missing.append(it.item_id)
            pred = IntervalSet()
        per_item.append((it.item_id, interval_iou(pred, it.ground_truth)))
    report = report_from_ious(per_item, thresholds)
    report.missing = missing
    return report


def extract_label(text: str) -> str | None:
    m = LABEL_RE.search(text)
    return m.group(1) if m else None


def evaluate_qa(predictions: Mapping[str, str], items: Iterable[QAItem]) -> float:
    items = list(items)
    if not items:
        return 0.0
    correct = 0
    for it in items:
        if not it.options:
            raise ValueError(f"{it.item_id}: open-ended items need an external judge")
        pred = predictions.get(it.item_id)
        if pred is not None and extract_label(pred) == it.correct:
            correct += 1
    return correct / len(items)


def judge_records(predictions: Mapping[str, str], items: Iterable[QAItem]) -> list[dict]:
    """Rows for an external open-ended answer judge."""
    return [
        {
            "id": it.item_id,
            "video_id": it.video_id,
            "question": it.question,
            "hint": it.hint,
            "reference": it.correct,
            "prediction": predictions.get(it.item_id),
        }
        for it in items
    ]


# ------------------------------------------------------------------ import


@dataclass
class ImportReport:
    items: list
    errors: list[str]


def _parse_charades(line: str, lineno: int) -> GroundingItem:
    head, sep, query = line.partition("##")
    if not sep:
        raise ValueError("missing '##' separator")
    fields = head.split()
    if len(fields) != 3:
        raise ValueError("expected '<video_id> <start> <end>##<query>'")
    vid, s, e = fields
    if not query.strip():
        raise ValueError("empty query")
    return GroundingItem(
        f"{vid}#{lineno}", vid, query.strip(), normalize([Interval(float(s), float(e))])
    )


def _parse_options(raw) -> tuple[tuple[str, str], ...]:
    if isinstance(raw, dict):
        return tuple((str(k), str(v)) for k, v in raw.items())
    if isinstance(raw, list):
        out = []
        for i, opt in enumerate(raw):
            m = re.match(r"^\(?([A-E])[).:]\s*(.*)$", str(opt))
            out.append((m.group(1), m.group(2)) if m else ("ABCDE"[i], str(opt)))
        return tuple(out)
    raise ValueError("options must be an object or a list")


def _parse_jsonl(line: str, lineno: int):
    obj = json.loads(line)
    if not isinstance(obj, dict):
        raise ValueError("expected a JSON object")
    vid = str(obj["video_id"])
    item_id = str(obj.get("id", f"{vid}#{lineno}"))
    if "segments" in obj:
        return GroundingItem(
            item_id, vid, str(obj["query"]), IntervalSet.from_json(obj["segments"]),
            duration=float(obj["duration"]) if "duration" in obj else None,
        )
    if "question" in obj:
        options = _parse_options(obj["options"]) if obj.get("options") is not None else None
        correct = obj.get("answer", obj.get("correct"))
        if correct is None:
            raise ValueError("QA record needs 'answer' or 'correct'")
        return QAItem(item_id, vid, str(obj["question"]), str(correct), options, obj.get("hint"))
    raise ValueError("record has neither 'segments' nor 'question'")


def import_dataset(path: str | Path, fmt: str) -> ImportReport:
    """Parse a dataset file; malformed lines are reported, not fatal."""
    parsers = {"charades-lines": _parse_charades, "jsonl": _parse_jsonl}
    if fmt not in parsers:
        raise ValueError(f"unknown format {fmt!r}; choose from {', '.join(parsers)}")
    parse = parsers[fmt]
    try:
        text = Path(path).read_text(encoding="utf-8", errors="replace")
    except OSError as e:
        raise DatasetError(f"unreadable dataset {path}: {e}") from e
    items, errors = [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            items.append(parse(line.strip(), lineno))
        except (ValueError, KeyError, TypeError) as e:
            errors.append(f"line {lineno}: {type(e).__name__}: {e}")
    if not items:
        raise DatasetError(f"no valid lines in {path}", errors)
    return ImportReport(items, errors)


def load_predictions(path: str | Path) -> dict[str, object]:
    """JSON object mapping item id to an interval list or answer text."""
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise ValueError("predictions file must hold a JSON object")
    return data


def as_interval_set(value) -> IntervalSet:
    if isinstance(value, str):
        return extract_intervals(value)
    return IntervalSet.from_json(value)
