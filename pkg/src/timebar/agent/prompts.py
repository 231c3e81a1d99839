from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from string import Template

SECTION_RE = re.compile(r"^=== (\S+) ===$", re.M)
KEYWORDS = ("THOUGHT", "ACTION", "TERMINATE")


@dataclass(frozen=True)
class PromptTemplate:
    system_preamble: str
    tool_docs: dict[str, str]
    force_answer_suffix: str
    grounding_question: str
    version: str = "default-v1"

    def __post_init__(self):
        missing = [k for k in KEYWORDS if k not in self.system_preamble]
        if missing:
            raise ValueError(f"system preamble must name {', '.join(missing)}")


def parse_prompt_file(text: str, version: str) -> PromptTemplate:
    body = "\n".join(l for l in text.splitlines() if not l.startswith("#"))
    parts = SECTION_RE.split(body)
    sections = {name: content.strip("\n") for name, content in zip(parts[1::2], parts[2::2])}
    try:
        return PromptTemplate(
            system_preamble=sections["system_preamble"],
            tool_docs={k[5:]: v for k, v in sections.items() if k.startswith("tool:")},
            force_answer_suffix=sections["force_answer_suffix"],
            grounding_question=sections["grounding_question"],
            version=version,
        )
    except KeyError as e:
        raise ValueError(f"prompt file lacks section {e}") from None


def load_template(path: str | Path | None = None) -> PromptTemplate:
    if path is None:
        text = resources.files("timebar.agent").joinpath("prompt_sets/default.txt").read_text()
        return parse_prompt_file(text, "default-v1")
    path = Path(path)
    return parse_prompt_file(path.read_text(), path.name)


def fill(text: str, **values) -> str:
    return Template(text).safe_substitute({k: str(v) for k, v in values.items()})
