"""Parsing model replies: the THOUGHT/ACTION/ANSWER/TERMINATE layout and the
tool-call language inside ACTION blocks.

Tool-call grammar, one statement per line::

    statement := NAME "(" [arg ("," arg)*] ")"
    arg       := value | NAME "=" value
    value     := STRING | INTEGER | DECIMAL
    STRING    := '"' (char | '\\"' | '\\\\')* '"'
    INTEGER   := "-"? digit+
    DECIMAL   := "-"? digit+ "." digit+

Blank lines and lines starting with ``#`` are ignored. Nothing is executed;
a statement only names a whitelisted tool with typed arguments.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal
from typing import Iterable

# ---------------------------------------------------------------- responses

KEY_RE = re.compile(r"^\s*(THOUGHT|ACTION|ANSWER):[ \t]?(.*)$")
TERMINATE_LINE_RE = re.compile(r"^\s*TERMINATE\b")
TERMINATE_TAIL_RE = re.compile(r"\s+TERMINATE\s*$")
FENCE_RE = re.compile(r"^\s*```")
STATEMENT_HEAD_RE = re.compile(r"^[ \t]*[A-Za-z_][A-Za-z0-9_]*[ \t]*\(")


@dataclass(frozen=True)
class ParsedStep:
    thought: str = ""
    action: str | None = None
    terminate: bool = False
    answer: str | None = None
    diagnostic: str | None = None

    def to_dict(self) -> dict:
        return {
            "thought": self.thought,
            "action": self.action,
            "terminate": self.terminate,
            "answer": self.answer,
            "diagnostic": self.diagnostic,
        }


def _fenced_body(lines: list[str]) -> str | None:
    inside, body = False, []
    for line in lines:
        if FENCE_RE.match(line):
            if inside:
                return "\n".join(body)
            inside = True
            continue
        if inside:
            body.append(line)
    return "\n".join(body) if inside else None


def parse_response(text: str) -> ParsedStep:
    sections: dict[str, list[str]] = {}
    current: list[str] | None = None
    in_fence = False
    terminate = False
    for line in text.splitlines():
        if FENCE_RE.match(line):
            in_fence = not in_fence
            if current is not None:
                current.append(line)
            continue
        if not in_fence:
            if TERMINATE_LINE_RE.match(line):
                terminate = True
                current = None
                continue
            m = KEY_RE.match(line)
            if m:
                key, rest = m.groups()
                if TERMINATE_TAIL_RE.search(rest):
                    terminate = True
                    rest = TERMINATE_TAIL_RE.sub("", rest)
                if key in sections:  # first occurrence wins
                    current = None
                    continue
                current = sections[key] = [rest] if rest.strip() else []
                continue
        if current is not None:
            current.append(line)

    thought = "\n".join(sections.get("THOUGHT", [])).strip()
    action = None
    if "ACTION" in sections:
        lines = sections["ACTION"]
        body = _fenced_body(lines)
        action = (body if body is not None else "\n".join(lines)).strip() or None
    answer = "\n".join(sections["ANSWER"]).strip() if "ANSWER" in sections else None

    diagnostic = None
    if "THOUGHT" not in sections:
        diagnostic = "missing THOUGHT: section"
    if not terminate and action is None:
        note = "no ACTION block and no TERMINATE; call a tool or give ANSWER: then TERMINATE"
        diagnostic = f"{diagnostic}; {note}" if diagnostic else note
    if terminate and not answer:
        answer = thought or TERMINATE_LINE_RE.sub("", text).strip()
    return ParsedStep(thought, action, terminate, answer, diagnostic)


# ---------------------------------------------------------------- actions


@dataclass(frozen=True)
class Param:
    name: str
    kind: str  # "str" | "int" | "number"
    required: bool = True


TOOL_SIGNATURES: dict[str, tuple[Param, ...]] = {
    "progress_bar": (),
    "highlight": (Param("query", "str"), Param("k", "int", required=False)),
    "cut": (Param("start", "number"), Param("end", "number")),
}


@dataclass(frozen=True)
class ToolCall:
    name: str
    args: tuple[tuple[str, object], ...] = ()

    @property
    def kwargs(self) -> dict:
        return dict(self.args)

    def __str__(self) -> str:
        return format_call(self)


@dataclass(frozen=True)
class Diagnostic:
    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}, column {self.column}: {self.message}"


class ActionError(ValueError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))


class _Syntax(Exception):
    def __init__(self, col: int, message: str):
        self.col, self.message = col, message


TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t]+)
  | (?P<string>")
  | (?P<number>-?\d+(?:\.\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[(),=])
    """,
    re.X,
)


def _read_string(line: str, pos: int) -> tuple[str, int]:
    out = []
    i = pos + 1
    while i < len(line):
        c = line[i]
        if c == '"':
            return "".join(out), i + 1
        if c == "\\":
            if i + 1 < len(line) and line[i + 1] in '"\\':
                out.append(line[i + 1])
                i += 2
                continue
            raise _Syntax(i + 1, "unsupported escape in string (only \\\" and \\\\)")
        out.append(c)
        i += 1
    raise _Syntax(pos + 1, "unterminated string")


def _tokens(line: str) -> list[tuple[str, object, int]]:
    toks, pos = [], 0
    while pos < len(line):
        if line[pos] == "#":
            break
        m = TOKEN_RE.match(line, pos)
        if not m:
            raise _Syntax(pos + 1, f"unexpected character {line[pos]!r}")
        kind = m.lastgroup
        if kind == "ws":
            pos = m.end()
        elif kind == "string":
            value, pos = _read_string(line, pos)
            toks.append(("string", value, m.start() + 1))
        elif kind == "number":
            text = m.group()
            end = m.end()
            if end < len(line) and (line[end].isalnum() or line[end] in "._"):
                raise _Syntax(end + 1, f"malformed number {text + line[end]!r}")
            value = float(text) if "." in text else int(text)
            toks.append(("number", value, m.start() + 1))
            pos = end
        else:
            toks.append((kind if kind == "name" else m.group(), m.group(), m.start() + 1))
            pos = m.end()
    return toks


def _parse_statement(line: str) -> tuple[str, list[tuple[str | None, object, str, int]], int]:
    """Return (name, [(key, value, kind, col)], name_col)."""
    if not STATEMENT_HEAD_RE.match(line):
        col = len(line) - len(line.lstrip()) + 1
        raise _Syntax(col, "unknown statement form; expected name(arg, ...)")
    toks = _tokens(line)
    if len(toks) < 2 or toks[0][0] != "name" or toks[1][0] != "(":
        col = toks[0][2] if toks else 1
        raise _Syntax(col, "unknown statement form; expected name(arg, ...)")
    name, name_col = toks[0][1], toks[0][2]
    args = []
    i = 2
    if i < len(toks) and toks[i][0] == ")":
        i += 1
    else:
        while True:
            if i >= len(toks):
                raise _Syntax(len(line) + 1, "missing ')'")
            key = None
            if toks[i][0] == "name":
                if i + 1 < len(toks) and toks[i + 1][0] == "=":
                    key = toks[i][1]
                    i += 2
                    if i >= len(toks):
                        raise _Syntax(len(line) + 1, f"missing value for {key}=")
                else:
                    raise _Syntax(toks[i][2], f"bare name {toks[i][1]!r}; strings need double quotes")
            kind, value, col = toks[i]
            if kind not in ("string", "number"):
                raise _Syntax(col, f"expected a value, got {value!r}")
            args.append((key, value, kind, col))
            i += 1
            if i >= len(toks):
                raise _Syntax(len(line) + 1, "missing ')'")
            if toks[i][0] == ")":
                i += 1
                break
            if toks[i][0] != ",":
                raise _Syntax(toks[i][2], f"expected ',' or ')', got {toks[i][1]!r}")
            i += 1
    if i < len(toks):
        raise _Syntax(toks[i][2], "unexpected text after ')'")
    return name, args, name_col


def _bind(name: str, args, name_col: int) -> ToolCall:
    params = TOOL_SIGNATURES[name]
    by_name = {p.name: p for p in params}
    bound: dict[str, object] = {}
    seen_keyword = False
    for pos, (key, value, kind, col) in enumerate(args):
        if key is None:
            if seen_keyword:
                raise _Syntax(col, "positional argument after keyword argument")
            if pos >= len(params):
                raise _Syntax(col, f"{name}() takes at most {len(params)} argument(s)")
            param = params[pos]
        else:
            seen_keyword = True
            if key not in by_name:
                raise _Syntax(col, f"{name}() has no parameter {key!r}")
            param = by_name[key]
        if param.name in bound:
            raise _Syntax(col, f"{name}() got {param.name!r} twice")
        if param.kind == "str" and kind != "string":
            raise _Syntax(col, f"{param.name} must be a double-quoted string")
        if param.kind == "int" and not (kind == "number" and isinstance(value, int)):
            raise _Syntax(col, f"{param.name} must be an integer")
        if param.kind == "number":
            if kind != "number":
                raise _Syntax(col, f"{param.name} must be a number of seconds")
            value = float(value)
        if param.name == "k" and value < 1:
            raise _Syntax(col, "k must be >= 1")
        bound[param.name] = value
    missing = [p.name for p in params if p.required and p.name not in bound]
    if missing:
        raise _Syntax(name_col, f"{name}() missing argument(s): {', '.join(missing)}")
    return ToolCall(name, tuple((p.name, bound[p.name]) for p in params if p.name in bound))


def parse_action(block: str, enabled: Iterable[str] | None = None) -> list[ToolCall]:
    """Parse an ACTION block into tool calls, or raise :class:`ActionError`
    listing one diagnostic per bad line."""
    allowed = set(TOOL_SIGNATURES if enabled is None else enabled) & set(TOOL_SIGNATURES)
    calls, errors = [], []
    for lineno, line in enumerate(block.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            name, args, name_col = _parse_statement(line)
            if name not in allowed:
                known = ", ".join(sorted(allowed)) or "none"
                raise _Syntax(name_col, f"unknown tool {name!r} (available: {known})")
            calls.append(_bind(name, args, name_col))
        except _Syntax as e:
            errors.append(Diagnostic(lineno, e.col, e.message))
    if errors:
        raise ActionError(errors)
    if not calls:
        raise ActionError([Diagnostic(1, 1, "empty ACTION block")])
    return calls


def _format_value(v: object) -> str:
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, float):
        text = format(Decimal(repr(v)), "f")
        return text if "." in text else text + ".0"
    return repr(v)


def format_call(call: ToolCall) -> str:
    params = {p.name: p for p in TOOL_SIGNATURES[call.name]}
    parts = []
    for key, value in call.args:
        text = _format_value(value)
        parts.append(text if params[key].required else f"{key}={text}")
    return f"{call.name}({', '.join(parts)})"
