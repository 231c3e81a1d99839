import random

import pytest
from hypothesis import given, settings, strategies as st

from fuzz import random_action, random_response
from timebar.agent import ActionError, ToolCall, format_call, parse_action, parse_response

# One example per grammar production.
PRODUCTIONS = [
    ("progress_bar()", ToolCall("progress_bar")),
    ("  progress_bar( )  ", ToolCall("progress_bar")),
    ('highlight("person opens the door")', ToolCall("highlight", (("query", "person opens the door"),))),
    ('highlight("cat", 3)', ToolCall("highlight", (("query", "cat"), ("k", 3)))),
    ('highlight("cat", k=3)', ToolCall("highlight", (("query", "cat"), ("k", 3)))),
    ('highlight(k=2, query="dog")', ToolCall("highlight", (("query", "dog"), ("k", 2)))),
    ('highlight("say \\"hi\\" \\\\ bye")', ToolCall("highlight", (("query", 'say "hi" \\ bye'),))),
    ("cut(12, 30)", ToolCall("cut", (("start", 12.0), ("end", 30.0)))),
    ("cut(12.25, 30.5)", ToolCall("cut", (("start", 12.25), ("end", 30.5)))),
    ("cut(-3, 5)", ToolCall("cut", (("start", -3.0), ("end", 5.0)))),
    ("cut(end=9, start=1)", ToolCall("cut", (("start", 1.0), ("end", 9.0)))),
    ("cut(1, 2)  # look closer", ToolCall("cut", (("start", 1.0), ("end", 2.0)))),
]


@pytest.mark.parametrize("text,expected", PRODUCTIONS)
def test_productions_parse_and_round_trip(text, expected):
    (call,) = parse_action(text)
    assert call == expected
    printed = format_call(call)
    assert parse_action(printed) == [call]
    assert format_call(parse_action(printed)[0]) == printed


def test_multi_line_blocks_with_comments():
    block = "# first the bar\nprogress_bar()\n\nhighlight(\"cat\")\n"
    assert [c.name for c in parse_action(block)] == ["progress_bar", "highlight"]


@pytest.mark.parametrize(
    "text,message",
    [
        ("import os", "unknown statement form"),
        ("x = highlight('cat')", "unknown statement form"),
        ("os.system('ls')", "unknown statement form"),
        ("delete_all()", "unknown tool"),
        ("highlight(cat)", "bare name"),
        ("highlight('cat')", "unexpected character"),
        ('highlight("cat)', "unterminated string"),
        ('highlight("a\\n")', "unsupported escape"),
        ('highlight("cat", k=1.5)', "must be an integer"),
        ('highlight("cat", k=0)', "k must be >= 1"),
        ('highlight(k=2, "cat")', "positional argument after keyword"),
        ('highlight("a", query="b")', "twice"),
        ("cut(1)", "missing argument"),
        ('cut("1", 2)', "number of seconds"),
        ("cut(1, 2, 3)", "at most 2"),
        ("cut(1, 2) extra", "unexpected text"),
        ("cut(1, 2", "missing ')'"),
        ("cut(1.2.3, 4)", "malformed number"),
        ("cut(1e5, 4)", "malformed number"),
        ("progress_bar(z=1)", "no parameter"),
    ],
)
def test_diagnostics(text, message):
    with pytest.raises(ActionError) as e:
        parse_action(text)
    (d,) = e.value.diagnostics
    assert message in d.message
    assert d.line == 1 and d.column >= 1


def test_diagnostics_report_every_bad_line():
    with pytest.raises(ActionError) as e:
        parse_action("progress_bar()\nfoo()\ncut(1)")
    assert [d.line for d in e.value.diagnostics] == [2, 3]


def test_empty_block_and_disabled_tools():
    with pytest.raises(ActionError, match="empty"):
        parse_action("# nothing\n")
    with pytest.raises(ActionError, match="unknown tool 'highlight'"):
        parse_action('highlight("cat")', enabled=["progress_bar", "cut"])


safe_text = st.text(
    st.characters(blacklist_categories=("Cs", "Cc", "Zl", "Zp"), blacklist_characters="\x85"),
    max_size=20,
)
seconds = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)


@settings(max_examples=300, deadline=None)
@given(st.one_of(
    st.builds(lambda: ToolCall("progress_bar")),
    st.builds(lambda q: ToolCall("highlight", (("query", q),)), safe_text),
    st.builds(lambda q, k: ToolCall("highlight", (("query", q), ("k", k))), safe_text, st.integers(1, 10**6)),
    st.builds(lambda a, b: ToolCall("cut", (("start", a), ("end", b))), seconds, seconds),
))
def test_print_parse_fixpoint(call):
    printed = format_call(call)
    assert parse_action(printed) == [call]


@settings(max_examples=500, deadline=None)
@given(st.text(max_size=60))
def test_arbitrary_text_never_crashes(text):
    try:
        calls = parse_action(text)
    except ActionError as e:
        assert e.diagnostics and all(d.line >= 1 and d.column >= 1 for d in e.diagnostics)
    else:
        assert calls and all(isinstance(c, ToolCall) for c in calls)


def test_seeded_fuzz_never_crashes():
    rng = random.Random(7)
    for _ in range(2000):
        try:
            parse_action(random_action(rng))
        except ActionError:
            pass
        parse_response(random_response(rng))


# ------------------------------------------------------------------ replies


def test_response_with_fenced_action():
    step = parse_response("THOUGHT: need times\nACTION:\n```python\nprogress_bar()\n```\nextra")
    assert step.thought == "need times"
    assert step.action == "progress_bar()"
    assert not step.terminate and step.diagnostic is None


def test_response_unfenced_action_and_terminate():
    step = parse_response("THOUGHT: ok\nACTION: cut(1, 2)")
    assert step.action == "cut(1, 2)"
    done = parse_response("THOUGHT: it is at 20s\nANSWER: [20, 45]\nTERMINATE")
    assert done.terminate and done.answer == "[20, 45]" and done.action is None


def test_terminate_inline_and_answer_fallback():
    step = parse_response("THOUGHT: the answer is B TERMINATE")
    assert step.terminate and step.thought == "the answer is B" and step.answer == "the answer is B"


def test_keywords_inside_fences_are_ignored():
    step = parse_response("THOUGHT: x\nACTION:\n```\nTERMINATE\n```")
    assert not step.terminate and step.action == "TERMINATE"


def test_first_occurrence_wins_and_missing_parts():
    step = parse_response("THOUGHT: a\nTHOUGHT: b\nACTION: progress_bar()")
    assert step.thought == "a"
    assert "missing THOUGHT" in parse_response("ACTION: progress_bar()").diagnostic
    assert "no ACTION" in parse_response("THOUGHT: hmm").diagnostic
    assert parse_response("").diagnostic
