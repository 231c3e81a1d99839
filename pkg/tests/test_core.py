import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import sweep_iou, sweep_measures
from timebar.core import (
    Frame,
    FrameSequence,
    Interval,
    IntervalSet,
    VideoMemory,
    interval_iou,
    memory_update,
    normalize,
)


def ivs(*pairs):
    return normalize(Interval(a, b) for a, b in pairs)


@st.composite
def interval_lists(draw, max_size=6):
    out = []
    for _ in range(draw(st.integers(0, max_size))):
        a = draw(st.integers(0, 200)) / 4
        length = draw(st.integers(1, 80)) / 4
        out.append((a, a + length))
    return out


def test_interval_rejects_empty_and_negative():
    with pytest.raises(ValueError):
        Interval(3, 3)
    with pytest.raises(ValueError):
        Interval(4, 3)
    with pytest.raises(ValueError):
        Interval(-1, 3)
    with pytest.raises(ValueError):
        Interval(0, math.inf)


def test_normalize_merges_touching_and_overlapping():
    s = ivs((5, 8), (0, 2), (2, 3), (7, 10))
    assert s.to_json() == [[0, 3], [5, 10]]
    assert s.measure == 8


def test_intersection_and_union():
    a = ivs((0, 10), (20, 30))
    b = ivs((5, 25))
    assert a.intersect(b).to_json() == [[5, 10], [20, 25]]
    assert a.union(b).to_json() == [[0, 30]]


def test_iou_known_values():
    assert interval_iou(ivs((0, 10)), ivs((5, 15))) == pytest.approx(5 / 15)
    assert interval_iou(ivs((0, 10)), ivs((0, 10))) == 1.0
    assert interval_iou(ivs((0, 1)), ivs((2, 3))) == 0.0
    # union-based over multi-segment sets
    assert interval_iou(ivs((0, 2), (4, 6)), ivs((1, 5))) == pytest.approx(2 / 6)


def test_iou_of_empty_sets_is_zero():
    assert interval_iou(IntervalSet(), IntervalSet()) == 0.0
    assert interval_iou(IntervalSet(), ivs((0, 1))) == 0.0


def test_clip_and_json_round_trip():
    s = ivs((1, 4), (6, 9))
    assert s.clip(2, 7).to_json() == [[2, 4], [6, 7]]
    assert s.clip(5, 5) == IntervalSet()
    assert IntervalSet.from_json(s.to_json()) == s
    with pytest.raises(ValueError):
        IntervalSet.from_json([[1, 2, 3]])


@settings(max_examples=300, deadline=None)
@given(interval_lists(), interval_lists())
def test_iou_matches_sweep_line(a, b):
    A = normalize(Interval(*p) for p in a)
    B = normalize(Interval(*p) for p in b)
    assert abs(interval_iou(A, B) - sweep_iou(a, b)) <= 1e-9
    inter, union = sweep_measures(a, b)
    assert A.intersect(B).measure == pytest.approx(inter, abs=1e-9)
    assert A.union(B).measure == pytest.approx(union, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(interval_lists(), interval_lists())
def test_iou_symmetric_and_bounded(a, b):
    A = normalize(Interval(*p) for p in a)
    B = normalize(Interval(*p) for p in b)
    assert interval_iou(A, B) == interval_iou(B, A)
    assert 0.0 <= interval_iou(A, B) <= 1.0


@settings(max_examples=200, deadline=None)
@given(interval_lists(max_size=10))
def test_normalized_sets_are_sorted_and_disjoint(a):
    s = normalize(Interval(*p) for p in a)
    for x, y in zip(s, list(s)[1:]):
        assert x.end < y.start
    assert normalize(s) == s


def _frame(t, h=4, w=6, bar=0):
    return Frame(np.zeros((h, w, 3), np.uint8), t, bar)


def test_frame_validation_and_content():
    f = Frame(np.arange(10 * 4 * 3, dtype=np.uint8).reshape(10, 4, 3), 1.5, bar_rows=3)
    assert f.content.shape == (7, 4, 3)
    assert not f.pixels.flags.writeable
    with pytest.raises(ValueError):
        Frame(np.zeros((4, 4), np.uint8), 0)
    with pytest.raises(ValueError):
        Frame(np.zeros((4, 4, 3), np.float32), 0)
    with pytest.raises(ValueError):
        _frame(-1)
    with pytest.raises(ValueError):
        _frame(0, h=4, bar=4)


def test_frame_sequence_ordering():
    FrameSequence((_frame(0.5), _frame(1.5)), 2.0)
    with pytest.raises(ValueError):
        FrameSequence((_frame(1.5), _frame(0.5)), 2.0)
    with pytest.raises(ValueError):
        FrameSequence((_frame(0.5), _frame(0.5)), 2.0)
    with pytest.raises(ValueError):
        FrameSequence((_frame(3.0),), 2.0)


def test_memory_versions_and_lineage():
    seq = FrameSequence((_frame(1.0), _frame(2.0)), 4.0)
    m0 = VideoMemory.initial(seq)
    assert m0.version == 0 and m0.window == Interval(0, 4)
    m1 = memory_update(m0, seq, "progress_bar()")
    m2 = memory_update(m1, seq, "cut(1, 3)", window=Interval(1, 3))
    assert (m2.version, m2.window) == (2, Interval(1, 3))
    assert m2.lineage == ((1, "progress_bar()"), (2, "cut(1, 3)"))
    assert m0.version == 0  # previous memories are untouched
    with pytest.raises(ValueError):
        memory_update(m2, FrameSequence((), 4.0), "x")
    with pytest.raises(ValueError):
        VideoMemory.initial(FrameSequence((), 4.0))
