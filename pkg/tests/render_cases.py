"""Shared generators for renderer tests."""
from __future__ import annotations

import random

import numpy as np

from timebar.core import Frame, FrameSequence, Interval, normalize
from timebar.render import BarStyle


def distinct_colors(rng: random.Random, n: int) -> list[tuple[int, int, int]]:
    out: list[tuple[int, int, int]] = []
    while len(out) < n:
        c = tuple(rng.randrange(256) for _ in range(3))
        if c not in out:
            out.append(c)
    return out


def random_style(rng: random.Random) -> BarStyle:
    track, marker, hl, label, bg = distinct_colors(rng, 5)
    thick = rng.randint(1, 14)
    radius = rng.randint(1, 12)
    probe = BarStyle(track_thickness=thick, marker_radius=radius, bar_strip_height=200)
    return BarStyle(
        bar_strip_height=probe.layout_height + rng.randint(0, 20),
        track_margin_frac=rng.choice([0.0, 0.02, 0.05, 0.1, 0.2]),
        track_thickness=thick,
        marker_radius=radius,
        track_color=track,
        marker_color=marker,
        highlight_color=hl,
        label_color=label,
        background_color=bg,
        timestamp_format=rng.choice(["integer-seconds", "one-decimal"]),
    )


def random_case(rng: random.Random):
    w, h = rng.randint(64, 400), rng.randint(8, 120)
    duration = rng.choice([rng.uniform(1, 4000), float(rng.randint(1, 600))])
    t = rng.choice([0.0, duration, rng.uniform(0, duration)])
    px = np.random.default_rng(rng.randrange(2**32)).integers(0, 256, (h, w, 3), dtype=np.uint8)
    frames = FrameSequence((Frame(px, t),), duration)
    moments = []
    for _ in range(rng.randint(0, 3)):
        a = rng.uniform(0, duration * 0.9)
        moments.append(Interval(a, rng.uniform(a + 1e-3, duration)))
    return frames, normalize(moments), random_style(rng)
