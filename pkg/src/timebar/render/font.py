"""Embedded 5x7 bitmap glyphs, drawn at an integer scale.

Only the characters needed for second labels are present.
"""
from __future__ import annotations

import numpy as np

GLYPH_W, GLYPH_H = 5, 7
SCALE = 2
SPACING = 1  # unscaled columns between glyphs

_GLYPHS = {
    "0": ["01110", "10001", "10011", "10101", "11001", "10001", "01110"],
    "1": ["00100", "01100", "00100", "00100", "00100", "00100", "01110"],
    "2": ["01110", "10001", "00001", "00010", "00100", "01000", "11111"],
    "3": ["11111", "00010", "00100", "00010", "00001", "10001", "01110"],
    "4": ["00010", "00110", "01010", "10010", "11111", "00010", "00010"],
    "5": ["11111", "10000", "11110", "00001", "00001", "10001", "01110"],
    "6": ["00110", "01000", "10000", "11110", "10001", "10001", "01110"],
    "7": ["11111", "00001", "00010", "00100", "01000", "01000", "01000"],
    "8": ["01110", "10001", "10001", "01110", "10001", "10001", "01110"],
    "9": ["01110", "10001", "10001", "01111", "00001", "00010", "01100"],
    ".": ["00000", "00000", "00000", "00000", "00000", "01100", "01100"],
    "s": ["00000", "00000", "01110", "10000", "01110", "00001", "11110"],
    ":": ["00000", "01100", "01100", "00000", "01100", "01100", "00000"],
    "-": ["00000", "00000", "00000", "11111", "00000", "00000", "00000"],
    " ": ["00000"] * 7,
}

GLYPHS: dict[str, np.ndarray] = {
    ch: np.array([[c == "1" for c in row] for row in rows], dtype=bool)
    for ch, rows in _GLYPHS.items()
}


def text_size(text: str, scale: int = SCALE) -> tuple[int, int]:
    """(width, height) in pixels."""
    if not text:
        return 0, GLYPH_H * scale
    n = len(text)
    return (n * GLYPH_W + (n - 1) * SPACING) * scale, GLYPH_H * scale


def text_mask(text: str, scale: int = SCALE) -> np.ndarray:
    w, h = text_size(text, scale)
    mask = np.zeros((GLYPH_H, w // scale if w else 0), dtype=bool)
    x = 0
    for ch in text:
        try:
            glyph = GLYPHS[ch]
        except KeyError:
            raise ValueError(f"no glyph for {ch!r}") from None
        mask[:, x : x + GLYPH_W] = glyph
        x += GLYPH_W + SPACING
    return np.kron(mask, np.ones((scale, scale), dtype=bool))


def draw_text(img: np.ndarray, text: str, x: int, y: int, color, scale: int = SCALE) -> None:
    """Paint ``text`` with its top-left at (x, y); clipped to the image."""
    mask = text_mask(text, scale)
    h, w = mask.shape
    H, W = img.shape[:2]
    x0, y0 = max(x, 0), max(y, 0)
    x1, y1 = min(x + w, W), min(y + h, H)
    if x0 >= x1 or y0 >= y1:
        return
    sub = mask[y0 - y : y1 - y, x0 - x : x1 - x]
    img[y0:y1, x0:x1][sub] = color
