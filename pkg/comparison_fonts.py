#!/usr/bin/env python3
"""
Comparison Fonts

Two stand-in "traditional" fonts used as the baseline against the safe
families: a sans-like face with uniform strokes and a serif-like face
with thin non-vertical strokes and serifs on stem ends. Glyphs are drawn
with Pillow primitives (lines, arcs, ellipses) at scale 1 without
anti-aliasing, so diagonals and curves become pixel staircases, and are
stored as a RasterAtlas.

Cell geometry matches the safe families: 18 rows with the lowercase band
on rows 5..17; descender glyphs keep their band on rows 0..12, descend to
row 17 and carry y_shift 5.
"""

import logging
from typing import Dict, List, Tuple

import numpy as np
from PIL import Image, ImageDraw

from atlas import RasterAtlas, RasterGlyph

logger = logging.getLogger(__name__)

CELL_W = 10
WIDE_W = 15
CELL_H = 18
DROP = 5
NAMES = ("sans-like", "serif-like")

Primitive = Tuple  # ("line", points) | ("arc", box, start, end) | ("ellipse", box)

DESCENDERS = set("gjpqy")


def _line(*points) -> Primitive:
    return ("line", tuple(points))


def _arc(box, start, end) -> Primitive:
    return ("arc", tuple(box), start, end)


def _ellipse(box) -> Primitive:
    return ("ellipse", tuple(box))


def _lowercase(t: int, b: int) -> Dict[str, List[Primitive]]:
    """Recipes for x-height band [t, b]; ascenders reach row 0."""
    m = (t + b) // 2
    return {
        "a": [_arc((1, t, 8, t + 6), 200, 340), _line((8, t + 2), (8, b)), _ellipse((1, m, 8, b))],
        "b": [_line((1, 0), (1, b)), _ellipse((1, t, 8, b))],
        "c": [_arc((1, t, 8, b), 40, 320)],
        "d": [_line((8, 0), (8, b)), _ellipse((1, t, 8, b))],
        "e": [_line((1, m), (8, m)), _arc((1, t, 8, b), 20, 360)],
        "f": [_arc((3, 0, 9, 6), 180, 300), _line((3, 3), (3, b)), _line((1, t), (7, t))],
        "h": [_line((1, 0), (1, b)), _arc((1, t, 8, t + 6), 180, 360), _line((8, t + 3), (8, b))],
        "i": [_line((4, t), (4, b)), _line((4, 1), (4, 2))],
        "k": [_line((1, 0), (1, b)), _line((7, t), (2, m + 1)), _line((3, m), (8, b))],
        "l": [_line((4, 0), (4, b))],
        "m": [
            _line((1, t), (1, b)), _arc((1, t, 7, t + 6), 180, 360), _line((7, t + 3), (7, b)),
            _arc((7, t, 13, t + 6), 180, 360), _line((13, t + 3), (13, b)),
        ],
        "n": [_line((1, t), (1, b)), _arc((1, t, 8, t + 6), 180, 360), _line((8, t + 3), (8, b))],
        "o": [_ellipse((1, t, 8, b))],
        "r": [_line((1, t), (1, b)), _arc((1, t, 9, t + 8), 190, 300)],
        "s": [_line((8, t + 1), (7, t), (2, t), (1, t + 1), (1, m - 1), (2, m), (7, m),
                    (8, m + 1), (8, b - 1), (7, b), (2, b), (1, b - 1))],
        "t": [_line((3, 1), (3, b - 1)), _line((1, t), (7, t)), _line((4, b), (7, b))],
        "u": [_line((1, t), (1, b - 3)), _arc((1, b - 6, 8, b), 0, 180), _line((8, t), (8, b))],
        "v": [_line((1, t), (4, b)), _line((5, b), (8, t))],
        "w": [_line((0, t), (2, b), (4, m), (5, m), (7, b), (9, t))],
        "x": [_line((1, t), (8, b)), _line((8, t), (1, b))],
        "z": [_line((1, t), (8, t), (1, b), (8, b))],
    }


def _descenders() -> Dict[str, List[Primitive]]:
    """Band on rows 0..12, tails to row 17."""
    return {
        "g": [_ellipse((1, 0, 8, 12)), _line((8, 0), (8, 15)), _arc((1, 12, 8, 17), 0, 180)],
        "j": [_line((6, 0), (6, 15)), _arc((1, 12, 6, 17), 0, 150)],
        "p": [_line((1, 0), (1, 17)), _ellipse((1, 0, 8, 12))],
        "q": [_line((8, 0), (8, 17)), _ellipse((1, 0, 8, 12))],
        "y": [_line((1, 0), (4, 12)), _line((8, 0), (2, 17))],
    }


def _digits() -> Dict[str, List[Primitive]]:
    return {
        "0": [_ellipse((1, 0, 8, 17))],
        "1": [_line((5, 0), (5, 17)), _line((2, 3), (5, 0))],
        "2": [_arc((1, 0, 8, 8), 180, 360), _line((8, 4), (1, 17)), _line((1, 17), (8, 17))],
        "3": [_arc((1, 0, 8, 8), 180, 450), _arc((1, 8, 8, 17), 270, 540)],
        "4": [_line((6, 0), (6, 17)), _line((6, 0), (1, 12)), _line((1, 12), (8, 12))],
        "5": [_line((8, 0), (2, 0)), _line((2, 0), (1, 8)), _arc((1, 6, 8, 17), 240, 510)],
        "6": [_line((7, 0), (2, 7)), _ellipse((1, 7, 8, 17))],
        "7": [_line((1, 0), (8, 0)), _line((8, 0), (3, 17))],
        "8": [_ellipse((2, 0, 7, 8)), _ellipse((1, 8, 8, 17))],
        "9": [_ellipse((1, 0, 8, 10)), _line((8, 5), (3, 17))],
    }


def recipes() -> Dict[str, List[Primitive]]:
    table = _lowercase(DROP, CELL_H - 1)
    table.update(_descenders())
    table.update(_digits())
    return table


def _is_vertical(points) -> bool:
    return len(points) == 2 and points[0][0] == points[1][0]


def _draw(draw: ImageDraw.ImageDraw, primitive: Primitive, serif: bool) -> None:
    kind = primitive[0]
    # serif-like: heavy stems, hairline everything else
    thin = 1 if serif else 2
    if kind == "line":
        points = primitive[1]
        if _is_vertical(points):
            draw.line(points, fill=0, width=2)
            if serif:
                x = points[0][0]
                for y in (points[0][1], points[1][1]):
                    draw.line(((x - 1, y), (x + 2, y)), fill=0, width=1)
        else:
            draw.line(points, fill=0, width=thin)
    elif kind == "arc":
        _, box, start, end = primitive
        draw.arc(box, start, end, fill=0, width=thin)
    elif kind == "ellipse":
        draw.ellipse(primitive[1], outline=0, width=thin)
    else:
        raise ValueError(f"unknown drawing primitive {kind!r}")


def draw_glyph(codepoint: str, primitives: List[Primitive], serif: bool) -> np.ndarray:
    width = WIDE_W if codepoint == "m" else CELL_W
    image = Image.new("L", (width, CELL_H), color=255)
    draw = ImageDraw.Draw(image)
    for primitive in primitives:
        _draw(draw, primitive, serif)
    # hard threshold keeps ink binary whatever Pillow does at stroke joins
    pixels = np.where(np.asarray(image, dtype=np.uint8) < 128, 0, 255).astype(np.uint8)
    return pixels


def comparison_atlas(name: str) -> RasterAtlas:
    """Build the named stand-in font: 'sans-like' or 'serif-like'."""
    if name not in NAMES:
        raise ValueError(f"unknown comparison font {name!r}; expected one of {', '.join(NAMES)}")
    serif = name == "serif-like"
    atlas = RasterAtlas(name=name, cell_w=CELL_W, cell_h=CELL_H)
    for codepoint, primitives in sorted(recipes().items()):
        shift = DROP if codepoint in DESCENDERS else 0
        atlas.glyphs[codepoint] = RasterGlyph(codepoint, draw_glyph(codepoint, primitives, serif), shift)
    atlas.glyphs[" "] = RasterGlyph(" ", np.full((CELL_H, CELL_W), 255, dtype=np.uint8), 0)
    logger.debug(f"Drew {len(atlas.glyphs)} glyphs for {name}")
    return atlas
