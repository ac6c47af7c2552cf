#!/usr/bin/env python3
"""
Curated stroke tables for the two safe font families.

Coordinates are p-units inside the 18p master cell. Plain and ascender
lowercase use the band rows 5..17 (middle line on row 11); descender
lowercase use rows 0..12 (middle on row 6) plus the descender rows 13..17;
digits fill rows 0..17 (middle on row 8).

Entries: codepoint -> (flags, strokes) with flags drawn from "a"
(ascender) and "d" (descender); strokes are ("v", x, y, length, width) or
("h", x, y, length).
"""

from typing import Dict, Tuple

from glyph_model import Family, GlyphDef, GlyphSet, GridParams, Orientation, Stroke

StrokeSpec = Tuple

# Stems at x=0 and x=6 (width 3) leave the 3p clearance; centered stems sit at x=3.
SYMMETRICAL_TABLE: Dict[str, Tuple[str, Tuple[StrokeSpec, ...]]] = {
    "a": ("", (("h", 0, 5, 9), ("v", 6, 5, 13, 3), ("h", 0, 11, 9), ("v", 0, 11, 7, 3), ("h", 0, 17, 9))),
    "b": ("a", (("v", 0, 0, 18, 3), ("h", 0, 5, 9), ("v", 6, 5, 13, 3), ("h", 0, 17, 9))),
    "c": ("", (("v", 0, 5, 13, 3), ("h", 0, 5, 9), ("h", 0, 17, 9))),
    "d": ("a", (("v", 6, 0, 18, 3), ("v", 0, 5, 13, 3), ("h", 0, 5, 9), ("h", 0, 17, 9))),
    "e": ("", (("v", 0, 5, 13, 3), ("h", 0, 5, 9), ("v", 6, 5, 7, 3), ("h", 0, 11, 9), ("h", 0, 17, 9))),
    "f": ("a", (("v", 0, 0, 18, 3), ("h", 0, 0, 9), ("h", 0, 5, 6))),
    "g": ("d", (("v", 0, 0, 13, 3), ("v", 6, 0, 18, 3), ("h", 0, 0, 9), ("h", 0, 12, 9), ("h", 0, 17, 9))),
    "h": ("a", (("v", 0, 0, 18, 3), ("h", 0, 5, 9), ("v", 6, 5, 13, 3))),
    "i": ("a", (("v", 3, 0, 3, 3), ("v", 3, 5, 13, 3))),
    "j": ("d", (("h", 0, 0, 9), ("v", 6, 0, 18, 3), ("h", 0, 17, 9), ("v", 0, 13, 5, 3))),
    "k": ("a", (("v", 0, 0, 18, 3), ("v", 6, 5, 5, 3), ("h", 0, 11, 9), ("v", 6, 11, 7, 3))),
    "l": ("a", (("v", 3, 0, 18, 3),)),
    "m": ("", (("v", 0, 5, 13, 3), ("v", 6, 5, 13, 3), ("v", 12, 5, 13, 3), ("h", 0, 5, 15))),
    "n": ("", (("v", 0, 5, 13, 3), ("v", 6, 5, 13, 3), ("h", 0, 5, 9))),
    "o": ("", (("v", 0, 5, 13, 3), ("v", 6, 5, 13, 3), ("h", 0, 5, 9), ("h", 0, 17, 9))),
    "p": ("d", (("v", 0, 0, 18, 3), ("v", 6, 0, 13, 3), ("h", 0, 0, 9), ("h", 0, 12, 9))),
    "q": ("d", (("v", 0, 0, 13, 3), ("v", 6, 0, 18, 3), ("h", 0, 0, 9), ("h", 0, 12, 9))),
    "r": ("", (("v", 0, 5, 13, 3), ("h", 0, 5, 9))),
    "s": ("", (("h", 0, 5, 9), ("v", 0, 5, 7, 3), ("h", 0, 11, 9), ("v", 6, 11, 7, 3), ("h", 0, 17, 9))),
    "t": ("a", (("v", 3, 0, 18, 3), ("h", 0, 5, 9), ("h", 3, 17, 6))),
    "u": ("", (("v", 0, 5, 13, 3), ("v", 6, 5, 13, 3), ("h", 0, 17, 9))),
    "v": ("", (("v", 0, 5, 12, 3), ("v", 6, 5, 12, 3), ("v", 3, 17, 1, 3))),
    "w": ("", (("v", 0, 5, 13, 3), ("v", 6, 5, 13, 3), ("h", 0, 11, 9), ("h", 0, 17, 9))),
    "x": ("", (("v", 0, 5, 5, 3), ("v", 6, 5, 5, 3), ("v", 3, 10, 3, 3), ("v", 0, 13, 5, 3), ("v", 6, 13, 5, 3))),
    "y": ("d", (("v", 0, 0, 13, 3), ("v", 6, 0, 18, 3), ("h", 0, 12, 9), ("h", 0, 17, 9))),
    "z": ("", (("h", 0, 5, 9), ("v", 6, 5, 7, 3), ("h", 0, 11, 9), ("v", 0, 11, 7, 3), ("h", 0, 17, 9))),
    "0": ("", (("v", 0, 0, 18, 3), ("v", 6, 0, 18, 3), ("h", 0, 0, 9), ("h", 0, 17, 9))),
    "1": ("", (("v", 3, 0, 18, 3), ("h", 0, 0, 3), ("h", 0, 17, 9))),
    "2": ("", (("h", 0, 0, 9), ("v", 6, 0, 9, 3), ("h", 0, 8, 9), ("v", 0, 8, 10, 3), ("h", 0, 17, 9))),
    "3": ("", (("h", 0, 0, 9), ("v", 6, 0, 18, 3), ("h", 0, 8, 9), ("h", 0, 17, 9))),
    "4": ("", (("v", 0, 0, 9, 3), ("v", 6, 0, 18, 3), ("h", 0, 8, 9))),
    "5": ("", (("h", 0, 0, 9), ("v", 0, 0, 9, 3), ("h", 0, 8, 9), ("v", 6, 8, 10, 3), ("h", 0, 17, 9))),
    "6": ("", (("v", 0, 0, 18, 3), ("h", 0, 0, 9), ("h", 0, 8, 9), ("v", 6, 8, 10, 3), ("h", 0, 17, 9))),
    "7": ("", (("h", 0, 0, 9), ("v", 6, 0, 18, 3))),
    "8": ("", (("v", 0, 0, 18, 3), ("v", 6, 0, 18, 3), ("h", 0, 0, 9), ("h", 0, 8, 9), ("h", 0, 17, 9))),
    "9": ("", (("v", 0, 0, 9, 3), ("v", 6, 0, 18, 3), ("h", 0, 0, 9), ("h", 0, 8, 9), ("h", 0, 17, 9))),
    " ": ("", ()),
}

# Wide 5p stem on the left at x=0, thin 1p element on the right at x=9 (14 for "m").
# Glyphs whose only stem is on the right ("3", "7") carry it wide, since it is leftmost.
ASYMMETRICAL_TABLE: Dict[str, Tuple[str, Tuple[StrokeSpec, ...]]] = {
    "a": ("", (("h", 0, 5, 10), ("v", 9, 5, 13, 1), ("h", 0, 11, 10), ("v", 0, 11, 7, 5), ("h", 0, 17, 10))),
    "b": ("a", (("v", 0, 0, 18, 5), ("h", 0, 5, 10), ("v", 9, 5, 13, 1), ("h", 0, 17, 10))),
    "c": ("", (("v", 0, 5, 13, 5), ("h", 0, 5, 10), ("h", 0, 17, 10))),
    "d": ("a", (("v", 0, 5, 13, 5), ("v", 9, 0, 18, 1), ("h", 0, 5, 10), ("h", 0, 17, 10))),
    "e": ("", (("v", 0, 5, 13, 5), ("h", 0, 5, 10), ("v", 9, 5, 7, 1), ("h", 0, 11, 10), ("h", 0, 17, 10))),
    "f": ("a", (("v", 0, 0, 18, 5), ("h", 0, 0, 10), ("h", 0, 5, 7))),
    "g": ("d", (("v", 0, 0, 13, 5), ("v", 9, 0, 18, 1), ("h", 0, 0, 10), ("h", 0, 12, 10), ("h", 0, 17, 10))),
    "h": ("a", (("v", 0, 0, 18, 5), ("h", 0, 5, 10), ("v", 9, 5, 13, 1))),
    "i": ("a", (("v", 0, 0, 3, 5), ("v", 0, 5, 13, 5))),
    "j": ("d", (("h", 0, 0, 10), ("v", 9, 0, 18, 1), ("h", 0, 17, 10), ("v", 0, 13, 5, 5))),
    "k": ("a", (("v", 0, 0, 18, 5), ("v", 9, 5, 5, 1), ("h", 0, 11, 10), ("v", 9, 11, 7, 1))),
    "l": ("a", (("v", 0, 0, 18, 5),)),
    "m": ("", (("v", 0, 5, 13, 5), ("v", 9, 5, 13, 1), ("v", 14, 5, 13, 1), ("h", 0, 5, 15))),
    "n": ("", (("v", 0, 5, 13, 5), ("v", 9, 5, 13, 1), ("h", 0, 5, 10))),
    "o": ("", (("v", 0, 5, 13, 5), ("v", 9, 5, 13, 1), ("h", 0, 5, 10), ("h", 0, 17, 10))),
    "p": ("d", (("v", 0, 0, 18, 5), ("v", 9, 0, 13, 1), ("h", 0, 0, 10), ("h", 0, 12, 10))),
    "q": ("d", (("v", 0, 0, 13, 5), ("v", 9, 0, 18, 1), ("h", 0, 0, 10), ("h", 0, 12, 10))),
    "r": ("", (("v", 0, 5, 13, 5), ("h", 0, 5, 10))),
    "s": ("", (("h", 0, 5, 10), ("v", 0, 5, 7, 5), ("h", 0, 11, 10), ("v", 9, 11, 7, 1), ("h", 0, 17, 10))),
    "t": ("a", (("v", 0, 0, 18, 5), ("h", 0, 5, 10), ("h", 0, 17, 10))),
    "u": ("", (("v", 0, 5, 13, 5), ("v", 9, 5, 13, 1), ("h", 0, 17, 10))),
    "v": ("", (("v", 0, 5, 12, 5), ("v", 9, 5, 12, 1), ("v", 5, 17, 1, 1))),
    "w": ("", (("v", 0, 5, 13, 5), ("v", 9, 5, 13, 1), ("h", 0, 11, 10), ("h", 0, 17, 10))),
    "x": ("", (("v", 0, 5, 5, 5), ("v", 9, 5, 5, 1), ("v", 5, 10, 3, 1), ("v", 0, 13, 5, 5), ("v", 9, 13, 5, 1))),
    "y": ("d", (("v", 0, 0, 13, 5), ("v", 9, 0, 18, 1), ("h", 0, 12, 10), ("h", 0, 17, 10))),
    "z": ("", (("h", 0, 5, 10), ("v", 9, 5, 7, 1), ("h", 0, 11, 10), ("v", 0, 11, 7, 5), ("h", 0, 17, 10))),
    "0": ("", (("v", 0, 0, 18, 5), ("v", 9, 0, 18, 1), ("h", 0, 0, 10), ("h", 0, 17, 10))),
    "1": ("", (("v", 0, 0, 18, 5), ("h", 0, 17, 10))),
    "2": ("", (("h", 0, 0, 10), ("v", 9, 0, 9, 1), ("h", 0, 8, 10), ("v", 0, 8, 10, 5), ("h", 0, 17, 10))),
    "3": ("", (("h", 0, 0, 10), ("v", 5, 0, 18, 5), ("h", 0, 8, 10), ("h", 0, 17, 10))),
    "4": ("", (("v", 0, 0, 9, 5), ("v", 9, 0, 18, 1), ("h", 0, 8, 10))),
    "5": ("", (("h", 0, 0, 10), ("v", 0, 0, 9, 5), ("h", 0, 8, 10), ("v", 9, 8, 10, 1), ("h", 0, 17, 10))),
    "6": ("", (("v", 0, 0, 18, 5), ("h", 0, 0, 10), ("h", 0, 8, 10), ("v", 9, 8, 10, 1), ("h", 0, 17, 10))),
    "7": ("", (("h", 0, 0, 10), ("v", 5, 0, 18, 5))),
    "8": ("", (("v", 0, 0, 18, 5), ("v", 9, 0, 18, 1), ("h", 0, 0, 10), ("h", 0, 8, 10), ("h", 0, 17, 10))),
    "9": ("", (("v", 0, 0, 9, 5), ("v", 9, 0, 18, 1), ("h", 0, 0, 10), ("h", 0, 8, 10), ("h", 0, 17, 10))),
    " ": ("", ()),
}

TABLES = {
    Family.SYMMETRICAL: SYMMETRICAL_TABLE,
    Family.ASYMMETRICAL: ASYMMETRICAL_TABLE,
}


def stroke_from_spec(spec: StrokeSpec, k: int = 1) -> Stroke:
    kind = spec[0]
    if kind == "v":
        _, x, y, length, width = spec
        return Stroke(Orientation.VERTICAL, x, y, length, width)
    _, x, y, length = spec
    return Stroke(Orientation.HORIZONTAL, x, y, length, k)


def build_repertoire(params: GridParams) -> GlyphSet:
    """Materialize the curated table of a family as GlyphDefs."""
    glyphs: GlyphSet = {}
    for codepoint, (flags, specs) in TABLES[params.family].items():
        advance = params.w_wide if codepoint == "m" else params.w_std
        glyphs[codepoint] = GlyphDef(
            codepoint=codepoint,
            strokes=tuple(stroke_from_spec(spec, params.k) for spec in specs),
            advance=advance,
            has_ascender="a" in flags,
            has_descender="d" in flags,
        )
    return glyphs
