#!/usr/bin/env python3
"""
Safe-Font Glyph Model

Defines the p-grid construction system shared by the two safe font
families:
- GridParams: the p-relative construction constants of one family
- Stroke / GlyphDef: a character as axis-aligned strokes on the p-grid
- validate_glyph: machine-checkable proportion rules R1-R7
- builtin_glyphset: the curated lowercase/digit repertoire of each family

All types are frozen; every operation is a pure function of its inputs.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Dict, FrozenSet, List, Optional, Tuple

logger = logging.getLogger(__name__)


class GlyphError(ValueError):
    """Base class for glyph-model errors."""


class MalformedGlyphError(GlyphError):
    """A GlyphDef that cannot be validated at all (bad coordinates, overflow)."""


class Family(str, Enum):
    SYMMETRICAL = "symmetrical"
    ASYMMETRICAL = "asymmetrical"


class Orientation(str, Enum):
    VERTICAL = "vertical"
    HORIZONTAL = "horizontal"


@dataclass(frozen=True)
class GridParams:
    """Construction constants of one safe font family, in p-units."""
    family: Family
    h1: int  # lowercase height
    h2: int  # height with ascender/descender, digits, capitals
    w_std: int  # standard character width (c1 / a1)
    w_wide: int  # width of "m" / "M" (c2 / a2)
    v_widths: FrozenSet[int]  # allowed vertical-stroke widths
    v_clear: int  # clearance between vertical strokes
    k: int  # horizontal-stroke width
    w_asc: int  # ascender/descender extent

    @property
    def d1(self) -> int:
        """Wide vertical stroke (the only width for Symmetrical)."""
        return max(self.v_widths)

    @property
    def d2(self) -> int:
        """Thin vertical stroke (equals d1 for Symmetrical)."""
        return min(self.v_widths)

    def to_dict(self) -> Dict[str, object]:
        return {
            "family": self.family.value,
            "h1": self.h1,
            "h2": self.h2,
            "w_std": self.w_std,
            "w_wide": self.w_wide,
            "v_widths": sorted(self.v_widths, reverse=True),
            "v_clear": self.v_clear,
            "k": self.k,
            "w_asc": self.w_asc,
        }


@dataclass(frozen=True)
class Stroke:
    """One axis-aligned stroke; there is no diagonal orientation."""
    orientation: Orientation
    x: int  # left edge
    y: int  # top edge, from the glyph-cell top
    length: int  # extent along the orientation
    width: int  # extent across the orientation

    def __post_init__(self):
        if not isinstance(self.orientation, Orientation):
            try:
                object.__setattr__(self, "orientation", Orientation(self.orientation))
            except ValueError:
                raise MalformedGlyphError(f"unknown stroke orientation: {self.orientation!r}")
        for name in ("x", "y", "length", "width"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise MalformedGlyphError(f"stroke {name} must be an integer p-unit, got {value!r}")
        if self.x < 0 or self.y < 0:
            raise MalformedGlyphError(f"negative stroke origin ({self.x}, {self.y})")
        if self.length <= 0 or self.width <= 0:
            raise MalformedGlyphError(f"stroke extents must be positive, got {self.length}x{self.width}")

    @property
    def is_vertical(self) -> bool:
        return self.orientation is Orientation.VERTICAL

    @property
    def x_extent(self) -> int:
        return self.width if self.is_vertical else self.length

    @property
    def y_extent(self) -> int:
        return self.length if self.is_vertical else self.width

    @property
    def right(self) -> int:
        return self.x + self.x_extent

    @property
    def bottom(self) -> int:
        return self.y + self.y_extent


@dataclass(frozen=True)
class GlyphDef:
    """One character: its strokes on the p-grid plus advance width."""
    codepoint: str
    strokes: Tuple[Stroke, ...]
    advance: int
    has_ascender: bool = False
    has_descender: bool = False

    def __post_init__(self):
        object.__setattr__(self, "strokes", tuple(self.strokes))
        if not isinstance(self.codepoint, str) or len(self.codepoint) != 1:
            raise MalformedGlyphError(f"codepoint must be a single character, got {self.codepoint!r}")
        if isinstance(self.advance, bool) or not isinstance(self.advance, int) or self.advance <= 0:
            raise MalformedGlyphError(f"advance must be a positive integer, got {self.advance!r}")
        if not self.strokes and not self.codepoint.isspace():
            raise MalformedGlyphError(f"visible glyph {self.codepoint!r} has no strokes")

    @property
    def is_space(self) -> bool:
        return not self.strokes

    def ink_rows(self) -> Optional[Tuple[int, int]]:
        """Half-open row range covered by ink, or None for space."""
        if not self.strokes:
            return None
        return min(s.y for s in self.strokes), max(s.bottom for s in self.strokes)


GlyphSet = Dict[str, GlyphDef]


@dataclass(frozen=True)
class Violation:
    rule: str
    message: str
    stroke_index: int = -1


@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def rule_ids(self) -> List[str]:
        return sorted({v.rule for v in self.violations})


def symmetrical_params() -> GridParams:
    """Symmetrical Safe: equal-width verticals, d = 3p, k = p."""
    return GridParams(
        family=Family.SYMMETRICAL,
        h1=13, h2=18, w_std=9, w_wide=15,
        v_widths=frozenset({3}), v_clear=3, k=1, w_asc=5,
    )


def asymmetrical_params() -> GridParams:
    """Asymmetrical Safe: wide left stem d1 = 5p, thin right element d2 = p."""
    return GridParams(
        family=Family.ASYMMETRICAL,
        h1=13, h2=18, w_std=10, w_wide=15,
        v_widths=frozenset({5, 1}), v_clear=1, k=1, w_asc=5,
    )


def params_for(family) -> Optional[GridParams]:
    """Resolve a family name; 'none' means a comparison font (no rules)."""
    if family is None:
        return None
    if isinstance(family, Family):
        name = family.value
    else:
        name = str(family).strip().lower()
    if name == "none":
        return None
    if name == Family.SYMMETRICAL.value:
        return symmetrical_params()
    if name == Family.ASYMMETRICAL.value:
        return asymmetrical_params()
    raise ValueError(f"unknown font family: {family!r}")


def _is_full_height(codepoint: str) -> bool:
    return codepoint.isdigit() or codepoint.isupper()


def band_rows(g: GlyphDef, params: GridParams) -> Tuple[int, int]:
    """
    Rows of the glyph's main band inside the h2 master cell.

    Plain and ascender glyphs sit on row h2 with the lowercase band at
    [h2-h1, h2); descender glyphs carry the band at [0, h1) and are lowered
    by w_asc during layout; digits and capitals fill [0, h2).
    """
    if _is_full_height(g.codepoint):
        return 0, params.h2
    if g.has_descender:
        return 0, params.h1
    return params.h2 - params.h1, params.h2


def middle_row(top: int, bottom: int, k: int = 1) -> int:
    """Canonical middle-line row: band split 1+5+1+5+1 for 13p, 1+7+1+8+1 for 18p."""
    return top + k + (bottom - top - 3 * k) // 2


def glyph_cell_bounds(g: GlyphDef, params: Optional[GridParams], height: int = 18) -> Tuple[int, int]:
    """(width, height) of the glyph cell in p-units."""
    return g.advance, (params.h2 if params else height)


def check_cell(g: GlyphDef, params: Optional[GridParams], height: int = 18) -> None:
    """Raise MalformedGlyphError if any stroke leaves the glyph cell."""
    cell_w, cell_h = glyph_cell_bounds(g, params, height)
    for index, stroke in enumerate(g.strokes):
        if stroke.right > cell_w or stroke.bottom > cell_h:
            raise MalformedGlyphError(
                f"glyph {g.codepoint!r} stroke {index} exceeds the {cell_w}x{cell_h} cell"
            )


def validate_glyph(g: GlyphDef, params: Optional[GridParams]) -> ValidationReport:
    """
    Check a glyph against its family's proportion rules.

    Rules:
        R1 vertical stroke width in v_widths
        R2 horizontal stroke width == k
        R3 ink height h1, or h2 with ascender/descender (always h2 for digits)
        R4 advance w_std, or w_wide for "m"/"M"
        R5 gap between vertically overlapping vertical strokes >= v_clear
        R6 Asymmetrical: leftmost verticals d1, every other vertical d2
        R7 interior horizontal lines only on the canonical middle row

    Returns:
        ValidationReport listing every violation (params=None -> always ok)
    """
    check_cell(g, params)
    if params is None:
        return ValidationReport()

    violations: List[Violation] = []
    verticals = [(i, s) for i, s in enumerate(g.strokes) if s.is_vertical]
    horizontals = [(i, s) for i, s in enumerate(g.strokes) if not s.is_vertical]

    # R1 / R2
    for i, s in verticals:
        if s.width not in params.v_widths:
            violations.append(Violation(
                "R1", f"vertical stroke width {s.width} not in {sorted(params.v_widths)}", i))
    for i, s in horizontals:
        if s.width != params.k:
            violations.append(Violation(
                "R2", f"horizontal stroke width {s.width} != k={params.k}", i))

    # R3
    rows = g.ink_rows()
    if rows is not None:
        height = rows[1] - rows[0]
        tall = g.has_ascender or g.has_descender or _is_full_height(g.codepoint)
        expected = params.h2 if tall else params.h1
        if height != expected:
            violations.append(Violation("R3", f"glyph height {height} != {expected}"))

    # R4
    expected_width = params.w_wide if g.codepoint in ("m", "M") else params.w_std
    if g.advance != expected_width:
        violations.append(Violation("R4", f"glyph width {g.advance} != {expected_width}"))

    # R5
    for a_pos, (ia, a) in enumerate(verticals):
        for ib, b in verticals[a_pos + 1:]:
            if a.y >= b.bottom or b.y >= a.bottom:
                continue  # no shared rows
            gap = max(b.x - a.right, a.x - b.right)
            if gap < params.v_clear:
                violations.append(Violation(
                    "R5", f"clearance {gap} between strokes {ia} and {ib} < {params.v_clear}", ib))

    # R6
    if params.family is Family.ASYMMETRICAL and verticals:
        leftmost = min(s.x for _, s in verticals)
        for i, s in verticals:
            wanted = params.d1 if s.x == leftmost else params.d2
            if s.width != wanted:
                role = "leftmost" if s.x == leftmost else "right-hand"
                violations.append(Violation("R6", f"{role} vertical width {s.width} != {wanted}", i))

    # R7
    if horizontals:
        top, bottom = band_rows(g, params)
        allowed = {top, bottom - params.k, middle_row(top, bottom, params.k)}
        if g.has_ascender:
            allowed.add(0)
        if g.has_descender:
            allowed.add(params.h2 - params.k)
        for i, s in horizontals:
            if s.y not in allowed:
                violations.append(Violation(
                    "R7", f"horizontal line on row {s.y}, allowed rows {sorted(allowed)}", i))

    return ValidationReport(tuple(violations))


def validate_glyphset(glyphs: GlyphSet, params: Optional[GridParams]) -> Dict[str, ValidationReport]:
    """Validate every glyph; returns only the failing ones."""
    failing = {}
    for codepoint, glyph in sorted(glyphs.items()):
        report = validate_glyph(glyph, params)
        if not report.ok:
            failing[codepoint] = report
    return failing


@lru_cache(maxsize=None)
def _builtin(family: Family) -> Tuple[Tuple[str, GlyphDef], ...]:
    from glyph_repertoire import build_repertoire

    params = params_for(family)
    glyphs = build_repertoire(params)
    logger.debug(f"Built {len(glyphs)} {family.value} glyphs")
    return tuple(sorted(glyphs.items()))


def builtin_glyphset(family) -> GlyphSet:
    """The curated repertoire: lowercase a-z, digits 0-9 and space."""
    params = params_for(family)
    if params is None:
        raise ValueError("builtin glyph sets exist only for the safe families")
    return dict(_builtin(params.family))
