#!/usr/bin/env python3
"""
Glyph Atlas Files

Two on-disk forms of a font:
- glyph atlas (YAML): stroke lists in p-units, human-diffable
- raster atlas (binary): pre-rendered bitmaps for comparison fonts that
  cannot be expressed with axis-aligned strokes
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import yaml

from glyph_model import (
    GlyphDef,
    GlyphSet,
    GridParams,
    MalformedGlyphError,
    Orientation,
    Stroke,
    params_for,
    validate_glyph,
)

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
RASTER_MAGIC = b"RATLAS 1"

GLYPH_KEYS = ("codepoint", "advance", "has_ascender", "has_descender", "strokes")
STROKE_KEYS = ("orientation", "x", "y", "length", "width")


class AtlasParseError(ValueError):
    """Atlas file does not follow the schema; names the offending key."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class AtlasValidationError(ValueError):
    """Atlas glyphs parse but break their family's proportion rules."""

    def __init__(self, failures: Dict[str, List[str]]):
        details = "; ".join(f"{cp!r}: {','.join(rules)}" for cp, rules in sorted(failures.items()))
        super().__init__(f"glyphs failing validation: {details}")
        self.failures = failures


def _glyph_to_dict(glyph: GlyphDef) -> Dict[str, Any]:
    return {
        "codepoint": glyph.codepoint,
        "advance": glyph.advance,
        "has_ascender": glyph.has_ascender,
        "has_descender": glyph.has_descender,
        "strokes": [
            {
                "orientation": s.orientation.value,
                "x": s.x,
                "y": s.y,
                "length": s.length,
                "width": s.width,
            }
            for s in glyph.strokes
        ],
    }


def _require_failures(glyphs: GlyphSet, params: Optional[GridParams]) -> Dict[str, List[str]]:
    failures = {}
    for codepoint, glyph in glyphs.items():
        report = validate_glyph(glyph, params)
        if not report.ok:
            failures[codepoint] = report.rule_ids()
    return failures


def export_atlas(glyphs: GlyphSet, params: Optional[GridParams], path: Union[str, Path]) -> None:
    """Write a glyph set as a YAML glyph atlas."""
    failures = _require_failures(glyphs, params)
    if failures:
        raise AtlasValidationError(failures)

    data = {
        "format_version": FORMAT_VERSION,
        "family": params.family.value if params else "none",
        "params": params.to_dict() if params else None,
        "glyphs": [_glyph_to_dict(glyphs[cp]) for cp in sorted(glyphs)],
    }
    Path(path).write_text(yaml.safe_dump(data, sort_keys=False, allow_unicode=False))
    logger.info(f"Wrote {len(glyphs)} glyphs to {path}")


def _expect(mapping: Any, key: str, kind, where: str):
    if not isinstance(mapping, dict) or key not in mapping:
        raise AtlasParseError(f"{where}.{key}" if where else key, "missing")
    value = mapping[key]
    # bool is an int subclass; keep the two apart
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise AtlasParseError(f"{where}.{key}" if where else key, f"expected integer, got {value!r}")
    if kind is not int and not isinstance(value, kind):
        raise AtlasParseError(f"{where}.{key}" if where else key, f"expected {kind.__name__}, got {value!r}")
    return value


def _reject_unknown(mapping: Dict[str, Any], allowed: Tuple[str, ...], where: str) -> None:
    for key in mapping:
        if key not in allowed:
            raise AtlasParseError(f"{where}.{key}", "unknown key")


def _parse_stroke(raw: Any, where: str) -> Stroke:
    if not isinstance(raw, dict):
        raise AtlasParseError(where, "stroke must be a mapping")
    _reject_unknown(raw, STROKE_KEYS, where)
    orientation = _expect(raw, "orientation", str, where)
    try:
        orientation = Orientation(orientation)
    except ValueError:
        raise AtlasParseError(f"{where}.orientation", f"{orientation!r} is not vertical/horizontal")
    values = [_expect(raw, key, int, where) for key in STROKE_KEYS[1:]]
    try:
        return Stroke(orientation, *values)
    except MalformedGlyphError as e:
        raise AtlasParseError(where, str(e))


def _parse_glyph(raw: Any, where: str) -> GlyphDef:
    if not isinstance(raw, dict):
        raise AtlasParseError(where, "glyph must be a mapping")
    _reject_unknown(raw, GLYPH_KEYS, where)
    codepoint = _expect(raw, "codepoint", str, where)
    advance = _expect(raw, "advance", int, where)
    has_ascender = _expect(raw, "has_ascender", bool, where)
    has_descender = _expect(raw, "has_descender", bool, where)
    strokes_raw = _expect(raw, "strokes", list, where)
    strokes = [_parse_stroke(s, f"{where}.strokes[{i}]") for i, s in enumerate(strokes_raw)]
    try:
        return GlyphDef(codepoint, tuple(strokes), advance, has_ascender, has_descender)
    except MalformedGlyphError as e:
        raise AtlasParseError(where, str(e))


def import_atlas(path: Union[str, Path]) -> Tuple[GlyphSet, Optional[GridParams]]:
    """
    Load a YAML glyph atlas.

    Returns:
        (glyph set, family params or None for comparison fonts)

    Raises:
        AtlasParseError: schema violation, naming the offending key
        AtlasValidationError: safe-family glyphs breaking rules R1-R7
    """
    try:
        data = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as e:
        raise AtlasParseError("<document>", f"not valid YAML: {e}")
    if not isinstance(data, dict):
        raise AtlasParseError("<document>", "top level must be a mapping")
    _reject_unknown(data, ("format_version", "family", "params", "glyphs"), "")

    version = _expect(data, "format_version", int, "")
    if version != FORMAT_VERSION:
        raise AtlasParseError("format_version", f"unsupported version {version}")

    family = _expect(data, "family", str, "")
    try:
        params = params_for(family)
    except ValueError as e:
        raise AtlasParseError("family", str(e))

    echo = data.get("params")
    if params is not None and echo != params.to_dict():
        raise AtlasParseError("params", f"does not match the {family} constants")

    glyphs: GlyphSet = {}
    for i, raw in enumerate(_expect(data, "glyphs", list, "")):
        glyph = _parse_glyph(raw, f"glyphs[{i}]")
        if glyph.codepoint in glyphs:
            raise AtlasParseError(f"glyphs[{i}].codepoint", f"duplicate {glyph.codepoint!r}")
        glyphs[glyph.codepoint] = glyph

    try:
        failures = _require_failures(glyphs, params)
    except MalformedGlyphError as e:
        raise AtlasParseError("glyphs", str(e))
    if failures:
        raise AtlasValidationError(failures)

    logger.info(f"Loaded {len(glyphs)} glyphs ({family}) from {path}")
    return glyphs, params


@dataclass(frozen=True)
class RasterGlyph:
    """A pre-rendered glyph at scale 1; y_shift lowers descender glyphs in a line."""
    codepoint: str
    pixels: np.ndarray  # (h, w) uint8, 0 = ink, 255 = background
    y_shift: int = 0

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])


@dataclass
class RasterAtlas:
    """Comparison font stored as bitmaps; cell_w is the standard advance."""
    name: str
    cell_w: int
    cell_h: int
    glyphs: Dict[str, RasterGlyph] = field(default_factory=dict)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RasterAtlas):
            return NotImplemented
        if (self.name, self.cell_w, self.cell_h) != (other.name, other.cell_w, other.cell_h):
            return False
        if set(self.glyphs) != set(other.glyphs):
            return False
        return all(
            a.y_shift == b.y_shift and np.array_equal(a.pixels, b.pixels)
            for a, b in ((self.glyphs[cp], other.glyphs[cp]) for cp in self.glyphs)
        )


def write_raster_atlas(atlas: RasterAtlas, path: Union[str, Path]) -> None:
    """Header lines, then per glyph a text line followed by w*h raw bytes."""
    out = bytearray()
    out += RASTER_MAGIC + b"\n"
    out += f"name {atlas.name}\n".encode("ascii")
    out += f"cell {atlas.cell_w} {atlas.cell_h}\n".encode("ascii")
    out += f"count {len(atlas.glyphs)}\n".encode("ascii")
    for codepoint in sorted(atlas.glyphs):
        glyph = atlas.glyphs[codepoint]
        out += f"glyph {ord(codepoint)} {glyph.width} {glyph.height} {glyph.y_shift}\n".encode("ascii")
        out += np.ascontiguousarray(glyph.pixels, dtype=np.uint8).tobytes()
    Path(path).write_bytes(bytes(out))
    logger.info(f"Wrote raster atlas {atlas.name} ({len(atlas.glyphs)} glyphs) to {path}")


def _read_line(data: bytes, offset: int) -> Tuple[List[str], int]:
    end = data.find(b"\n", offset)
    if end < 0:
        raise AtlasParseError(f"byte {offset}", "unterminated header line")
    try:
        words = data[offset:end].decode("ascii").split()
    except UnicodeDecodeError:
        raise AtlasParseError(f"byte {offset}", "header line is not ASCII")
    return words, end + 1


def _ints(words: List[str], count: int, offset: int) -> List[int]:
    if len(words) != count + 1:
        raise AtlasParseError(f"byte {offset}", f"expected {count} values after {words[:1]}")
    try:
        return [int(w) for w in words[1:]]
    except ValueError:
        raise AtlasParseError(f"byte {offset}", f"non-integer field in {' '.join(words)!r}")


def read_raster_atlas(path: Union[str, Path]) -> RasterAtlas:
    data = Path(path).read_bytes()
    if not data.startswith(RASTER_MAGIC + b"\n"):
        raise AtlasParseError("byte 0", "missing RATLAS 1 magic")
    offset = len(RASTER_MAGIC) + 1

    words, next_offset = _read_line(data, offset)
    if len(words) != 2 or words[0] != "name":
        raise AtlasParseError(f"byte {offset}", "expected 'name <id>'")
    name, offset = words[1], next_offset

    words, next_offset = _read_line(data, offset)
    if not words or words[0] != "cell":
        raise AtlasParseError(f"byte {offset}", "expected 'cell <w> <h>'")
    cell_w, cell_h = _ints(words, 2, offset)
    offset = next_offset

    words, next_offset = _read_line(data, offset)
    if not words or words[0] != "count":
        raise AtlasParseError(f"byte {offset}", "expected 'count <n>'")
    (count,) = _ints(words, 1, offset)
    offset = next_offset

    atlas = RasterAtlas(name=name, cell_w=cell_w, cell_h=cell_h)
    for _ in range(count):
        words, next_offset = _read_line(data, offset)
        if not words or words[0] != "glyph":
            raise AtlasParseError(f"byte {offset}", "expected 'glyph <codepoint> <w> <h> <y_shift>'")
        code, width, height, y_shift = _ints(words, 4, offset)
        if width <= 0 or height <= 0:
            raise AtlasParseError(f"byte {offset}", "glyph dimensions must be positive")
        payload_start = next_offset
        payload_end = payload_start + width * height
        if payload_end > len(data):
            raise AtlasParseError(f"byte {payload_start}", "truncated glyph payload")
        pixels = np.frombuffer(data[payload_start:payload_end], dtype=np.uint8).reshape(height, width).copy()
        atlas.glyphs[chr(code)] = RasterGlyph(chr(code), pixels, y_shift)
        offset = payload_end

    if offset != len(data):
        raise AtlasParseError(f"byte {offset}", "trailing data after last glyph")
    return atlas
