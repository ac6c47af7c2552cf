#!/usr/bin/env python3
"""
Screen Rasterizer

Renders glyphs and text into grayscale screen bitmaps at an integer
pixels-per-p scale, with a ground-truth sidecar for CER scoring, and
builds synthetic test patterns for channel validation.

Ink is binary and grid-aligned: no anti-aliasing, no hinting.
"""

import csv
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from atlas import RasterAtlas
from glyph_model import GlyphDef, GlyphSet, GridParams, check_cell, symmetrical_params

logger = logging.getLogger(__name__)

INK = 0
BACKGROUND = 255
DEFAULT_CELL_HEIGHT = 18
DEFAULT_DROP = 5

POLARITIES = ("dark-on-light", "light-on-dark", "emission")


class MissingGlyphError(ValueError):
    """Text contains characters the font does not define."""

    def __init__(self, missing: List[str]):
        super().__init__(f"missing glyphs for: {''.join(missing)!r}")
        self.missing = missing


class Bitmap:
    """
    Row-major 8-bit grayscale raster (numpy array of shape (height, width)).

    polarity records the sample convention: 'dark-on-light' screens have
    ink 0 on 255, 'emission' images carry received energy (bright = strong).
    """

    __slots__ = ("samples", "polarity")

    def __init__(self, samples: np.ndarray, polarity: str = "dark-on-light"):
        array = np.asarray(samples)
        if array.ndim != 2 or array.shape[0] <= 0 or array.shape[1] <= 0:
            raise ValueError(f"bitmap must be a non-empty 2-D array, got shape {array.shape}")
        if polarity not in POLARITIES:
            raise ValueError(f"unknown polarity {polarity!r}")
        array = np.array(array, dtype=np.uint8, copy=True)
        array.setflags(write=False)
        self.samples = array
        self.polarity = polarity

    @property
    def width(self) -> int:
        return int(self.samples.shape[1])

    @property
    def height(self) -> int:
        return int(self.samples.shape[0])

    def to_bytes(self) -> bytes:
        return self.samples.tobytes()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Bitmap):
            return NotImplemented
        return self.polarity == other.polarity and np.array_equal(self.samples, other.samples)

    def __repr__(self) -> str:
        return f"Bitmap({self.width}x{self.height}, {self.polarity})"


@dataclass(frozen=True)
class LayoutSpec:
    """Text layout in p-units; scale_s is pixels per p."""
    scale_s: int = 2
    tracking: int = 3
    leading: int = 2
    margin: int = 4

    def __post_init__(self):
        if self.scale_s < 1:
            raise ValueError(f"scale_s must be >= 1, got {self.scale_s}")
        for name in ("tracking", "leading", "margin"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def to_dict(self) -> Dict[str, int]:
        return {"scale_s": self.scale_s, "tracking": self.tracking,
                "leading": self.leading, "margin": self.margin}


@dataclass(frozen=True)
class GroundTruthCell:
    char: str
    x: int
    y: int
    w: int
    h: int


@dataclass(frozen=True)
class RenderedText:
    bitmap: Bitmap
    cells: Tuple[GroundTruthCell, ...]


class PatternKind(str, Enum):
    HBAR = "hbar"
    VBAR = "vbar"
    CHECKER = "checker"
    FLAT = "flat"


def point_size_to_scale(points: float) -> int:
    """Nominal N pt -> s so that the 18p full height is about N pixels."""
    return max(1, int(points / 18.0 + 0.5))


def upscale(bitmap: Bitmap, s: int) -> Bitmap:
    """Nearest-neighbor upscale by an integer factor."""
    if s < 1:
        raise ValueError("scale must be >= 1")
    samples = np.repeat(np.repeat(bitmap.samples, s, axis=0), s, axis=1)
    return Bitmap(samples, bitmap.polarity)


def rasterize_glyph(g: GlyphDef, params: Optional[GridParams], s: int) -> Bitmap:
    """Bitmap of size (advance*s) x (h2*s); every stroke fills its rectangle."""
    if s < 1:
        raise ValueError("scale must be >= 1")
    check_cell(g, params)
    cell_h = params.h2 if params else DEFAULT_CELL_HEIGHT
    canvas = np.full((cell_h * s, g.advance * s), BACKGROUND, dtype=np.uint8)
    for stroke in g.strokes:
        canvas[stroke.y * s:stroke.bottom * s, stroke.x * s:stroke.right * s] = INK
    return Bitmap(canvas)


Font = Union[GlyphSet, RasterAtlas]


class _FontView:
    """Uniform access to stroke fonts and raster atlases during layout."""

    def __init__(self, font: Font, params: Optional[GridParams], s: int):
        self.font = font
        self.params = params
        self.s = s
        self._cache: Dict[str, Tuple[np.ndarray, int]] = {}
        if isinstance(font, RasterAtlas):
            self.std_advance = font.cell_w
            self.cell_h = font.cell_h
            shifts = [g.y_shift for g in font.glyphs.values()]
            self.drop = max(shifts + [0]) or DEFAULT_DROP
        else:
            space = font.get(" ")
            self.std_advance = params.w_std if params else (space.advance if space else 9)
            self.cell_h = params.h2 if params else DEFAULT_CELL_HEIGHT
            self.drop = params.w_asc if params else DEFAULT_DROP

    def has(self, char: str) -> bool:
        glyphs = self.font.glyphs if isinstance(self.font, RasterAtlas) else self.font
        return char in glyphs

    def advance(self, char: str) -> int:
        if isinstance(self.font, RasterAtlas):
            glyph = self.font.glyphs.get(char)
            return glyph.width if glyph else self.std_advance
        glyph = self.font.get(char)
        return glyph.advance if glyph else self.std_advance

    def pixels(self, char: str) -> Tuple[np.ndarray, int]:
        """Scaled pixel block and its vertical shift (pixels) within the line box."""
        if char not in self._cache:
            s = self.s
            if isinstance(self.font, RasterAtlas):
                glyph = self.font.glyphs[char]
                block = np.repeat(np.repeat(glyph.pixels, s, axis=0), s, axis=1)
                shift = glyph.y_shift * s
            else:
                glyph = self.font[char]
                block = rasterize_glyph(glyph, self.params, s).samples
                shift = self.drop * s if glyph.has_descender else 0
            self._cache[char] = (block, shift)
        return self._cache[char]

    def tofu(self) -> Tuple[np.ndarray, int]:
        s = self.s
        block = np.full((self.cell_h * s, self.std_advance * s), BACKGROUND, dtype=np.uint8)
        top = self.drop * s  # lowercase band top, h2 - h1 == w_asc
        block[top:top + s, :] = INK
        block[-s:, :] = INK
        block[top:, :s] = INK
        block[top:, -s:] = INK
        return block, 0


def glyph_block(font: Font, params: Optional[GridParams], char: str, s: int) -> np.ndarray:
    """The scaled ink block a glyph occupies in its ground-truth cell."""
    view = _FontView(font, params, s)
    if not view.has(char):
        raise MissingGlyphError([char])
    return view.pixels(char)[0]


def font_characters(font: Font) -> List[str]:
    glyphs = font.glyphs if isinstance(font, RasterAtlas) else font
    return sorted(glyphs)


def std_advance(font: Font, params: Optional[GridParams]) -> int:
    """Standard cell width in p-units (pixels at scale 1 for raster atlases)."""
    return _FontView(font, params, 1).std_advance


def rasterize_text(
    text: str,
    font: Font,
    params: Optional[GridParams],
    layout: LayoutSpec,
    missing: str = "fail",
) -> RenderedText:
    """
    Lay text out left-to-right, top-down; newline starts a new line.

    Every line box is (h2 + w_asc) p tall so descender glyphs, lowered by
    w_asc, share the baseline of the rest.

    Returns:
        RenderedText with the screen bitmap and one ground-truth cell per
        non-space character
    """
    if missing not in ("fail", "tofu"):
        raise ValueError(f"unknown missing-glyph policy {missing!r}")

    s = layout.scale_s
    view = _FontView(font, params, s)
    lines = text.split("\n") if text else []

    absent = sorted({c for c in text if c not in ("\n", " ") and not view.has(c)})
    if absent and missing == "fail":
        raise MissingGlyphError(absent)
    if absent:
        logger.warning(f"Substituting tofu boxes for {''.join(absent)!r}")

    tracking = layout.tracking * s
    line_widths = []
    for line in lines:
        if not line:
            line_widths.append(0)
            continue
        width = sum(view.advance(c) * s for c in line) + tracking * (len(line) - 1)
        line_widths.append(width)

    margin = layout.margin * s
    box_h = (view.cell_h + view.drop) * s
    pitch = box_h + layout.leading * s
    width = 2 * margin + max(line_widths + [0])
    height = 2 * margin + (len(lines) * pitch - layout.leading * s if lines else 0)
    canvas = np.full((max(height, 1), max(width, 1)), BACKGROUND, dtype=np.uint8)

    cells: List[GroundTruthCell] = []
    for row, line in enumerate(lines):
        top = margin + row * pitch
        x = margin
        for char in line:
            advance = view.advance(char) * s
            if char != " ":
                block, shift = view.pixels(char) if view.has(char) else view.tofu()
                h, w = block.shape
                region = canvas[top + shift:top + shift + h, x:x + w]
                np.minimum(region, block, out=region)
                cells.append(GroundTruthCell(char, x, top + shift, w, h))
            x += advance + tracking

    logger.debug(f"Rendered {len(cells)} glyphs into {canvas.shape[1]}x{canvas.shape[0]}")
    return RenderedText(Bitmap(canvas), tuple(cells))


def test_pattern(kind, w: int, h: int, s: int = 1, params: Optional[GridParams] = None) -> Bitmap:
    """
    Channel-validation fixtures (pixels):
        hbar: full-width horizontal stroke k*s tall, centered vertically
        vbar: full-height vertical stroke d*s wide, centered horizontally
        checker: s-pixel checkerboard
        flat: constant background
    """
    if w <= 0 or h <= 0 or s < 1:
        raise ValueError("pattern dimensions must be positive")
    kind = PatternKind(kind)
    params = params or symmetrical_params()
    canvas = np.full((h, w), BACKGROUND, dtype=np.uint8)
    if kind is PatternKind.HBAR:
        thickness = params.k * s
        top = (h - thickness) // 2
        canvas[top:top + thickness, :] = INK
    elif kind is PatternKind.VBAR:
        thickness = params.d1 * s
        left = (w - thickness) // 2
        canvas[:, left:left + thickness] = INK
    elif kind is PatternKind.CHECKER:
        yy, xx = np.indices((h, w))
        canvas[((yy // s) + (xx // s)) % 2 == 1] = INK
    return Bitmap(canvas)


# keep pytest from collecting the pattern builder when tests import it
test_pattern.__test__ = False


def write_ground_truth(cells, path: Union[str, Path]) -> None:
    with open(path, "w", newline="") as f:
        f.write("# char\tx\ty\tw\th\n")
        writer = csv.writer(f, delimiter="\t", lineterminator="\n")
        for cell in cells:
            writer.writerow([cell.char, cell.x, cell.y, cell.w, cell.h])


def read_ground_truth(path: Union[str, Path]) -> List[GroundTruthCell]:
    cells = []
    with open(path, newline="") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("# "):
                continue
            fields = line.split("\t")
            if len(fields) != 5 or len(fields[0]) != 1:
                raise ValueError(f"{path}:{lineno}: expected 'char x y w h', got {line!r}")
            try:
                x, y, w, h = (int(v) for v in fields[1:])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-integer cell geometry")
            cells.append(GroundTruthCell(fields[0], x, y, w, h))
    return cells
