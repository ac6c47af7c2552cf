#!/usr/bin/env python3
"""
Recognition - the eavesdropper's side.

Builds channel-matched glyph templates, finds them in emission images by
normalized cross-correlation (NCC) and scores the result as Character
Error Rate:

    CER = (m + k) / q

with m wrong hits, k = u - n looked-for characters that were missed and
q the number of glyphs in the analysed image.

Scores are derived from exact integer window statistics, so the FFT
matcher and the brute-force oracle agree to the last bit.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.signal import fftconvolve

from channel import ChannelConfig, Standard, emanate, tmds_expected_emission
from glyph_model import GridParams
from raster import (
    BACKGROUND,
    Bitmap,
    Font,
    GroundTruthCell,
    font_characters,
    glyph_block,
    std_advance,
)

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.8
DEFAULT_TARGETS = "achns"


class RecognitionError(ValueError):
    """Bad recognizer input: empty bank, empty ground truth, scale mismatch."""


@dataclass(frozen=True)
class TemplateBank:
    """
    Channel-transformed glyph templates of one font at one scale.

    Each template covers the glyph cell plus `pad` background pixels on
    the left and right, so edges at the cell border survive the channel.
    """
    font_id: str
    channel: ChannelConfig
    scale_s: int
    pad: int
    std_width: int  # standard cell width in pixels
    templates: Dict[str, Bitmap] = field(default_factory=dict)

    def codepoints(self) -> List[str]:
        return sorted(self.templates)

    @property
    def default_nms_window(self) -> int:
        return max(1, self.std_width // 2)


@dataclass(frozen=True)
class MatchHit:
    codepoint: str
    x: int  # cell origin (template window origin + pad)
    y: int
    score: float


class NccResult(NamedTuple):
    score: float
    degenerate: bool


@dataclass(frozen=True)
class CerInputs:
    u: int  # looked-for characters present
    m: int  # incorrect hits
    n: int  # correct hits
    k: int  # looked-for but missed
    q: int  # all glyphs in the image

    def __post_init__(self):
        if min(self.u, self.m, self.n, self.k) < 0:
            raise RecognitionError(f"negative CER counter in {self}")
        if self.k != self.u - self.n or self.n > self.u:
            raise RecognitionError(f"inconsistent CER counters: u={self.u} n={self.n} k={self.k}")
        if self.q < 1:
            raise RecognitionError("q must be >= 1")

    @property
    def cer(self) -> Fraction:
        return Fraction(self.m + self.k, self.q)

    def to_dict(self) -> Dict[str, int]:
        return {"u": self.u, "m": self.m, "n": self.n, "k": self.k, "q": self.q}


def cer_inputs(u: int, n: int, m: int, q: int) -> CerInputs:
    return CerInputs(u=u, m=m, n=n, k=u - n, q=q)


def render_cer(value: Fraction) -> float:
    """Exact rational rounded to 4 decimal places for reports."""
    return float(round(value, 4))


@dataclass(frozen=True)
class CerReport:
    per_char: Dict[str, CerInputs]
    aggregate: CerInputs
    config: Dict[str, Any]

    @property
    def aggregate_cer(self) -> Fraction:
        return self.aggregate.cer


@dataclass(frozen=True)
class SimilarityMatrix:
    codepoints: Tuple[str, ...]
    scores: np.ndarray

    def mean_off_diagonal(self) -> float:
        n = len(self.codepoints)
        if n < 2:
            return 0.0
        mask = ~np.eye(n, dtype=bool)
        return float(self.scores[mask].mean())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "codepoints": list(self.codepoints),
            "scores": [[round(float(v), 6) for v in row] for row in self.scores],
        }


# --- templates ------------------------------------------------------------

def build_templates(
    font: Font,
    params: Optional[GridParams],
    s: int,
    cfg: ChannelConfig,
    font_id: Optional[str] = None,
) -> TemplateBank:
    """
    Rasterize each glyph, pad it with s background columns per side and
    pass it through the channel with noise disabled. Glyphs whose template
    carries no energy (space) are left out.

    DVI templates are the glyph's emission averaged over the encoder
    states a line of text can enter it in, since the running disparity
    on screen depends on everything left of the glyph.
    """
    chars = [c for c in font_characters(font) if not c.isspace()]
    if not chars:
        raise RecognitionError("cannot build templates from an empty glyph set")

    quiet = replace(cfg, snr_db=math.inf)
    pad = s
    templates: Dict[str, Bitmap] = {}
    for char in chars:
        block = glyph_block(font, params, char, s)
        padded = np.pad(block, ((0, 0), (pad, pad)), constant_values=BACKGROUND)
        if quiet.standard is Standard.DVI:
            template = tmds_expected_emission(Bitmap(padded), quiet)
        else:
            template = emanate(Bitmap(padded), quiet)
        if not template.samples.any():
            logger.debug(f"Dropping blank template for {char!r}")
            continue
        templates[char] = template

    if not templates:
        raise RecognitionError("every template is blank under this channel")

    if font_id is None:
        font_id = getattr(font, "name", None) or (params.family.value if params else "custom")
    bank = TemplateBank(font_id, cfg, s, pad, std_advance(font, params) * s, templates)
    logger.info(f"Built {len(templates)} {cfg.standard.value} templates for {font_id} at s={s}")
    return bank


# --- correlation ------------------------------------------------------------

def _score(num: int, dt: int, dw: int) -> float:
    return min(1.0, max(-1.0, float(num) / math.sqrt(float(dt) * float(dw))))


def ncc(template: Bitmap, window: Bitmap) -> NccResult:
    """Zero-mean normalized cross-correlation of two equal-size rasters."""
    t = template.samples.astype(np.int64)
    w = window.samples.astype(np.int64)
    if t.shape != w.shape:
        raise RecognitionError(f"ncc needs equal shapes, got {t.shape} and {w.shape}")
    n = t.size
    st, sw = int(t.sum()), int(w.sum())
    dt = n * int((t * t).sum()) - st * st
    dw = n * int((w * w).sum()) - sw * sw
    if dt == 0 or dw == 0:
        return NccResult(0.0, True)
    num = n * int((t * w).sum()) - st * sw
    return NccResult(_score(num, dt, dw), False)


def _integral(values: np.ndarray) -> np.ndarray:
    out = np.zeros((values.shape[0] + 1, values.shape[1] + 1), dtype=np.int64)
    out[1:, 1:] = values.cumsum(axis=0).cumsum(axis=1)
    return out


def _window_sums(integral: np.ndarray, th: int, tw: int) -> np.ndarray:
    return integral[th:, tw:] - integral[:-th, tw:] - integral[th:, :-tw] + integral[:-th, :-tw]


def ncc_surface(image: np.ndarray, template: np.ndarray) -> np.ndarray:
    """NCC score at every valid window position (degenerate windows -> 0)."""
    img = image.astype(np.int64)
    t = template.astype(np.int64)
    th, tw = t.shape
    n = t.size
    st = int(t.sum())
    dt = n * int((t * t).sum()) - st * st
    out_shape = (img.shape[0] - th + 1, img.shape[1] - tw + 1)
    if dt == 0:
        return np.zeros(out_shape)

    # correlation surface is an integer; the FFT result is within rounding of it
    stw = np.rint(fftconvolve(img.astype(np.float64), t[::-1, ::-1].astype(np.float64), mode="valid"))
    stw = stw.astype(np.int64)
    sw = _window_sums(_integral(img), th, tw)
    sww = _window_sums(_integral(img * img), th, tw)

    dw = n * sww - sw * sw
    num = n * stw - st * sw
    scores = np.zeros(out_shape)
    live = dw > 0
    scores[live] = num[live].astype(np.float64) / np.sqrt(float(dt) * dw[live].astype(np.float64))
    return np.clip(scores, -1.0, 1.0)


# --- matching ---------------------------------------------------------------

def _hit_order(hit: MatchHit):
    return (-hit.score, hit.y, hit.x, hit.codepoint)


def _suppress(candidates: List[MatchHit], window: int) -> List[MatchHit]:
    """Greedy NMS: best hit first; drop anything within the window of a kept hit."""
    kept: List[MatchHit] = []
    buckets: Dict[Tuple[int, int], List[MatchHit]] = {}
    size = max(window, 1)
    for hit in sorted(candidates, key=_hit_order):
        bx, by = hit.x // size, hit.y // size
        clash = False
        for nx in (bx - 1, bx, bx + 1):
            for ny in (by - 1, by, by + 1):
                for other in buckets.get((nx, ny), ()):
                    if abs(other.x - hit.x) < window and abs(other.y - hit.y) < window:
                        clash = True
                        break
                if clash:
                    break
            if clash:
                break
        if not clash:
            kept.append(hit)
            buckets.setdefault((bx, by), []).append(hit)
    return sorted(kept, key=lambda h: (h.y, h.x, h.codepoint))


def _check_threshold(threshold: float) -> None:
    # degenerate windows score 0 and must never count as hits
    if not 0 < threshold <= 1:
        raise RecognitionError(f"threshold must be in (0, 1], got {threshold}")


def _fits(image: Bitmap, template: Bitmap, codepoint: str) -> bool:
    if template.height > image.height or template.width > image.width:
        logger.warning(
            f"Skipping template {codepoint!r} ({template.width}x{template.height}) "
            f"larger than image ({image.width}x{image.height})"
        )
        return False
    return True


def match(
    image: Bitmap,
    bank: TemplateBank,
    threshold: float = DEFAULT_THRESHOLD,
    nms_window: Optional[int] = None,
    workers: int = 1,
) -> List[MatchHit]:
    """
    Slide every template over the image and return the hits that survive
    the threshold and non-maximum suppression, sorted by (y, x, codepoint).
    """
    _check_threshold(threshold)
    window = bank.default_nms_window if nms_window is None else nms_window

    def candidates_for(codepoint: str) -> List[MatchHit]:
        template = bank.templates[codepoint]
        if not _fits(image, template, codepoint):
            return []
        surface = ncc_surface(image.samples, template.samples)
        ys, xs = np.nonzero(surface >= threshold)
        return [MatchHit(codepoint, int(x) + bank.pad, int(y), float(surface[y, x])) for y, x in zip(ys, xs)]

    codepoints = bank.codepoints()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(candidates_for, codepoints))
    else:
        batches = [candidates_for(c) for c in codepoints]

    candidates = [hit for batch in batches for hit in batch]
    hits = _suppress(candidates, window)
    logger.info(f"Matched {len(hits)} hits ({len(candidates)} candidates) against {bank.font_id}")
    return hits


def match_brute_force(
    image: Bitmap,
    bank: TemplateBank,
    threshold: float = DEFAULT_THRESHOLD,
    nms_window: Optional[int] = None,
) -> List[MatchHit]:
    """Reference matcher: every window summed directly (no FFT, no integral images), pairwise NMS."""
    _check_threshold(threshold)
    window = bank.default_nms_window if nms_window is None else nms_window
    img = image.samples.astype(np.int64)
    candidates = []
    for codepoint in bank.codepoints():
        template = bank.templates[codepoint]
        if not _fits(image, template, codepoint):
            continue
        t = template.samples.astype(np.int64)
        th, tw = t.shape
        n = t.size
        st = int(t.sum())
        dt = n * int((t * t).sum()) - st * st
        if dt == 0:
            continue
        for y in range(img.shape[0] - th + 1):
            for x in range(img.shape[1] - tw + 1):
                win = img[y:y + th, x:x + tw]
                sw = int(win.sum())
                dw = n * int((win * win).sum()) - sw * sw
                if dw <= 0:
                    continue
                stw = int((t * win).sum())
                score = _score(n * stw - st * sw, dt, dw)
                if score >= threshold:
                    candidates.append(MatchHit(codepoint, x + bank.pad, y, score))

    kept: List[MatchHit] = []
    for hit in sorted(candidates, key=_hit_order):
        if all(abs(k.x - hit.x) >= window or abs(k.y - hit.y) >= window for k in kept):
            kept.append(hit)
    return sorted(kept, key=lambda h: (h.y, h.x, h.codepoint))


# --- scoring ------------------------------------------------------------------

def _nearest_cell(hit: MatchHit, cells: Sequence[GroundTruthCell]) -> Optional[int]:
    """Index of the closest cell whose origin is within half a cell of the hit."""
    best = None
    for index, cell in enumerate(cells):
        dx, dy = hit.x - cell.x, hit.y - cell.y
        if 2 * abs(dx) > cell.w or 2 * abs(dy) > cell.h:
            continue
        key = (dx * dx + dy * dy, index)
        if best is None or key < best:
            best = key
    return None if best is None else best[1]


def score_cer(
    hits: Iterable[MatchHit],
    ground_truth: Sequence[GroundTruthCell],
    targets: Iterable[str],
    config: Optional[Dict[str, Any]] = None,
) -> CerReport:
    """
    Count u, m, n, k, q per looked-for character.

    A hit is correct when its label equals the nearest ground-truth cell
    within half a cell and that cell has not been credited yet. Every other
    hit counts to m once, on the row of its label when the label is looked
    for, otherwise on the row of the looked-for glyph it landed on. Hits
    that involve no looked-for character are ignored.
    """
    cells = list(ground_truth)
    if not cells:
        raise RecognitionError("ground truth is empty (q must be >= 1)")
    target_list = sorted(set(targets))
    if not target_list:
        raise RecognitionError("no target characters to look for")

    q = len(cells)
    credited = set()
    correct = {c: 0 for c in target_list}
    wrong = {c: 0 for c in target_list}
    for hit in sorted(hits, key=_hit_order):
        index = _nearest_cell(hit, cells)
        under = cells[index].char if index is not None else None
        if hit.codepoint in correct:
            if under == hit.codepoint and index not in credited:
                credited.add(index)
                correct[hit.codepoint] += 1
            else:
                wrong[hit.codepoint] += 1
        elif under in wrong:
            wrong[under] += 1

    per_char = {}
    for c in target_list:
        u = sum(1 for cell in cells if cell.char == c)
        per_char[c] = cer_inputs(u=u, n=correct[c], m=wrong[c], q=q)

    aggregate = cer_inputs(
        u=sum(v.u for v in per_char.values()),
        n=sum(v.n for v in per_char.values()),
        m=sum(v.m for v in per_char.values()),
        q=q,
    )
    return CerReport(per_char, aggregate, dict(config or {}))


def check_scale(ground_truth: Sequence[GroundTruthCell], bank: TemplateBank) -> None:
    """Ground-truth cells must have the template cell size of their glyph."""
    for cell in ground_truth:
        template = bank.templates.get(cell.char)
        if template is None:
            continue
        if (cell.w, cell.h) != (template.width - 2 * bank.pad, template.height):
            raise RecognitionError(
                f"scale mismatch: cell {cell.char!r} is {cell.w}x{cell.h} px, templates at "
                f"s={bank.scale_s} expect {template.width - 2 * bank.pad}x{template.height}"
            )


def evaluate_image(
    image: Bitmap,
    ground_truth: Sequence[GroundTruthCell],
    bank: TemplateBank,
    threshold: float = DEFAULT_THRESHOLD,
    targets: Iterable[str] = DEFAULT_TARGETS,
    nms_window: Optional[int] = None,
    workers: int = 1,
) -> CerReport:
    """Match then score, echoing the recognizer configuration."""
    check_scale(ground_truth, bank)
    hits = match(image, bank, threshold, nms_window, workers)
    config = {
        "font": bank.font_id,
        "scale_s": bank.scale_s,
        "channel": bank.channel.to_dict(),
        "threshold": threshold,
        "nms_window": bank.default_nms_window if nms_window is None else nms_window,
        "targets": "".join(sorted(set(targets))),
    }
    return score_cer(hits, ground_truth, targets, config)


# --- similarity -----------------------------------------------------------------

def similarity_matrix(bank: TemplateBank) -> SimilarityMatrix:
    """Pairwise NCC of templates padded (with zero emission) to a common size."""
    codepoints = tuple(bank.codepoints())
    if not codepoints:
        raise RecognitionError("similarity matrix of an empty bank")
    height = max(bank.templates[c].height for c in codepoints)
    width = max(bank.templates[c].width for c in codepoints)

    padded = []
    for c in codepoints:
        samples = bank.templates[c].samples
        canvas = np.zeros((height, width), dtype=np.uint8)
        canvas[:samples.shape[0], :samples.shape[1]] = samples
        padded.append(Bitmap(canvas, "emission"))

    size = len(codepoints)
    scores = np.zeros((size, size))
    for i in range(size):
        scores[i, i] = 0.0 if ncc(padded[i], padded[i]).degenerate else 1.0
        for j in range(i + 1, size):
            value = ncc(padded[i], padded[j]).score
            scores[i, j] = scores[j, i] = value
    return SimilarityMatrix(codepoints, scores)


def confusable_fraction(matrix: SimilarityMatrix, cutoff: float = 0.8) -> float:
    """Share of ordered off-diagonal pairs with similarity above the cutoff."""
    size = len(matrix.codepoints)
    if size < 2:
        return 0.0
    mask = ~np.eye(size, dtype=bool)
    return float(np.count_nonzero(matrix.scores[mask] > cutoff)) / (size * (size - 1))
