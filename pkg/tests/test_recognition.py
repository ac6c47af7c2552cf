#!/usr/bin/env python3
"""Template matching, CER scoring and template similarity."""

import textwrap
import time
from fractions import Fraction

import numpy as np
import pytest

from atlas import RasterAtlas, RasterGlyph
from channel import ChannelConfig, emanate
from comparison_fonts import comparison_atlas
from glyph_model import builtin_glyphset, params_for
from raster import Bitmap, GroundTruthCell, LayoutSpec, rasterize_text, test_pattern
from recognition import (
    CerInputs,
    MatchHit,
    RecognitionError,
    build_templates,
    cer_inputs,
    check_scale,
    confusable_fraction,
    evaluate_image,
    match,
    match_brute_force,
    ncc,
    render_cer,
    score_cer,
    similarity_matrix,
)
from reports import RunManifest, build_report
from settings import DEFAULTS, recognizer_threshold

SUBSET = "acnsl"
SAFE_FONTS = ("symmetrical", "asymmetrical")
STAND_INS = ("sans-like", "serif-like")
FONTS = SAFE_FONTS + STAND_INS


def load_named_font(name):
    if name in STAND_INS:
        return comparison_atlas(name), None
    return builtin_glyphset(name), params_for(name)


def subset_font(name, chars):
    font, params = load_named_font(name)
    if isinstance(font, RasterAtlas):
        return RasterAtlas(font.name, font.cell_w, font.cell_h, {c: font.glyphs[c] for c in chars}), None
    return {c: font[c] for c in chars}, params


def emission_of(text, font, params, cfg, s=1, **layout):
    rendered = rasterize_text(text, font, params, LayoutSpec(scale_s=s, **layout))
    return emanate(rendered.bitmap, cfg), rendered.cells


@pytest.fixture(scope="module")
def subset_banks(sym):
    glyphs, params = sym
    subset = {c: glyphs[c] for c in SUBSET}
    return {
        standard: build_templates(subset, params, 1, ChannelConfig(standard=standard, bw_frac=bw))
        for standard, bw in (("vga", 1.0), ("dvi", 1.0), ("printer", 0.5))
    }


# --- ncc ------------------------------------------------------------------------

@pytest.fixture
def patch():
    return np.random.default_rng(11).integers(0, 120, (7, 5)).astype(np.uint8)


def test_ncc_self(patch):
    result = ncc(Bitmap(patch), Bitmap(patch))
    assert result.score == pytest.approx(1.0)
    assert not result.degenerate


def test_ncc_negation(patch):
    assert ncc(Bitmap(patch), Bitmap(255 - patch)).score == pytest.approx(-1.0)


def test_ncc_affine_invariance(patch):
    assert ncc(Bitmap(patch), Bitmap(2 * patch + 3)).score == pytest.approx(1.0)


def test_ncc_degenerate(patch):
    flat = np.full(patch.shape, 9, dtype=np.uint8)
    assert ncc(Bitmap(patch), Bitmap(flat)) == (0.0, True)


def test_ncc_shape_mismatch(patch):
    with pytest.raises(RecognitionError):
        ncc(Bitmap(patch), Bitmap(patch[:, :4]))


# --- templates ------------------------------------------------------------------

def test_vga_template_keeps_stem_edges(sym, vga_quiet):
    bank = build_templates(*sym, 2, vga_quiet)
    template = bank.templates["l"]
    assert (template.width, template.height) == (22, 36)
    assert set(np.nonzero(template.samples.any(axis=0))[0].tolist()) == {8, 14}
    assert bank.pad == 2 and bank.std_width == 18 and bank.default_nms_window == 9
    assert bank.font_id == "symmetrical"


def test_blank_space_template_is_dropped(sym_bank_s1):
    assert " " not in sym_bank_s1.templates
    assert len(sym_bank_s1.templates) == 36


def test_empty_glyph_set(vga_quiet):
    with pytest.raises(RecognitionError):
        build_templates({}, None, 1, vga_quiet)


def test_templates_are_noiseless(sym):
    glyphs, params = sym
    subset = {"a": glyphs["a"]}
    quiet = build_templates(subset, params, 1, ChannelConfig(seed=1))
    noisy = build_templates(subset, params, 1, ChannelConfig(snr_db=0.0, seed=2))
    assert quiet.templates == noisy.templates
    assert noisy.channel.snr_db == 0.0


# --- matching -------------------------------------------------------------------

def test_glyph_matches_itself_at_its_cell(sym, vga_quiet, sym_bank_s1):
    image, cells = emission_of("a", *sym, vga_quiet)
    hits = match(image, sym_bank_s1)
    best = max(hits, key=lambda h: h.score)
    assert best.codepoint == "a"
    assert (best.x, best.y) == (cells[0].x, cells[0].y)
    assert best.score == pytest.approx(1.0)


def test_silent_image_has_no_hits(sym_bank_s1):
    image = Bitmap(np.zeros((40, 60), dtype=np.uint8), "emission")
    assert match(image, sym_bank_s1, threshold=0.1) == []


def test_template_larger_than_image_is_skipped(sym_bank_s1, caplog):
    image = Bitmap(np.zeros((5, 5), dtype=np.uint8), "emission")
    assert match(image, sym_bank_s1) == []
    assert "larger than image" in caplog.text


@pytest.mark.parametrize("threshold", [0.0, -0.5, 1.5])
def test_threshold_range(sym_bank_s1, threshold):
    image = Bitmap(np.zeros((40, 40), dtype=np.uint8), "emission")
    with pytest.raises(RecognitionError):
        match(image, sym_bank_s1, threshold=threshold)


def test_hits_are_sorted_and_suppressed(sym, vga_quiet, sym_bank_s1):
    image, _ = emission_of("achns\nsnhca", *sym, vga_quiet)
    hits = match(image, sym_bank_s1, threshold=0.5)
    assert hits == sorted(hits, key=lambda h: (h.y, h.x, h.codepoint))
    window = sym_bank_s1.default_nms_window
    for i, a in enumerate(hits):
        for b in hits[i + 1:]:
            assert abs(a.x - b.x) >= window or abs(a.y - b.y) >= window


def test_fft_matcher_agrees_with_brute_force(sym, subset_banks):
    glyphs, params = sym
    subset = {c: glyphs[c] for c in SUBSET + " "}
    rng = np.random.default_rng(2024)
    standards = sorted(subset_banks)
    for trial in range(25):
        standard = standards[trial % len(standards)]
        bank = subset_banks[standard]
        if trial % 5 == 4:
            h, w = rng.integers(18, 65, 2)
            image = Bitmap(rng.integers(0, 256, (h, w)).astype(np.uint8), "emission")
        else:
            text = "".join(rng.choice(list(SUBSET + " "), int(rng.integers(1, 5))))
            cfg = ChannelConfig(standard=standard, snr_db=float(rng.integers(0, 25)),
                                bw_frac=bank.channel.bw_frac, seed=trial)
            image, _ = emission_of(text, subset, params, cfg, margin=2, tracking=int(rng.integers(0, 4)))
        assert image.width <= 64 and image.height <= 64
        assert match(image, bank, threshold=0.5) == match_brute_force(image, bank, threshold=0.5)


def test_workers_do_not_change_hits(sym, sym_bank_s1):
    image, _ = emission_of("quick brown", *sym, ChannelConfig(snr_db=8.0, seed=3))
    assert match(image, sym_bank_s1, threshold=0.6, workers=4) == match(image, sym_bank_s1, threshold=0.6)


# --- CER ------------------------------------------------------------------------

@pytest.mark.parametrize("u,n,m,q,expected", [
    (5, 5, 0, 10, Fraction(0)),
    (5, 2, 3, 10, Fraction(3, 5)),
    (5, 3, 4, 10, Fraction(3, 5)),
    (4, 1, 4, 4, Fraction(7, 4)),
    (0, 0, 0, 7, Fraction(0)),
    (0, 0, 2, 8, Fraction(1, 4)),
    (3, 0, 0, 3, Fraction(1)),
    (1, 1, 1, 3, Fraction(1, 3)),
    (2, 1, 0, 3, Fraction(1, 3)),
    (6, 4, 5, 12, Fraction(7, 12)),
    (10, 0, 10, 10, Fraction(2)),
    (1, 0, 0, 1, Fraction(1)),
])
def test_cer_formula(u, n, m, q, expected):
    inputs = cer_inputs(u=u, n=n, m=m, q=q)
    assert inputs.k == u - n
    assert inputs.cer == expected


@pytest.mark.parametrize("value,rendered", [
    (Fraction(1, 3), 0.3333),
    (Fraction(2, 3), 0.6667),
    (Fraction(7, 4), 1.75),
    (Fraction(0), 0.0),
])
def test_render_cer(value, rendered):
    assert render_cer(value) == rendered


@pytest.mark.parametrize("kwargs", [
    dict(u=2, m=0, n=3, k=-1, q=5),
    dict(u=2, m=0, n=1, k=0, q=5),
    dict(u=2, m=-1, n=1, k=1, q=5),
    dict(u=2, m=0, n=1, k=1, q=0),
])
def test_inconsistent_counters(kwargs):
    with pytest.raises(RecognitionError):
        CerInputs(**kwargs)


@pytest.fixture
def row_of_cells():
    return [GroundTruthCell(c, 10 + 12 * i, 4, 9, 18) for i, c in enumerate("acnx")]


def test_score_cer_counts(row_of_cells):
    hits = [
        MatchHit("a", 10, 4, 0.97),   # correct
        MatchHit("a", 11, 4, 0.90),   # same cell, already credited: wrong
        MatchHit("c", 34, 5, 0.93),   # lands on the n cell: wrong, on the c row
        MatchHit("u", 35, 4, 0.88),   # not looked for, but read off an n: wrong, on the n row
        MatchHit("x", 23, 4, 0.84),   # not looked for, read off the c: wrong, on the c row
        MatchHit("x", 46, 4, 0.99),   # neither label nor glyph looked for: ignored
        MatchHit("s", 200, 4, 0.85),  # nowhere near a cell: wrong
    ]
    report = score_cer(hits, row_of_cells, "acns")
    per = {c: v.to_dict() for c, v in report.per_char.items()}
    assert per["a"] == {"u": 1, "m": 1, "n": 1, "k": 0, "q": 4}
    assert per["c"] == {"u": 1, "m": 2, "n": 0, "k": 1, "q": 4}
    assert per["n"] == {"u": 1, "m": 1, "n": 0, "k": 1, "q": 4}
    assert per["s"] == {"u": 0, "m": 1, "n": 0, "k": 0, "q": 4}
    assert report.aggregate.to_dict() == {"u": 3, "m": 5, "n": 1, "k": 2, "q": 4}
    assert report.aggregate_cer == Fraction(7, 4)


def test_misread_looked_for_glyph_counts_as_wrong():
    cells = [GroundTruthCell("n", 10, 4, 9, 18), GroundTruthCell("x", 22, 4, 9, 18)]
    report = score_cer([MatchHit("u", 10, 4, 0.95)], cells, "n")
    assert report.per_char["n"].to_dict() == {"u": 1, "m": 1, "n": 0, "k": 1, "q": 2}
    assert report.aggregate_cer == Fraction(1)


def test_stray_hit_of_other_glyph_is_ignored():
    cells = [GroundTruthCell("n", 10, 4, 9, 18)]
    report = score_cer([MatchHit("u", 90, 4, 0.95)], cells, "n")
    assert report.per_char["n"].m == 0


def test_best_hit_takes_the_credit(row_of_cells):
    weak = MatchHit("a", 12, 4, 0.81)
    strong = MatchHit("a", 10, 4, 0.95)
    report = score_cer([weak, strong], row_of_cells, "a")
    assert report.per_char["a"].n == 1 and report.per_char["a"].m == 1


def test_hit_outside_half_a_cell_is_wrong(row_of_cells):
    report = score_cer([MatchHit("a", 15, 4, 0.9)], row_of_cells, "a")
    assert report.per_char["a"].m == 1 and report.per_char["a"].n == 0


def test_perfect_recognition(row_of_cells):
    hits = [MatchHit(cell.char, cell.x, cell.y, 1.0) for cell in row_of_cells]
    report = score_cer(hits, row_of_cells, "acn")
    assert report.aggregate_cer == 0


def test_empty_ground_truth():
    with pytest.raises(RecognitionError):
        score_cer([], [], "a")


def test_no_targets(row_of_cells):
    with pytest.raises(RecognitionError):
        score_cer([], row_of_cells, "")


def test_scale_mismatch(sym, sym_bank_s1):
    rendered = rasterize_text("can", *sym, LayoutSpec(scale_s=2))
    with pytest.raises(RecognitionError):
        check_scale(rendered.cells, sym_bank_s1)
    with pytest.raises(RecognitionError):
        evaluate_image(Bitmap(rendered.bitmap.samples, "emission"), rendered.cells, sym_bank_s1)


def test_noiseless_evaluation_echoes_config(sym, vga_quiet, sym_bank_s1):
    image, cells = emission_of("achns", *sym, vga_quiet)
    report = evaluate_image(image, cells, sym_bank_s1)
    assert report.config["font"] == "symmetrical"
    assert report.config["targets"] == "achns"
    assert report.config["nms_window"] == 4
    assert report.config["channel"]["standard"] == "vga"
    assert sum(v.u for v in report.per_char.values()) == 5
    assert report.aggregate.q == 5


@pytest.mark.parametrize("font_name", FONTS)
def test_noiseless_dvi_text_is_read_by_its_own_bank(font_name):
    font, params = subset_font(font_name, "achns")
    layout = LayoutSpec(**DEFAULTS["layout"])
    rendered = rasterize_text("achns\nsnach", font, params, layout)
    cfg = ChannelConfig(standard="dvi", bw_frac=0.5)
    bank = build_templates(font, params, layout.scale_s, cfg, font_name)
    report = evaluate_image(emanate(rendered.bitmap, cfg), rendered.cells, bank,
                            recognizer_threshold(DEFAULTS, "dvi"))
    assert report.aggregate.n == report.aggregate.u == 10


def test_more_noise_never_lowers_mean_cer(sym, corpus):
    glyphs, params = sym
    rendered = rasterize_text(corpus, glyphs, params, LayoutSpec(scale_s=1))
    bank = build_templates(glyphs, params, 1, ChannelConfig(bw_frac=0.5))

    def mean_cer(snr):
        total = Fraction(0)
        for seed in range(20):
            image = emanate(rendered.bitmap, ChannelConfig(snr_db=snr, bw_frac=0.5, seed=seed))
            total += evaluate_image(image, rendered.cells, bank).aggregate_cer
        return total / 20

    assert mean_cer(5.0) >= mean_cer(25.0)


@pytest.mark.parametrize("standard", ["vga", "dvi"])
def test_safe_fonts_are_harder_to_read_than_stand_ins(standard, corpus):
    layout = LayoutSpec(**DEFAULTS["layout"])
    threshold = recognizer_threshold(DEFAULTS, standard)
    cer = {}
    for name in FONTS:
        font, params = load_named_font(name)
        rendered = rasterize_text(corpus, font, params, layout)
        bank = build_templates(font, params, layout.scale_s, ChannelConfig(standard=standard, bw_frac=0.5), name)
        cer[name] = []
        for seed in range(5):
            cfg = ChannelConfig(standard=standard, snr_db=10.0, bw_frac=0.5, seed=seed)
            image = emanate(rendered.bitmap, cfg)
            cer[name].append(evaluate_image(image, rendered.cells, bank, threshold).aggregate_cer)

    for safe in SAFE_FONTS:
        for stand_in in STAND_INS:
            wins = sum(s > b and s >= 2 * b for s, b in zip(cer[safe], cer[stand_in]))
            assert wins >= 4, (safe, stand_in, cer)


@pytest.mark.parametrize("standard", ["vga", "dvi"])
def test_full_screen_pipeline_is_fast(sym, corpus, standard):
    glyphs, params = sym
    # roughly 640x480 pixels at s=1: 19 lines of up to 53 characters
    lines = textwrap.wrap(" ".join([corpus.replace("\n", " ")] * 6), width=53)[:19]
    started = time.perf_counter()
    rendered = rasterize_text("\n".join(lines), glyphs, params, LayoutSpec(scale_s=1))
    cfg = ChannelConfig(standard=standard, snr_db=10.0, bw_frac=0.5, seed=1)
    image = emanate(rendered.bitmap, cfg)
    bank = build_templates(glyphs, params, 1, cfg)
    report = evaluate_image(image, rendered.cells, bank, recognizer_threshold(DEFAULTS, standard))
    data = build_report(report, RunManifest("evaluate", report.config))
    elapsed = time.perf_counter() - started
    assert rendered.bitmap.height >= 480 and rendered.bitmap.width >= 540
    assert data["aggregate"]["q"] == len(rendered.cells)
    assert elapsed < 5.0


# --- similarity -----------------------------------------------------------------

def test_similarity_matrix_shape(sym_bank_s1):
    matrix = similarity_matrix(sym_bank_s1)
    size = len(matrix.codepoints)
    assert matrix.scores.shape == (size, size)
    np.testing.assert_array_equal(matrix.scores, matrix.scores.T)
    assert (np.diag(matrix.scores) == 1.0).all()
    assert matrix.to_dict()["codepoints"] == sym_bank_s1.codepoints()


def test_n_has_close_neighbours(sym_bank_s1):
    matrix = similarity_matrix(sym_bank_s1)
    i = matrix.codepoints.index("n")
    neighbours = [c for j, c in enumerate(matrix.codepoints) if j != i and matrix.scores[i, j] > 0.9]
    assert len(neighbours) >= 2


# (confusable pair fraction, mean off-diagonal NCC), noiseless VGA at s=1
CONFUSABILITY = {
    "symmetrical": (0.1587, 0.5988),
    "asymmetrical": (0.1619, 0.6117),
    "sans-like": (0.0095, 0.1732),
    "serif-like": (0.0079, 0.1884),
}


def test_confusability_fixtures(vga_quiet):
    measured = {}
    for name in FONTS:
        font, params = load_named_font(name)
        matrix = similarity_matrix(build_templates(font, params, 1, vga_quiet, name))
        measured[name] = (confusable_fraction(matrix), matrix.mean_off_diagonal())

    for name, (fraction, mean) in CONFUSABILITY.items():
        assert measured[name][0] == pytest.approx(fraction, abs=1e-4)
        assert measured[name][1] == pytest.approx(mean, abs=1e-4)
    for safe in SAFE_FONTS:
        for stand_in in STAND_INS:
            assert measured[safe][0] > measured[stand_in][0]
            assert measured[safe][1] > measured[stand_in][1]


def test_blank_glyph_is_dropped(vga_quiet):
    atlas = RasterAtlas("bars", 9, 18, {
        "v": RasterGlyph("v", test_pattern("vbar", 9, 18).samples.copy()),
        "_": RasterGlyph("_", np.full((18, 9), 255, dtype=np.uint8)),
    })
    bank = build_templates(atlas, None, 1, vga_quiet)
    assert bank.font_id == "bars"
    assert bank.codepoints() == ["v"]
    assert confusable_fraction(similarity_matrix(bank)) == 0.0
