#!/usr/bin/env python3
"""Glyph model: family constants, proportion rules and the builtin repertoire."""

import string

import pytest

from glyph_model import (
    Family,
    GlyphDef,
    MalformedGlyphError,
    Orientation,
    Stroke,
    asymmetrical_params,
    band_rows,
    builtin_glyphset,
    check_cell,
    glyph_cell_bounds,
    middle_row,
    params_for,
    symmetrical_params,
    validate_glyph,
    validate_glyphset,
)


def V(x, y, length, width):
    return Stroke(Orientation.VERTICAL, x, y, length, width)


def H(x, y, length, width=1):
    return Stroke(Orientation.HORIZONTAL, x, y, length, width)


REPERTOIRE = set(string.ascii_lowercase) | set(string.digits) | {" "}


@pytest.mark.parametrize("family", ["symmetrical", "asymmetrical"])
def test_builtin_sets_pass_every_rule(family):
    glyphs = builtin_glyphset(family)
    assert set(glyphs) == REPERTOIRE
    assert validate_glyphset(glyphs, params_for(family)) == {}


def test_family_constants():
    s = symmetrical_params()
    assert (s.h1, s.h2, s.w_std, s.w_wide, s.k, s.w_asc) == (13, 18, 9, 15, 1, 5)
    assert s.d1 == s.d2 == 3 and s.v_clear == 3

    a = asymmetrical_params()
    assert (a.h1, a.h2, a.w_std, a.w_wide, a.k, a.w_asc) == (13, 18, 10, 15, 1, 5)
    assert (a.d1, a.d2, a.v_clear) == (5, 1, 1)


def test_m_is_wide_in_both_families(sym, asym):
    assert sym[0]["m"].advance == 15
    assert asym[0]["m"].advance == 15
    assert asym[0]["n"].advance == 10


def test_params_for():
    assert params_for("Symmetrical").family is Family.SYMMETRICAL
    assert params_for(Family.ASYMMETRICAL).family is Family.ASYMMETRICAL
    assert params_for("none") is None
    assert params_for(None) is None
    with pytest.raises(ValueError):
        params_for("gothic")


def test_builtin_glyphset_rejects_none():
    with pytest.raises(ValueError):
        builtin_glyphset("none")


def test_builtin_glyphset_returns_a_copy():
    first = builtin_glyphset("symmetrical")
    first.pop("a")
    assert "a" in builtin_glyphset("symmetrical")


@pytest.mark.parametrize("top,bottom,expected", [(5, 18, 11), (0, 13, 6), (0, 18, 8)])
def test_middle_row(top, bottom, expected):
    assert middle_row(top, bottom) == expected


def test_band_rows(sym):
    glyphs, params = sym
    assert band_rows(glyphs["n"], params) == (5, 18)
    assert band_rows(glyphs["h"], params) == (5, 18)
    assert band_rows(glyphs["p"], params) == (0, 13)
    assert band_rows(glyphs["7"], params) == (0, 18)


def test_cell_bounds(sym):
    glyphs, params = sym
    assert glyph_cell_bounds(glyphs["m"], params) == (15, 18)
    assert glyph_cell_bounds(glyphs["a"], None) == (9, 18)


def rules(glyph, params):
    return validate_glyph(glyph, params).rule_ids()


def test_r1_vertical_width():
    g = GlyphDef("l", (V(3, 0, 18, 2),), 9, has_ascender=True)
    assert "R1" in rules(g, symmetrical_params())


def test_r2_horizontal_width():
    g = GlyphDef("r", (V(0, 5, 13, 3), H(0, 5, 9, 2)), 9)
    assert "R2" in rules(g, symmetrical_params())


def test_r3_height():
    g = GlyphDef("l", (V(3, 5, 13, 3),), 9, has_ascender=True)
    assert rules(g, symmetrical_params()) == ["R3"]


def test_r4_advance():
    g = GlyphDef("n", (V(0, 5, 13, 3), V(6, 5, 13, 3), H(0, 5, 9)), 10)
    assert rules(g, symmetrical_params()) == ["R4"]


def test_r5_clearance():
    g = GlyphDef("n", (V(0, 5, 13, 3), V(4, 5, 13, 3), H(0, 5, 9)), 9)
    assert rules(g, symmetrical_params()) == ["R5"]


def test_r5_ignores_strokes_without_shared_rows():
    # "i": dot and stem are stacked, not side by side
    g = GlyphDef("i", (V(3, 0, 3, 3), V(3, 5, 13, 3)), 9, has_ascender=True)
    assert validate_glyph(g, symmetrical_params()).ok


def test_r6_asymmetrical_right_element_must_be_thin():
    g = GlyphDef("n", (V(0, 5, 13, 5), V(6, 5, 13, 5), H(0, 5, 10)), 10)
    assert rules(g, asymmetrical_params()) == ["R6"]


def test_r6_asymmetrical_left_stem_must_be_wide():
    g = GlyphDef("l", (V(0, 0, 18, 1),), 10, has_ascender=True)
    assert "R6" in rules(g, asymmetrical_params())


def test_r7_interior_horizontal_off_the_middle_row():
    g = GlyphDef("e", (V(0, 5, 13, 3), H(0, 5, 9), V(6, 5, 7, 3), H(0, 9, 9), H(0, 17, 9)), 9)
    report = validate_glyph(g, symmetrical_params())
    assert report.rule_ids() == ["R7"]
    assert report.violations[0].stroke_index == 3


def test_every_violation_is_listed():
    g = GlyphDef("n", (V(0, 5, 13, 2), V(4, 5, 13, 3), H(0, 9, 9, 2)), 11)
    assert rules(g, symmetrical_params()) == ["R1", "R2", "R4", "R5", "R7"]


def test_family_none_is_exempt():
    g = GlyphDef("n", (V(0, 0, 7, 2), H(0, 3, 4, 4)), 7)
    assert validate_glyph(g, None).ok


def test_capital_validated_by_envelope():
    g = GlyphDef("H", (V(0, 0, 18, 3), V(6, 0, 18, 3), H(0, 8, 9)), 9)
    assert validate_glyph(g, symmetrical_params()).ok
    wide = GlyphDef("M", (V(0, 0, 18, 3), V(6, 0, 18, 3), V(12, 0, 18, 3), H(0, 0, 15)), 15)
    assert validate_glyph(wide, symmetrical_params()).ok


@pytest.mark.parametrize("kwargs", [
    dict(x=-1, y=0, length=3, width=3),
    dict(x=0, y=0, length=0, width=3),
    dict(x=0, y=0, length=3, width=1.5),
])
def test_malformed_strokes(kwargs):
    with pytest.raises(MalformedGlyphError):
        Stroke(Orientation.VERTICAL, **kwargs)


def test_unknown_orientation():
    with pytest.raises(MalformedGlyphError):
        Stroke("diagonal", 0, 0, 3, 3)


def test_stroke_outside_cell():
    g = GlyphDef("n", (V(7, 5, 13, 3),), 9)
    with pytest.raises(MalformedGlyphError):
        check_cell(g, symmetrical_params())
    with pytest.raises(MalformedGlyphError):
        validate_glyph(g, symmetrical_params())


def test_visible_glyph_needs_strokes():
    with pytest.raises(MalformedGlyphError):
        GlyphDef("a", (), 9)
    assert GlyphDef(" ", (), 9).is_space
