#!/usr/bin/env python3
"""Glyph atlas (YAML) and raster atlas (binary) files."""

import string

import numpy as np
import pytest
import yaml

from atlas import (
    AtlasParseError,
    AtlasValidationError,
    RasterAtlas,
    RasterGlyph,
    export_atlas,
    import_atlas,
    read_raster_atlas,
    write_raster_atlas,
)
from comparison_fonts import comparison_atlas
from glyph_model import (
    GlyphDef,
    Orientation,
    Stroke,
    middle_row,
    params_for,
    symmetrical_params,
    validate_glyphset,
)


@pytest.fixture
def sym_atlas(tmp_path, sym):
    path = tmp_path / "sym.yaml"
    export_atlas(*sym, path)
    return path


def rewrite(path, mutate):
    data = yaml.safe_load(path.read_text())
    mutate(data)
    path.write_text(yaml.safe_dump(data, sort_keys=False))
    return path


@pytest.mark.parametrize("family", ["sym", "asym"])
def test_export_then_import(tmp_path, request, family):
    glyphs, params = request.getfixturevalue(family)
    path = tmp_path / "font.yaml"
    export_atlas(glyphs, params, path)
    loaded, loaded_params = import_atlas(path)
    assert loaded == glyphs
    assert loaded_params == params


def test_atlas_lists_strokes_in_p_units(sym_atlas):
    data = yaml.safe_load(sym_atlas.read_text())
    assert data["format_version"] == 1
    assert data["family"] == "symmetrical"
    l_glyph = next(g for g in data["glyphs"] if g["codepoint"] == "l")
    assert l_glyph["strokes"] == [{"orientation": "vertical", "x": 3, "y": 0, "length": 18, "width": 3}]


def test_unknown_orientation_names_the_key(sym_atlas):
    def mutate(data):
        data["glyphs"][1]["strokes"][0]["orientation"] = "diagonal"

    with pytest.raises(AtlasParseError) as err:
        import_atlas(rewrite(sym_atlas, mutate))
    assert err.value.key == "glyphs[1].strokes[0].orientation"


def test_missing_key(sym_atlas):
    with pytest.raises(AtlasParseError) as err:
        import_atlas(rewrite(sym_atlas, lambda d: d["glyphs"][2].pop("advance")))
    assert err.value.key == "glyphs[2].advance"


def test_bool_is_not_an_integer(sym_atlas):
    def mutate(data):
        data["glyphs"][1]["strokes"][0]["width"] = True

    with pytest.raises(AtlasParseError) as err:
        import_atlas(rewrite(sym_atlas, mutate))
    assert err.value.key == "glyphs[1].strokes[0].width"


def test_unknown_key_rejected(sym_atlas):
    with pytest.raises(AtlasParseError) as err:
        import_atlas(rewrite(sym_atlas, lambda d: d["glyphs"][0].update(kerning=2)))
    assert err.value.key == "glyphs[0].kerning"


def test_params_echo_must_match(sym_atlas):
    with pytest.raises(AtlasParseError) as err:
        import_atlas(rewrite(sym_atlas, lambda d: d["params"].update(k=2)))
    assert err.value.key == "params"


def test_duplicate_codepoint(sym_atlas):
    with pytest.raises(AtlasParseError):
        import_atlas(rewrite(sym_atlas, lambda d: d["glyphs"].append(dict(d["glyphs"][0]))))


def test_unsupported_version(sym_atlas):
    with pytest.raises(AtlasParseError) as err:
        import_atlas(rewrite(sym_atlas, lambda d: d.update(format_version=2)))
    assert err.value.key == "format_version"


def test_rule_breaking_glyph_is_reported(sym_atlas):
    def mutate(data):
        glyph = next(g for g in data["glyphs"] if g["codepoint"] == "n")
        glyph["strokes"][1]["x"] = 4

    with pytest.raises(AtlasValidationError) as err:
        import_atlas(rewrite(sym_atlas, mutate))
    assert err.value.failures == {"n": ["R5"]}


def test_export_refuses_invalid_glyphs(tmp_path, sym):
    glyphs, params = sym
    bad = dict(glyphs)
    bad["l"] = GlyphDef("l", (Stroke(Orientation.VERTICAL, 3, 0, 18, 2),), 9, has_ascender=True)
    with pytest.raises(AtlasValidationError):
        export_atlas(bad, params, tmp_path / "bad.yaml")


def test_family_none_skips_rules(tmp_path):
    glyphs = {"x": GlyphDef("x", (Stroke(Orientation.HORIZONTAL, 0, 3, 7, 4),), 8)}
    path = tmp_path / "free.yaml"
    export_atlas(glyphs, None, path)
    loaded, params = import_atlas(path)
    assert params is None
    assert loaded == glyphs


def test_not_yaml(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("glyphs: [unclosed\n")
    with pytest.raises(AtlasParseError):
        import_atlas(path)


def test_raster_atlas_file(tmp_path):
    atlas = comparison_atlas("serif-like")
    path = tmp_path / "serif.ratlas"
    write_raster_atlas(atlas, path)
    assert path.read_bytes().startswith(b"RATLAS 1\nname serif-like\ncell 10 18\n")
    assert read_raster_atlas(path) == atlas


def test_raster_atlas_truncated(tmp_path):
    atlas = RasterAtlas("tiny", 2, 2, {"a": RasterGlyph("a", np.zeros((2, 2), dtype=np.uint8))})
    path = tmp_path / "tiny.ratlas"
    write_raster_atlas(atlas, path)
    path.write_bytes(path.read_bytes()[:-1])
    with pytest.raises(AtlasParseError) as err:
        read_raster_atlas(path)
    assert err.value.key.startswith("byte ")


def test_raster_atlas_bad_magic(tmp_path):
    path = tmp_path / "x.ratlas"
    path.write_bytes(b"P5\n2 2\n255\n....")
    with pytest.raises(AtlasParseError) as err:
        read_raster_atlas(path)
    assert err.value.key == "byte 0"


def test_symmetrical_params_echo_written(sym_atlas):
    data = yaml.safe_load(sym_atlas.read_text())
    assert data["params"] == symmetrical_params().to_dict()


# --- round trip over generated glyph sets -------------------------------------

def random_safe_glyph(rng, codepoint, params):
    """A rule-abiding lowercase glyph: a full stem, maybe a right stem, bars on allowed rows."""
    ascender = bool(rng.integers(0, 2))
    top, bottom = params.h2 - params.h1, params.h2
    width = params.w_std
    stem_x = int(rng.integers(0, 2))
    stem_y = 0 if ascender else top
    strokes = [Stroke(Orientation.VERTICAL, stem_x, stem_y, bottom - stem_y, params.d1)]

    right_x = stem_x + params.d1 + params.v_clear
    if right_x + params.d2 <= width and rng.integers(0, 2):
        x = int(rng.integers(right_x, width - params.d2 + 1))
        y = int(rng.integers(top, bottom))
        strokes.append(Stroke(Orientation.VERTICAL, x, y, int(rng.integers(1, bottom - y + 1)), params.d2))

    rows = [top, bottom - params.k, middle_row(top, bottom, params.k)] + ([0] if ascender else [])
    for _ in range(int(rng.integers(0, 3))):
        x = int(rng.integers(0, width))
        y = int(rng.choice(rows))
        strokes.append(Stroke(Orientation.HORIZONTAL, x, y, int(rng.integers(1, width - x + 1)), params.k))

    order = rng.permutation(len(strokes))
    return GlyphDef(codepoint, tuple(strokes[i] for i in order), width, has_ascender=ascender)


def random_free_glyph(rng, codepoint):
    advance = int(rng.integers(1, 16))
    strokes = []
    for _ in range(int(rng.integers(1, 5))):
        x = int(rng.integers(0, advance))
        y = int(rng.integers(0, 18))
        across = int(rng.integers(1, advance - x + 1))
        down = int(rng.integers(1, 19 - y))
        if rng.integers(0, 2):
            strokes.append(Stroke(Orientation.VERTICAL, x, y, down, across))
        else:
            strokes.append(Stroke(Orientation.HORIZONTAL, x, y, across, down))
    return GlyphDef(codepoint, tuple(strokes), advance)


def random_glyph_set(rng, params):
    if params is None:
        pool = list(string.ascii_letters + string.digits + string.punctuation)
        chosen = rng.choice(pool, int(rng.integers(1, 12)), replace=False)
        glyphs = {str(c): random_free_glyph(rng, str(c)) for c in chosen}
    else:
        pool = [c for c in string.ascii_lowercase if c != "m"]
        chosen = rng.choice(pool, int(rng.integers(1, 12)), replace=False)
        glyphs = {str(c): random_safe_glyph(rng, str(c), params) for c in chosen}
    if rng.integers(0, 2):
        glyphs[" "] = GlyphDef(" ", (), params.w_std if params else int(rng.integers(1, 16)))
    return glyphs


@pytest.mark.parametrize("family", ["symmetrical", "asymmetrical", "none"])
def test_generated_glyph_sets_round_trip(tmp_path, family):
    params = params_for(family)
    rng = np.random.default_rng([7, len(family)])
    for trial in range(30):
        glyphs = random_glyph_set(rng, params)
        assert validate_glyphset(glyphs, params) == {}
        path = tmp_path / f"{family}_{trial}.yaml"
        export_atlas(glyphs, params, path)
        loaded, loaded_params = import_atlas(path)
        assert loaded == glyphs
        assert loaded_params == params
