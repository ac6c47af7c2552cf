"""Shared fixtures; the repo root holds flat modules, so put it on sys.path."""

import math
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))

from channel import ChannelConfig  # noqa: E402
from glyph_model import asymmetrical_params, builtin_glyphset, symmetrical_params  # noqa: E402
from recognition import build_templates  # noqa: E402


@pytest.fixture(scope="session")
def repo_root() -> Path:
    return ROOT


@pytest.fixture(scope="session")
def sym():
    return builtin_glyphset("symmetrical"), symmetrical_params()


@pytest.fixture(scope="session")
def asym():
    return builtin_glyphset("asymmetrical"), asymmetrical_params()


@pytest.fixture(scope="session")
def vga_quiet() -> ChannelConfig:
    return ChannelConfig(standard="vga", snr_db=math.inf, bw_frac=1.0, seed=0)


@pytest.fixture(scope="session")
def sym_bank_s1(sym, vga_quiet):
    glyphs, params = sym
    return build_templates(glyphs, params, 1, vga_quiet)


@pytest.fixture(scope="session")
def corpus() -> str:
    return (ROOT / "corpus" / "pangrams.txt").read_text().rstrip("\n")
