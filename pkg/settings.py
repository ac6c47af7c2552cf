#!/usr/bin/env python3
"""
Fontlab Settings Loader - Provides the shipped defaults for layout, channel
and recognizer, optionally overridden by a YAML file and the environment.

Relative data paths (the settings file, the corpus) are looked up in the
working directory first and then next to this module, so the shipped
files are found from anywhere.
"""

import copy
import math
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from dotenv import load_dotenv

__version__ = "1.0.0"

SEED_ENV_VAR = "TEMPEST_FONTLAB_SEED"
PACKAGE_DIR = Path(__file__).resolve().parent
DEFAULT_SETTINGS_FILE = "fontlab_defaults.yaml"

DEFAULTS = {
    "layout": {
        "scale_s": 2,
        "tracking": 3,
        "leading": 2,
        "margin": 4,
    },
    "channel": {
        "standard": "vga",
        "snr_db": math.inf,
        "bw_frac": 1.0,
        "seed": 0,
        "printer_diodes": 2,
    },
    "recognizer": {
        "threshold": 0.8,
        # phase-averaged DVI templates never correlate as tightly as VGA ones
        "standard_thresholds": {"dvi": 0.5},
        "nms_window": None,  # None -> half the standard template width
        "targets": "achns",
    },
    "missing_glyph_policy": "fail",
    "corpus": "corpus/pangrams.txt",
}


def resolve_data_path(path: Union[str, Path]) -> Path:
    """Relative paths missing from the working directory fall back to the module folder."""
    candidate = Path(path)
    if candidate.is_absolute() or candidate.exists():
        return candidate
    shipped = PACKAGE_DIR / candidate
    return shipped if shipped.exists() else candidate


def parse_snr(value: Union[str, float, int, None]) -> float:
    """Accept numbers and the spellings 'inf' / '+inf' / 'infinity'."""
    if value is None:
        return math.inf
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).strip().lower()
    if text in ("inf", "+inf", "infinity", "+infinity"):
        return math.inf
    return float(text)


def load_settings(path: Union[str, Path] = DEFAULT_SETTINGS_FILE) -> Dict[str, Any]:
    """
    Load fontlab settings from a YAML file merged over DEFAULTS.

    Returns:
        Settings dictionary; DEFAULTS if the file does not exist
    """
    settings = copy.deepcopy(DEFAULTS)
    source = resolve_data_path(path)
    if not source.exists():
        # Missing file is fine - the shipped defaults cover everything
        return settings

    data = yaml.safe_load(source.read_text()) or {}
    for key, value in data.items():
        if isinstance(settings.get(key), dict) and isinstance(value, dict):
            settings[key] = {**settings[key], **value}
        else:
            settings[key] = value

    settings["channel"]["snr_db"] = parse_snr(settings["channel"].get("snr_db"))
    return settings


def recognizer_threshold(settings: Dict[str, Any], standard: str) -> float:
    """Default NCC threshold for a channel standard."""
    recognizer = settings["recognizer"]
    per_standard = recognizer.get("standard_thresholds") or {}
    return float(per_standard.get(standard, recognizer["threshold"]))


def resolve_seed(explicit: Optional[int], settings: Optional[Dict[str, Any]] = None) -> int:
    """
    Pick the RNG seed: explicit flag, then TEMPEST_FONTLAB_SEED (a .env file
    is honored), then the settings default.
    """
    if explicit is not None:
        return int(explicit)

    load_dotenv()
    env_value = os.getenv(SEED_ENV_VAR)
    if env_value:
        return int(env_value)

    settings = settings or DEFAULTS
    return int(settings["channel"].get("seed", 0))
