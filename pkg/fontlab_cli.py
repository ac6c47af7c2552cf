#!/usr/bin/env python3
"""
Fontlab command line.

Subcommands wire the pipeline end to end:

    synth     write a builtin glyph atlas (or a stand-in raster atlas)
    render    text -> screen PGM + ground-truth sidecar
    emanate   screen PGM -> emission PGM through a channel model
    evaluate  emission PGM + ground truth -> CER report JSON
    report    merge CER reports into one comparison table
    pipeline  fonts x standards x seeds over a corpus, merged report
    replay    re-run the manifest embedded in a report and compare bytes

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from atlas import export_atlas, import_atlas, read_raster_atlas, write_raster_atlas
from channel import ChannelConfig, emanate, printer_stream_energies
from comparison_fonts import NAMES as COMPARISON_NAMES, comparison_atlas
from glyph_model import Family, GridParams, builtin_glyphset, params_for, validate_glyphset
from pgm_io import read_pgm, write_pgm
from raster import Font, LayoutSpec, rasterize_text, read_ground_truth, write_ground_truth
from recognition import build_templates, evaluate_image, similarity_matrix
from reports import (
    RunManifest,
    build_report,
    dumps_report,
    load_report,
    merge_reports,
    summarize_by_font,
    write_report,
)
from settings import (
    DEFAULT_SETTINGS_FILE,
    __version__,
    load_settings,
    parse_snr,
    recognizer_threshold,
    resolve_data_path,
    resolve_seed,
)

logger = logging.getLogger(__name__)

SAFE_FAMILIES = tuple(f.value for f in Family)
FONT_CHOICES = SAFE_FAMILIES + COMPARISON_NAMES


class ReplayMismatch(RuntimeError):
    """Re-running a manifest produced different bytes."""


# --- shared helpers ---------------------------------------------------------

def load_font(family: Optional[str], atlas_path: Optional[str]) -> Tuple[Font, Optional[GridParams], str]:
    """Resolve --family / --atlas into (font, params, font id)."""
    if atlas_path:
        path = Path(atlas_path)
        if path.suffix in (".yaml", ".yml"):
            glyphs, params = import_atlas(path)
            return glyphs, params, params.family.value if params else path.stem
        atlas = read_raster_atlas(path)
        return atlas, None, atlas.name
    family = family or Family.SYMMETRICAL.value
    if family in COMPARISON_NAMES:
        return comparison_atlas(family), None, family
    params = params_for(family)
    return builtin_glyphset(family), params, params.family.value


def font_config(family: Optional[str], atlas_path: Optional[str]) -> Dict[str, Optional[str]]:
    return {"family": None if atlas_path else (family or Family.SYMMETRICAL.value), "atlas": atlas_path}


def channel_from_args(args, settings: Dict[str, Any]) -> ChannelConfig:
    defaults = settings["channel"]
    return ChannelConfig(
        standard=args.standard or defaults["standard"],
        snr_db=parse_snr(args.snr_db) if args.snr_db is not None else defaults["snr_db"],
        bw_frac=args.bw_frac if args.bw_frac is not None else defaults["bw_frac"],
        seed=resolve_seed(args.seed, settings),
        printer_diodes=args.printer_diodes if args.printer_diodes is not None else defaults["printer_diodes"],
    )


def layout_from_args(args, settings: Dict[str, Any]) -> LayoutSpec:
    defaults = settings["layout"]
    values = {}
    for name in ("scale_s", "tracking", "leading", "margin"):
        flag = getattr(args, name, None)
        values[name] = flag if flag is not None else defaults[name]
    return LayoutSpec(**values)


def read_text(text: Optional[str], corpus: Optional[str]) -> str:
    if text is None and corpus is None:
        raise ValueError("give --text or --corpus")
    content = text if text is not None else resolve_data_path(corpus).read_text().rstrip("\n")
    if not content.strip():
        raise ValueError("text to render is empty")
    return content


# --- synth ------------------------------------------------------------------

def cmd_synth(args, settings) -> int:
    if args.family in COMPARISON_NAMES:
        atlas = comparison_atlas(args.family)
        write_raster_atlas(atlas, args.out)
        print(f"✅ Wrote {args.family} raster atlas ({len(atlas.glyphs)} glyphs) to {args.out}")
        return 0

    params = params_for(args.family)
    glyphs = builtin_glyphset(args.family)
    failing = validate_glyphset(glyphs, params)
    print(f"🔍 Validated {len(glyphs)} {args.family} glyphs against R1-R7: {len(failing)} violations")
    for codepoint, report in failing.items():
        print(f"   ❌ {codepoint!r}: {', '.join(report.rule_ids())}")
    export_atlas(glyphs, params, args.out)
    print(f"✅ Wrote glyph atlas to {args.out}")
    return 0


# --- render -----------------------------------------------------------------

def cmd_render(args, settings) -> int:
    text = read_text(args.text, args.corpus)
    font, params, font_id = load_font(args.family, args.atlas)
    layout = layout_from_args(args, settings)
    rendered = rasterize_text(text, font, params, layout, missing=args.missing or settings["missing_glyph_policy"])
    write_pgm(args.out, rendered.bitmap)
    gt_path = args.gt or str(Path(args.out).with_suffix(".gt.tsv"))
    write_ground_truth(rendered.cells, gt_path)
    print(f"🖋️  Rendered {len(rendered.cells)} glyphs of {font_id} at s={layout.scale_s} "
          f"({rendered.bitmap.width}x{rendered.bitmap.height}) -> {args.out}, {gt_path}")
    return 0


# --- emanate ----------------------------------------------------------------

def cmd_emanate(args, settings) -> int:
    screen = read_pgm(args.input, args.polarity)
    cfg = channel_from_args(args, settings)
    emission = emanate(screen, cfg, workers=args.workers)
    write_pgm(args.out, emission)
    manifest = RunManifest("emanate", {"input": args.input, "polarity": args.polarity,
                                       "channel": cfg.to_dict()}, {"emission": args.out})
    print(f"📡 {cfg.standard.value} emission ({emission.width}x{emission.height}) -> {args.out}")
    if cfg.standard.value == "printer":
        print(f"   Diode stream energies: {printer_stream_energies(screen, cfg)}")
    print(json.dumps(manifest.to_dict(), sort_keys=True))
    return 0


# --- evaluate ---------------------------------------------------------------

def run_evaluate(config: Dict[str, Any], outputs: Dict[str, str], workers: int = 1) -> Dict[str, Any]:
    """Evaluate one emission image; the config dict is exactly what the manifest stores."""
    font, params, font_id = load_font(config["font"]["family"], config["font"]["atlas"])
    cfg = ChannelConfig.from_dict(config["channel"])
    image = read_pgm(config["emission"], "emission")
    ground_truth = read_ground_truth(config["ground_truth"])
    bank = build_templates(font, params, config["scale_s"], cfg, font_id)
    report = evaluate_image(image, ground_truth, bank, config["threshold"], config["targets"],
                            config["nms_window"], workers)
    similarity = similarity_matrix(bank) if config.get("similarity") else None
    return build_report(report, RunManifest("evaluate", config, outputs), similarity)


def cmd_evaluate(args, settings) -> int:
    recognizer = settings["recognizer"]
    cfg = channel_from_args(args, settings)
    config = {
        "emission": args.emission,
        "ground_truth": args.gt,
        "font": font_config(args.family, args.atlas),
        "scale_s": args.scale_s if args.scale_s is not None else settings["layout"]["scale_s"],
        "channel": cfg.to_dict(),
        "threshold": args.threshold if args.threshold is not None
        else recognizer_threshold(settings, cfg.standard.value),
        "targets": args.targets if args.targets is not None else recognizer["targets"],
        "nms_window": args.nms_window if args.nms_window is not None else recognizer["nms_window"],
        "similarity": bool(args.similarity),
    }
    data = run_evaluate(config, {"report": args.out}, workers=args.workers)
    write_report(data, args.out)
    print(f"📊 Aggregate CER {data['aggregate_cer']:.4f} over targets {config['targets']!r} -> {args.out}")
    return 0


# --- report -----------------------------------------------------------------

def cmd_report(args, settings) -> int:
    reports = [load_report(path) for path in args.inputs]
    manifest = RunManifest("report", {"inputs": list(args.inputs)}, {"report": args.out})
    merged = merge_reports(reports, manifest)
    write_report(merged, args.out)
    print(f"📋 Merged {len(reports)} reports into {args.out}")
    _print_table(merged)
    return 0


def _print_table(merged: Dict[str, Any]) -> None:
    print("   " + " | ".join(["char"] + merged["columns"]))
    for row in merged["rows"]:
        cells = ["-" if v is None else f"{v:.4f}" for v in row["values"]]
        print("   " + " | ".join([row["char"]] + cells))
    print("   " + " | ".join(["all"] + [f"{v:.4f}" for v in merged["aggregate"]]))


# --- pipeline ---------------------------------------------------------------

def run_single(config: Dict[str, Any], banks: Optional[Dict] = None, workers: int = 1) -> Dict[str, Any]:
    """Render the corpus in one font, emanate it and evaluate; all in memory."""
    font, params, font_id = load_font(config["font"], None)
    layout = LayoutSpec(**config["layout"])
    cfg = ChannelConfig.from_dict(config["channel"])
    text = read_text(None, config["corpus"])
    rendered = rasterize_text(text, font, params, layout)
    emission = emanate(rendered.bitmap, cfg, workers)

    key = (font_id, cfg.standard, layout.scale_s, cfg.bw_frac, cfg.printer_diodes)
    cache = banks if banks is not None else {}
    if key not in cache:
        bank = build_templates(font, params, layout.scale_s, cfg, font_id)
        cache[key] = (bank, similarity_matrix(bank))
    bank, similarity = cache[key]
    bank = dataclasses.replace(bank, channel=cfg)

    report = evaluate_image(emission, rendered.cells, bank, config["threshold"], config["targets"],
                            config["nms_window"], workers)
    return build_report(report, RunManifest("pipeline-run", config), similarity)


def _split(value: str) -> List[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def run_pipeline(config: Dict[str, Any], workers: int = 1) -> Tuple[List[Dict[str, Any]], Dict[str, Any]]:
    banks: Dict = {}
    reports = []
    for standard in config["standards"]:
        for font in config["fonts"]:
            for seed in config["seeds"]:
                channel = ChannelConfig(standard=standard, snr_db=parse_snr(config["snr_db"]),
                                        bw_frac=config["bw_frac"], seed=seed,
                                        printer_diodes=config["printer_diodes"])
                single = {
                    "corpus": config["corpus"],
                    "font": font,
                    "layout": config["layout"],
                    "channel": channel.to_dict(),
                    "threshold": config["thresholds"][standard],
                    "targets": config["targets"],
                    "nms_window": config["nms_window"],
                }
                data = run_single(single, banks, workers)
                logger.info(f"{font}/{standard}/seed={seed}: CER {data['aggregate_cer']}")
                reports.append(data)
    merged = merge_reports(reports, RunManifest("pipeline", config, {"report": config["out"]}))
    merged["summary"] = summarize_by_font(reports)
    return reports, merged


def cmd_pipeline(args, settings) -> int:
    recognizer = settings["recognizer"]
    layout = layout_from_args(args, settings)
    out_dir = Path(args.out_dir)
    snr = parse_snr(args.snr_db if args.snr_db is not None else "10")
    standards = _split(args.standards)
    config = {
        "corpus": args.corpus or settings["corpus"],
        "fonts": _split(args.fonts),
        "standards": standards,
        "seeds": [int(s) for s in _split(args.seeds)],
        "layout": layout.to_dict(),
        "snr_db": "inf" if snr == float("inf") else snr,
        "bw_frac": args.bw_frac if args.bw_frac is not None else 0.5,
        "printer_diodes": args.printer_diodes if args.printer_diodes is not None
        else settings["channel"]["printer_diodes"],
        "thresholds": {
            standard: args.threshold if args.threshold is not None
            else recognizer_threshold(settings, standard)
            for standard in standards
        },
        "targets": args.targets if args.targets is not None else recognizer["targets"],
        "nms_window": recognizer["nms_window"],
        "out": str(out_dir / "comparison.json"),
    }
    for font in config["fonts"]:
        if font not in FONT_CHOICES:
            raise ValueError(f"unknown font {font!r}; choose from {', '.join(FONT_CHOICES)}")

    print(f"🚀 Pipeline: {len(config['fonts'])} fonts x {len(config['standards'])} standards "
          f"x {len(config['seeds'])} seeds on {config['corpus']}")
    out_dir.mkdir(parents=True, exist_ok=True)
    reports, merged = run_pipeline(config, workers=args.workers)
    for data in reports:
        run = data["manifest"]["config"]
        name = f"{run['font']}_{run['channel']['standard']}_seed{run['channel']['seed']}.json"
        write_report(data, out_dir / name)
    write_report(merged, config["out"])

    print("\n📈 Mean aggregate CER by standard:")
    for standard, fonts in merged["summary"].items():
        line = ", ".join(f"{font}={value:.4f}" for font, value in fonts.items())
        print(f"   • {standard}: {line}")
    print(f"\n✅ Wrote {len(reports)} run reports and {config['out']}")
    return 0


# --- replay -----------------------------------------------------------------

def replay_bytes(data: Dict[str, Any]) -> str:
    """Re-execute the manifest of a report and return the regenerated JSON."""
    manifest = RunManifest.from_dict(data.get("manifest", {}))
    if manifest.command == "evaluate":
        return dumps_report(run_evaluate(manifest.config, manifest.outputs))
    if manifest.command == "pipeline-run":
        return dumps_report(run_single(manifest.config))
    if manifest.command == "pipeline":
        return dumps_report(run_pipeline(manifest.config)[1])
    raise ValueError(f"cannot replay a {manifest.command!r} manifest")


def cmd_replay(args, settings) -> int:
    original = Path(args.report).read_text()
    data = json.loads(original)
    regenerated = replay_bytes(data)
    if regenerated != original:
        raise ReplayMismatch(f"{args.report}: replayed output differs from the recorded report")
    print(f"✅ {args.report} reproduced byte for byte")
    return 0


# --- argument parsing -------------------------------------------------------

def _add_font_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", choices=FONT_CHOICES, help="builtin safe family or stand-in font")
    p.add_argument("--atlas", help="glyph atlas (.yaml) or raster atlas file")


def _add_layout_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scale", dest="scale_s", type=int, help="pixels per p-unit")
    p.add_argument("--tracking", type=int, help="p-units between glyph cells")
    p.add_argument("--leading", type=int, help="p-units between lines")
    p.add_argument("--margin", type=int, help="p-units around the text block")


def _add_channel_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--standard", choices=("vga", "dvi", "printer"))
    p.add_argument("--snr-db", dest="snr_db", help="signal-to-noise in dB, or 'inf'")
    p.add_argument("--bw-frac", dest="bw_frac", type=float, help="receiver bandwidth as a fraction (0, 1]")
    p.add_argument("--seed", type=int, help="noise seed (falls back to TEMPEST_FONTLAB_SEED)")
    p.add_argument("--printer-diodes", dest="printer_diodes", type=int)
    p.add_argument("--workers", type=int, default=1, help="threads for row/template parallelism")


def _targets(value: str) -> str:
    if not value.strip():
        raise argparse.ArgumentTypeError("needs at least one character to look for")
    return value


def _add_recognizer_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threshold", type=float, help="NCC acceptance threshold")
    p.add_argument("--targets", type=_targets, help="looked-for characters, e.g. achns")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fontlab", description="Safe-font emanation lab")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", default=DEFAULT_SETTINGS_FILE, help="settings YAML")
    parser.add_argument("--verbose", "-v", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a builtin atlas")
    p.add_argument("--family", choices=FONT_CHOICES, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("render", help="render text to a screen PGM")
    p.add_argument("--text")
    p.add_argument("--corpus")
    _add_font_flags(p)
    _add_layout_flags(p)
    p.add_argument("--missing", choices=("fail", "tofu"))
    p.add_argument("--out", required=True)
    p.add_argument("--gt", help="ground-truth sidecar (default: <out>.gt.tsv)")
    p.set_defaults(handler=cmd_render)

    p = sub.add_parser("emanate", help="pass a screen through a channel model")
    p.add_argument("input")
    _add_channel_flags(p)
    p.add_argument("--polarity", default="dark-on-light", choices=("dark-on-light", "light-on-dark"))
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_emanate)

    p = sub.add_parser("evaluate", help="recognize an emission image and score CER")
    p.add_argument("emission")
    p.add_argument("--gt", required=True)
    _add_font_flags(p)
    p.add_argument("--scale", dest="scale_s", type=int)
    _add_channel_flags(p)
    _add_recognizer_flags(p)
    p.add_argument("--nms-window", dest="nms_window", type=int)
    p.add_argument("--similarity", action="store_true", help="include the template similarity matrix")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("report", help="merge CER reports")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_report)

    p = sub.add_parser("pipeline", help="fonts x standards x seeds over a corpus")
    p.add_argument("--corpus")
    p.add_argument("--fonts", default=",".join(FONT_CHOICES))
    p.add_argument("--standards", default="vga,dvi,printer")
    p.add_argument("--seeds", default="0,1,2,3,4")
    _add_layout_flags(p)
    _add_channel_flags(p)
    _add_recognizer_flags(p)
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.set_defaults(handler=cmd_pipeline)

    p = sub.add_parser("replay", help="re-run a report's manifest and compare")
    p.add_argument("report")
    p.set_defaults(handler=cmd_replay)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # usage errors exit 2
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        settings = load_settings(args.config)
        return args.handler(args, settings)
    except (ValueError, OSError, ReplayMismatch) as e:
        print(f"❌ {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
