#!/usr/bin/env python3
"""
Demo script showing the full emanation pipeline on the shipped corpus.
Usage: python demo_full_pipeline.py [standard] [snr_db]
"""

import sys

from channel import ChannelConfig, emanate
from comparison_fonts import comparison_atlas
from glyph_model import builtin_glyphset, params_for
from raster import LayoutSpec, rasterize_text
from recognition import build_templates, confusable_fraction, evaluate_image, similarity_matrix
from settings import load_settings, parse_snr, recognizer_threshold, resolve_data_path

FONTS = ("symmetrical", "asymmetrical", "sans-like", "serif-like")


def load(font: str):
    if font in ("sans-like", "serif-like"):
        return comparison_atlas(font), None
    return builtin_glyphset(font), params_for(font)


def main():
    standard = sys.argv[1] if len(sys.argv) > 1 else "vga"
    snr_db = parse_snr(sys.argv[2]) if len(sys.argv) > 2 else 10.0
    settings = load_settings()
    text = resolve_data_path(settings["corpus"]).read_text().rstrip("\n")
    layout = LayoutSpec(**settings["layout"])

    print(f"🔍 Emanation Pipeline Demo: {standard}, snr={snr_db} dB, bw_frac=0.5")
    print("=" * 60)

    try:
        results = {}
        for font_name in FONTS:
            font, params = load(font_name)
            cfg = ChannelConfig(standard=standard, snr_db=snr_db, bw_frac=0.5, seed=0)

            rendered = rasterize_text(text, font, params, layout)
            emission = emanate(rendered.bitmap, cfg)
            bank = build_templates(font, params, layout.scale_s, cfg, font_name)
            report = evaluate_image(emission, rendered.cells, bank, recognizer_threshold(settings, standard))
            matrix = similarity_matrix(bank)
            results[font_name] = report

            print(f"\n📡 {font_name}: {len(rendered.cells)} glyphs, "
                  f"{rendered.bitmap.width}x{rendered.bitmap.height} px")
            print(f"   • Aggregate CER: {float(report.aggregate_cer):.4f}")
            print(f"   • Confusable template pairs: {confusable_fraction(matrix):.1%}")
            for char, inputs in report.per_char.items():
                print(f"     {char}: u={inputs.u} n={inputs.n} m={inputs.m} k={inputs.k} "
                      f"CER={float(inputs.cer):.4f}")

        print()
        print("💡 KEY INSIGHT:")
        safe = min(float(results[f].aggregate_cer) for f in FONTS[:2])
        baseline = max(float(results[f].aggregate_cer) for f in FONTS[2:])
        verdict = "harder" if safe > baseline else "NOT harder"
        print(f"   Safe fonts are {verdict} to read through the channel "
              f"(lowest safe CER {safe:.4f} vs highest stand-in CER {baseline:.4f})")

    except (ValueError, OSError) as e:
        print(f"❌ Error: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
