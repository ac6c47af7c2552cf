#!/usr/bin/env python3
"""
Fontlab MCP Server

Exposes the emanation lab as MCP tools over stdio so an assistant or the
MCP Inspector can synthesize atlases, render text, run channel models and
score recognition without shelling out to the CLI.
"""

import asyncio
import json
import logging
import sys
from typing import Any, Callable, Dict, List

from mcp.server import Server
from mcp.server.stdio import stdio_server
from mcp.types import Tool

from atlas import export_atlas, write_raster_atlas
from channel import ChannelConfig, emanate
from comparison_fonts import NAMES as COMPARISON_NAMES, comparison_atlas
from fontlab_cli import FONT_CHOICES, font_config, load_font, run_evaluate
from glyph_model import builtin_glyphset, params_for, validate_glyphset
from pgm_io import read_pgm, write_pgm
from raster import LayoutSpec, rasterize_text, write_ground_truth
from recognition import build_templates, confusable_fraction, similarity_matrix
from reports import write_report
from settings import DEFAULTS, parse_snr, recognizer_threshold

logger = logging.getLogger(__name__)

CHANNEL_PROPERTIES = {
    "standard": {"type": "string", "enum": ["vga", "dvi", "printer"], "default": "vga"},
    "snr_db": {"type": ["number", "string"], "description": "dB, or 'inf' for noiseless", "default": "inf"},
    "bw_frac": {"type": "number", "default": 1.0},
    "seed": {"type": "integer", "default": 0},
    "printer_diodes": {"type": "integer", "default": 2},
}
FONT_PROPERTIES = {
    "family": {"type": "string", "enum": list(FONT_CHOICES)},
    "atlas": {"type": "string", "description": "glyph atlas (.yaml) or raster atlas path"},
}

TOOL_SPECS = [
    ("synth_atlas", "Write the builtin atlas of a safe family or stand-in font and report validation.",
     {"family": {"type": "string", "enum": list(FONT_CHOICES)}, "out": {"type": "string"}},
     ["family", "out"]),
    ("render_text", "Render text into a screen PGM plus ground-truth sidecar.",
     {"text": {"type": "string"}, **FONT_PROPERTIES, "scale_s": {"type": "integer", "default": 2},
      "tracking": {"type": "integer", "default": 3}, "out": {"type": "string"},
      "gt": {"type": "string"}},
     ["text", "out", "gt"]),
    ("emanate", "Pass a screen PGM through the VGA, DVI or printer channel model.",
     {"input": {"type": "string"}, **CHANNEL_PROPERTIES, "out": {"type": "string"}},
     ["input", "out"]),
    ("evaluate", "Recognize an emission PGM with channel-matched templates and score CER.",
     {"emission": {"type": "string"}, "gt": {"type": "string"}, **FONT_PROPERTIES,
      "scale_s": {"type": "integer", "default": 2}, **CHANNEL_PROPERTIES,
      "threshold": {"type": "number", "description": "NCC threshold; 0.8, or 0.5 for dvi, when omitted"},
      "targets": {"type": "string", "default": "achns"},
      "out": {"type": "string"}},
     ["emission", "gt", "out"]),
    ("similarity", "Template similarity summary of a font under a channel (noiseless).",
     {**FONT_PROPERTIES, "scale_s": {"type": "integer", "default": 2}, **CHANNEL_PROPERTIES},
     []),
]


def _channel(arguments: Dict[str, Any]) -> ChannelConfig:
    defaults = DEFAULTS["channel"]
    return ChannelConfig(
        standard=arguments.get("standard", defaults["standard"]),
        snr_db=parse_snr(arguments.get("snr_db", "inf")),
        bw_frac=float(arguments.get("bw_frac", defaults["bw_frac"])),
        seed=int(arguments.get("seed", defaults["seed"])),
        printer_diodes=int(arguments.get("printer_diodes", defaults["printer_diodes"])),
    )


def synth_atlas(arguments: Dict[str, Any]) -> Dict[str, Any]:
    family = arguments["family"]
    if family in COMPARISON_NAMES:
        atlas = comparison_atlas(family)
        write_raster_atlas(atlas, arguments["out"])
        return {"glyphs": len(atlas.glyphs), "violations": 0, "out": arguments["out"]}
    params = params_for(family)
    glyphs = builtin_glyphset(family)
    failing = validate_glyphset(glyphs, params)
    export_atlas(glyphs, params, arguments["out"])
    return {"glyphs": len(glyphs), "violations": len(failing), "out": arguments["out"]}


def render_text(arguments: Dict[str, Any]) -> Dict[str, Any]:
    if not arguments["text"].strip():
        raise ValueError("text to render is empty")
    font, params, font_id = load_font(arguments.get("family"), arguments.get("atlas"))
    layout = LayoutSpec(scale_s=int(arguments.get("scale_s", 2)), tracking=int(arguments.get("tracking", 3)))
    rendered = rasterize_text(arguments["text"], font, params, layout)
    write_pgm(arguments["out"], rendered.bitmap)
    write_ground_truth(rendered.cells, arguments["gt"])
    return {"font": font_id, "glyphs": len(rendered.cells),
            "width": rendered.bitmap.width, "height": rendered.bitmap.height}


def emanate_tool(arguments: Dict[str, Any]) -> Dict[str, Any]:
    cfg = _channel(arguments)
    emission = emanate(read_pgm(arguments["input"]), cfg)
    write_pgm(arguments["out"], emission)
    return {"channel": cfg.to_dict(), "out": arguments["out"]}


def evaluate_tool(arguments: Dict[str, Any]) -> Dict[str, Any]:
    channel = _channel(arguments)
    threshold = arguments.get("threshold")
    if threshold is None:
        threshold = recognizer_threshold(DEFAULTS, channel.standard.value)
    config = {
        "emission": arguments["emission"],
        "ground_truth": arguments["gt"],
        "font": font_config(arguments.get("family"), arguments.get("atlas")),
        "scale_s": int(arguments.get("scale_s", 2)),
        "channel": channel.to_dict(),
        "threshold": float(threshold),
        "targets": arguments.get("targets", "achns"),
        "nms_window": None,
        "similarity": False,
    }
    data = run_evaluate(config, {"report": arguments["out"]})
    write_report(data, arguments["out"])
    return {"aggregate_cer": data["aggregate_cer"], "per_char": data["per_char"], "out": arguments["out"]}


def similarity_tool(arguments: Dict[str, Any]) -> Dict[str, Any]:
    font, params, font_id = load_font(arguments.get("family"), arguments.get("atlas"))
    cfg = _channel(arguments)
    matrix = similarity_matrix(build_templates(font, params, int(arguments.get("scale_s", 2)), cfg, font_id))
    return {
        "font": font_id,
        "templates": len(matrix.codepoints),
        "mean_off_diagonal": round(matrix.mean_off_diagonal(), 6),
        "confusable_fraction": round(confusable_fraction(matrix), 6),
    }


HANDLERS: Dict[str, Callable[[Dict[str, Any]], Dict[str, Any]]] = {
    "synth_atlas": synth_atlas,
    "render_text": render_text,
    "emanate": emanate_tool,
    "evaluate": evaluate_tool,
    "similarity": similarity_tool,
}


class FontlabMCPServer:
    """MCP server publishing the fontlab pipeline as tools."""

    def __init__(self):
        self.server = Server("fontlab-server")
        self.tools = [
            Tool(name=name, description=description,
                 inputSchema={"type": "object", "properties": properties, "required": required})
            for name, description, properties, required in TOOL_SPECS
        ]
        self._setup_handlers()

    def _setup_handlers(self):
        @self.server.list_tools()
        async def list_tools() -> List[Tool]:
            return self.tools

        @self.server.call_tool()
        async def call_tool(name: str, arguments: Dict[str, Any]):
            result = await self.execute_tool(name, arguments or {})
            return [{"type": "text", "text": json.dumps(result, indent=2)}]

    async def execute_tool(self, name: str, arguments: Dict[str, Any]) -> Dict[str, Any]:
        """Run a tool; failures come back as a status dict, never as an exception."""
        handler = HANDLERS.get(name)
        if handler is None:
            return {"status": "error", "tool": name, "error": f"Tool '{name}' not found"}
        try:
            result = await asyncio.to_thread(handler, arguments)
            return {"status": "success", "tool": name, "result": result}
        except (ValueError, OSError, KeyError) as e:
            logger.error(f"Error executing tool {name}: {e}")
            return {"status": "error", "tool": name, "error": str(e)}

    async def run(self):
        print("🌐 Starting Fontlab MCP Server", file=sys.stderr)
        print(f"   {len(self.tools)} tools: {', '.join(t.name for t in self.tools)}", file=sys.stderr)
        async with stdio_server() as (read_stream, write_stream):
            await self.server.run(read_stream, write_stream, self.server.create_initialization_options())


async def main():
    logging.basicConfig(level=logging.INFO, stream=sys.stderr)
    await FontlabMCPServer().run()


if __name__ == "__main__":
    asyncio.run(main())
