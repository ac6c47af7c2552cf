#!/usr/bin/env python3
"""
Report JSON - serialization of CER reports, run manifests and the merged
font-versus-standard comparison table.

Reports are written with sorted keys and no timestamps so that re-running
the embedded manifest reproduces the file byte for byte.
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from statistics import mean
from typing import Any, Dict, List, Optional, Sequence, Union

from typing_extensions import TypedDict

from recognition import CerReport, SimilarityMatrix, confusable_fraction, render_cer
from settings import __version__

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
PER_CHAR_KEYS = ("char", "u", "m", "n", "k", "q", "cer")


class ReportSchemaError(ValueError):
    """Report file does not follow the schema this tool writes."""


class PerCharRow(TypedDict):
    char: str
    u: int
    m: int
    n: int
    k: int
    q: int
    cer: float


@dataclass
class RunManifest:
    """Everything needed to re-run a command; embedded in every report."""
    command: str
    config: Dict[str, Any]
    outputs: Dict[str, str] = field(default_factory=dict)
    version: str = __version__

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunManifest":
        try:
            return cls(
                command=data["command"],
                config=dict(data["config"]),
                outputs=dict(data.get("outputs", {})),
                version=data.get("version", __version__),
            )
        except (KeyError, TypeError) as e:
            raise ReportSchemaError(f"malformed manifest: {e}")


def _row(char: str, inputs) -> PerCharRow:
    return PerCharRow(char=char, cer=render_cer(inputs.cer), **inputs.to_dict())


def build_report(
    report: CerReport,
    manifest: RunManifest,
    similarity: Optional[SimilarityMatrix] = None,
) -> Dict[str, Any]:
    """CerReport -> JSON-ready dict; per-hit m counting is recorded in the schema."""
    data = {
        "schema_version": SCHEMA_VERSION,
        "kind": "cer",
        "m_counting": "per-hit",
        "manifest": manifest.to_dict(),
        "config": report.config,
        "per_char": [_row(c, v) for c, v in sorted(report.per_char.items())],
        "aggregate": report.aggregate.to_dict(),
        "aggregate_cer": render_cer(report.aggregate_cer),
        "aggregate_cer_exact": f"{report.aggregate_cer.numerator}/{report.aggregate_cer.denominator}",
    }
    if similarity is not None:
        data["similarity_matrix"] = similarity.to_dict()
        data["similarity_summary"] = {
            "mean_off_diagonal": round(similarity.mean_off_diagonal(), 6),
            "confusable_fraction": round(confusable_fraction(similarity), 6),
        }
    return data


def dumps_report(data: Dict[str, Any]) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def write_report(data: Dict[str, Any], path: Union[str, Path]) -> None:
    Path(path).write_text(dumps_report(data))
    logger.info(f"Wrote report to {path}")


def validate_report(data: Any, source: str = "<report>") -> Dict[str, Any]:
    """Check a loaded CER report; raises ReportSchemaError naming the problem."""
    if not isinstance(data, dict):
        raise ReportSchemaError(f"{source}: top level must be an object")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ReportSchemaError(f"{source}: schema_version {version!r} != {SCHEMA_VERSION}")
    for key in ("config", "per_char", "aggregate_cer", "manifest"):
        if key not in data:
            raise ReportSchemaError(f"{source}: missing key {key!r}")
    if not isinstance(data["per_char"], list):
        raise ReportSchemaError(f"{source}: per_char must be a list")
    for i, row in enumerate(data["per_char"]):
        missing = [k for k in PER_CHAR_KEYS if not isinstance(row, dict) or k not in row]
        if missing:
            raise ReportSchemaError(f"{source}: per_char[{i}] missing {', '.join(missing)}")
    return data


def load_report(path: Union[str, Path]) -> Dict[str, Any]:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ReportSchemaError(f"{path}: not valid JSON: {e}")
    return validate_report(data, str(path))


def column_label(data: Dict[str, Any]) -> str:
    config = data.get("config", {})
    channel = config.get("channel", {})
    label = f"{config.get('font', '?')}/{channel.get('standard', '?')}"
    if "seed" in channel:
        label += f"/seed={channel['seed']}"
    return label


def merge_reports(reports: Sequence[Dict[str, Any]], manifest: Optional[RunManifest] = None) -> Dict[str, Any]:
    """
    Lay several CER reports side by side: one column per report, one row
    per looked-for character, plus the aggregate row and similarity summaries.
    """
    if not reports:
        raise ReportSchemaError("nothing to merge")
    for i, data in enumerate(reports):
        validate_report(data, f"report[{i}]")

    columns = [column_label(r) for r in reports]
    chars = sorted({row["char"] for r in reports for row in r["per_char"]})
    rows = []
    for char in chars:
        values = []
        for r in reports:
            match = [row["cer"] for row in r["per_char"] if row["char"] == char]
            values.append(match[0] if match else None)
        rows.append({"char": char, "values": values})

    merged = {
        "schema_version": SCHEMA_VERSION,
        "kind": "comparison",
        "columns": columns,
        "rows": rows,
        "aggregate": [r["aggregate_cer"] for r in reports],
        "similarity": {
            label: r["similarity_summary"]
            for label, r in zip(columns, reports)
            if "similarity_summary" in r
        },
    }
    if manifest is not None:
        merged["manifest"] = manifest.to_dict()
    return merged


def summarize_by_font(reports: Sequence[Dict[str, Any]]) -> Dict[str, Dict[str, float]]:
    """Mean aggregate CER over seeds, keyed standard -> font."""
    groups: Dict[str, Dict[str, List[float]]] = {}
    for data in reports:
        config = data["config"]
        standard = config["channel"]["standard"]
        groups.setdefault(standard, {}).setdefault(config["font"], []).append(data["aggregate_cer"])
    return {
        standard: {font: round(mean(values), 4) for font, values in sorted(fonts.items())}
        for standard, fonts in sorted(groups.items())
    }
