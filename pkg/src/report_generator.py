"""Text rendering of evaluation reports, grid searches and the dimension ledger"""

import json
from datetime import datetime
from pathlib import Path
from typing import Sequence

from .types import EvalReport, GridCell, LedgerEntry


def _format_exponent(value: float) -> str:
    """2^k for exact powers of two, plain decimal otherwise"""
    mantissa, exponent = value.hex().split("p")
    if mantissa.rstrip("0").rstrip(".") in ("0x1", "-0x1"):
        return f"2^{int(exponent)}"
    return f"{value:g}"


def generate_eval_report(report: EvalReport) -> str:
    """Accuracy, confusion matrix and per-class metrics"""
    echo = report["config"]
    lines: list[str] = []
    lines.append("📊 TEXTURE CLASSIFICATION REPORT")
    lines.append("=" * 45)
    lines.append(f"Generated: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
    lines.append(f"Descriptor: {echo['descriptor']}")
    lines.append(
        f"SVM: C={_format_exponent(echo['C'])} gamma={_format_exponent(echo['gamma'])} | seed {echo['seed']}"
    )
    if echo["cv_accuracy"] is not None:
        lines.append(f"Cross-validation accuracy: {echo['cv_accuracy']:.2%}")
    lines.append(f"Train images: {report['train_count']} | Test images: {report['test_count']}")
    lines.append("")

    lines.append(f"🎯 Test accuracy: {report['accuracy']:.2%}")
    lines.append("")

    classes = report["classes"]
    width = max([len(c) for c in classes] + [8])
    lines.append("🔢 CONFUSION MATRIX (rows true, columns predicted)")
    lines.append("-" * 30)
    lines.append(" " * width + " " + " ".join(f"{c[:width]:>{width}}" for c in classes))
    for name, row in zip(classes, report["confusion"]):
        lines.append(f"{name:<{width}} " + " ".join(f"{n:>{width}}" for n in row))
    lines.append("")

    lines.append("📈 PER-CLASS METRICS")
    lines.append("-" * 22)
    for name in classes:
        metrics = report["per_class"][name]
        lines.append(
            f"  {name:<{width}}  precision {metrics['precision']:.3f} | "
            f"recall {metrics['recall']:.3f} | support {metrics['support']}"
        )

    return "\n".join(lines)


def generate_grid_report(cells: Sequence[GridCell], top: int = 10) -> str:
    """Best cells of a grid search, highest accuracy first"""
    ranked = sorted(cells, key=lambda c: (-c["cv_accuracy"], c["C"], c["gamma"]))
    lines: list[str] = []
    lines.append("🔍 GRID SEARCH")
    lines.append("=" * 45)
    lines.append(f"Cells evaluated: {len(cells)}")
    lines.append("")
    for rank, cell in enumerate(ranked[:top], 1):
        marker = "🥇" if rank == 1 else f"{rank}."
        lines.append(
            f"{marker} C={_format_exponent(cell['C'])} gamma={_format_exponent(cell['gamma'])}"
            f" -> {cell['cv_accuracy']:.2%}"
        )
    return "\n".join(lines)


def generate_dimension_ledger(ledger: Sequence[LedgerEntry]) -> str:
    """Published versus computed feature sizes, group by group"""
    lines: list[str] = []
    lines.append("📐 FEATURE DIMENSION LEDGER")
    lines.append("=" * 45)

    group = None
    for entry in ledger:
        if entry["group"] != group:
            group = entry["group"]
            lines.append("")
            lines.append(f"Group {group}")
            lines.append("-" * 10)
        if entry["discrepancy"]:
            sizes = f"{entry['published']} -> {entry['computed']}*"
        else:
            sizes = str(entry["computed"])
        lines.append(f"  {entry['row']:<14} {entry['scale']:<20} {sizes:<14} {entry['descriptor']}")

    flagged = sum(1 for entry in ledger if entry["discrepancy"])
    lines.append("")
    if flagged:
        lines.append(f"⚠️ {flagged} entries differ from the published size (marked *)")
    else:
        lines.append("✅ Every entry matches the published size")
    return "\n".join(lines)


def save_report(report: EvalReport, path: str | Path) -> str:
    """Write the report as JSON for .json paths, as rendered text otherwise"""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    if target.suffix.lower() == ".json":
        content = json.dumps(report, indent=2, sort_keys=True) + "\n"
    else:
        content = generate_eval_report(report) + "\n"
    with open(target, "w", encoding="utf-8") as f:
        f.write(content)
    return str(target)
