"""Manifest loading, pairwise/batch evaluation, and report emission.

A manifest is a JSON array of samples pointing at reference and candidate
HTML files. Batch evaluation aggregates element/layout accuracy per
complexity level and overall, writing a canonical JSON report with an
optional CSV projection and bar-chart figure of the per-level table.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .dom import parse_html, ParseError
from .metrics import EvalConfig, EvalReport, evaluate_trees
from .simplify import classify

LEVELS = ("simple", "medium", "complex")


class SchemaError(ValueError):
    """Manifest entry violates the expected schema."""

    def __init__(self, field_path: str, message: str) -> None:
        super().__init__(f"{field_path}: {message}")
        self.field_path = field_path


class MissingFile(FileNotFoundError):
    """One or more files referenced by the manifest do not exist."""

    def __init__(self, paths: list[str]) -> None:
        super().__init__("missing files: " + ", ".join(paths))
        self.paths = paths


class DuplicateId(ValueError):
    """A sample id appears more than once in a manifest."""


@dataclass
class BenchSample:
    id: str
    reference_html: str
    candidate_html: str | None = None
    image: str | None = None
    level: str | None = None


@dataclass
class SampleResult:
    id: str
    level: str
    ea: float | None = None
    la: float | None = None
    errors: list[str] = field(default_factory=list)


@dataclass
class AggregateReport:
    per_sample: list[SampleResult]
    per_level: dict[str, dict]
    average: dict
    average_of_level_means: dict
    config: dict

    def error_count(self) -> int:
        return sum(1 for s in self.per_sample if s.errors)

    def to_dict(self) -> dict:
        rows = []
        for s in self.per_sample:
            row: dict = {"id": s.id, "level": s.level, "ea": s.ea, "la": s.la}
            if s.errors:
                row["errors"] = s.errors
            rows.append(row)
        return {
            "per_sample": rows,
            "per_level": self.per_level,
            "average": self.average,
            "average_of_level_means": self.average_of_level_means,
            "config": self.config,
        }


def _require(entry: dict, key: str, index: int) -> str:
    if key not in entry:
        raise SchemaError(f"[{index}].{key}", "missing required field")
    value = entry[key]
    if not isinstance(value, str) or not value:
        raise SchemaError(f"[{index}].{key}", f"expected a non-empty string, got {value!r}")
    return value


def load_manifest(path: str | Path) -> list[BenchSample]:
    """Parse and validate a manifest; fills missing levels via classify()."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except ValueError as exc:
        raise SchemaError("$", f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise SchemaError("$", f"manifest must be a JSON array, got {type(data).__name__}")
    base = path.parent
    samples: list[BenchSample] = []
    seen: set[str] = set()
    missing: list[str] = []
    for i, entry in enumerate(data):
        if not isinstance(entry, dict):
            raise SchemaError(f"[{i}]", "sample must be an object")
        sample_id = _require(entry, "id", i)
        if sample_id in seen:
            raise DuplicateId(f"duplicate sample id: {sample_id!r}")
        seen.add(sample_id)
        level = entry.get("level")
        if level is not None and level not in LEVELS:
            raise SchemaError(f"[{i}].level", f"expected one of {LEVELS}, got {level!r}")
        reference = str(base / _require(entry, "reference_html", i))
        candidate = entry.get("candidate_html")
        if candidate is not None:
            if not isinstance(candidate, str) or not candidate:
                raise SchemaError(f"[{i}].candidate_html", "expected a non-empty string")
            candidate = str(base / candidate)
        image = entry.get("image")
        if image is not None:
            if not isinstance(image, str) or not image:
                raise SchemaError(f"[{i}].image", "expected a non-empty string")
            image = str(base / image)
        for p in (reference, candidate, image):
            if p is not None and not Path(p).exists():
                missing.append(p)
        samples.append(
            BenchSample(id=sample_id, reference_html=reference, candidate_html=candidate, image=image, level=level)
        )
    if missing:
        raise MissingFile(missing)
    for sample in samples:
        if sample.level is None:
            tree = parse_html(Path(sample.reference_html).read_bytes())
            sample.level = classify(tree).level
    return samples


def eval_pair(reference: str | Path, candidate: str | Path, config: EvalConfig | None = None) -> EvalReport:
    """Evaluate a candidate file against a reference file."""
    try:
        label = parse_html(Path(reference).read_bytes())
    except ParseError as exc:
        raise ParseError(f"{reference}: {exc}") from exc
    try:
        test = parse_html(Path(candidate).read_bytes())
    except ParseError as exc:
        raise ParseError(f"{candidate}: {exc}") from exc
    return evaluate_trees(label, test, config)


def _evaluate_sample(sample: BenchSample, config: EvalConfig) -> SampleResult:
    result = SampleResult(id=sample.id, level=sample.level or "unknown")
    if sample.candidate_html is None:
        result.errors.append("sample has no candidate_html")
        return result
    try:
        report = eval_pair(sample.reference_html, sample.candidate_html, config)
    except (ParseError, OSError) as exc:
        result.errors.append(str(exc))
        return result
    result.ea = report.element_accuracy
    result.la = report.layout_accuracy
    return result


def _mean(values: list[float]) -> float | None:
    return sum(values) / len(values) if values else None


def eval_manifest(samples: list[BenchSample], config: EvalConfig | None = None, parallelism: int = 1) -> AggregateReport:
    """Evaluate every sample and aggregate per level and overall.

    Output ordering is by sample id, so reports are byte-identical at any
    parallelism. Failed samples carry their error and are excluded from
    the means.
    """
    if not samples:
        raise ValueError("no samples to evaluate")
    config = config or EvalConfig()
    if parallelism <= 1:
        results = [_evaluate_sample(s, config) for s in samples]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(lambda s: _evaluate_sample(s, config), samples))
    results.sort(key=lambda r: r.id)

    per_level: dict[str, dict] = {}
    for level in LEVELS:
        rows = [r for r in results if r.level == level and not r.errors]
        if not rows:
            continue
        per_level[level] = {
            "ea": _mean([r.ea for r in rows]),
            "la": _mean([r.la for r in rows]),
            "count": len(rows),
        }
    ok = [r for r in results if not r.errors]
    average = {
        "ea": _mean([r.ea for r in ok]),
        "la": _mean([r.la for r in ok]),
        "count": len(ok),
    }
    level_means = list(per_level.values())
    average_of_level_means = {
        "ea": _mean([m["ea"] for m in level_means]),
        "la": _mean([m["la"] for m in level_means]),
    }
    return AggregateReport(
        per_sample=results,
        per_level=per_level,
        average=average,
        average_of_level_means=average_of_level_means,
        config={"threshold": config.threshold, "matching_mode": config.matching_mode},
    )


def report_to_json(report: AggregateReport) -> str:
    """Canonical JSON: sorted keys, stable layout."""
    return json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"


def report_to_csv(report: AggregateReport) -> str:
    """Per-level table projection for spreadsheet diffing."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["level", "count", "ea", "la"])
    for level in LEVELS:
        if level in report.per_level:
            m = report.per_level[level]
            writer.writerow([level, m["count"], f"{m['ea']:.6f}", f"{m['la']:.6f}"])
    avg = report.average
    if avg["count"]:
        writer.writerow(["average", avg["count"], f"{avg['ea']:.6f}", f"{avg['la']:.6f}"])
    return buf.getvalue()


def render_report_figure(report: AggregateReport, out_path: str | Path) -> Path:
    """Bar chart of per-level and average EA/LA, written as an image file."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    labels = [lv for lv in LEVELS if lv in report.per_level]
    ea = [report.per_level[lv]["ea"] for lv in labels]
    la = [report.per_level[lv]["la"] for lv in labels]
    if report.average["count"]:
        labels.append("average")
        ea.append(report.average["ea"])
        la.append(report.average["la"])
    x = range(len(labels))
    width = 0.38
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar([i - width / 2 for i in x], ea, width, label="Element accuracy")
    ax.bar([i + width / 2 for i in x], la, width, label="Layout accuracy")
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    ax.legend()
    fig.tight_layout()
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path


def eval_report_to_dict(report: EvalReport) -> dict:
    """Pairwise report with the per-element perspective breakdown."""
    return {
        "ea": report.element_accuracy,
        "la": report.layout_accuracy,
        "label_count": report.label_count,
        "test_count": report.test_count,
        "matched_above_threshold": report.matched_above_threshold,
        "elements": [
            {
                "test_node": s.test_node,
                "label_node": s.label_node,
                "perspectives": s.perspectives,
                "average": s.average,
            }
            for s in report.element_scores
        ],
    }
