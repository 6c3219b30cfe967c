"""Command-line front end.

Exit codes: 0 on success, 1 on evaluation/runtime errors, 2 on usage or
schema errors. The IWB_RENDERER environment variable supplies a default
renderer command template for subcommands that need one.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .dom import ParseError, parse_html, serialize
from .harness import (
    DuplicateId,
    MissingFile,
    SchemaError,
    eval_manifest,
    eval_pair,
    eval_report_to_dict,
    load_manifest,
    render_report_figure,
    report_to_csv,
    report_to_json,
)
from .mcot import (
    AlreadyAnnotated,
    EmptyResponse,
    McotConfig,
    NoCodeExtracted,
    SubprocessModelAdapter,
    TransportError,
    run_pipeline,
    som_inject,
    strip_som,
)
from .metrics import EvalConfig, LengthMismatch, NotAPermutation, rank_correlation
from .render import RendererCommand, RendererFailure
from .simplify import VisualOracleConfig, classify, simplify

USAGE_ERROR = 2
EVAL_ERROR = 1


class CliUsageError(Exception):
    pass


def _renderer_from(args) -> RendererCommand:
    template = args.renderer or os.environ.get("IWB_RENDERER")
    if not template:
        raise CliUsageError("no renderer given: pass --renderer or set IWB_RENDERER")
    try:
        return RendererCommand(command_template=template)
    except ValueError as exc:
        raise CliUsageError(str(exc)) from exc


def _cmd_eval(args) -> int:
    samples = load_manifest(args.manifest)
    config = EvalConfig(threshold=args.threshold)
    report = eval_manifest(samples, config, parallelism=args.jobs)
    Path(args.out).write_text(report_to_json(report), encoding="utf-8")
    if args.csv:
        Path(args.csv).write_text(report_to_csv(report), encoding="utf-8")
    if args.figures:
        render_report_figure(report, Path(args.figures) / "accuracy_by_level.png")
    avg = report.average
    ea = "n/a" if avg["ea"] is None else f"{avg['ea']:.4f}"
    la = "n/a" if avg["la"] is None else f"{avg['la']:.4f}"
    print(f"evaluated {len(report.per_sample)} samples: mean EA {ea}, mean LA {la}, errors {report.error_count()}")
    return EVAL_ERROR if report.error_count() else 0


def _cmd_eval_pair(args) -> int:
    config = EvalConfig(threshold=args.threshold)
    report = eval_pair(args.ref, args.cand, config)
    payload = eval_report_to_dict(report)
    if args.out:
        Path(args.out).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    summary = {k: payload[k] for k in ("ea", "la", "label_count", "test_count", "matched_above_threshold")}
    print(json.dumps(summary, sort_keys=True))
    return 0


def _cmd_simplify(args) -> int:
    renderer = _renderer_from(args)
    oracle = VisualOracleConfig(
        max_channel_delta=args.max_delta,
        max_differing_pixel_fraction=args.max_frac,
    )
    tree = parse_html(Path(args.in_path).read_bytes())
    simplified, log = simplify(tree, renderer, oracle)
    html = serialize(simplified)
    if args.out:
        Path(args.out).write_text(html, encoding="utf-8")
    else:
        print(html)
    if args.log:
        Path(args.log).write_text(json.dumps(log.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return 0


def _cmd_classify(args) -> int:
    tree = parse_html(Path(args.path).read_bytes())
    level = classify(tree)
    print(
        json.dumps(
            {
                "level": level.level,
                "element_count": level.element_count,
                "attribute_count": level.attribute_count,
                "js_usage": level.js_usage,
            },
            sort_keys=True,
        )
    )
    return 0


def _cmd_som(args) -> int:
    tree = parse_html(Path(args.in_path).read_bytes())
    annotation = som_inject(tree)
    Path(args.out).write_text(serialize(annotation.rewritten), encoding="utf-8")
    print(f"annotated {len(annotation.labels)} elements")
    return 0


def _cmd_strip_som(args) -> int:
    tree = parse_html(Path(args.in_path).read_bytes())
    Path(args.out).write_text(serialize(strip_som(tree)), encoding="utf-8")
    return 0


def _cmd_mcot(args) -> int:
    renderer = _renderer_from(args)
    selection = "best_by_metric" if args.select == "best" else "last"
    config = McotConfig(reflection_iters=args.reflections, selection=selection, renderer=renderer)
    source_html = Path(args.ref).read_text(encoding="utf-8") if args.ref else None
    if selection == "best_by_metric" and source_html is None:
        raise CliUsageError("--select best requires --ref")
    adapter = SubprocessModelAdapter(args.model)
    final_html, transcript = run_pipeline(args.image, source_html, config, adapter)
    if args.transcript:
        Path(args.transcript).write_text(
            json.dumps(transcript.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
    if args.out:
        Path(args.out).write_text(final_html, encoding="utf-8")
    else:
        print(final_html)
    return 0


def _cmd_corr(args) -> int:
    ranks = []
    for path in (args.a, args.b):
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, list) or not all(isinstance(x, int) for x in data):
            raise CliUsageError(f"{path}: expected a JSON array of integers")
        ranks.append(data)
    coefficient = rank_correlation(ranks[0], ranks[1])
    print(f"{coefficient:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iwb",
        description="Evaluate generated web pages against references, and drive the supporting pipelines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate a manifest of samples")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--threshold", type=float, default=0.9)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--csv", help="also write the per-level CSV table")
    p.add_argument("--figures", help="also render report figures into this directory")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("eval-pair", help="evaluate one candidate file against a reference file")
    p.add_argument("--ref", required=True)
    p.add_argument("--cand", required=True)
    p.add_argument("--threshold", type=float, default=0.9)
    p.add_argument("--out", help="write the full per-element report JSON here")
    p.set_defaults(func=_cmd_eval_pair)

    p = sub.add_parser("simplify", help="remove elements that do not change the rendering")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--renderer", help='screenshot command, e.g. "render {input} {output}"')
    p.add_argument("--out", help="simplified HTML path (default: stdout)")
    p.add_argument("--log", help="write the removal log JSON here")
    p.add_argument("--max-delta", type=int, default=0)
    p.add_argument("--max-frac", type=float, default=0.0)
    p.set_defaults(func=_cmd_simplify)

    p = sub.add_parser("classify", help="report the complexity level of a page")
    p.add_argument("path")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("som", help="inject set-of-mark annotations")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_som)

    p = sub.add_parser("strip-som", help="remove set-of-mark annotations")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_strip_som)

    p = sub.add_parser("mcot", help="run the five-hop chain-of-thought pipeline")
    p.add_argument("--image", required=True)
    p.add_argument("--ref", help="reference HTML (enables SoM and metric-based selection)")
    p.add_argument("--model", required=True, help="model wrapper command (JSON stdin/stdout)")
    p.add_argument("--renderer")
    p.add_argument("-N", dest="reflections", type=int, default=3)
    p.add_argument("--select", choices=("best", "last"), default="best")
    p.add_argument("--transcript", help="write the hop transcript JSON here")
    p.add_argument("--out", help="final HTML path (default: stdout)")
    p.set_defaults(func=_cmd_mcot)

    p = sub.add_parser("corr", help="rank correlation of two JSON rank lists")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.set_defaults(func=_cmd_corr)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliUsageError, SchemaError, MissingFile, DuplicateId, LengthMismatch, NotAPermutation) as exc:
        print(f"iwb: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (
        ParseError,
        RendererFailure,
        TransportError,
        EmptyResponse,
        NoCodeExtracted,
        AlreadyAnnotated,
        ValueError,
        OSError,
    ) as exc:
        print(f"iwb: error: {exc}", file=sys.stderr)
        return EVAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
