"""HTML simplification under a visual-equivalence oracle, plus the
complexity classifier.

Simplification tries deleting each non-fundamental element (subtree
included) and keeps the deletion only when a renderer screenshot of the
result matches the baseline pixel-for-pixel (tolerances configurable for
nondeterministic renderers). Whitespace collapsing and inline-style
externalization are separate, renderer-free passes.
"""

from __future__ import annotations

import re
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .dom import DomTree, RAW_TEXT_TAGS, extract_events, serialize, traverse
from .render import RendererCommand, RendererFailure, render_html

FUNDAMENTAL_TAGS = frozenset({"html", "head", "body", "title", "meta"})

# Complexity table boundaries: the lower class claims the shared boundary.
SIMPLE_MAX = 20
MEDIUM_MAX = 60


class DecodeError(ValueError):
    """An oracle input file could not be decoded as a raster image."""


@dataclass
class VisualOracleConfig:
    max_channel_delta: int = 0
    max_differing_pixel_fraction: float = 0.0

    def __post_init__(self) -> None:
        if not 0 <= self.max_channel_delta <= 255:
            raise ValueError("max_channel_delta must be in 0..255")
        if not 0.0 <= self.max_differing_pixel_fraction <= 1.0:
            raise ValueError("max_differing_pixel_fraction must be in [0,1]")


@dataclass
class RemovalAttempt:
    node_id: int
    tag: str
    verdict: str  # "removed" | "kept"
    oracle_equal: bool


@dataclass
class SimplificationLog:
    attempts: list[RemovalAttempt] = field(default_factory=list)
    initial_count: int = 0
    final_count: int = 0

    def removed(self) -> list[RemovalAttempt]:
        return [a for a in self.attempts if a.verdict == "removed"]

    def to_dict(self) -> dict:
        return {
            "attempts": [
                {
                    "node_id": a.node_id,
                    "tag": a.tag,
                    "verdict": a.verdict,
                    "oracle_equal": a.oracle_equal,
                }
                for a in self.attempts
            ],
            "initial_count": self.initial_count,
            "final_count": self.final_count,
        }


@dataclass
class ComplexityLevel:
    level: str  # "simple" | "medium" | "complex"
    element_count: int
    attribute_count: int
    js_usage: str  # "none_or_minimal" | "moderate" | "high"


def strip_invisibles(tree: DomTree) -> DomTree:
    """Collapse whitespace runs in element text; script/style text is kept verbatim."""
    out = tree.clone()
    for node in out.nodes.values():
        if node.tag in RAW_TEXT_TAGS or not node.text:
            continue
        node.text = re.sub(r"\s+", " ", node.text).strip()
    return out


def externalize_inline_styles(tree: DomTree) -> tuple[DomTree, str]:
    """Move every nonempty style attribute into a generated per-element class.

    Classes are named ``iwb-sN`` in document order and the returned CSS has
    one rule per class carrying the original declarations.
    """
    out = tree.clone()
    rules: list[str] = []
    counter = 0
    for nid in traverse(out):
        node = out.nodes[nid]
        style_value = node.attributes.get("style", "")
        if not style_value.strip():
            continue
        counter += 1
        class_name = f"iwb-s{counter}"
        declarations = "; ".join(f"{p}: {v}" for p, v in node.inline_style.items())
        rules.append(f".{class_name} {{ {declarations}; }}")
        out.remove_attribute(nid, "style")
        existing = node.attributes.get("class", "")
        out.set_attribute(nid, "class", f"{existing} {class_name}".strip() if existing else class_name)
    return out, "\n".join(rules)


def _load_pixels(path: str | Path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGBA"), dtype=np.int16)
    except (UnidentifiedImageError, OSError) as exc:
        raise DecodeError(f"cannot decode image {path}: {exc}") from exc


def visually_equal(img_a: str | Path, img_b: str | Path, cfg: VisualOracleConfig | None = None) -> bool:
    """True when at most the allowed fraction of pixels differs beyond the channel delta."""
    cfg = cfg or VisualOracleConfig()
    a = _load_pixels(img_a)
    b = _load_pixels(img_b)
    if a.shape != b.shape:
        return False
    differing = (np.abs(a - b) > cfg.max_channel_delta).any(axis=-1)
    fraction = differing.mean() if differing.size else 0.0
    return fraction <= cfg.max_differing_pixel_fraction


def simplify(
    tree: DomTree,
    renderer: RendererCommand,
    oracle: VisualOracleConfig | None = None,
    workdir: str | Path | None = None,
) -> tuple[DomTree, SimplificationLog]:
    """Delete every element whose removal leaves the screenshot unchanged.

    Elements are attempted in document order; fundamentals (html, head,
    body, title, meta) are never touched, and nodes already gone with an
    accepted ancestor removal are skipped. On renderer failure the partial
    log is attached to the raised exception.
    """
    oracle = oracle or VisualOracleConfig()
    workdir = Path(workdir) if workdir else Path(tempfile.mkdtemp(prefix="iwb-simplify-"))
    current = strip_invisibles(tree)
    log = SimplificationLog(initial_count=len(current.nodes))
    try:
        baseline = render_html(renderer, serialize(current), workdir, "baseline")
        for nid in traverse(current)[:]:
            if nid not in current.nodes:
                continue  # removed with an ancestor
            tag = current.nodes[nid].tag
            if tag in FUNDAMENTAL_TAGS:
                continue
            candidate = current.clone()
            candidate.remove_subtree(nid)
            shot = render_html(renderer, serialize(candidate), workdir, f"attempt-{nid}")
            equal = visually_equal(baseline, shot, oracle)
            if equal:
                current = candidate
                log.attempts.append(RemovalAttempt(nid, tag, "removed", True))
            else:
                log.attempts.append(RemovalAttempt(nid, tag, "kept", False))
    except RendererFailure as exc:
        log.final_count = len(current.nodes)
        exc.log = log
        raise
    log.final_count = len(current.nodes)
    return current, log


def classify(tree: DomTree) -> ComplexityLevel:
    """Complexity level from element and attribute counts.

    Counts exclude the html/head/body skeleton. JS usage is reported as an
    advisory field and never affects the level.
    """
    skeleton = {tree.root, tree.head_id, tree.body_id}
    counted = [nid for nid in traverse(tree) if nid not in skeleton]
    element_count = len(counted)
    attribute_count = sum(len(tree.nodes[nid].attributes) for nid in counted)
    event_count = sum(len(extract_events(tree.nodes[nid])) for nid in traverse(tree))
    if element_count <= SIMPLE_MAX and attribute_count <= SIMPLE_MAX:
        level = "simple"
    elif element_count > MEDIUM_MAX or attribute_count > MEDIUM_MAX:
        level = "complex"
    else:
        level = "medium"
    if event_count <= 2:
        js_usage = "none_or_minimal"
    elif event_count <= 10:
        js_usage = "moderate"
    else:
        js_usage = "high"
    return ComplexityLevel(
        level=level,
        element_count=element_count,
        attribute_count=attribute_count,
        js_usage=js_usage,
    )
