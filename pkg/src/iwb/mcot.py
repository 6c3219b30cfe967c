"""Five-hop multimodal chain-of-thought pipeline.

Hops: set-of-mark (SoM) annotation of the reference page, element
inference, layout inference, web-code generation, and an iterative
reflection loop bounded by N. Model access goes through pluggable
adapters (a JSON-over-stdin subprocess or a scripted mock); screenshots
go through the same renderer contract the simplifier uses.

SoM is realized as deterministic HTML rewriting: every body element with
box semantics gets a marker class, an outline declaration, and a numbered
badge child, so a plain renderer shows numbered highlights without any
pixel-space annotation step.
"""

from __future__ import annotations

import json
import re
import shlex
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from .dom import VOID_TAGS, DomTree, parse_html, serialize, traverse
from .metrics import EvalConfig, evaluate_documents
from .render import RendererCommand, RendererFailure, render_html

PROMPT_INFER_ELEMENTS = (
    "First, analyze this screenshot of the webpage, please try your best to identify "
    "and describe this webpage’s functions and its web elements. Some of these "
    "elements have been numerically labeled in sequence with bounding boxes."
)

PROMPT_INFER_LAYOUT = (
    "The second step is to demonstrate the positional relationships of the marked web "
    "page elements based on the provided bounding boxes, including the overall layout "
    "and the relative positions between elements."
)

PROMPT_INFER_CODE = (
    "Please as per the above descriptions of the webpage’s overall layout and web "
    "elements together with their relative positioning, generate web code for the "
    "corresponding original web image by skipping the step of assigning bounding boxes "
    "to elements."
)

PROMPT_REFLECTION = (
    "Please compare the two screenshots of webpages. The latter is the screenshot of "
    "the webpage by the web code you just provided. Based on the above web element "
    "descriptions and layout information, please identify whether there are missing "
    "elements and access whether the layout and elements’ relative positioning "
    "are correct. Afterwards, please improve the web code accordingly."
)

SOM_CLASS = "iwb-som"
SOM_LABEL_CLASS = "iwb-som-label"
SOM_OUTLINE = "outline: 2px solid red"

# Body elements that have no visual box to outline.
UNANNOTATABLE_TAGS = frozenset({"script", "style", "title", "meta", "link"})

HOP_SOM = "som"
HOP_INFER_ELEMENTS = "infer_elements"
HOP_INFER_LAYOUT = "infer_layout"
HOP_INFER_CODE = "infer_code"
HOP_REFLECTION = "reflection"


class AlreadyAnnotated(ValueError):
    """The tree already carries SoM marker classes."""


class TransportError(RuntimeError):
    """The model adapter failed to produce a response."""


class EmptyResponse(RuntimeError):
    """The model returned an empty response."""


class NoCodeExtracted(RuntimeError):
    """No HTML could be extracted from a model response."""


@dataclass
class SomAnnotation:
    labels: list[tuple[int, int]]  # (label_number, node_id) in document order
    rewritten: DomTree


def _has_marker(tree: DomTree) -> bool:
    for node in tree.nodes.values():
        classes = node.class_list()
        if SOM_CLASS in classes or SOM_LABEL_CLASS in classes:
            return True
    return False


def som_inject(tree: DomTree) -> SomAnnotation:
    """Outline and number every box-producing element under <body>.

    The rewrite is reversible: :func:`strip_som` restores a tree
    structurally equal to the input.
    """
    if _has_marker(tree):
        raise AlreadyAnnotated("tree already contains SoM marker classes")
    out = tree.clone()
    body = out.body_id
    targets = [
        nid
        for nid in out.subtree_ids(body)
        if nid != body and out.nodes[nid].tag not in UNANNOTATABLE_TAGS
    ]
    labels: list[tuple[int, int]] = []
    for number, nid in enumerate(targets, 1):
        node = out.nodes[nid]
        if "class" in node.attributes:
            out.set_attribute(nid, "class", node.attributes["class"] + " " + SOM_CLASS)
        else:
            out.set_attribute(nid, "class", SOM_CLASS)
        if "style" in node.attributes:
            out.set_attribute(nid, "style", node.attributes["style"] + ";" + SOM_OUTLINE)
        else:
            out.set_attribute(nid, "style", SOM_OUTLINE)
        badge = out.new_node("span", {"class": SOM_LABEL_CLASS}, text=str(number))
        if node.tag in VOID_TAGS:
            # void elements cannot carry children; the badge precedes them
            parent = out.parents()[nid]
            siblings = out.nodes[parent].children
            siblings.insert(siblings.index(nid), badge)
        else:
            out.insert_first_child(nid, badge)
        labels.append((number, nid))
    return SomAnnotation(labels=labels, rewritten=out)


def strip_som(tree: DomTree) -> DomTree:
    """Remove SoM badges, marker classes, and injected outline declarations."""
    out = tree.clone()
    for nid in list(out.subtree_ids(out.root)):
        if nid not in out.nodes:
            continue
        node = out.nodes[nid]
        if SOM_LABEL_CLASS in node.class_list():
            out.remove_subtree(nid)
            continue
        class_value = node.attributes.get("class")
        if class_value is not None:
            if class_value == SOM_CLASS:
                out.remove_attribute(nid, "class")
            elif class_value.endswith(" " + SOM_CLASS):
                out.set_attribute(nid, "class", class_value[: -len(" " + SOM_CLASS)])
        style_value = node.attributes.get("style")
        if style_value is not None:
            if style_value == SOM_OUTLINE:
                out.remove_attribute(nid, "style")
            elif style_value.endswith(";" + SOM_OUTLINE):
                out.set_attribute(nid, "style", style_value[: -len(";" + SOM_OUTLINE)])
    return out


class ScriptedMockAdapter:
    """Replays canned responses keyed by hop name.

    The fixture is a JSON map hop_name -> response text; the reflection
    entry is an ordered list consumed one response per reflection call.
    """

    transport = "scripted-mock"

    def __init__(self, fixture: dict | str | Path) -> None:
        if isinstance(fixture, (str, Path)):
            self.endpoint = str(fixture)
            fixture = json.loads(Path(fixture).read_text(encoding="utf-8"))
        else:
            self.endpoint = "<inline>"
        self.fixture = fixture
        self._cursor: dict[str, int] = {}

    def respond(self, hop_name: str, prompt: str, images: list[str]) -> str:
        if hop_name not in self.fixture:
            raise TransportError(f"no scripted response for hop {hop_name!r}")
        value = self.fixture[hop_name]
        if isinstance(value, list):
            index = self._cursor.get(hop_name, 0)
            if index >= len(value):
                raise TransportError(f"scripted responses for {hop_name!r} exhausted")
            self._cursor[hop_name] = index + 1
            return value[index]
        return value


class SubprocessModelAdapter:
    """Talks to a model wrapper process via JSON on stdin/stdout.

    Request: ``{"messages":[{"role":"user","text":...,"images":[...]}]}``.
    Response: ``{"text": "..."}`` with exit status 0.
    """

    transport = "subprocess"

    def __init__(self, command: str, timeout_seconds: int = 120) -> None:
        self.endpoint = command
        self.timeout_seconds = timeout_seconds

    def respond(self, hop_name: str, prompt: str, images: list[str]) -> str:
        request = {"messages": [{"role": "user", "text": prompt, "images": [str(p) for p in images]}]}
        try:
            proc = subprocess.run(
                shlex.split(self.endpoint),
                input=json.dumps(request).encode("utf-8"),
                capture_output=True,
                timeout=self.timeout_seconds,
            )
        except subprocess.TimeoutExpired as exc:
            raise TransportError(f"model timed out after {self.timeout_seconds}s") from exc
        except OSError as exc:
            raise TransportError(f"model command could not be executed: {exc}") from exc
        if proc.returncode != 0:
            stderr = proc.stderr.decode("utf-8", "replace").strip()
            raise TransportError(f"model exited {proc.returncode}: {stderr[:500]}")
        try:
            payload = json.loads(proc.stdout.decode("utf-8"))
            return payload["text"]
        except (ValueError, KeyError, UnicodeDecodeError) as exc:
            raise TransportError(f"model produced malformed output: {exc}") from exc


@dataclass
class McotConfig:
    reflection_iters: int = 3
    selection: str = "best_by_metric"  # or "last"
    renderer: RendererCommand | None = None

    def __post_init__(self) -> None:
        if self.reflection_iters < 0:
            raise ValueError("reflection_iters must be >= 0")
        if self.selection not in ("best_by_metric", "last"):
            raise ValueError(f"unknown selection mode {self.selection!r}")


@dataclass
class HopRecord:
    hop_name: str
    prompt_text: str
    attached_images: list[str]
    response_text: str


@dataclass
class IterationRecord:
    generated_html: str
    screenshot_path: str | None = None
    ea: float | None = None
    la: float | None = None


@dataclass
class HopTranscript:
    hops: list[HopRecord] = field(default_factory=list)
    iterations: list[IterationRecord] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "hops": [
                {
                    "hop_name": h.hop_name,
                    "prompt_text": h.prompt_text,
                    "attached_images": h.attached_images,
                    "response_text": h.response_text,
                }
                for h in self.hops
            ],
            "iterations": [
                {
                    "generated_html": it.generated_html,
                    "screenshot_path": it.screenshot_path,
                    "ea": it.ea,
                    "la": it.la,
                }
                for it in self.iterations
            ],
        }


_FENCE_RE = re.compile(r"```[a-zA-Z0-9_-]*\r?\n(.*?)```", re.S)


def extract_web_code(response: str) -> str:
    """First fenced code block, else the tail from the first <html or <!doctype."""
    m = _FENCE_RE.search(response)
    if m:
        return m.group(1)
    lower = response.lower()
    positions = [p for p in (lower.find("<html"), lower.find("<!doctype")) if p != -1]
    if positions:
        return response[min(positions):]
    raise NoCodeExtracted("response contains no fenced code block and no <html/<!doctype")


def run_hop(adapter, prompt: str, images: list[str | Path], *, hop_name: str, transcript: HopTranscript) -> str:
    """One model exchange, recorded in the transcript."""
    image_paths = [Path(p) for p in images]
    for p in image_paths:
        if not p.exists():
            raise FileNotFoundError(f"attached image does not exist: {p}")
    response = adapter.respond(hop_name, prompt, [str(p) for p in image_paths])
    if not response or not response.strip():
        raise EmptyResponse(f"model returned an empty response for hop {hop_name!r}")
    transcript.hops.append(
        HopRecord(hop_name=hop_name, prompt_text=prompt, attached_images=[str(p) for p in image_paths], response_text=response)
    )
    return response


def run_pipeline(
    image: str | Path,
    source_html: str | None,
    config: McotConfig,
    adapter,
    run_dir: str | Path | None = None,
) -> tuple[str, HopTranscript]:
    """Execute the five hops and return (selected html, transcript).

    When ``source_html`` is given it is SoM-annotated and screenshotted for
    the first two hops; the later hops see the original image. Reflection
    renders the latest candidate and asks for an improved version, up to N
    times; a renderer failure mid-reflection skips the remaining rounds.
    Selection is metric-based against the reference (requires
    ``source_html``) or simply the last iteration.
    """
    image = Path(image)
    if not image.exists():
        raise FileNotFoundError(f"input screenshot does not exist: {image}")
    if config.selection == "best_by_metric" and source_html is None:
        raise ValueError("selection=best_by_metric requires a reference document")
    if config.renderer is None and (source_html is not None or config.reflection_iters > 0):
        raise ValueError("a renderer is required for SoM screenshots and reflection rounds")
    run_dir = Path(run_dir) if run_dir else Path(tempfile.mkdtemp(prefix="iwb-mcot-"))
    run_dir.mkdir(parents=True, exist_ok=True)
    transcript = HopTranscript()

    if source_html is not None:
        annotation = som_inject(parse_html(source_html))
        annotated_image = render_html(config.renderer, serialize(annotation.rewritten), run_dir, "annotated")
        transcript.hops.append(HopRecord(HOP_SOM, "", [str(annotated_image)], ""))
        visual = annotated_image
    else:
        transcript.hops.append(HopRecord(HOP_SOM, "", [str(image)], ""))
        visual = image

    run_hop(adapter, PROMPT_INFER_ELEMENTS, [visual], hop_name=HOP_INFER_ELEMENTS, transcript=transcript)
    run_hop(adapter, PROMPT_INFER_LAYOUT, [image], hop_name=HOP_INFER_LAYOUT, transcript=transcript)
    code_response = run_hop(adapter, PROMPT_INFER_CODE, [image], hop_name=HOP_INFER_CODE, transcript=transcript)
    iterations = [IterationRecord(generated_html=extract_web_code(code_response))]

    for i in range(config.reflection_iters):
        latest = iterations[-1]
        try:
            shot = render_html(config.renderer, latest.generated_html, run_dir, f"iteration-{i}")
        except RendererFailure:
            break
        latest.screenshot_path = str(shot)
        response = run_hop(
            adapter, PROMPT_REFLECTION, [image, shot], hop_name=HOP_REFLECTION, transcript=transcript
        )
        iterations.append(IterationRecord(generated_html=extract_web_code(response)))

    if source_html is not None:
        for it in iterations:
            report = evaluate_documents(source_html, it.generated_html, EvalConfig())
            it.ea = report.element_accuracy
            it.la = report.layout_accuracy

    transcript.iterations = iterations
    if config.selection == "best_by_metric":
        best = max(range(len(iterations)), key=lambda i: ((iterations[i].ea + iterations[i].la) / 2, -i))
        final_html = iterations[best].generated_html
    else:
        final_html = iterations[-1].generated_html
    return final_html, transcript
