"""CSS rule parsing and declared-style resolution.

Supports the selector subset found in model-generated pages: tag,
``.class``, ``#id``, compounds of those, and descendant chains. Anything
fancier (combinators, pseudo-classes, attribute selectors, ``*``) is
reported through the diagnostics channel and skipped rather than silently
dropped. Styles are resolved from declarations only; no computed-style or
inheritance emulation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .dom import DomTree, parse_declarations

# Style properties that participate in comparison.
KEEP_PROPERTIES = frozenset(
    {
        "color", "display", "font-family", "font-size", "height", "line-height",
        "margin-top", "text-align", "width",
        "background-color", "border-bottom-color", "border-bottom-left-radius",
        "border-bottom-right-radius", "border-bottom-style", "border-bottom-width",
        "border-image-outset", "border-image-repeat", "border-image-slice",
        "border-image-source", "border-image-width", "border-left-color",
        "border-left-style", "border-left-width", "border-right-color",
        "border-right-style", "border-right-width", "border-top-color",
        "border-top-left-radius", "border-top-right-radius", "border-top-style",
        "border-top-width", "box-shadow", "z-index",
        "margin-bottom", "margin-left", "margin-right", "padding-bottom",
        "padding-left", "padding-right", "padding-top",
        "position", "font-weight", "overflow-x", "overflow-y", "outline-color",
        "outline-style", "outline-width",
        "text-indent", "vertical-align", "background-attachment", "background-clip",
        "background-image", "background-origin", "background-position-x",
        "background-position-y", "background-repeat", "background-size",
        "border-style", "border-width", "box-sizing", "cursor",
        "font-feature-settings", "font-kerning", "font-optical-sizing",
        "font-variant-alternates", "font-variant-caps", "font-variant-east-asian",
        "font-variant-ligatures", "font-variant-numeric", "font-variant-position",
        "font-variation-settings", "letter-spacing", "opacity",
        "text-decoration", "text-decoration-color", "text-decoration-style",
        "text-emphasis-color", "text-emphasis-position", "text-overflow",
        "text-rendering", "text-shadow", "text-transform", "white-space-collapse",
        "word-spacing", "writing-mode", "align-items", "appearance", "background",
        "border", "flex-direction", "flex-shrink", "flex-wrap", "grid-auto-flow",
        "justify-content", "object-fit", "object-position", "overflow", "padding",
        "text-emphasis", "transform", "transition", "animation", "visibility",
        "white-space", "-webkit-font-smoothing", "-webkit-rtl-ordering",
        "-webkit-tap-highlight-color",
    }
)

# Values treated as absent when comparing styles.
DEFAULT_VALUES = frozenset(
    {"none", "0", "normal", "0px", "auto", "rgba(0, 0, 0, 0)", "rgb(0, 0, 0)"}
)

_COMPOUND_RE = re.compile(r"^([a-zA-Z][a-zA-Z0-9-]*)?((?:[.#][A-Za-z0-9_-]+)*)$")

# A filtered style map: keep-list properties with non-default values.
StyleMap = dict


@dataclass(frozen=True)
class SimpleSelector:
    """One compound step: optional tag plus any number of .class/#id parts."""

    tag: str | None = None
    classes: tuple[str, ...] = ()
    element_id: str | None = None


@dataclass(frozen=True)
class Selector:
    """Descendant chain; the last part matches the element itself."""

    parts: tuple[SimpleSelector, ...]

    def specificity(self) -> tuple[int, int, int]:
        ids = sum(1 for p in self.parts if p.element_id is not None)
        classes = sum(len(p.classes) for p in self.parts)
        tags = sum(1 for p in self.parts if p.tag is not None)
        return (ids, classes, tags)


@dataclass
class StyleRule:
    selector: Selector
    declarations: dict[str, str]
    source_order: int


def _parse_simple(token: str) -> SimpleSelector | None:
    m = _COMPOUND_RE.match(token)
    if not m or (m.group(1) is None and not m.group(2)):
        return None
    tag = m.group(1).lower() if m.group(1) else None
    classes: list[str] = []
    element_id: str | None = None
    for piece in re.findall(r"[.#][A-Za-z0-9_-]+", m.group(2)):
        if piece.startswith("."):
            classes.append(piece[1:])
        else:
            element_id = piece[1:]
    return SimpleSelector(tag=tag, classes=tuple(classes), element_id=element_id)


def _parse_selector(text: str) -> Selector | None:
    tokens = text.split()
    if not tokens:
        return None
    parts = []
    for token in tokens:
        simple = _parse_simple(token)
        if simple is None:
            return None
        parts.append(simple)
    return Selector(parts=tuple(parts))


def _skip_at_rule(css: str, i: int) -> int:
    """Return the index just past an at-rule starting at css[i] == '@'."""
    n = len(css)
    while i < n and css[i] not in "{;":
        i += 1
    if i >= n or css[i] == ";":
        return min(i + 1, n)
    depth = 0
    while i < n:
        if css[i] == "{":
            depth += 1
        elif css[i] == "}":
            depth -= 1
            if depth == 0:
                return i + 1
        i += 1
    return n


def parse_css(css: str, diagnostics: list[str] | None = None) -> list[StyleRule]:
    """Parse stylesheet text into rules in source order.

    At-rules are skipped whole and malformed declarations individually;
    skipped constructs are appended to ``diagnostics`` when a list is given.
    """
    sink = diagnostics if diagnostics is not None else []
    css = re.sub(r"/\*.*?\*/", " ", css, flags=re.S)
    rules: list[StyleRule] = []
    order = 0
    i, n = 0, len(css)
    while i < n:
        if css[i].isspace():
            i += 1
            continue
        if css[i] == "@":
            end = _skip_at_rule(css, i)
            sink.append(f"skipped at-rule: {css[i:end].split('{')[0].strip()}")
            i = end
            continue
        brace = css.find("{", i)
        if brace == -1:
            leftover = css[i:].strip()
            if leftover:
                sink.append(f"skipped trailing content: {leftover[:60]}")
            break
        close = css.find("}", brace)
        if close == -1:
            sink.append("skipped unterminated rule")
            break
        selector_text = css[i:brace].strip()
        body = css[brace + 1 : close]
        declarations = _parse_body(body, sink)
        for sel_text in selector_text.split(","):
            sel_text = sel_text.strip()
            if not sel_text:
                continue
            selector = _parse_selector(sel_text)
            if selector is None:
                sink.append(f"unsupported selector: {sel_text}")
                continue
            rules.append(StyleRule(selector=selector, declarations=dict(declarations), source_order=order))
            order += 1
        i = close + 1
    return rules


def _parse_body(body: str, sink: list[str]) -> dict[str, str]:
    out: dict[str, str] = {}
    for chunk in body.split(";"):
        if not chunk.strip():
            continue
        if ":" not in chunk:
            sink.append(f"skipped malformed declaration: {chunk.strip()[:60]}")
            continue
        prop, _, value = chunk.partition(":")
        prop = prop.strip().lower()
        value = value.strip()
        if not prop or not value:
            sink.append(f"skipped malformed declaration: {chunk.strip()[:60]}")
            continue
        out[prop] = value
    return out


def _matches_simple(tree: DomTree, node_id: int, simple: SimpleSelector) -> bool:
    node = tree.nodes[node_id]
    if simple.tag is not None and node.tag != simple.tag:
        return False
    if simple.element_id is not None and node.attributes.get("id") != simple.element_id:
        return False
    if simple.classes:
        classes = node.class_list()
        return all(c in classes for c in simple.classes)
    return True


def selector_matches(tree: DomTree, selector: Selector, node_id: int) -> bool:
    if not _matches_simple(tree, node_id, selector.parts[-1]):
        return False
    remaining = list(selector.parts[:-1])
    if not remaining:
        return True
    parents = tree.parents()
    current = parents.get(node_id)
    while current is not None and remaining:
        if _matches_simple(tree, current, remaining[-1]):
            remaining.pop()
        current = parents.get(current)
    return not remaining


def declared_style(tree: DomTree, rules: list[StyleRule], node_id: int) -> dict[str, str]:
    """Merge matching rules (ascending specificity, then source order) and inline style."""
    matching = [r for r in rules if selector_matches(tree, r.selector, node_id)]
    matching.sort(key=lambda r: (r.selector.specificity(), r.source_order))
    out: dict[str, str] = {}
    for rule in matching:
        out.update(rule.declarations)
    out.update(tree.nodes[node_id].inline_style)
    return out


def filter_style(raw: dict[str, str]) -> StyleMap:
    """Restrict to keep-list properties and drop default-valued entries.

    Values are trimmed and lowercased so comparison is plain string equality.
    """
    out: StyleMap = {}
    for prop, value in raw.items():
        prop = prop.strip().lower()
        if prop not in KEEP_PROPERTIES:
            continue
        value = value.strip().lower()
        if value in DEFAULT_VALUES:
            continue
        out[prop] = value
    return out


def style_similarity(a: StyleMap, b: StyleMap) -> float:
    """Matching properties over the union of properties; 1.0 when both empty."""
    union = a.keys() | b.keys()
    if not union:
        return 1.0
    matches = sum(1 for p in union if p in a and p in b and a[p] == b[p])
    return matches / len(union)


def collect_style_text(tree: DomTree) -> str:
    """Concatenated text of every <style> element, in document order."""
    chunks = []
    for nid in tree.subtree_ids(tree.root):
        node = tree.nodes[nid]
        if node.tag == "style" and node.text:
            chunks.append(node.text)
    return "\n".join(chunks)
