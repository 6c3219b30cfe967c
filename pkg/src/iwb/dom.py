"""Tolerant HTML parsing into a normalized DOM tree.

The parser rides on the stdlib tokenizer and applies a fixed set of
normalizations so that every document, fragment or not, comes out with
the same skeleton: a single lowercase ``html`` root with ``head`` and
``body`` children, comments dropped, whitespace-only text dropped, and
unclosed tags closed at their parent boundary. Node ids are assigned in
document order. Trees are treated as immutable once built; the mutation
helpers on :class:`DomTree` exist for transformation passes that work on
a :meth:`DomTree.clone`.
"""

from __future__ import annotations

import hashlib
import html as _htmlmod
from dataclasses import dataclass, field
from html.parser import HTMLParser

# The six event bindings that participate in scoring.
PREDEFINED_EVENTS = frozenset(
    {"onclick", "onload", "onmouseover", "onmouseout", "onchange", "onsubmit"}
)

VOID_TAGS = frozenset(
    {
        "area", "base", "br", "col", "embed", "hr", "img", "input",
        "link", "meta", "param", "source", "track", "wbr",
    }
)

# Tags routed into <head> when they appear before any body content.
HEAD_TAGS = frozenset(
    {"base", "basefont", "bgsound", "noscript", "link", "meta", "title", "style", "script"}
)

# Element text kept verbatim (no whitespace dropping, no entity escaping).
RAW_TEXT_TAGS = frozenset({"script", "style"})

DEFAULT_MAX_DEPTH = 512


class ParseError(ValueError):
    """Raised for undecodable input or nesting beyond the depth limit."""


def parse_declarations(text: str) -> dict[str, str]:
    """Parse a CSS declaration list (``prop: value; ...``) into an ordered map.

    Property names are lowercased; malformed entries are skipped.
    """
    out: dict[str, str] = {}
    for chunk in text.split(";"):
        if ":" not in chunk:
            continue
        prop, _, value = chunk.partition(":")
        prop = prop.strip().lower()
        if not prop:
            continue
        out[prop] = value.strip()
    return out


@dataclass
class DomNode:
    """One element: tag, attributes, direct text content, and child ids."""

    node_id: int
    tag: str
    attributes: dict[str, str]
    text: str = ""
    inline_style: dict[str, str] = field(default_factory=dict)
    event_bindings: set[str] = field(default_factory=set)
    children: list[int] = field(default_factory=list)

    def refresh_derived(self) -> None:
        """Recompute inline_style and event_bindings from the attribute map."""
        self.inline_style = parse_declarations(self.attributes.get("style", ""))
        self.event_bindings = {k for k in self.attributes if k.startswith("on")}

    def class_list(self) -> list[str]:
        return self.attributes.get("class", "").split()

    def copy(self) -> "DomNode":
        return DomNode(
            node_id=self.node_id,
            tag=self.tag,
            attributes=dict(self.attributes),
            text=self.text,
            inline_style=dict(self.inline_style),
            event_bindings=set(self.event_bindings),
            children=list(self.children),
        )


@dataclass
class DomTree:
    """Normalized document: node store keyed by id plus the ``html`` root id."""

    root: int
    nodes: dict[int, DomNode]
    source_hash: str = ""

    def node(self, node_id: int) -> DomNode:
        return self.nodes[node_id]

    @property
    def head_id(self) -> int:
        return self._skeleton_child("head")

    @property
    def body_id(self) -> int:
        return self._skeleton_child("body")

    def _skeleton_child(self, tag: str) -> int:
        for cid in self.nodes[self.root].children:
            if self.nodes[cid].tag == tag:
                return cid
        raise KeyError(f"normalized tree has no <{tag}> under the root")

    def parents(self) -> dict[int, int]:
        """Child id -> parent id map (the root has no entry)."""
        out: dict[int, int] = {}
        for nid, node in self.nodes.items():
            for cid in node.children:
                out[cid] = nid
        return out

    def clone(self) -> "DomTree":
        return DomTree(
            root=self.root,
            nodes={nid: n.copy() for nid, n in self.nodes.items()},
            source_hash=self.source_hash,
        )

    def subtree_ids(self, node_id: int) -> list[int]:
        """Pre-order ids of the subtree rooted at node_id."""
        out: list[int] = []
        stack = [node_id]
        while stack:
            nid = stack.pop()
            out.append(nid)
            stack.extend(reversed(self.nodes[nid].children))
        return out

    def remove_subtree(self, node_id: int) -> int:
        """Detach node_id and its descendants; returns the number of nodes removed."""
        if node_id == self.root:
            raise ValueError("cannot remove the document root")
        parent = self.parents()[node_id]
        self.nodes[parent].children.remove(node_id)
        doomed = self.subtree_ids(node_id)
        for nid in doomed:
            del self.nodes[nid]
        return len(doomed)

    def set_attribute(self, node_id: int, name: str, value: str) -> None:
        node = self.nodes[node_id]
        node.attributes[name.lower()] = value
        node.refresh_derived()

    def remove_attribute(self, node_id: int, name: str) -> None:
        node = self.nodes[node_id]
        node.attributes.pop(name.lower(), None)
        node.refresh_derived()

    def new_node(self, tag: str, attributes: dict[str, str] | None = None, text: str = "") -> int:
        nid = max(self.nodes) + 1
        node = DomNode(node_id=nid, tag=tag.lower(), attributes=dict(attributes or {}), text=text)
        node.refresh_derived()
        self.nodes[nid] = node
        return nid

    def insert_first_child(self, parent_id: int, child_id: int) -> None:
        self.nodes[parent_id].children.insert(0, child_id)


class _TreeBuilder(HTMLParser):
    """Stack-based tree builder over the stdlib tokenizer."""

    def __init__(self, max_depth: int) -> None:
        super().__init__(convert_charrefs=True)
        self.max_depth = max_depth
        self.nodes: dict[int, DomNode] = {}
        self.stack: list[int] = []
        self.html_id: int | None = None
        self.head_id: int | None = None
        self.body_id: int | None = None
        self.head_closed = False
        self._next_id = 0

    # -- node plumbing ------------------------------------------------

    def _make(self, tag: str, attrs) -> int:
        nid = self._next_id
        self._next_id += 1
        amap: dict[str, str] = {}
        for name, value in attrs or []:
            name = name.lower()
            if name not in amap:  # first occurrence wins
                amap[name] = value if value is not None else ""
        node = DomNode(node_id=nid, tag=tag, attributes=amap)
        node.refresh_derived()
        self.nodes[nid] = node
        return nid

    def _push(self, nid: int) -> None:
        self.stack.append(nid)
        if len(self.stack) > self.max_depth:
            raise ParseError(f"nesting depth exceeds limit of {self.max_depth}")

    def _ensure_html(self) -> None:
        if self.html_id is None:
            self.html_id = self._make("html", [])
        if not self.stack:
            self._push(self.html_id)

    def _ensure_head(self) -> None:
        self._ensure_html()
        if self.head_id is None:
            self.head_id = self._make("head", [])
            self.nodes[self.html_id].children.append(self.head_id)

    def _open_body(self) -> None:
        """Close out the head phase and make <body> the insertion point."""
        self._ensure_html()
        if self.stack and self.stack[-1] == self.head_id:
            self.stack.pop()
        self._ensure_head()
        self.head_closed = True
        if self.body_id is None:
            self.body_id = self._make("body", [])
            self.nodes[self.html_id].children.append(self.body_id)
        if self.body_id not in self.stack:
            self._push(self.body_id)

    def _insertion_parent(self, tag: str | None) -> int:
        """Resolve (creating skeleton pieces as needed) where content goes."""
        self._ensure_html()
        top = self.stack[-1]
        if top == self.html_id:
            if tag is not None and tag in HEAD_TAGS and not self.head_closed:
                self._ensure_head()
                if self.head_id not in self.stack:
                    self._push(self.head_id)
                return self.head_id
            self._open_body()
            return self.body_id
        if top == self.head_id and (tag is None or tag not in HEAD_TAGS):
            self._open_body()
            return self.body_id
        return top

    def _merge_attrs(self, nid: int, attrs) -> None:
        node = self.nodes[nid]
        for name, value in attrs or []:
            name = name.lower()
            if name not in node.attributes:
                node.attributes[name] = value if value is not None else ""
        node.refresh_derived()

    # -- tokenizer callbacks -------------------------------------------

    def handle_starttag(self, tag: str, attrs) -> None:
        if tag == "html":
            if self.html_id is None:
                self.html_id = self._make("html", attrs)
                self._push(self.html_id)
            else:
                self._merge_attrs(self.html_id, attrs)
            return
        if tag == "head":
            self._ensure_html()
            if self.head_id is None and not self.head_closed:
                self.head_id = self._make("head", attrs)
                self.nodes[self.html_id].children.append(self.head_id)
                self._push(self.head_id)
            elif self.head_id is not None:
                self._merge_attrs(self.head_id, attrs)
            return
        if tag == "body":
            if self.body_id is None:
                self._ensure_head()
                self.head_closed = True
                while self.stack and self.stack[-1] != self.html_id:
                    self.stack.pop()
                self.body_id = self._make("body", attrs)
                self.nodes[self.html_id].children.append(self.body_id)
                self._push(self.body_id)
            else:
                self._merge_attrs(self.body_id, attrs)
            return
        parent = self._insertion_parent(tag)
        nid = self._make(tag, attrs)
        self.nodes[parent].children.append(nid)
        if tag not in VOID_TAGS:
            self._push(nid)

    def handle_endtag(self, tag: str) -> None:
        for i in range(len(self.stack) - 1, -1, -1):
            if self.nodes[self.stack[i]].tag == tag:
                while len(self.stack) > i:
                    popped = self.stack.pop()
                    if popped == self.head_id:
                        self.head_closed = True
                return
        # no matching open element: ignore

    def handle_data(self, data: str) -> None:
        if self.stack and self.nodes[self.stack[-1]].tag in RAW_TEXT_TAGS:
            self.nodes[self.stack[-1]].text += data
            return
        if not data.strip():
            return
        parent = self._insertion_parent(None)
        self.nodes[parent].text += data

    def handle_comment(self, data: str) -> None:
        pass

    def handle_decl(self, decl: str) -> None:
        pass

    def unknown_decl(self, data: str) -> None:
        pass

    def handle_pi(self, data: str) -> None:
        pass

    # -- finalization ---------------------------------------------------

    def finish(self) -> DomTree:
        self._ensure_html()
        self._ensure_head()
        if self.body_id is None:
            self.body_id = self._make("body", [])
            self.nodes[self.html_id].children.append(self.body_id)
        self.stack.clear()
        return DomTree(root=self.html_id, nodes=self.nodes)


def parse_html(source: str | bytes, max_depth: int = DEFAULT_MAX_DEPTH) -> DomTree:
    """Parse HTML text (document or fragment) into a normalized tree."""
    if isinstance(source, (bytes, bytearray)):
        try:
            text = bytes(source).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not valid UTF-8: {exc}") from exc
    else:
        text = source
    builder = _TreeBuilder(max_depth=max_depth)
    builder.feed(text)
    builder.close()
    tree = builder.finish()
    tree.source_hash = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return tree


def traverse(tree: DomTree) -> list[int]:
    """Document-order (pre-order) listing of all element node ids."""
    return tree.subtree_ids(tree.root)


def extract_events(node: DomNode) -> set[str]:
    """The subset of the six predefined events bound on the node."""
    return node.event_bindings & PREDEFINED_EVENTS


def _escape_text(text: str) -> str:
    return _htmlmod.escape(text, quote=False)


def _escape_attr(value: str) -> str:
    return _htmlmod.escape(value, quote=True)


def serialize(tree: DomTree) -> str:
    """Emit HTML that reparses to a structurally equal tree.

    Direct text is emitted before child elements, matching the text model
    (concatenated direct text content, interleaving not preserved).
    """
    out: list[str] = []
    stack: list[tuple[str, int]] = [("open", tree.root)]
    while stack:
        op, nid = stack.pop()
        node = tree.nodes[nid]
        if op == "close":
            out.append(f"</{node.tag}>")
            continue
        attrs = "".join(f' {k}="{_escape_attr(v)}"' for k, v in node.attributes.items())
        out.append(f"<{node.tag}{attrs}>")
        if node.tag in VOID_TAGS:
            continue
        if node.text:
            out.append(node.text if node.tag in RAW_TEXT_TAGS else _escape_text(node.text))
        stack.append(("close", nid))
        for cid in reversed(node.children):
            stack.append(("open", cid))
    return "".join(out)


def structural_equal(a: DomTree, b: DomTree) -> bool:
    """Equality over tags, attributes, text, and nesting (ids ignored)."""
    stack = [(a.root, b.root)]
    while stack:
        ia, ib = stack.pop()
        na, nb = a.nodes[ia], b.nodes[ib]
        if na.tag != nb.tag or na.attributes != nb.attributes or na.text != nb.text:
            return False
        if len(na.children) != len(nb.children):
            return False
        stack.extend(zip(na.children, nb.children))
    return True
