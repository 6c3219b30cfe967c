"""Shared fixtures: a deterministic synthetic page corpus and the mock
renderer / model subprocess scripts used to exercise the subprocess
contracts without a browser."""

from __future__ import annotations

import random
import sys
import textwrap
from pathlib import Path

import pytest

from iwb.dom import parse_html
from iwb.simplify import classify

LEAF_TAGS = ["p", "span", "a", "li", "button"]
TEXTS = [
    "alpha", "beta gamma", "delta", "epsilon zeta", "home", "about us",
    "contact", "latest news", "gallery", "sign up", "read more", "menu",
]


def make_page(level: str, seed: int) -> str:
    """Deterministic synthetic page whose classify() level equals ``level``.

    Every element carries exactly one attribute, so element and attribute
    counts track each other and land in the level's band.
    """
    rng = random.Random(f"{level}-{seed}")
    lo, hi = {"simple": (6, 14), "medium": (28, 50), "complex": (64, 90)}[level]
    target = rng.randint(lo, hi)  # body elements; head adds title + style
    parts = [
        "<html><head><title>",
        f"sample {level} {seed}",
        "</title><style>\n",
        ".box { color: #333333; padding: 4px; }\n"
        ".hot { background-color: #fafafa; }\n"
        "p { margin-top: 4px; }\n",
        "</style></head><body>",
    ]
    open_containers = 0
    made = 0
    while made < target:
        roll = rng.random()
        if open_containers > 0 and roll < 0.2:
            parts.append("</div>")
            open_containers -= 1
            continue
        made += 1
        attr = _pick_attribute(rng, made)
        if open_containers < 3 and roll > 0.75 and made < target:
            parts.append(f"<div{attr}>")
            open_containers += 1
            continue
        tag = rng.choice(LEAF_TAGS)
        text = rng.choice(TEXTS)
        parts.append(f"<{tag}{attr}>{text}</{tag}>")
    parts.extend("</div>" * open_containers)
    parts.append("</body></html>")
    return "".join(parts)


def _pick_attribute(rng: random.Random, index: int) -> str:
    choice = rng.randrange(5)
    if choice == 0:
        return ' class="box"'
    if choice == 1:
        return ' class="hot"'
    if choice == 2:
        return f' id="e{index}"'
    if choice == 3:
        return ' onclick="go()"'
    return ' style="color: rgb(10, 20, 30)"'


def page_with_counts(elements: int, attributes: int) -> str:
    """Page with exact non-skeleton element and attribute counts."""
    per = [0] * elements
    for j in range(attributes):
        per[j % elements] += 1
    parts = ["<html><head></head><body>"]
    for i in range(elements):
        attrs = "".join(f' data-a{k}="v"' for k in range(per[i]))
        parts.append(f"<div{attrs}></div>")
    parts.append("</body></html>")
    return "".join(parts)


@pytest.fixture(scope="session")
def fixture_corpus() -> list[tuple[str, str]]:
    """(level, html) pairs: at least 20 pages across all three levels."""
    pages = []
    for i in range(8):
        pages.append(("simple", make_page("simple", i)))
    for i in range(8):
        pages.append(("medium", make_page("medium", i)))
    for i in range(6):
        pages.append(("complex", make_page("complex", i)))
    for level, html in pages:
        assert classify(parse_html(html)).level == level
    return pages


CONSTANT_RENDERER = """\
import sys
from PIL import Image
log, inp, out = sys.argv[1], sys.argv[2], sys.argv[3]
with open(log, "a") as f:
    f.write(inp + "\\n")
Image.new("RGB", (8, 8), (10, 20, 30)).save(out)
"""

CONTENT_RENDERER = """\
import hashlib
import sys
from PIL import Image
log, inp, out = sys.argv[1], sys.argv[2], sys.argv[3]
with open(log, "a") as f:
    f.write(inp + "\\n")
digest = hashlib.sha256(open(inp, "rb").read()).digest()
Image.frombytes("RGB", (4, 4), (digest + digest)[:48]).save(out)
"""

# Fingerprints only elements that would produce visible boxes, honoring
# display:none from the page's own stylesheet (subtree-wide).
VISIBILITY_RENDERER = """\
import hashlib
import sys
from PIL import Image
from iwb.dom import parse_html, traverse
from iwb.style import collect_style_text, declared_style, parse_css
log, inp, out = sys.argv[1], sys.argv[2], sys.argv[3]
with open(log, "a") as f:
    f.write(inp + "\\n")
tree = parse_html(open(inp, "rb").read())
rules = parse_css(collect_style_text(tree))
parents = tree.parents()
hidden = set()
visible = []
for nid in traverse(tree):
    node = tree.nodes[nid]
    if parents.get(nid) in hidden:
        hidden.add(nid)
        continue
    if declared_style(tree, rules, nid).get("display", "").strip() == "none":
        hidden.add(nid)
        continue
    if node.tag in ("html", "head", "title", "meta", "link", "style", "script"):
        continue
    visible.append((node.tag, node.text, tuple(sorted(node.attributes.items()))))
digest = hashlib.sha256(repr(visible).encode()).digest()
Image.frombytes("RGB", (4, 4), (digest + digest)[:48]).save(out)
"""

FAILING_RENDERER = """\
import sys
from PIL import Image
log, limit, inp, out = sys.argv[1], sys.argv[2], sys.argv[3], sys.argv[4]
try:
    calls = len(open(log).readlines())
except FileNotFoundError:
    calls = 0
with open(log, "a") as f:
    f.write(inp + "\\n")
if calls + 1 > int(limit):
    sys.exit(3)
Image.new("RGB", (8, 8), (10, 20, 30)).save(out)
"""

ECHO_MODEL = """\
import json
import sys
request = json.load(sys.stdin)
message = request["messages"][0]
body = "<p>prompt chars: " + str(len(message["text"])) + "</p>"
html = "<html><head><title>echo</title></head><body>" + body + "</body></html>"
print(json.dumps({"text": "```html\\n" + html + "\\n```"}))
"""


@pytest.fixture(scope="session")
def helper_scripts(tmp_path_factory) -> dict[str, Path]:
    d = tmp_path_factory.mktemp("scripts")
    scripts = {
        "constant_renderer": CONSTANT_RENDERER,
        "content_renderer": CONTENT_RENDERER,
        "visibility_renderer": VISIBILITY_RENDERER,
        "failing_renderer": FAILING_RENDERER,
        "echo_model": ECHO_MODEL,
    }
    out = {}
    for name, source in scripts.items():
        path = d / f"{name}.py"
        path.write_text(textwrap.dedent(source), encoding="utf-8")
        out[name] = path
    return out


def renderer_template(script: Path, log: Path, *extra: str) -> str:
    args = " ".join([str(log), *extra])
    return f"{sys.executable} {script} {args} {{input}} {{output}}"
