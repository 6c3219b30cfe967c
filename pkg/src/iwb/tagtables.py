"""Per-tag attribute comparison tables.

Each entry lists the attributes worth comparing for a tag and whether the
comparison is strong (weight 2) or weak (weight 1). The special key
``"text content"`` compares the nodes' direct text via the text-similarity
score instead of exact attribute equality. Tags without a table (or with
an empty one, like ``br``) fall back to exact equality over the union of
raw attributes.
"""

from __future__ import annotations

STRONG = "strong"
WEAK = "weak"

TEXT_CONTENT = "text content"

COMPARISON_WEIGHTS = {STRONG: 2, WEAK: 1}

ATTRIBUTE_TABLES: dict[str, dict[str, str]] = {
    "a": {
        TEXT_CONTENT: STRONG,
        "href": WEAK,
        "target": WEAK,
        "rel": WEAK,
        "download": WEAK,
        "hreflang": WEAK,
        "media": WEAK,
        "type": WEAK,
    },
    "img": {
        "alt": STRONG,
        "src": WEAK,
        "srcset": WEAK,
        "sizes": WEAK,
    },
    "button": {
        TEXT_CONTENT: STRONG,
        "type": WEAK,
        "onclick": WEAK,
        "disabled": WEAK,
        "name": WEAK,
        "value": WEAK,
    },
    "input": {
        "value": STRONG,
        "placeholder": STRONG,
        "required": STRONG,
        "checked": STRONG,
        "readonly": STRONG,
        "type": WEAK,
        "name": WEAK,
        "min": WEAK,
        "max": WEAK,
        "step": WEAK,
        "pattern": WEAK,
    },
    "div": {
        "class": WEAK,
        "id": WEAK,
        "style": WEAK,
    },
    "h1": {
        TEXT_CONTENT: STRONG,
        "class": WEAK,
        "id": WEAK,
        "style": WEAK,
    },
    "p": {
        TEXT_CONTENT: STRONG,
        "class": WEAK,
        "id": WEAK,
        "style": WEAK,
    },
    "ul": {
        "class": WEAK,
        "id": WEAK,
        "style": WEAK,
    },
    "li": {
        TEXT_CONTENT: STRONG,
        "class": WEAK,
        "id": WEAK,
        "style": WEAK,
    },
    "span": {
        TEXT_CONTENT: STRONG,
        "class": WEAK,
        "id": WEAK,
        "style": WEAK,
    },
    "table": {
        "class": WEAK,
        "id": WEAK,
        "style": WEAK,
    },
    "thead": {
        "class": WEAK,
        "id": WEAK,
        "style": WEAK,
    },
    "tbody": {
        "class": WEAK,
        "id": WEAK,
        "style": WEAK,
    },
    "tr": {
        "class": WEAK,
        "id": WEAK,
        "style": WEAK,
    },
    "td": {
        TEXT_CONTENT: STRONG,
        "class": WEAK,
        "id": WEAK,
        "style": WEAK,
        "colspan": WEAK,
        "rowspan": WEAK,
    },
    "th": {
        TEXT_CONTENT: STRONG,
        "class": WEAK,
        "id": WEAK,
        "style": WEAK,
        "colspan": WEAK,
        "rowspan": WEAK,
        "scope": WEAK,
    },
    "label": {
        TEXT_CONTENT: STRONG,
        "for": STRONG,
        "class": WEAK,
        "id": WEAK,
        "style": WEAK,
    },
    "select": {
        "name": WEAK,
        "required": WEAK,
        "multiple": WEAK,
        "class": WEAK,
        "id": WEAK,
        "style": WEAK,
    },
    "option": {
        TEXT_CONTENT: STRONG,
        "value": STRONG,
        "selected": STRONG,
    },
    "textarea": {
        "placeholder": STRONG,
        "required": STRONG,
        "readonly": STRONG,
        "name": WEAK,
        "rows": WEAK,
        "cols": WEAK,
        "class": WEAK,
        "id": WEAK,
        "style": WEAK,
    },
    "footer": {
        "class": WEAK,
        "id": WEAK,
        "style": WEAK,
    },
    "header": {
        "class": WEAK,
        "id": WEAK,
        "style": WEAK,
    },
    "article": {
        "class": WEAK,
        "id": WEAK,
        "style": WEAK,
    },
    "section": {
        "class": WEAK,
        "id": WEAK,
        "style": WEAK,
    },
    "nav": {
        "class": WEAK,
        "id": WEAK,
        "style": WEAK,
    },
    "aside": {
        "class": WEAK,
        "id": WEAK,
        "style": WEAK,
    },
    "figure": {
        "class": WEAK,
        "id": WEAK,
        "style": WEAK,
    },
    "figcaption": {
        TEXT_CONTENT: STRONG,
        "class": WEAK,
        "id": WEAK,
        "style": WEAK,
    },
    "main": {
        "class": WEAK,
        "id": WEAK,
        "style": WEAK,
    },
    "hr": {
        "class": WEAK,
        "id": WEAK,
        "style": WEAK,
    },
    "br": {},
    "link": {
        "href": WEAK,
        "rel": WEAK,
        "media": WEAK,
        "type": WEAK,
    },
    "meta": {
        "content": STRONG,
        "name": WEAK,
        "http-equiv": WEAK,
        "charset": WEAK,
    },
    "script": {
        "src": WEAK,
        "type": WEAK,
        "async": WEAK,
        "defer": WEAK,
    },
}
