"""Element and layout accuracy for generated-vs-reference pages.

Each candidate ("test") element is scored against a matched reference
("label") element from six perspectives: tag, text content, attributes,
style, JavaScript event bindings, and children. Element accuracy is the
fraction of reference elements whose matched candidate averages above the
threshold; layout accuracy is the LCS of the two document-order tag
sequences over the reference length.

The html/head/body skeleton that normalization guarantees on every parse
is excluded from element matching and counting (an empty candidate page
must score 0, and a fixture's element count should mean its content
elements); the skeleton still participates in the layout sequence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .dom import DomNode, DomTree, parse_html, traverse
from .style import StyleMap, collect_style_text, declared_style, filter_style, parse_css, style_similarity
from .tagtables import ATTRIBUTE_TABLES, COMPARISON_WEIGHTS, TEXT_CONTENT

PERSPECTIVES = ("tag", "text", "attribute", "style", "javascript", "children")

SCORED_EVENTS = ("onclick", "onload", "onmouseover", "onmouseout", "onchange", "onsubmit")


class EmptyReference(ValueError):
    """The reference layout sequence is empty."""


class LengthMismatch(ValueError):
    """Rank lists have different lengths."""


class NotAPermutation(ValueError):
    """A rank list is not a permutation of 1..n."""


@dataclass
class EvalConfig:
    threshold: float = 0.9
    text_similarity_floor: None = None
    matching_mode: str = "one-to-one"

    def __post_init__(self) -> None:
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must be in [0,1], got {self.threshold}")


@dataclass
class ElementScore:
    """Six perspective scores and their mean for one test element."""

    test_node: int
    label_node: int | None
    perspectives: dict[str, float]
    average: float


@dataclass
class LayoutSequence:
    tokens: list[str]


@dataclass
class EvalReport:
    element_accuracy: float
    layout_accuracy: float
    element_scores: list[ElementScore]
    label_count: int
    test_count: int
    matched_above_threshold: int


def lcs_length(a: list, b: list) -> int:
    """Longest-common-subsequence length by dynamic programming."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, 1):
            if x == y:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def tag_score(a: DomNode, b: DomNode) -> int:
    return 1 if a.tag == b.tag else 0


def text_similarity(a: str, b: str) -> float:
    """Character-LCS ratio 2|LCS|/(|a|+|b|); 1.0 when both strings are empty."""
    if not a and not b:
        return 1.0
    return 2 * lcs_length(list(a), list(b)) / (len(a) + len(b))


def attribute_score(a: DomNode, b: DomNode) -> float:
    """Weighted attribute agreement per the tag's comparison table.

    Rows present on at least one node contribute; strong rows weigh twice
    weak ones. The "text content" row scores via text similarity, other
    rows by exact equality. Tags without a table compare the raw attribute
    union. 1.0 when nothing is present on either node.
    """
    table = ATTRIBUTE_TABLES.get(a.tag)
    if not table:
        names = a.attributes.keys() | b.attributes.keys()
        if not names:
            return 1.0
        agree = sum(
            1 for n in names if n in a.attributes and n in b.attributes and a.attributes[n] == b.attributes[n]
        )
        return agree / len(names)
    total = 0
    score = 0.0
    for attr, strength in table.items():
        weight = COMPARISON_WEIGHTS[strength]
        if attr == TEXT_CONTENT:
            if not a.text and not b.text:
                continue
            total += weight
            score += weight * text_similarity(a.text, b.text)
            continue
        if attr not in a.attributes and attr not in b.attributes:
            continue
        total += weight
        if attr in a.attributes and attr in b.attributes and a.attributes[attr] == b.attributes[attr]:
            score += weight
    if total == 0:
        return 1.0
    return score / total


def javascript_score(a: DomNode, b: DomNode) -> float:
    """Fraction of the six predefined events whose bound-state agrees."""
    agree = sum(1 for e in SCORED_EVENTS if (e in a.event_bindings) == (e in b.event_bindings))
    return agree / len(SCORED_EVENTS)


def children_score(a: DomNode, b: DomNode, tree_a: DomTree, tree_b: DomTree) -> float:
    """Dice coefficient over the multisets of direct-child tag names."""
    tags_a = [tree_a.nodes[c].tag for c in a.children]
    tags_b = [tree_b.nodes[c].tag for c in b.children]
    if not tags_a and not tags_b:
        return 1.0
    overlap = 0
    counts = {}
    for t in tags_a:
        counts[t] = counts.get(t, 0) + 1
    for t in tags_b:
        if counts.get(t, 0) > 0:
            counts[t] -= 1
            overlap += 1
    return 2 * overlap / (len(tags_a) + len(tags_b))


def scoreable_elements(tree: DomTree) -> list[int]:
    """Document-order element ids minus the html/head/body skeleton."""
    skeleton = {tree.root, tree.head_id, tree.body_id}
    return [nid for nid in traverse(tree) if nid not in skeleton]


def _pair_score(
    test: DomTree,
    label: DomTree,
    t: int,
    l: int,
    styles_t: dict[int, StyleMap],
    styles_l: dict[int, StyleMap],
) -> ElementScore:
    a = test.nodes[t]
    b = label.nodes[l]
    perspectives = {
        "tag": float(tag_score(a, b)),
        "text": text_similarity(a.text, b.text),
        "attribute": attribute_score(a, b),
        "style": style_similarity(styles_t[t], styles_l[l]),
        "javascript": javascript_score(a, b),
        "children": children_score(a, b, test, label),
    }
    average = sum(perspectives.values()) / len(PERSPECTIVES)
    return ElementScore(test_node=t, label_node=l, perspectives=perspectives, average=average)


def match_elements(
    test: DomTree,
    label: DomTree,
    styles_t: dict[int, StyleMap],
    styles_l: dict[int, StyleMap],
) -> list[ElementScore]:
    """One-to-one greedy matching over equal-tag pairs.

    Pairs are taken in order of descending average score, ties broken by
    label then test document order. Test elements left unmatched score
    zero on every perspective.
    """
    test_ids = scoreable_elements(test)
    label_ids = scoreable_elements(label)
    test_order = {nid: i for i, nid in enumerate(test_ids)}
    label_order = {nid: i for i, nid in enumerate(label_ids)}

    label_by_tag: dict[str, list[int]] = {}
    for nid in label_ids:
        label_by_tag.setdefault(label.nodes[nid].tag, []).append(nid)

    candidates: list[tuple[float, int, int, ElementScore]] = []
    for t in test_ids:
        for l in label_by_tag.get(test.nodes[t].tag, ()):
            score = _pair_score(test, label, t, l, styles_t, styles_l)
            candidates.append((score.average, label_order[l], test_order[t], score))
    candidates.sort(key=lambda c: (-c[0], c[1], c[2]))

    matched: dict[int, ElementScore] = {}
    used_labels: set[int] = set()
    for _, _, _, score in candidates:
        if score.test_node in matched or score.label_node in used_labels:
            continue
        matched[score.test_node] = score
        used_labels.add(score.label_node)

    out: list[ElementScore] = []
    for t in test_ids:
        if t in matched:
            out.append(matched[t])
        else:
            out.append(
                ElementScore(
                    test_node=t,
                    label_node=None,
                    perspectives={p: 0.0 for p in PERSPECTIVES},
                    average=0.0,
                )
            )
    return out


def element_accuracy(scores: list[ElementScore], label_count: int, config: EvalConfig) -> float:
    """Matched elements strictly above the threshold over the label count."""
    if label_count == 0:
        return 1.0 if not scores else 0.0
    above = sum(1 for s in scores if s.label_node is not None and s.average > config.threshold)
    return above / label_count


def layout_sequence(tree: DomTree) -> LayoutSequence:
    return LayoutSequence(tokens=[tree.nodes[nid].tag for nid in traverse(tree)])


def layout_accuracy(l1: LayoutSequence, l2: LayoutSequence) -> float:
    """LCS of the two tag sequences over the reference (l1) length."""
    if not l1.tokens:
        raise EmptyReference("reference layout sequence is empty")
    return lcs_length(l1.tokens, l2.tokens) / len(l1.tokens)


def rank_correlation(r1: list[int], r2: list[int]) -> float:
    """Pearson correlation of two rank vectors (Spearman's rho)."""
    if len(r1) != len(r2):
        raise LengthMismatch(f"rank lists differ in length: {len(r1)} vs {len(r2)}")
    n = len(r1)
    if n < 2:
        raise NotAPermutation("rank lists need at least two entries")
    expected = list(range(1, n + 1))
    for ranks in (r1, r2):
        if sorted(ranks) != expected:
            raise NotAPermutation(f"not a permutation of 1..{n}: {ranks}")
    d2 = sum((x - y) ** 2 for x, y in zip(r1, r2))
    return 1 - 6 * d2 / (n * (n * n - 1))


def node_styles(tree: DomTree) -> dict[int, StyleMap]:
    """Filtered declared style for every element, from the document's own CSS."""
    rules = parse_css(collect_style_text(tree))
    return {nid: filter_style(declared_style(tree, rules, nid)) for nid in traverse(tree)}


def evaluate_trees(label: DomTree, test: DomTree, config: EvalConfig | None = None) -> EvalReport:
    """Full evaluation of a candidate tree against a reference tree."""
    config = config or EvalConfig()
    styles_l = node_styles(label)
    styles_t = node_styles(test)
    scores = match_elements(test, label, styles_t, styles_l)
    label_count = len(scoreable_elements(label))
    test_count = len(scoreable_elements(test))
    above = sum(1 for s in scores if s.label_node is not None and s.average > config.threshold)
    ea = element_accuracy(scores, label_count, config)
    la = layout_accuracy(layout_sequence(label), layout_sequence(test))
    return EvalReport(
        element_accuracy=ea,
        layout_accuracy=la,
        element_scores=scores,
        label_count=label_count,
        test_count=test_count,
        matched_above_threshold=above,
    )


def evaluate_documents(label_html: str | bytes, test_html: str | bytes, config: EvalConfig | None = None) -> EvalReport:
    """Parse and evaluate a candidate document against a reference document."""
    return evaluate_trees(parse_html(label_html), parse_html(test_html), config)
