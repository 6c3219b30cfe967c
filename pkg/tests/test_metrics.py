"""Perspective scores, matching, accuracy formulas, LCS, and rank correlation.

Expected values are either trivial consequences of the definitions or were
computed with the brute-force oracles in this file (exhaustive subsequence
enumeration for LCS, hand-weighted sums for attribute scores).
"""

from __future__ import annotations

import random

import pytest

from iwb.dom import parse_html, traverse
from iwb.metrics import (
    EmptyReference,
    EvalConfig,
    ElementScore,
    LayoutSequence,
    LengthMismatch,
    NotAPermutation,
    attribute_score,
    children_score,
    element_accuracy,
    evaluate_documents,
    javascript_score,
    layout_accuracy,
    layout_sequence,
    lcs_length,
    match_elements,
    node_styles,
    rank_correlation,
    scoreable_elements,
    tag_score,
    text_similarity,
)


def brute_lcs(a, b) -> int:
    """Exhaustive subsequence enumeration; only viable for short inputs."""

    def subsequences(seq):
        out = {()}
        for x in seq:
            out |= {prefix + (x,) for prefix in out}
        return out

    common = subsequences(tuple(a)) & subsequences(tuple(b))
    return max(len(c) for c in common)


def node_of(html: str, tag: str):
    tree = parse_html(html)
    for nid in traverse(tree):
        if tree.nodes[nid].tag == tag:
            return tree, tree.nodes[nid]
    raise AssertionError(f"no <{tag}>")


# -- tag ---------------------------------------------------------------


def test_tag_score():
    _, div = node_of("<div></div>", "div")
    _, p = node_of("<p></p>", "p")
    _, div_upper = node_of("<DIV></DIV>", "div")
    assert tag_score(div, div) == 1
    assert tag_score(div, p) == 0
    assert tag_score(div_upper, div) == 1


# -- text --------------------------------------------------------------


def test_text_similarity_extremes():
    assert text_similarity("abc", "abc") == 1.0
    assert text_similarity("abc", "") == 0.0
    assert text_similarity("", "") == 1.0


def test_text_similarity_frozen_example():
    # character LCS of "abcd"/"abed" is "abd" (3): 2*3/8
    assert text_similarity("abcd", "abed") == 0.75


def test_text_similarity_matches_brute_force():
    rng = random.Random(3)
    for _ in range(150):
        a = "".join(rng.choice("abcde") for _ in range(rng.randrange(0, 13)))
        b = "".join(rng.choice("abcde") for _ in range(rng.randrange(0, 13)))
        expected = 1.0 if not a and not b else 2 * brute_lcs(a, b) / (len(a) + len(b))
        assert text_similarity(a, b) == expected
        assert text_similarity(a, b) == text_similarity(b, a)
        assert (text_similarity(a, b) == 1.0) == (a == b)


# -- attributes ---------------------------------------------------------


def test_attribute_score_weak_mismatch():
    # href matches (weight 1), target differs (weight 1), no text: (1+0)/2
    _, a1 = node_of('<a href="x" target="_blank"></a>', "a")
    _, a2 = node_of('<a href="x" target="_self"></a>', "a")
    assert attribute_score(a1, a2) == 0.5


def test_attribute_score_identical():
    _, a1 = node_of('<a href="x" rel="nofollow">go</a>', "a")
    _, a2 = node_of('<a href="x" rel="nofollow">go</a>', "a")
    assert attribute_score(a1, a2) == 1.0


def test_attribute_score_br_vacuous():
    _, br1 = node_of("<br>", "br")
    _, br2 = node_of("<br>", "br")
    assert attribute_score(br1, br2) == 1.0


def test_attribute_score_strong_weight_double():
    # value is strong (2) and matches; type is weak (1) and differs: 2/3
    _, i1 = node_of('<input value="x" type="text">', "input")
    _, i2 = node_of('<input value="x" type="password">', "input")
    assert attribute_score(i1, i2) == pytest.approx(2 / 3)


def test_attribute_score_text_content_row_uses_similarity():
    # p rows present: text content only (strong); score is the text similarity
    _, p1 = node_of("<p>abcd</p>", "p")
    _, p2 = node_of("<p>abed</p>", "p")
    assert attribute_score(p1, p2) == 0.75


def test_attribute_score_unknown_tag_falls_back_to_raw_union():
    _, x1 = node_of('<widget a="1" b="2"></widget>', "widget")
    _, x2 = node_of('<widget a="1" c="3"></widget>', "widget")
    # union {a,b,c}: only a agrees
    assert attribute_score(x1, x2) == pytest.approx(1 / 3)


def test_attribute_score_missing_on_one_side_counts_as_mismatch():
    _, d1 = node_of('<div class="x"></div>', "div")
    _, d2 = node_of("<div></div>", "div")
    assert attribute_score(d1, d2) == 0.0


# -- javascript ----------------------------------------------------------


def test_javascript_score_five_sixths():
    _, a = node_of('<button onclick="f()">x</button>', "button")
    _, b = node_of('<button onclick="f()" onchange="g()">x</button>', "button")
    assert javascript_score(a, b) == pytest.approx(5 / 6)


def test_javascript_score_vacuous_and_equal():
    _, a = node_of("<div></div>", "div")
    _, b = node_of("<div></div>", "div")
    assert javascript_score(a, b) == 1.0
    _, c = node_of('<div onclick="f()"></div>', "div")
    _, d = node_of('<div onclick="h()"></div>', "div")
    assert javascript_score(c, d) == 1.0  # presence is compared, not handler text


# -- children ------------------------------------------------------------


def test_children_score_multiset_dice():
    ta, a = node_of("<div><p>1</p><p>2</p><span>3</span></div>", "div")
    tb, b = node_of("<div><p>1</p><span>2</span><span>3</span></div>", "div")
    assert children_score(a, b, ta, tb) == pytest.approx(2 / 3)


def test_children_score_leaves_and_disjoint():
    ta, a = node_of("<div></div>", "div")
    tb, b = node_of("<div></div>", "div")
    assert children_score(a, b, ta, tb) == 1.0
    tc, c = node_of("<div><p>x</p></div>", "div")
    td, d = node_of("<div><section>y</section></div>", "div")
    assert children_score(c, d, tc, td) == 0.0


# -- matching ------------------------------------------------------------


def _match(test_html: str, label_html: str):
    test = parse_html(test_html)
    label = parse_html(label_html)
    return match_elements(test, label, node_styles(test), node_styles(label)), test, label


def test_match_identical_trees_all_perfect():
    html = '<div class="a"><p>x</p></div><span>y</span>'
    scores, test, _ = _match(html, html)
    assert len(scores) == len(scoreable_elements(test))
    assert all(s.label_node is not None and s.average == 1.0 for s in scores)


def test_match_missing_element_leaves_label_unmatched():
    label = "<div></div><p>x</p>"
    test = "<div></div>"
    scores, _, label_tree = _match(test, label)
    assert len(scores) == 1
    assert scores[0].average == 1.0
    matched_labels = {s.label_node for s in scores}
    label_ids = set(scoreable_elements(label_tree))
    assert len(label_ids - matched_labels) == 1


def test_match_duplicates_form_one_pair():
    scores, _, _ = _match("<div></div><div></div>", "<div></div>")
    matched = [s for s in scores if s.label_node is not None]
    unmatched = [s for s in scores if s.label_node is None]
    assert len(matched) == 1
    assert len(unmatched) == 1
    assert unmatched[0].average == 0.0
    assert unmatched[0].perspectives == {p: 0.0 for p in unmatched[0].perspectives}


def test_match_restricted_to_equal_tags():
    scores, _, _ = _match("<p>x</p>", "<div>x</div>")
    assert scores[0].label_node is None


# -- element accuracy ------------------------------------------------------


def _fake_scores(averages, matched=True):
    return [
        ElementScore(test_node=i, label_node=i if matched else None, perspectives={}, average=a)
        for i, a in enumerate(averages)
    ]


def test_element_accuracy_threshold_strict():
    scores = _fake_scores([0.95, 0.91, 0.6])
    assert element_accuracy(scores, 4, EvalConfig(threshold=0.9)) == 0.5
    # strictly greater: an average exactly at T does not count
    assert element_accuracy(_fake_scores([0.9]), 1, EvalConfig(threshold=0.9)) == 0.0


def test_element_accuracy_empty_cases():
    assert element_accuracy([], 0, EvalConfig()) == 1.0
    assert element_accuracy(_fake_scores([1.0]), 0, EvalConfig()) == 0.0
    assert element_accuracy([], 5, EvalConfig()) == 0.0


def test_unmatched_scores_do_not_count():
    scores = _fake_scores([0.99, 0.99], matched=False)
    assert element_accuracy(scores, 2, EvalConfig()) == 0.0


# -- layout ----------------------------------------------------------------


def test_layout_accuracy_ratio():
    l1 = LayoutSequence(tokens=["body", "div", "p"])
    l2 = LayoutSequence(tokens=["body", "p"])
    assert layout_accuracy(l1, l2) == pytest.approx(2 / 3)


def test_layout_accuracy_identity_and_disjoint():
    seq = LayoutSequence(tokens=["html", "head", "body", "div"])
    assert layout_accuracy(seq, LayoutSequence(tokens=list(seq.tokens))) == 1.0
    assert layout_accuracy(seq, LayoutSequence(tokens=["x", "y"])) == 0.0


def test_layout_accuracy_empty_reference():
    with pytest.raises(EmptyReference):
        layout_accuracy(LayoutSequence(tokens=[]), LayoutSequence(tokens=["a"]))


def test_layout_asymmetry_denominator_is_reference():
    ref = LayoutSequence(tokens=["a", "b"])
    cand = LayoutSequence(tokens=["a", "b", "c", "d"])
    assert layout_accuracy(ref, cand) == 1.0
    assert layout_accuracy(cand, ref) == 0.5


def test_deleting_candidate_elements_never_raises_la(fixture_corpus):
    rng = random.Random(23)
    for _, html in fixture_corpus[:6]:
        ref = parse_html(html)
        ref_seq = layout_sequence(ref)
        cand = ref.clone()
        baseline = layout_accuracy(ref_seq, layout_sequence(cand))
        for _ in range(5):
            removable = [n for n in traverse(cand) if n not in (cand.root, cand.head_id, cand.body_id)]
            if not removable:
                break
            cand.remove_subtree(rng.choice(removable))
            la = layout_accuracy(ref_seq, layout_sequence(cand))
            assert la <= baseline
            baseline = la


# -- lcs ---------------------------------------------------------------------


def test_lcs_trivial():
    assert lcs_length(["x"], ["x"]) == 1
    assert lcs_length([], ["a", "b"]) == 0
    assert lcs_length(list("abcbd"), list("bdcab")) == 3  # brute-force verified


def test_lcs_matches_exhaustive_oracle():
    rng = random.Random(5)
    for _ in range(300):
        a = [rng.choice("abcde") for _ in range(rng.randrange(0, 11))]
        b = [rng.choice("abcde") for _ in range(rng.randrange(0, 11))]
        assert lcs_length(a, b) == brute_lcs(a, b)


def test_lcs_laws():
    rng = random.Random(9)
    for _ in range(100):
        a = [rng.choice("abc") for _ in range(rng.randrange(0, 12))]
        b = [rng.choice("abc") for _ in range(rng.randrange(0, 12))]
        assert lcs_length(a, b) == lcs_length(b, a)
        assert lcs_length(a, b) <= min(len(a), len(b))
        suffix = [rng.choice("abc") for _ in range(rng.randrange(0, 4))]
        assert lcs_length(a + suffix, b + suffix) == lcs_length(a, b) + len(suffix)


# -- rank correlation ----------------------------------------------------------


def test_rank_correlation_reference_value():
    assert rank_correlation([1, 3, 2, 5, 4], [1, 2, 3, 4, 5]) == pytest.approx(0.8)


def test_rank_correlation_extremes():
    assert rank_correlation([1, 2, 3, 4, 5], [1, 2, 3, 4, 5]) == 1.0
    assert rank_correlation([1, 2, 3, 4, 5], [5, 4, 3, 2, 1]) == -1.0


def test_rank_correlation_errors():
    with pytest.raises(LengthMismatch):
        rank_correlation([1, 2], [1, 2, 3])
    with pytest.raises(NotAPermutation):
        rank_correlation([1, 1, 2], [1, 2, 3])
    with pytest.raises(NotAPermutation):
        rank_correlation([0, 1, 2], [1, 2, 3])


# -- whole-document evaluation ---------------------------------------------------


def test_self_evaluation_identity(fixture_corpus):
    for _, html in fixture_corpus[:5]:
        report = evaluate_documents(html, html, EvalConfig(threshold=0.9))
        assert report.element_accuracy == 1.0
        assert report.layout_accuracy == 1.0
        assert report.matched_above_threshold == report.label_count == report.test_count


def test_every_score_in_unit_interval(fixture_corpus):
    _, ref = fixture_corpus[0]
    _, cand = fixture_corpus[1]
    report = evaluate_documents(ref, cand)
    assert 0.0 <= report.element_accuracy <= 1.0
    assert 0.0 <= report.layout_accuracy <= 1.0
    for score in report.element_scores:
        assert 0.0 <= score.average <= 1.0
        for value in score.perspectives.values():
            assert 0.0 <= value <= 1.0
    assert report.matched_above_threshold <= min(report.label_count, report.test_count)


def test_matched_never_exceeds_either_count(fixture_corpus):
    # one-to-one matching caps EA at 1 even when the candidate duplicates elements
    ref = "<p>x</p>"
    cand = "<p>x</p>" * 5
    report = evaluate_documents(ref, cand)
    assert report.matched_above_threshold == 1
    assert report.element_accuracy == 1.0
