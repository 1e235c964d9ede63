"""Sentence/EDU alignment, subtree categories, square-root fallback."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

from disfact.align import (SentenceAlignment, align_sentences,
                           depth_category_histogram)
from disfact.errors import AlignmentError, InputError
from disfact.tree import DiscourseTree, Edu, Nuclearity, TreeNode
from treegen import leaf, make_tree, node, random_tree


def oracle_height(root: TreeNode) -> int:
    """Independent deepest-leaf walk."""
    best = 0

    def walk(n: TreeNode, depth: int):
        nonlocal best
        if n.is_leaf:
            best = max(best, depth)
        for c in n.children:
            walk(c, depth + 1)

    walk(root, 0)
    return best


def edu_sentence_spans(tree: DiscourseTree, groups: list[tuple[int, int]]):
    """Char spans covering EDU ranges of ``tree`` (1-based inclusive)."""
    return [(tree.edu(lo).char_start, tree.edu(hi).char_end)
            for lo, hi in groups]


def split_link_tree() -> DiscourseTree:
    """28 EDUs where [22,25] and [26,28] are subtrees but [24,28] is not."""
    a1 = node([leaf(i) for i in range(1, 22)], "N", "List")
    a2 = node([leaf(i) for i in range(22, 26)], "N", "List")
    b = node([leaf(i) for i in range(26, 29)], "N", "List")
    root = TreeNode(1, 28, Nuclearity.ROOT, "span",
                    (node([a1, a2], "N"), b))
    return make_tree(root, [f"unit number {i} text." for i in range(1, 29)],
                     source_id="split-link")


class TestAlignment:
    def test_one_to_one(self, example_tree):
        spans = edu_sentence_spans(example_tree, [(i, i) for i in range(1, 5)])
        out = align_sentences(spans, example_tree)
        assert [a.edu_range for a in out] == [(i, i) for i in range(1, 5)]
        assert all(a.depth_category == 0 for a in out)
        assert all(a.subtree_height == 0.0 for a in out)

    def test_covering_subtree_height(self, example_tree):
        spans = edu_sentence_spans(example_tree, [(1, 1), (2, 4)])
        out = align_sentences(spans, example_tree)
        second = out[1]
        assert second.edu_range == (2, 4)
        assert second.covering_span == (2, 4)
        assert second.depth_category == 2
        assert second.subtree_height == 2.0
        assert second.subtree_height == oracle_height(example_tree.node_at(2, 4))

    def test_split_sentence_sqrt_height(self):
        tree = split_link_tree()
        spans = edu_sentence_spans(tree, [(1, 21), (22, 23), (24, 28)])
        out = align_sentences(spans, tree)
        target = out[2]
        assert target.edu_range == (24, 28)
        assert target.covering_span is None
        assert target.depth_category == -1
        assert target.subtree_height == 2.0  # sqrt(28 - 24), exactly

    def test_case_and_whitespace_jitter(self, example_tree):
        texts = [example_tree.edu_text(i) for i in range(1, 5)]
        jittered = "  " + texts[0].upper() + "   " + texts[1] + "\n\n" + \
            texts[2].upper() + "  " + texts[3]
        a0 = jittered.index(texts[0].upper())
        s0 = (a0, a0 + len(texts[0]))
        a1 = jittered.index(texts[1])
        s1 = (a1, a1 + len(texts[1]))
        a2 = jittered.index(texts[2].upper())
        s23 = (a2, len(jittered))
        out = align_sentences([s0, s1, s23], example_tree, text=jittered)
        assert [a.edu_range for a in out] == [(1, 1), (2, 2), (3, 4)]

    def test_unaligned_sentence_warns(self, caplog):
        # trailing text the parser never carved into EDUs
        text = "alpha beta gamma delta orphan tail words"
        root = TreeNode(1, 2, Nuclearity.ROOT, "span", (leaf(1), leaf(2)))
        tree = DiscourseTree("tail", text, (Edu(1, 0, 10), Edu(2, 11, 22)), root)
        spans = [(0, 22), (23, len(text))]
        out = align_sentences(spans, tree)
        assert out[0].edu_range == (1, 2)
        assert not out[1].aligned
        assert out[1].subtree_height == 0.0
        assert any("did not align" in r.message for r in caplog.records)

    def test_text_mismatch_reports_offset(self, example_tree):
        other = example_tree.text.replace("panel", "board")
        with pytest.raises(AlignmentError) as err:
            align_sentences([(0, len(other))], example_tree, text=other)
        assert err.value.offset is not None

    def test_empty_sentence_list_rejected(self, example_tree):
        with pytest.raises(InputError):
            align_sentences([], example_tree)


class TestAlignmentProperties:
    @given(st.integers(0, 2 ** 32 - 1))
    def test_recovers_edu_groups_and_is_monotone(self, seed):
        rng = random.Random(seed)
        tree = random_tree(rng, max_edus=12)
        groups = []
        lo = 1
        while lo <= tree.edu_count:
            hi = min(tree.edu_count, lo + rng.randint(0, 3))
            groups.append((lo, hi))
            lo = hi + 1
        out = align_sentences(edu_sentence_spans(tree, groups), tree)
        assert [a.edu_range for a in out] == groups
        los = [a.edu_range[0] for a in out]
        assert los == sorted(los)

    @given(st.integers(0, 2 ** 32 - 1))
    def test_recovers_groups_under_random_jitter(self, seed):
        rng = random.Random(seed)
        tree = random_tree(rng, max_edus=10)
        groups = []
        lo = 1
        while lo <= tree.edu_count:
            hi = min(tree.edu_count, lo + rng.randint(0, 2))
            groups.append((lo, hi))
            lo = hi + 1
        pieces = []
        spans = []
        offset = 0
        for glo, ghi in groups:
            gap = rng.choice([" ", "  ", "\n", " \t ", "\n\n "])
            if pieces:
                pieces.append(gap)
                offset += len(gap)
            words = " ".join(tree.edu_text(i) for i in range(glo, ghi + 1))
            cased = "".join(c.upper() if rng.random() < 0.3 else c
                            for c in words)
            pieces.append(cased)
            spans.append((offset, offset + len(cased)))
            offset += len(cased)
        jittered = "".join(pieces)
        out = align_sentences(spans, tree, text=jittered)
        assert [a.edu_range for a in out] == groups

    @given(st.integers(0, 2 ** 32 - 1))
    def test_determinism_and_height_oracle(self, seed):
        rng = random.Random(seed)
        tree = random_tree(rng, max_edus=12)
        spans = edu_sentence_spans(tree, [(1, tree.edu_count)])
        first = align_sentences(spans, tree)
        second = align_sentences(spans, tree)
        assert first == second
        a = first[0]
        assert a.subtree_height >= 0.0
        if a.depth_category is not None and a.depth_category >= 1:
            covering = tree.node_at(*a.covering_span)
            assert a.subtree_height == oracle_height(covering)
        if a.depth_category == 0:
            assert a.subtree_height == 0.0


class TestHistogram:
    def _alignment(self, category: int, height: float) -> SentenceAlignment:
        rng = (1, 1) if category == 0 else (1, 2)
        return SentenceAlignment(0, (0, 1), rng, None, category, height)

    def test_all_single_edu(self):
        out = depth_category_histogram([self._alignment(0, 0.0)] * 3)
        assert out == {-1: 0.0, 0: 1.0, 1: 0.0}

    def test_counting(self):
        alignments = [self._alignment(-1, 1.0), self._alignment(0, 0.0),
                      self._alignment(2, 2.0), self._alignment(2, 2.0)]
        out = depth_category_histogram(alignments)
        assert out == {-1: 0.25, 0: 0.25, 1: 0.5}

    def test_benchmark_like_proportions(self):
        # mirrors a reported 8% / 23% / 69% split over 100 sentences
        alignments = ([self._alignment(-1, 1.0)] * 8
                      + [self._alignment(0, 0.0)] * 23
                      + [self._alignment(3, 3.0)] * 69)
        out = depth_category_histogram(alignments)
        assert abs(out[-1] - 0.08) <= 0.005
        assert abs(out[0] - 0.23) <= 0.005
        assert abs(out[1] - 0.69) <= 0.005
        assert abs(sum(out.values()) - 1.0) < 1e-12

    def test_empty_rejected(self):
        with pytest.raises(InputError):
            depth_category_histogram([])
