"""Discourse parser backends.

``HeuristicParser`` is a deterministic, dependency-free stand-in: clause
segmentation by punctuation and connective cues, sentence-internal
nucleus-first attachment, balanced multinuclear joins across sentences.
It exists so the whole pipeline (and its tests) run without model weights.

``NeuralParser`` wraps an installed neural discourse parser and owns the
volatility of its native serialization: ``convert_binary_splits`` turns the
common binary span-string format into canonical nodes, collapsing
binarized multinuclear chains back into n-ary nodes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .treedoc import NUCLEUS, ROOT, SATELLITE, Node


class ParserUnavailable(RuntimeError):
    """Raised at startup when a neural parser backend cannot be loaded."""


_SENTENCE_END = re.compile(r'[.!?]+["\')\]]*\s')
_CLAUSE_CUT = re.compile(
    r"(?:,|;)\s+(?=(?:and|but|or|while|because|although|which|after|before|"
    r"making|when|so)\b)", re.IGNORECASE)


def _trimmed(text: str, start: int, end: int) -> tuple[int, int] | None:
    piece = text[start:end]
    left = len(piece) - len(piece.lstrip())
    right = len(piece) - len(piece.rstrip())
    if start + left >= end - right:
        return None
    return (start + left, end - right)


def segment_sentences(text: str) -> list[tuple[int, int]]:
    bounds = [m.end() for m in _SENTENCE_END.finditer(text)] + [len(text)]
    spans = []
    start = 0
    for cut in bounds:
        span = _trimmed(text, start, cut)
        if span:
            spans.append(span)
        start = cut
    return spans


def segment_clauses(text: str, sentence: tuple[int, int]) -> list[tuple[int, int]]:
    a, b = sentence
    cuts = [a] + [a + m.end() for m in _CLAUSE_CUT.finditer(text[a:b])] + [b]
    spans = []
    for lo, hi in zip(cuts, cuts[1:]):
        span = _trimmed(text, lo, hi)
        if span:
            spans.append(span)
    return spans or [sentence]


def _balanced_join(nodes: list[Node], relation: str) -> Node:
    """Multinuclear merge keeping depth logarithmic."""
    if len(nodes) == 1:
        return nodes[0]
    mid = len(nodes) // 2
    left = _balanced_join(nodes[:mid], relation)
    right = _balanced_join(nodes[mid:], relation)
    return Node(left.lo, right.hi, NUCLEUS, relation, [left, right])


class HeuristicParser:
    """Deterministic rule-based parser; never fails on non-empty text."""

    def parse(self, text: str) -> tuple[list[tuple[int, int]], Node]:
        sentences = segment_sentences(text)
        if not sentences:
            raise ParserUnavailable("no sentences found")
        edu_spans: list[tuple[int, int]] = []
        sentence_nodes: list[Node] = []
        for sentence in sentences:
            clauses = segment_clauses(text, sentence)
            first = len(edu_spans) + 1
            edu_spans.extend(clauses)
            last = len(edu_spans)
            sentence_nodes.append(self._sentence_node(first, last))
        root = _balanced_join(sentence_nodes, "Joint")
        root.nuclearity = ROOT
        root.relation = "span"
        return edu_spans, root

    @staticmethod
    def _sentence_node(lo: int, hi: int) -> Node:
        if lo == hi:
            return Node(lo, hi, NUCLEUS)
        # nucleus head clause, trailing clauses attach as elaboration
        tail: Node | None = None
        for start in range(hi, lo, -1):
            leaf = Node(start, start, SATELLITE if tail is None else NUCLEUS,
                        "Elaboration")
            tail = leaf if tail is None else Node(start, hi, SATELLITE,
                                                  "Elaboration", [leaf, tail])
        return Node(lo, hi, NUCLEUS, "span", [Node(lo, lo, NUCLEUS), tail])


_SPLIT = re.compile(
    r"\((\d+):(Nucleus|Satellite)=([^:]+):(\d+),(\d+):(Nucleus|Satellite)"
    r"=([^:]+):(\d+)\)")


def convert_binary_splits(splits: list[str], edu_count: int) -> Node:
    """Canonical tree from binary span strings.

    Each split reads ``(lo:Nuc=Rel:mid,mid+1:Nuc=Rel:hi)``.  Multinuclear
    chains produced by binarization (same relation, all-nucleus children)
    are collapsed into single n-ary nodes.
    """
    if edu_count == 1:
        if splits:
            raise ValueError("single-EDU output cannot carry splits")
        return Node(1, 1, ROOT)
    by_span: dict[tuple[int, int], tuple] = {}
    for raw in splits:
        m = _SPLIT.fullmatch(raw.strip())
        if not m:
            raise ValueError(f"unparseable split {raw!r}")
        l_lo, l_nuc, l_rel, l_hi, r_lo, r_nuc, r_rel, r_hi = m.groups()
        key = (int(l_lo), int(r_hi))
        by_span[key] = (int(l_lo), int(l_hi), l_nuc, l_rel,
                        int(r_lo), int(r_hi), r_nuc, r_rel)

    def build(lo: int, hi: int, nuclearity: str, relation: str) -> Node:
        if lo == hi:
            return Node(lo, hi, nuclearity, relation)
        if (lo, hi) not in by_span:
            raise ValueError(f"no split recorded for span {lo}-{hi}")
        l_lo, l_hi, l_nuc, l_rel, r_lo, r_hi, r_nuc, r_rel = by_span[(lo, hi)]
        if l_hi + 1 != r_lo or l_lo != lo or r_hi != hi:
            raise ValueError(f"split for {lo}-{hi} does not tile the span")
        left = build(l_lo, l_hi, "N" if l_nuc == "Nucleus" else "S", l_rel)
        right = build(r_lo, r_hi, "N" if r_nuc == "Nucleus" else "S", r_rel)
        return Node(lo, hi, nuclearity, relation, [left, right])

    root = build(1, edu_count, ROOT, "span")
    return _flatten_multinuclear(root)


def _is_multinuclear(node: Node) -> bool:
    return (len(node.children) >= 2
            and all(c.nuclearity == NUCLEUS for c in node.children)
            and len({c.relation for c in node.children}) == 1)


def _flatten_multinuclear(node: Node) -> Node:
    node.children = [_flatten_multinuclear(c) for c in node.children]
    if not _is_multinuclear(node):
        return node
    relation = node.children[0].relation
    merged: list[Node] = []
    for child in node.children:
        if (_is_multinuclear(child)
                and child.children[0].relation == relation):
            merged.extend(child.children)
        else:
            merged.append(child)
    node.children = merged
    return node


@dataclass
class NeuralParser:
    """Wrapper for an installed neural RST parser (optional dependency).

    The underlying package must expose ``parse(texts) -> [(token_spans,
    splits)]`` per document; this class only adapts serialization.  Loading
    is attempted lazily so environments without model weights still import.
    """

    model_id: str
    device: str = "cpu"

    def __post_init__(self):
        try:
            import importlib
            self._impl = importlib.import_module(self.model_id)
        except ImportError as exc:
            raise ParserUnavailable(
                f"neural parser {self.model_id!r} not importable: {exc}") from None

    def parse(self, text: str) -> tuple[list[tuple[int, int]], Node]:
        edu_spans, splits = self._impl.parse_document(text, device=self.device)
        return list(edu_spans), convert_binary_splits(splits, len(edu_spans))
