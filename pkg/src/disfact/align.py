"""Align sentences to EDU ranges and classify their subtree structure.

A sentence is assigned the minimal contiguous EDU range covering at least
``OVERLAP_THRESHOLD`` of its non-whitespace characters (string matching in
normalized space).  Its structural category is then:

* 0 when it maps to a single EDU (subtree height 0);
* the covering subtree's height (>= 1) when some tree node spans exactly
  the same EDU range;
* -1 when the range is split across subtrees, in which case the height is
  approximated as sqrt(hi - lo) over EDU indices, kept real-valued.

Sentences that never reach the overlap threshold are left unaligned and get
height 0 with a warning; downstream scoring treats them neutrally.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .errors import AlignmentError, InputError
from .textnorm import NormalizedText, Span, normalize_with_map
from .tree import DiscourseTree, TreeNode

log = logging.getLogger(__name__)

OVERLAP_THRESHOLD = 0.95


@dataclass(frozen=True)
class SentenceAlignment:
    sentence_index: int
    char_span: Span
    edu_range: Span | None
    covering_span: Span | None
    depth_category: int | None  # -1 split, 0 single EDU, >=1 subtree height
    subtree_height: float

    @property
    def aligned(self) -> bool:
        return self.edu_range is not None


def node_height(node: TreeNode) -> int:
    """Edge count from ``node`` to its deepest descendant leaf."""
    if node.is_leaf:
        return 0
    return 1 + max(node_height(c) for c in node.children)


def matched_normalization(text: str, tree_text: str) -> tuple[NormalizedText, NormalizedText]:
    """Normalize both texts; error with the first mismatch offset if they differ."""
    doc = normalize_with_map(text)
    ref = normalize_with_map(tree_text)
    if doc.text != ref.text:
        limit = min(len(doc.text), len(ref.text))
        offset = next((k for k in range(limit) if doc.text[k] != ref.text[k]), limit)
        raise AlignmentError(
            "sentence text and tree text disagree after normalization", offset=offset)
    return doc, ref


def _minimal_window(counts: list[int], needed: float) -> Span | None:
    """Shortest contiguous range with sum >= needed; leftmost on ties.

    Returns 1-based inclusive EDU indices, or None if even the full range
    falls short.
    """
    best: Span | None = None
    acc = 0
    left = 0
    for right, c in enumerate(counts):
        acc += c
        while acc - counts[left] >= needed and left < right:
            acc -= counts[left]
            left += 1
        if acc >= needed:
            if best is None or (right - left) < (best[1] - best[0]):
                best = (left, right)
    if best is None:
        return None
    return (best[0] + 1, best[1] + 1)


def align_sentences(sentences: list[Span], tree: DiscourseTree,
                    text: str | None = None) -> list[SentenceAlignment]:
    """Map each sentence span to an EDU range of ``tree``.

    ``sentences`` are half-open char spans into ``text`` (default: the
    tree's own text), in document order.
    """
    if not sentences:
        raise InputError("no sentences to align")
    doc, ref = matched_normalization(text if text is not None else tree.text, tree.text)

    edu_spans = [ref.span(e.char_start, e.char_end) for e in tree.edus]
    out: list[SentenceAlignment] = []
    for idx, (a, b) in enumerate(sentences):
        sent_span = doc.span(a, b)
        total = doc.nonspace_count(sent_span)
        window = None
        if total > 0:
            counts = [doc.overlap_nonspace(sent_span, es) for es in edu_spans]
            window = _minimal_window(counts, OVERLAP_THRESHOLD * total)
        if window is None:
            log.warning("sentence %d of %s did not align to any EDU range; "
                        "falling back to height 0", idx, tree.source_id)
            out.append(SentenceAlignment(idx, (a, b), None, None, None, 0.0))
            continue
        lo, hi = window
        if lo == hi:
            out.append(SentenceAlignment(idx, (a, b), window, window, 0, 0.0))
            continue
        covering = tree.node_at(lo, hi)
        if covering is not None:
            height = node_height(covering)
            out.append(SentenceAlignment(idx, (a, b), window, covering.span,
                                         height, float(height)))
        else:
            out.append(SentenceAlignment(idx, (a, b), window, None, -1,
                                         math.sqrt(hi - lo)))
    return out


def depth_category_histogram(alignments: list[SentenceAlignment]) -> dict[int, float]:
    """Fractions over {-1, 0, >=1}; the key 1 buckets every category >= 1.

    Unaligned sentences are excluded from the denominator.
    """
    if not alignments:
        raise InputError("empty alignment list")
    aligned = [a for a in alignments if a.aligned]
    if not aligned:
        raise InputError("no aligned sentences to histogram")
    hist = {-1: 0, 0: 0, 1: 0}
    for a in aligned:
        hist[min(a.depth_category, 1)] += 1
    return {k: v / len(aligned) for k, v in hist.items()}
