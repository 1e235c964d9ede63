"""Source-document segmentation plans.

Two ways to build a plan:

* ``segment_by_level``: take the discourse-tree frontier at depth N (nodes
  at depth exactly N plus shallower leaves), snap the frontier's EDU spans
  to sentence boundaries, then re-chunk any segment that exceeds the word
  capacity with greedy windows inside itself;
* ``fallback_chunk``: greedy left-to-right windows of whole sentences under
  the capacity, honoring paragraph (and article) boundaries when given.

Both produce ordered, disjoint segments whose sentence ranges tile the
document.  A single sentence longer than the capacity stands alone and is
flagged oversized.  Sentence indices are 0-based throughout.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .align import matched_normalization
from .errors import InputError
from .textnorm import Span, word_count
from .tree import DiscourseTree, TreeNode

log = logging.getLogger(__name__)

DEFAULT_CAPACITY = 350


@dataclass(frozen=True)
class Segment:
    segment_index: int
    first_sentence: int
    last_sentence: int  # inclusive
    text: str
    word_count: int
    provenance: str  # "tree_levelN" | "fallback_window" | "rechunked"
    oversized: bool = False


@dataclass(frozen=True)
class SegmentPlan:
    segments: tuple[Segment, ...]

    @property
    def sentence_count(self) -> int:
        return self.segments[-1].last_sentence + 1 if self.segments else 0


def frontier_spans(tree: DiscourseTree, level: int) -> list[tuple[int, int]]:
    """EDU spans of nodes at depth exactly ``level`` plus shallower leaves."""
    if level < 1:
        raise InputError(f"level must be >= 1, got {level}")
    spans: list[tuple[int, int]] = []

    def visit(node: TreeNode, depth: int) -> None:
        if depth == level or node.is_leaf:
            spans.append(node.span)
            return
        for child in node.children:
            visit(child, depth + 1)

    visit(tree.root, 0)
    return spans


def _segment(index: int, first: int, last: int, text: str, sentences: list[Span],
             provenance: str) -> Segment:
    seg_text = text[sentences[first][0]:sentences[last][1]]
    return Segment(index, first, last, seg_text, word_count(seg_text), provenance)


def _greedy_ranges(text: str, sentences: list[Span], first: int, last: int,
                   capacity: int, forced_starts: set[int]) -> list[tuple[int, int]]:
    """Greedy accumulation of whole sentences within [first, last]."""
    words = [word_count(text[a:b]) for a, b in sentences]
    ranges: list[tuple[int, int]] = []
    start = first
    acc = 0
    for i in range(first, last + 1):
        if i > start and (acc + words[i] > capacity or i in forced_starts):
            ranges.append((start, i - 1))
            start = i
            acc = 0
        acc += words[i]
    ranges.append((start, last))
    return ranges


def fallback_chunk(text: str, sentences: list[Span], capacity: int = DEFAULT_CAPACITY,
                   paragraph_starts: set[int] | None = None) -> SegmentPlan:
    """Sliding-window plan: whole sentences, word budget, paragraph-aware."""
    if not sentences:
        raise InputError("cannot chunk an empty sentence list")
    if capacity < 1:
        raise InputError(f"capacity must be >= 1, got {capacity}")
    forced = paragraph_starts or set()
    segments = []
    for first, last in _greedy_ranges(text, sentences, 0, len(sentences) - 1,
                                      capacity, forced):
        segments.append(_finish_segment(len(segments), first, last, text, sentences,
                                        "fallback_window", capacity))
    return SegmentPlan(tuple(segments))


def _finish_segment(index: int, first: int, last: int, text: str,
                    sentences: list[Span], provenance: str, capacity: int) -> Segment:
    seg = _segment(index, first, last, text, sentences, provenance)
    if seg.word_count > capacity:
        # only possible for a single sentence longer than the capacity
        log.warning("segment %d is a single %d-word sentence over capacity %d",
                    index, seg.word_count, capacity)
        return Segment(index, first, last, seg.text, seg.word_count, provenance,
                       oversized=True)
    return seg


def segment_by_level(tree: DiscourseTree, sentences: list[Span], level: int,
                     capacity: int = DEFAULT_CAPACITY,
                     text: str | None = None) -> SegmentPlan:
    """Plan from the tree frontier at ``level``, snapped to sentences.

    Each sentence joins the frontier span holding the majority of its
    non-whitespace characters (ties go left).  Snapped segments over the
    capacity are re-chunked greedily and marked ``rechunked``.
    """
    if not sentences:
        raise InputError("cannot segment an empty sentence list")
    if capacity < 1:
        raise InputError(f"capacity must be >= 1, got {capacity}")
    if text is None:
        text = tree.text
    doc, ref = matched_normalization(text, tree.text)

    spans = frontier_spans(tree, level)
    frontier_norm = []
    for lo, hi in spans:
        start = tree.edu(lo).char_start
        end = tree.edu(hi).char_end
        frontier_norm.append(ref.span(start, end))

    # majority-overlap assignment; provably monotone over ordered tilings
    assignment: list[int] = []
    previous = 0
    for a, b in sentences:
        sent_span = doc.span(a, b)
        overlaps = [doc.overlap_nonspace(sent_span, fs) for fs in frontier_norm]
        best = max(overlaps)
        chosen = overlaps.index(best) if best > 0 else previous
        chosen = max(chosen, previous)  # keep segments contiguous
        assignment.append(chosen)
        previous = chosen

    segments: list[Segment] = []
    i = 0
    while i < len(sentences):
        j = i
        while j + 1 < len(sentences) and assignment[j + 1] == assignment[i]:
            j += 1
        base = _segment(0, i, j, text, sentences, f"tree_level{level}")
        if base.word_count > capacity and i != j:
            for first, last in _greedy_ranges(text, sentences, i, j, capacity, set()):
                segments.append(_finish_segment(len(segments), first, last, text,
                                                sentences, "rechunked", capacity))
        else:
            segments.append(_finish_segment(len(segments), i, j, text, sentences,
                                            f"tree_level{level}", capacity))
        i = j + 1
    return SegmentPlan(tuple(segments))
