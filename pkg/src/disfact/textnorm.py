"""Text normalization and sentence utilities.

Alignment and segmentation never compare raw strings: parser output and
source files routinely disagree on case, whitespace runs, and stray control
characters.  Everything here works on a normalized view (lowercase, single
spaces, control characters dropped) plus an offset map back to the original
text, so char-overlap computations stay exact.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

Span = tuple[int, int]  # half-open character offsets


def _is_control(ch: str) -> bool:
    return unicodedata.category(ch) == "Cc" and not ch.isspace()


@dataclass(frozen=True)
class NormalizedText:
    """Normalized text plus per-character offset map.

    ``fwd[i]``/``fwd_end[i]`` are the first/last indices in ``text`` that
    original character ``i`` maps to (they differ when lowercasing expands
    a character), or -1 when the character was dropped (collapsed
    whitespace, control chars).  ``nonspace_prefix[k]`` counts non-space
    chars in ``text[:k]``.
    """

    text: str
    fwd: tuple[int, ...]
    fwd_end: tuple[int, ...]
    nonspace_prefix: tuple[int, ...]

    def span(self, start: int, end: int) -> Span:
        """Map an original-text span to normalized coordinates (may be empty)."""
        lo = None
        hi = None
        for i in range(start, min(end, len(self.fwd))):
            if self.fwd[i] >= 0:
                if lo is None:
                    lo = self.fwd[i]
                hi = self.fwd_end[i]
        if lo is None:
            return (0, 0)
        return (lo, hi + 1)

    def nonspace_count(self, span: Span) -> int:
        a, b = span
        if b <= a:
            return 0
        return self.nonspace_prefix[b] - self.nonspace_prefix[a]

    def overlap_nonspace(self, a: Span, b: Span) -> int:
        """Non-space characters shared by two normalized spans."""
        lo = max(a[0], b[0])
        hi = min(a[1], b[1])
        if hi <= lo:
            return 0
        return self.nonspace_prefix[hi] - self.nonspace_prefix[lo]


def normalize(text: str) -> str:
    return normalize_with_map(text).text


def normalize_with_map(text: str) -> NormalizedText:
    """Lowercase, collapse whitespace runs to single spaces, drop controls."""
    out: list[str] = []
    fwd = [-1] * len(text)
    fwd_end = [-1] * len(text)
    pending_space = False
    for i, ch in enumerate(text):
        if _is_control(ch):
            continue
        if ch.isspace():
            if out:  # no leading space
                pending_space = True
            continue
        if pending_space:
            out.append(" ")
            pending_space = False
        fwd[i] = len(out)
        for low in ch.lower():
            out.append(low)
        fwd_end[i] = len(out) - 1
    norm = "".join(out)
    prefix = [0] * (len(norm) + 1)
    for k, ch in enumerate(norm):
        prefix[k + 1] = prefix[k] + (0 if ch == " " else 1)
    return NormalizedText(norm, tuple(fwd), tuple(fwd_end), tuple(prefix))


_SENT_BREAK = re.compile(r'[.!?]+["\'”’)\]]*')


def split_sentences(text: str) -> list[Span]:
    """Deterministic rule-based sentence spans over ``text``.

    Breaks after terminal punctuation followed by whitespace, and at blank
    lines regardless of punctuation.  Spans are trimmed of surrounding
    whitespace; empty spans are dropped.  This is intentionally simple: the
    pipeline accepts explicit sentence spans whenever the caller has better
    segmentation.
    """
    breaks = set()
    for m in _SENT_BREAK.finditer(text):
        j = m.end()
        if j >= len(text) or text[j].isspace():
            breaks.add(j)
    for m in re.finditer(r"\n[ \t]*\n", text):
        breaks.add(m.start())

    spans: list[Span] = []
    start = 0
    for cut in sorted(breaks | {len(text)}):
        piece = text[start:cut]
        stripped = piece.strip()
        if stripped:
            a = start + len(piece) - len(piece.lstrip())
            spans.append((a, a + len(stripped)))
        start = cut
    return spans


def paragraph_starts(text: str, sentences: list[Span]) -> set[int]:
    """Indices of sentences that open a paragraph (blank-line boundaries)."""
    starts = {0} if sentences else set()
    for i in range(1, len(sentences)):
        gap = text[sentences[i - 1][1]:sentences[i][0]]
        if gap.count("\n") >= 2:
            starts.add(i)
    return starts


def word_count(text: str) -> int:
    return len(text.split())
