"""Canonical tree documents, built as plain JSON (no pipeline imports).

The adapter talks to the scoring pipeline only through its file formats.
A tree document is one JSON object: source_id, text, a contiguous 1-based
EDU list with half-open char spans, and a recursive node structure whose
children tile their parent's EDU span.  Nuclearity tokens: "N", "S", and
"ROOT" on the root only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

NUCLEUS = "N"
SATELLITE = "S"
ROOT = "ROOT"


@dataclass
class Node:
    lo: int
    hi: int
    nuclearity: str
    relation: str = "span"
    children: list["Node"] = field(default_factory=list)

    def to_obj(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "nuclearity": self.nuclearity,
                "relation": self.relation,
                "children": [c.to_obj() for c in self.children]}


def tree_document(source_id: str, text: str, edu_spans: list[tuple[int, int]],
                  root: Node) -> str:
    obj = {
        "source_id": source_id,
        "text": text,
        "edus": [{"index": i, "char_start": a, "char_end": b}
                 for i, (a, b) in enumerate(edu_spans, start=1)],
        "root": root.to_obj(),
    }
    return json.dumps(obj, ensure_ascii=False, sort_keys=True)


def absent_marker(source_id: str, reason: str) -> str:
    """Emitted when parsing fails; consumers fall back to window chunking."""
    return json.dumps({"source_id": source_id, "tree_absent": True,
                       "reason": reason}, ensure_ascii=False, sort_keys=True)
