"""Canonical discourse-tree model: types, ingestion, validation, serialization.

The canonical tree document is a single UTF-8 JSON object::

    {
      "source_id": "doc-17",
      "text": "...full source text...",
      "edus": [{"index": 1, "char_start": 0, "char_end": 18}, ...],
      "root": {"lo": 1, "hi": 4, "nuclearity": "ROOT", "relation": "span",
               "children": [{"lo": 1, "hi": 1, "nuclearity": "S",
                             "relation": "Attribution", "children": []}, ...]}
    }

EDU indices are 1-based and contiguous.  Trees are n-ary: multinuclear
relations may have more than two children.  Only the root carries the
pseudo-nuclearity ``ROOT``; it never counts as a satellite anywhere.
Relation labels are opaque strings.

Instances are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

from .errors import TreeFormatError, TreeValidationError


class Nuclearity(str, Enum):
    NUCLEUS = "N"
    SATELLITE = "S"
    ROOT = "ROOT"


@dataclass(frozen=True)
class Edu:
    """A leaf text span; ``index`` is 1-based, ``char_*`` half-open offsets."""

    index: int
    char_start: int
    char_end: int


@dataclass(frozen=True)
class TreeNode:
    """A tree node covering the inclusive EDU range [lo, hi].

    Within a valid tree the (lo, hi) span identifies a node uniquely:
    children strictly refine their parent, so no two nodes share a span.
    """

    lo: int
    hi: int
    nuclearity: Nuclearity
    relation: str = "span"
    children: tuple["TreeNode", ...] = ()

    @property
    def span(self) -> tuple[int, int]:
        return (self.lo, self.hi)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def walk(self) -> Iterator["TreeNode"]:
        """Pre-order traversal of this subtree."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


@dataclass(frozen=True)
class DiscourseTree:
    source_id: str
    text: str
    edus: tuple[Edu, ...]
    root: TreeNode
    _nodes_by_span: dict = field(default=None, compare=False, repr=False)  # lazy cache

    @property
    def edu_count(self) -> int:
        return len(self.edus)

    def edu(self, index: int) -> Edu:
        return self.edus[index - 1]

    def edu_text(self, index: int) -> str:
        e = self.edu(index)
        return self.text[e.char_start:e.char_end]

    def nodes(self) -> Iterator[TreeNode]:
        return self.root.walk()

    def node_at(self, lo: int, hi: int) -> TreeNode | None:
        """The unique node spanning exactly [lo, hi], if one exists."""
        if self._nodes_by_span is None:
            by_span = {n.span: n for n in self.nodes()}
            object.__setattr__(self, "_nodes_by_span", by_span)
        return self._nodes_by_span.get((lo, hi))


def validate_tree(tree: DiscourseTree) -> DiscourseTree:
    """Enforce every structural invariant; returns the tree for chaining."""
    edus = tree.edus
    if not edus:
        raise TreeValidationError("tree has no EDUs")
    for i, edu in enumerate(edus, start=1):
        if edu.index != i:
            raise TreeValidationError(
                f"EDU indices must be the contiguous run 1..{len(edus)}; "
                f"position {i} holds index {edu.index}")
        if not (0 <= edu.char_start <= edu.char_end <= len(tree.text)):
            raise TreeValidationError(
                f"EDU {i} char span [{edu.char_start}, {edu.char_end}) "
                f"outside source text of length {len(tree.text)}")
        if i > 1 and edu.char_start < edus[i - 2].char_end:
            raise TreeValidationError(
                f"EDU {i} char span starts before EDU {i - 1} ends")

    root = tree.root
    if root.span != (1, len(edus)):
        raise TreeValidationError(
            f"root must span [1, {len(edus)}]", span=root.span)
    if root.nuclearity is not Nuclearity.ROOT:
        raise TreeValidationError("root must carry nuclearity ROOT", span=root.span)

    def check(node: TreeNode) -> None:
        if node is not root and node.nuclearity is Nuclearity.ROOT:
            raise TreeValidationError(
                "only the root may carry nuclearity ROOT", span=node.span)
        if node.lo > node.hi:
            raise TreeValidationError("empty EDU range", span=node.span)
        if node.is_leaf:
            if node.lo != node.hi:
                raise TreeValidationError(
                    "leaf must cover exactly one EDU", span=node.span)
            return
        if node.lo == node.hi:
            raise TreeValidationError(
                "single-EDU node must be a leaf", span=node.span)
        if len(node.children) < 2:
            raise TreeValidationError(
                "internal node needs at least two children", span=node.span)
        expect = node.lo
        for child in node.children:
            if child.lo != expect:
                kind = "gap" if child.lo > expect else "overlap"
                raise TreeValidationError(
                    f"children must tile the parent span; {kind} at EDU {expect}",
                    span=node.span)
            if child.hi < child.lo:
                raise TreeValidationError("empty child span", span=child.span)
            expect = child.hi + 1
        if expect != node.hi + 1:
            raise TreeValidationError(
                f"children must tile the parent span; gap at EDU {expect}",
                span=node.span)
        if not any(c.nuclearity is Nuclearity.NUCLEUS for c in node.children):
            raise TreeValidationError(
                "internal node needs at least one Nucleus child", span=node.span)
        for child in node.children:
            check(child)

    check(root)
    return tree


def _node_from_obj(obj: object, path: str) -> TreeNode:
    if not isinstance(obj, dict):
        raise TreeFormatError(f"{path}: node must be an object")
    try:
        lo = obj["lo"]
        hi = obj["hi"]
        nuc = obj["nuclearity"]
    except KeyError as exc:
        raise TreeFormatError(f"{path}: missing field {exc.args[0]!r}") from None
    if not isinstance(lo, int) or not isinstance(hi, int):
        raise TreeFormatError(f"{path}: lo/hi must be integers")
    try:
        nuclearity = Nuclearity(nuc)
    except ValueError:
        raise TreeFormatError(f"{path}: unknown nuclearity {nuc!r}") from None
    relation = obj.get("relation", "span")
    if not isinstance(relation, str):
        raise TreeFormatError(f"{path}: relation must be a string")
    raw_children = obj.get("children", [])
    if not isinstance(raw_children, list):
        raise TreeFormatError(f"{path}: children must be a list")
    children = tuple(
        _node_from_obj(c, f"{path}.children[{i}]") for i, c in enumerate(raw_children))
    return TreeNode(lo=lo, hi=hi, nuclearity=nuclearity, relation=relation,
                    children=children)


def ingest_tree(document: str | bytes) -> DiscourseTree:
    """Parse and validate a canonical tree document."""
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        obj = json.loads(document)
    except json.JSONDecodeError as exc:
        raise TreeFormatError(f"not valid JSON: {exc.msg}", offset=exc.pos) from None
    if not isinstance(obj, dict):
        raise TreeFormatError("document must be a single JSON object")
    for key in ("source_id", "text", "edus", "root"):
        if key not in obj:
            raise TreeFormatError(f"missing top-level field {key!r}")
    if not isinstance(obj["text"], str):
        raise TreeFormatError("text must be a string")
    if not isinstance(obj["edus"], list):
        raise TreeFormatError("edus must be a list")
    edus = []
    for i, e in enumerate(obj["edus"]):
        if not isinstance(e, dict):
            raise TreeFormatError(f"edus[{i}] must be an object")
        try:
            edus.append(Edu(index=int(e["index"]), char_start=int(e["char_start"]),
                            char_end=int(e["char_end"])))
        except (KeyError, TypeError, ValueError):
            raise TreeFormatError(
                f"edus[{i}] needs integer index/char_start/char_end") from None
    root = _node_from_obj(obj["root"], "root")
    tree = DiscourseTree(source_id=str(obj["source_id"]), text=obj["text"],
                         edus=tuple(edus), root=root)
    return validate_tree(tree)


def _node_to_obj(node: TreeNode) -> dict:
    return {
        "lo": node.lo,
        "hi": node.hi,
        "nuclearity": node.nuclearity.value,
        "relation": node.relation,
        "children": [_node_to_obj(c) for c in node.children],
    }


def tree_to_document(tree: DiscourseTree) -> str:
    """Serialize to the canonical format; ``ingest_tree`` round-trips it."""
    obj = {
        "source_id": tree.source_id,
        "text": tree.text,
        "edus": [{"index": e.index, "char_start": e.char_start,
                  "char_end": e.char_end} for e in tree.edus],
        "root": _node_to_obj(tree.root),
    }
    return json.dumps(obj, ensure_ascii=False, sort_keys=True)


def load_tree(path) -> DiscourseTree:
    with open(path, "rb") as f:
        return ingest_tree(f.read())
