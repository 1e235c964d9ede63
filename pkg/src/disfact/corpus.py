"""Dataset manifest ingestion.

A manifest is a line-delimited UTF-8 file; each line is one record::

    {"pair_id": "gov-3", "doc_ref": "docs/gov-3.txt",
     "summary_ref": "sums/gov-3.txt", "doc_tree_ref": "trees/gov-3.json",
     "summary_tree_ref": "trees/gov-3.sum.json",
     "label": 1, "label_kind": "binary"}

Refs are paths relative to the manifest's directory.  Optional fields:
``dataset_tag`` (metric grouping, default "default"), ``sentence_labels``
(0/1 per summary sentence, for feature analysis), ``doc_sentences`` /
``summary_sentences`` (explicit [start, end) char spans when the caller has
better sentence segmentation than the built-in splitter), and
``article_breaks`` (char offsets starting new articles in multi-article
sources; forces segmentation boundaries).

Records missing a tree ref simply carry no tree; segmentation falls back to
sliding windows for them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import InputError, ManifestError
from .textnorm import Span
from .tree import DiscourseTree, load_tree

LABEL_KINDS = ("binary", "continuous")


@dataclass(frozen=True)
class PairRecord:
    pair_id: str
    doc_text: str
    summary_text: str
    doc_tree: DiscourseTree | None
    summary_tree: DiscourseTree | None
    label: float
    label_kind: str
    dataset_tag: str = "default"
    sentence_labels: tuple[int, ...] | None = None
    doc_sentences: tuple[Span, ...] | None = None
    summary_sentences: tuple[Span, ...] | None = None
    article_breaks: tuple[int, ...] | None = None

    @property
    def doc_tree_absent(self) -> bool:
        return self.doc_tree is None

    @property
    def summary_tree_absent(self) -> bool:
        return self.summary_tree is None


def _read_text(base: Path, ref: str, pair_id: str) -> str:
    path = base / ref
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestError(f"pair {pair_id}: cannot read {path}: {exc}") from None


def _read_tree(base: Path, ref: str | None, pair_id: str) -> DiscourseTree | None:
    if ref is None:
        return None
    path = base / ref
    try:
        return load_tree(path)
    except OSError as exc:
        raise ManifestError(f"pair {pair_id}: cannot read {path}: {exc}") from None
    except InputError as exc:
        raise ManifestError(f"pair {pair_id}: bad tree {path}: {exc}") from None


def _spans(value, name: str, pair_id: str) -> tuple[Span, ...] | None:
    if value is None:
        return None
    try:
        spans = tuple((int(a), int(b)) for a, b in value)
    except (TypeError, ValueError):
        raise ManifestError(
            f"pair {pair_id}: {name} must be a list of [start, end] pairs") from None
    return spans


def load_manifest(path: str | Path) -> list[PairRecord]:
    """Parse, load referenced files, validate; records sorted by pair_id."""
    path = Path(path)
    base = path.parent
    records: dict[str, PairRecord] = {}
    kind_by_tag: dict[str, str] = {}
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from None

    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"{path}:{lineno}: not valid JSON: {exc.msg}") from None
        try:
            pair_id = str(obj["pair_id"])
            doc_ref = obj["doc_ref"]
            summary_ref = obj["summary_ref"]
            label = obj["label"]
            label_kind = obj["label_kind"]
        except KeyError as exc:
            raise ManifestError(
                f"{path}:{lineno}: missing field {exc.args[0]!r}") from None
        if pair_id in records:
            raise ManifestError(f"{path}:{lineno}: duplicate pair_id {pair_id!r}")
        if label_kind not in LABEL_KINDS:
            raise ManifestError(
                f"pair {pair_id}: label_kind must be one of {LABEL_KINDS}")
        if not isinstance(label, (int, float)) or isinstance(label, bool):
            raise ManifestError(f"pair {pair_id}: label must be numeric")
        label = float(label)
        if not math.isfinite(label):
            raise ManifestError(f"pair {pair_id}: label must be finite")
        if label_kind == "binary" and label not in (0.0, 1.0):
            raise ManifestError(
                f"pair {pair_id}: binary label must be 0 or 1, got {label}")

        tag = str(obj.get("dataset_tag", "default"))
        if kind_by_tag.setdefault(tag, label_kind) != label_kind:
            raise ManifestError(
                f"pair {pair_id}: label_kind {label_kind!r} conflicts with "
                f"earlier records of dataset_tag {tag!r}")

        sentence_labels = None
        if obj.get("sentence_labels") is not None:
            raw = obj["sentence_labels"]
            if not isinstance(raw, list) or any(v not in (0, 1) for v in raw):
                raise ManifestError(
                    f"pair {pair_id}: sentence_labels must be a list of 0/1")
            sentence_labels = tuple(int(v) for v in raw)

        article_breaks = None
        if obj.get("article_breaks") is not None:
            try:
                article_breaks = tuple(sorted(int(v) for v in obj["article_breaks"]))
            except (TypeError, ValueError):
                raise ManifestError(
                    f"pair {pair_id}: article_breaks must be integers") from None

        records[pair_id] = PairRecord(
            pair_id=pair_id,
            doc_text=_read_text(base, doc_ref, pair_id),
            summary_text=_read_text(base, summary_ref, pair_id),
            doc_tree=_read_tree(base, obj.get("doc_tree_ref"), pair_id),
            summary_tree=_read_tree(base, obj.get("summary_tree_ref"), pair_id),
            label=label,
            label_kind=label_kind,
            dataset_tag=tag,
            sentence_labels=sentence_labels,
            doc_sentences=_spans(obj.get("doc_sentences"), "doc_sentences", pair_id),
            summary_sentences=_spans(obj.get("summary_sentences"),
                                     "summary_sentences", pair_id),
            article_breaks=article_breaks,
        )

    if not records:
        raise ManifestError(f"manifest {path} holds no records")
    return [records[pid] for pid in sorted(records)]
