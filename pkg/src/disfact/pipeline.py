"""End-to-end runs: segment, score, re-weight, aggregate, evaluate.

``run_score`` produces a line-delimited report: a reproducibility header
(hash of the semantic config, seed, scorer id), then per pair one line per
summary sentence ({pair_id, sentence_index, raw, x, height, reweighted})
and one summary line ({pair_id, summary_score, strategy, alpha}).  Reports
are deterministic for the builtin scorer: byte-identical across runs.

``run_eval`` joins one or two reports against manifest labels and computes
per-dataset metrics, optionally with paired-bootstrap p-values against the
second report.  ``run_analyze`` computes the depth-category histogram and
per-feature Welch t-tests over sentence-annotated manifests.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import yaml

from . import evalkit
from .aggregate import (AggregationConfig, aggregate_summary,
                        build_sentence_scores, max_over_segments)
from .align import align_sentences
from .corpus import PairRecord, load_manifest
from .errors import ConfigError, InputError
from .features import compute_edu_features, sentence_features
from .scoring import ScoreCache, ScoreRequest, ScorerSpec, score_pairs
from .segment import SegmentPlan, fallback_chunk, segment_by_level
from .textnorm import paragraph_starts, split_sentences

log = logging.getLogger(__name__)


@dataclass
class RunConfig:
    manifest: str = ""
    scorer_kind: str = "builtin_overlap"
    scorer_locator: str = ""
    scorer_id: str = "builtin-overlap-f1/1"
    max_in_flight: int = 8
    strategy: str = "mean"
    alpha: float = 1.0
    epsilon: float = 1e-6
    level: int = 0  # 0 = no tree segmentation, use fallback windows
    capacity: int = 350
    metric: str = "auto"  # auto | auc | tau
    bootstrap: int = 10000
    seed: int = 0
    cache: str = ""  # empty = no cache
    outdir: str = "out"
    workers: int = 0  # 0 = logical CPU count

    # volatile fields (paths, parallelism) excluded so the hash is stable
    # across machines and scratch directories
    _SEMANTIC = ("scorer_kind", "scorer_id", "strategy", "alpha", "epsilon",
                 "level", "capacity", "metric", "bootstrap", "seed")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        bad = set(data) - known
        if bad:
            raise ConfigError(f"unknown config keys: {sorted(bad)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        try:
            data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except yaml.YAMLError as exc:
            raise ConfigError(f"bad config {path}: {exc}") from None
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must be a mapping")
        return cls.from_dict(data)

    def semantic_hash(self) -> str:
        payload = {k: getattr(self, k) for k in self._SEMANTIC}
        blob = json.dumps(payload, sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]

    def scorer_spec(self) -> ScorerSpec:
        return ScorerSpec(kind=self.scorer_kind, locator=self.scorer_locator,
                          scorer_id=self.scorer_id,
                          max_in_flight=self.max_in_flight)

    def aggregation(self) -> AggregationConfig:
        return AggregationConfig(strategy=self.strategy, alpha=self.alpha,
                                 epsilon=self.epsilon)


NEUTRAL_DEPTH_NORM = 0.5


@dataclass
class _PreparedPair:
    record: PairRecord
    plan: SegmentPlan
    summary_sentences: list[tuple[int, int]]
    depth_norms: list[float]
    heights: list[float]


def _article_starts(record: PairRecord, sentences: list[tuple[int, int]]) -> set[int]:
    if not record.article_breaks:
        return set()
    starts = set()
    for offset in record.article_breaks:
        for i, (a, _) in enumerate(sentences):
            if a >= offset:
                starts.add(i)
                break
    return starts


def plan_for(record: PairRecord, config: RunConfig) -> SegmentPlan:
    text = record.doc_text
    sentences = list(record.doc_sentences or split_sentences(text))
    if not sentences:
        raise InputError(f"pair {record.pair_id}: document has no sentences")
    if config.level >= 1 and record.doc_tree is not None:
        return segment_by_level(record.doc_tree, sentences, config.level,
                                config.capacity, text=text)
    if config.level >= 1:
        log.warning("pair %s: no document tree; falling back to windows",
                    record.pair_id)
    forced = paragraph_starts(text, sentences) | _article_starts(record, sentences)
    return fallback_chunk(text, sentences, config.capacity, forced)


def _summary_discourse(record: PairRecord,
                       sentences: list[tuple[int, int]]) -> tuple[list[float], list[float]]:
    """Per-sentence (depth_norm, height); neutral values when no tree aligns."""
    n = len(sentences)
    if record.summary_tree is None:
        log.warning("pair %s: no summary tree; re-weighting is neutral",
                    record.pair_id)
        return [NEUTRAL_DEPTH_NORM] * n, [0.0] * n
    table = compute_edu_features(record.summary_tree)
    alignments = align_sentences(sentences, record.summary_tree,
                                 text=record.summary_text)
    xs: list[float | None] = []
    heights: list[float] = []
    for alignment in alignments:
        if alignment.aligned:
            lo, hi = alignment.edu_range
            xs.append(sentence_features(table, lo, hi).depth_norm)
            heights.append(alignment.subtree_height)
        else:
            xs.append(None)
            heights.append(0.0)
    known = [x for x in xs if x is not None]
    neutral = sum(known) / len(known) if known else NEUTRAL_DEPTH_NORM
    return [neutral if x is None else x for x in xs], heights


def _prepare(record: PairRecord, config: RunConfig) -> _PreparedPair:
    summary_sentences = list(record.summary_sentences
                             or split_sentences(record.summary_text))
    if not summary_sentences:
        raise InputError(f"pair {record.pair_id}: summary has no sentences")
    plan = plan_for(record, config)
    if config.strategy == "reweighted_mean":
        depth_norms, heights = _summary_discourse(record, summary_sentences)
    else:
        n = len(summary_sentences)
        depth_norms, heights = [NEUTRAL_DEPTH_NORM] * n, [0.0] * n
    return _PreparedPair(record, plan, summary_sentences, depth_norms, heights)


def run_score(config: RunConfig) -> Path:
    """Score every manifest pair; returns the report path."""
    records = load_manifest(config.manifest)
    outdir = Path(config.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    spec = config.scorer_spec()
    agg = config.aggregation()
    cache = ScoreCache(config.cache) if config.cache else None

    workers = config.workers or os.cpu_count() or 1
    prepared: list[_PreparedPair | Exception] = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_prepare, r, config) for r in records]
        for record, fut in zip(records, futures):
            try:
                prepared.append(fut.result())
            except InputError as exc:
                log.error("pair %s failed: %s", record.pair_id, exc)
                prepared.append(exc)

    requests: list[ScoreRequest] = []
    slots: list[tuple[int, int, int]] = []  # (prepared idx, sentence, segment)
    for pi, prep in enumerate(prepared):
        if isinstance(prep, Exception):
            continue
        text = prep.record.summary_text
        pair_requests = []
        try:
            for si, (a, b) in enumerate(prep.summary_sentences):
                for gi, seg in enumerate(prep.plan.segments):
                    pair_requests.append(
                        ((pi, si, gi), ScoreRequest(id=len(requests) + len(pair_requests),
                                                    premise=seg.text,
                                                    hypothesis=text[a:b])))
        except InputError as exc:
            log.error("pair %s failed: %s", prep.record.pair_id, exc)
            prepared[pi] = exc
            continue
        for slot, request in pair_requests:
            slots.append(slot)
            requests.append(request)
    if not requests:
        raise InputError("no scoreable pairs in manifest")
    scores = score_pairs(spec, requests, cache)

    by_pair: dict[int, dict[int, list[float]]] = {}
    for (pi, si, gi), score in zip(slots, scores):
        by_pair.setdefault(pi, {}).setdefault(si, []).append(score)

    report_path = outdir / "report.jsonl"
    failures: list[dict] = []
    with open(report_path, "w", encoding="utf-8", newline="\n") as out:
        header = {"config_hash": config.semantic_hash(), "seed": config.seed,
                  "scorer_id": config.scorer_id}
        out.write(json.dumps(header, sort_keys=True) + "\n")
        for pi, prep in enumerate(prepared):
            if isinstance(prep, Exception):
                failures.append({"pair_id": records[pi].pair_id,
                                 "error": str(prep)})
                continue
            rows = by_pair[pi]
            raws = max_over_segments([rows[si] for si in sorted(rows)])
            sentence_scores = build_sentence_scores(
                raws, prep.depth_norms, prep.heights, agg)
            summary = aggregate_summary(sentence_scores, agg)
            for s in sentence_scores:
                out.write(json.dumps(
                    {"pair_id": prep.record.pair_id,
                     "sentence_index": s.sentence_index, "raw": s.raw,
                     "x": s.depth_norm, "height": s.height,
                     "reweighted": s.reweighted}, sort_keys=True) + "\n")
            out.write(json.dumps(
                {"pair_id": prep.record.pair_id, "summary_score": summary,
                 "strategy": agg.strategy, "alpha": agg.alpha},
                sort_keys=True) + "\n")

    if failures:
        failure_path = outdir / "failures.jsonl"
        with open(failure_path, "w", encoding="utf-8", newline="\n") as out:
            for row in failures:
                out.write(json.dumps(row, sort_keys=True) + "\n")
        raise InputError(
            f"{len(failures)} pair(s) failed "
            f"({', '.join(row['pair_id'] for row in failures)}); "
            f"partial report at {report_path}, details in {failure_path}")
    return report_path


def read_report_scores(path: str | Path) -> dict[str, float]:
    """Summary-level scores from a report file, keyed by pair_id."""
    scores: dict[str, float] = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            if "summary_score" in row:
                scores[row["pair_id"]] = float(row["summary_score"])
    if not scores:
        raise InputError(f"report {path} holds no summary scores")
    return scores


def read_report_header(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                row = json.loads(line)
                return row if "config_hash" in row else {}
    return {}


def _metric_for(kind: str, configured: str):
    if configured != "auto":
        if configured not in evalkit.METRICS:
            raise ConfigError(f"unknown metric {configured!r}")
        return configured, evalkit.METRICS[configured]
    name = "auc" if kind == "binary" else "tau"
    return name, evalkit.METRICS[name]


def run_eval(config: RunConfig, report_a: str | Path,
             report_b: str | Path | None = None,
             macro: bool = False) -> list[dict]:
    """Metric rows per dataset tag: {dataset_tag, metric, value[, p_vs_baseline]}."""
    records = load_manifest(config.manifest)
    scores_a = read_report_scores(report_a)
    scores_b = read_report_scores(report_b) if report_b is not None else None

    manifest_ids = [r.pair_id for r in records]
    for side, scores in (("A", scores_a), ("B", scores_b or scores_a)):
        missing = [pid for pid in manifest_ids if pid not in scores]
        extra = [pid for pid in scores if pid not in set(manifest_ids)]
        if missing or extra:
            first = (missing or extra)[0]
            raise InputError(
                f"report {side} does not align with manifest pair_ids; "
                f"first mismatch: {first!r}")

    rows: list[dict] = []
    tags = sorted({r.dataset_tag for r in records})
    for tag in tags:
        members = [r for r in records if r.dataset_tag == tag]
        gold = [r.label for r in members]
        a = [scores_a[r.pair_id] for r in members]
        name, metric = _metric_for(members[0].label_kind, config.metric)
        row = {"dataset_tag": tag, "metric": name,
               "value": metric(gold, a)}
        if scores_b is not None:
            b = [scores_b[r.pair_id] for r in members]
            row["p_vs_baseline"] = evalkit.paired_bootstrap(
                metric, gold, a, b, config.bootstrap, config.seed)
        rows.append(row)
    if macro and len(rows) > 1:
        rows.append({"dataset_tag": "_macro", "metric": "macro_avg",
                     "value": sum(r["value"] for r in rows) / len(rows)})
    return rows


FEATURE_NAMES = ("ono_penalty", "depth_score", "promotion_score",
                 "ono_norm", "depth_norm", "promo_norm")


def run_analyze(config: RunConfig) -> dict:
    """Depth-category histogram plus per-feature Welch t-tests.

    Needs summary trees and sentence_labels in the manifest; sentences
    without either are skipped with a warning.  The result also carries
    per-sentence alignment rows for the dump file.
    """
    records = load_manifest(config.manifest)
    categories = {-1: 0, 0: 0, 1: 0}
    by_label: dict[int, dict[str, list[float]]] = {
        0: {f: [] for f in FEATURE_NAMES},
        1: {f: [] for f in FEATURE_NAMES},
    }
    used = 0
    alignment_rows: list[dict] = []
    for record in records:
        if record.summary_tree is None:
            log.warning("pair %s: no summary tree; skipped in analysis",
                        record.pair_id)
            continue
        sentences = list(record.summary_sentences
                         or split_sentences(record.summary_text))
        labels = record.sentence_labels
        alignments = align_sentences(sentences, record.summary_tree,
                                     text=record.summary_text)
        table = compute_edu_features(record.summary_tree)
        for i, alignment in enumerate(alignments):
            lo, hi = alignment.edu_range or (None, None)
            alignment_rows.append(
                {"pair_id": record.pair_id, "sentence_index": i, "lo": lo,
                 "hi": hi, "category": alignment.depth_category,
                 "height": alignment.subtree_height})
            if not alignment.aligned:
                continue
            categories[min(alignment.depth_category, 1)] += 1
            used += 1
            if labels is None or i >= len(labels):
                continue
            feats = sentence_features(table, lo, hi)
            bucket = by_label[labels[i]]
            for name in FEATURE_NAMES:
                bucket[name].append(float(getattr(feats, name)))

    if used == 0:
        raise InputError("no aligned, tree-backed summary sentences to analyze")
    histogram = {str(k): v / used for k, v in categories.items()}

    tests = []
    for name in FEATURE_NAMES:
        errors = by_label[1][name]
        clean = by_label[0][name]
        if len(errors) < 2 or len(clean) < 2:
            continue
        t, p = evalkit.welch_t_test(errors, clean)
        tests.append({"feature": name, "t_stat": t, "p_value": p})
    return {"histogram": histogram, "sentences": used, "t_tests": tests,
            "alignments": alignment_rows}
