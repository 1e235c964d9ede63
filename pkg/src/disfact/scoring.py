"""Pluggable premise/hypothesis alignment scoring.

Three backends sit behind one contract (one score in [0, 1] per request,
output order matching request order):

* ``builtin_overlap``: deterministic token-F1, so the whole pipeline runs
  without any neural model;
* ``subprocess``: a child process speaking newline-delimited JSON —
  ``{"id": int, "premise": str, "hypothesis": str}`` on stdin, responses
  ``{"id": int, "score": float}`` on stdout in any order, exit on stdin
  close;
* ``http``: POST ``{base}/v1/score`` with ``{"pairs": [{"premise",
  "hypothesis"}, ...]}`` answered by ``{"scores": [...]}`` in order.

A content-addressed append-only cache (line-delimited
``{"key": hex, "score": float, "scorer_id": str}``) is consulted before
dispatch and updated after; scoring the same (scorer_id, premise,
hypothesis) twice issues at most one backend call.
"""

from __future__ import annotations

import hashlib
import json
import logging
import queue
import shlex
import struct
import subprocess
import threading
import urllib.error
import urllib.request
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .errors import InputError, ProtocolError, TransportError

log = logging.getLogger(__name__)

BUILTIN_SCORER_ID = "builtin-overlap-f1/1"


def builtin_overlap(premise: str, hypothesis: str) -> float:
    """Token-level F1 of lowercase whitespace tokens (multiset overlap).

    Precision is the hypothesis tokens' covered share, recall the premise
    tokens'; empty hypothesis scores 0.
    """
    p_tokens = Counter(premise.lower().split())
    h_tokens = Counter(hypothesis.lower().split())
    overlap = sum((p_tokens & h_tokens).values())
    if overlap == 0:
        return 0.0
    precision = overlap / sum(h_tokens.values())
    recall = overlap / sum(p_tokens.values())
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class ScoreRequest:
    id: int
    premise: str
    hypothesis: str

    def __post_init__(self):
        if not self.premise or not self.hypothesis:
            raise InputError(f"request {self.id}: empty premise or hypothesis")


@dataclass(frozen=True)
class ScorerSpec:
    kind: str  # "builtin_overlap" | "subprocess" | "http"
    locator: str = ""
    scorer_id: str = BUILTIN_SCORER_ID
    max_in_flight: int = 8
    timeout: float = 60.0
    retries: int = 2

    def __post_init__(self):
        if self.kind not in ("builtin_overlap", "subprocess", "http"):
            raise InputError(f"unknown scorer kind {self.kind!r}")
        if self.max_in_flight < 1:
            raise InputError("max_in_flight must be positive")

    @classmethod
    def builtin(cls) -> "ScorerSpec":
        return cls(kind="builtin_overlap")


def cache_key(scorer_id: str, premise: str, hypothesis: str) -> str:
    """SHA-256 over length-prefixed fields; prefixing prevents splice collisions."""
    h = hashlib.sha256()
    for part in (scorer_id, premise, hypothesis):
        data = part.encode("utf-8")
        h.update(struct.pack(">Q", len(data)))
        h.update(data)
    return h.hexdigest()


class ScoreCache:
    """Append-only score log, loaded on start; writes are serialized."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._scores: dict[str, float] = {}
        self._lock = threading.Lock()
        if self.path.exists():
            with open(self.path, encoding="utf-8") as f:
                for line in f:
                    line = line.strip()
                    if not line:
                        continue
                    rec = json.loads(line)
                    self._scores[rec["key"]] = float(rec["score"])
        else:
            self.path.parent.mkdir(parents=True, exist_ok=True)

    def __len__(self) -> int:
        return len(self._scores)

    def get(self, key: str) -> float | None:
        return self._scores.get(key)

    def put(self, key: str, score: float, scorer_id: str) -> None:
        with self._lock:
            if key in self._scores:
                return
            self._scores[key] = score
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(json.dumps({"key": key, "score": score,
                                    "scorer_id": scorer_id}) + "\n")


class BuiltinBackend:
    def __init__(self, spec: ScorerSpec):
        del spec

    def score_batch(self, pairs: list[tuple[str, str]]) -> list[float]:
        return [builtin_overlap(p, h) for p, h in pairs]


class SubprocessBackend:
    """Drives one child process per batch with bounded in-flight requests."""

    def __init__(self, spec: ScorerSpec):
        self.command = shlex.split(spec.locator)
        if not self.command:
            raise InputError("subprocess scorer needs a command line locator")
        self.max_in_flight = spec.max_in_flight
        self.timeout = spec.timeout
        self.retries = spec.retries

    def score_batch(self, pairs: list[tuple[str, str]]) -> list[float]:
        results: dict[int, float] = {}
        pending = dict(enumerate(pairs))
        attempts = 1 + self.retries
        last_error = None
        for _ in range(attempts):
            try:
                self._run_once(pending, results)
            except TransportError as exc:
                last_error = exc
            if not pending:
                return [results[i] for i in range(len(pairs))]
        missing = sorted(pending)
        raise TransportError(
            f"scorer child failed to answer ids {missing} after "
            f"{attempts} attempts" + (f": {last_error}" if last_error else ""))

    def _run_once(self, pending: dict[int, tuple[str, str]],
                  results: dict[int, float]) -> None:
        proc = subprocess.Popen(
            self.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            text=True, encoding="utf-8")
        responses: queue.Queue = queue.Queue()

        def read_stdout():
            for line in proc.stdout:
                responses.put(line)
            responses.put(None)  # EOF

        reader = threading.Thread(target=read_stdout, daemon=True)
        reader.start()

        to_send = list(pending.items())
        in_flight: set[int] = set()
        sent = 0
        try:
            while pending:
                while sent < len(to_send) and len(in_flight) < self.max_in_flight:
                    rid, (premise, hypothesis) = to_send[sent]
                    line = json.dumps({"id": rid, "premise": premise,
                                       "hypothesis": hypothesis}) + "\n"
                    try:
                        proc.stdin.write(line)
                        proc.stdin.flush()
                    except (BrokenPipeError, OSError) as exc:
                        raise TransportError(f"scorer child dropped stdin: {exc}") from None
                    in_flight.add(rid)
                    sent += 1
                if sent == len(to_send) and not proc.stdin.closed:
                    proc.stdin.close()
                try:
                    line = responses.get(timeout=self.timeout)
                except queue.Empty:
                    raise TransportError(
                        f"scorer child silent for {self.timeout}s; "
                        f"ids {sorted(pending)} outstanding") from None
                if line is None:
                    raise TransportError(
                        f"scorer child closed stdout with ids "
                        f"{sorted(pending)} unanswered")
                self._accept(line, pending, results, in_flight)
        finally:
            if not proc.stdin.closed:
                proc.stdin.close()
            try:
                proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()

    @staticmethod
    def _accept(line: str, pending: dict, results: dict, in_flight: set) -> None:
        line = line.strip()
        if not line:
            return
        try:
            rec = json.loads(line)
            rid = rec["id"]
            score = rec["score"]
        except (json.JSONDecodeError, KeyError, TypeError):
            raise ProtocolError(f"unparseable scorer response line: {line!r}") from None
        if rid not in pending:
            raise ProtocolError(f"scorer answered unknown or duplicate id {rid}")
        if not isinstance(score, (int, float)) or isinstance(score, bool):
            raise ProtocolError(f"id {rid}: score must be a number, got {score!r}")
        results[rid] = float(score)
        del pending[rid]
        in_flight.discard(rid)


class HttpBackend:
    BATCH = 64  # pairs per POST; keeps bodies small and retries cheap

    def __init__(self, spec: ScorerSpec):
        if not spec.locator:
            raise InputError("http scorer needs a base URL locator")
        self.url = spec.locator.rstrip("/") + "/v1/score"
        self.timeout = spec.timeout
        self.retries = spec.retries

    def score_batch(self, pairs: list[tuple[str, str]]) -> list[float]:
        out: list[float] = []
        for start in range(0, len(pairs), self.BATCH):
            out.extend(self._post(pairs[start:start + self.BATCH], start))
        return out

    def _post(self, pairs: list[tuple[str, str]], offset: int) -> list[float]:
        body = json.dumps({"pairs": [{"premise": p, "hypothesis": h}
                                     for p, h in pairs]}).encode("utf-8")
        request = urllib.request.Request(
            self.url, data=body, headers={"Content-Type": "application/json"})
        last_error = None
        for _ in range(1 + self.retries):
            try:
                with urllib.request.urlopen(request, timeout=self.timeout) as resp:
                    payload = json.loads(resp.read().decode("utf-8"))
                break
            except (urllib.error.URLError, TimeoutError, OSError) as exc:
                last_error = exc
        else:
            raise TransportError(f"scorer endpoint unreachable: {last_error}")
        scores = payload.get("scores") if isinstance(payload, dict) else None
        if not isinstance(scores, list):
            raise ProtocolError("response missing 'scores' list")
        if len(scores) != len(pairs):
            missing = [offset + i for i in range(len(scores), len(pairs))]
            raise ProtocolError(
                f"response has {len(scores)} scores for {len(pairs)} pairs; "
                f"missing ids {missing}")
        out = []
        for i, s in enumerate(scores):
            if not isinstance(s, (int, float)) or isinstance(s, bool):
                raise ProtocolError(
                    f"id {offset + i}: score must be a number, got {s!r}")
            out.append(float(s))
        return out


_BACKENDS = {
    "builtin_overlap": BuiltinBackend,
    "subprocess": SubprocessBackend,
    "http": HttpBackend,
}


def make_backend(spec: ScorerSpec):
    return _BACKENDS[spec.kind](spec)


def score_pairs(spec: ScorerSpec, requests: list[ScoreRequest],
                cache: ScoreCache | None = None) -> list[float]:
    """Score every request, in request order, via cache then backend."""
    if not requests:
        raise InputError("no score requests")
    seen_ids = set()
    for r in requests:
        if r.id in seen_ids:
            raise InputError(f"duplicate request id {r.id}")
        seen_ids.add(r.id)

    keys = [cache_key(spec.scorer_id, r.premise, r.hypothesis) for r in requests]
    resolved: dict[str, float] = {}
    if cache is not None:
        for key in keys:
            hit = cache.get(key)
            if hit is not None:
                resolved[key] = hit

    miss_keys: list[str] = []
    miss_requests: list[ScoreRequest] = []
    for key, req in zip(keys, requests):
        if key not in resolved and key not in miss_keys:
            miss_keys.append(key)
            miss_requests.append(req)

    if miss_requests:
        backend = make_backend(spec)
        scores = backend.score_batch(
            [(r.premise, r.hypothesis) for r in miss_requests])
        for key, req, score in zip(miss_keys, miss_requests, scores):
            if not (0.0 <= score <= 1.0):
                raise ProtocolError(
                    f"id {req.id}: score {score} outside [0, 1]")
            resolved[key] = score
            if cache is not None:
                cache.put(key, score, spec.scorer_id)
    return [resolved[key] for key in keys]
