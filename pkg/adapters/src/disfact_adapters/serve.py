"""Scorer servers speaking the pipeline's wire protocols.

stdin/stdout protocol: one JSON object per line, ``{"id", "premise",
"hypothesis"}`` in, ``{"id", "score"}`` out (any order allowed; this server
answers in order except in shuffle mode), exit on stdin close.  HTTP
protocol: POST /v1/score with ``{"pairs": [...]}`` answered by
``{"scores": [...]}`` in request order.

Scores are sanitized before emission: anything outside [0, 1] is clamped
and logged, never sent raw.  Backends:

  echo     0.5 for every pair (protocol conformance stub)
  shuffle  token-F1 scores, responses deliberately out of order (the
           pair-dependent scores make client reordering mistakes visible)
  f1       lexical token-F1 (deterministic, model-free)
  nli      entailment probability from a hosted NLI model (optional deps)
"""

from __future__ import annotations

import json
import logging
import random
import sys
from collections import Counter
from http.server import BaseHTTPRequestHandler, HTTPServer

log = logging.getLogger(__name__)


def clamp_score(value: float, context: str = "") -> float:
    if 0.0 <= value <= 1.0:
        return float(value)
    clamped = min(max(float(value), 0.0), 1.0)
    log.warning("clamped out-of-range score %s -> %s %s", value, clamped,
                context)
    return clamped


def token_f1(premise: str, hypothesis: str) -> float:
    p = Counter(premise.lower().split())
    h = Counter(hypothesis.lower().split())
    overlap = sum((p & h).values())
    if overlap == 0:
        return 0.0
    return 2 * overlap / (sum(p.values()) + sum(h.values()))


class EchoScorer:
    def score(self, pairs: list[tuple[str, str]]) -> list[float]:
        return [0.5] * len(pairs)


class F1Scorer:
    def score(self, pairs: list[tuple[str, str]]) -> list[float]:
        return [token_f1(p, h) for p, h in pairs]


class NliScorer:
    """Entailment scorer over a sequence-classification model.

    Requires the optional ``neural`` extra plus downloadable weights; load
    problems raise at startup, never mid-stream.
    """

    def __init__(self, model_id: str, device: str = "cpu", batch_size: int = 8):
        try:
            import torch
            from transformers import (AutoModelForSequenceClassification,
                                      AutoTokenizer)
        except ImportError as exc:
            raise RuntimeError(f"neural extras not installed: {exc}") from None
        try:
            self._tokenizer = AutoTokenizer.from_pretrained(model_id)
            self._model = AutoModelForSequenceClassification.from_pretrained(
                model_id).to(device).eval()
        except Exception as exc:
            raise RuntimeError(f"cannot load scorer model {model_id!r}: "
                               f"{exc}") from None
        self._torch = torch
        self._device = device
        self._batch_size = batch_size
        labels = getattr(self._model.config, "id2label", {}) or {}
        self._entail_index = next(
            (i for i, name in labels.items()
             if "entail" in str(name).lower()), 0)

    def score(self, pairs: list[tuple[str, str]]) -> list[float]:
        scores: list[float] = []
        with self._torch.no_grad():
            for start in range(0, len(pairs), self._batch_size):
                chunk = pairs[start:start + self._batch_size]
                batch = self._tokenizer([p for p, _ in chunk],
                                        [h for _, h in chunk],
                                        padding=True, truncation=True,
                                        return_tensors="pt").to(self._device)
                logits = self._model(**batch).logits
                probs = logits.softmax(dim=-1)[:, self._entail_index]
                scores.extend(float(v) for v in probs.cpu())
        return scores


def make_scorer(name: str, device: str = "cpu", batch_size: int = 8):
    if name == "echo":
        return EchoScorer()
    if name in ("f1", "shuffle"):
        return F1Scorer()
    return NliScorer(name, device=device, batch_size=batch_size)


def serve_stdio(scorer, shuffle: bool = False, stdin=None, stdout=None) -> None:
    """Request loop over line-delimited JSON; returns at EOF."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout

    def respond(req, score):
        stdout.write(json.dumps(
            {"id": req["id"], "score": clamp_score(score, f"id {req['id']}")})
            + "\n")
        stdout.flush()

    pending = []
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        req = json.loads(line)
        if shuffle:
            pending.append(req)
            continue
        respond(req, scorer.score([(req["premise"], req["hypothesis"])])[0])
    if pending:
        scores = scorer.score([(r["premise"], r["hypothesis"])
                               for r in pending])
        order = list(range(len(pending)))
        random.Random(len(pending)).shuffle(order)
        for i in order:
            respond(pending[i], scores[i])


def serve_http(scorer, host: str = "127.0.0.1", port: int = 8741) -> HTTPServer:
    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            if self.path != "/v1/score":
                self.send_response(404)
                self.end_headers()
                return
            length = int(self.headers.get("Content-Length", "0"))
            try:
                pairs = json.loads(self.rfile.read(length))["pairs"]
                raw = scorer.score([(p["premise"], p["hypothesis"])
                                    for p in pairs])
            except (KeyError, TypeError, json.JSONDecodeError) as exc:
                self.send_response(400)
                self.end_headers()
                self.wfile.write(str(exc).encode())
                return
            body = json.dumps(
                {"scores": [clamp_score(s) for s in raw]}).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def log_message(self, *args):
            pass

    return HTTPServer((host, port), Handler)
