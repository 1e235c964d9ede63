"""Scorer backends, wire protocol, and the score cache."""

from __future__ import annotations

import json
import sys
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer
from pathlib import Path

import pytest

from disfact.errors import InputError, ProtocolError, TransportError
from disfact.scoring import (BuiltinBackend, ScoreCache, ScoreRequest,
                             ScorerSpec, builtin_overlap, cache_key,
                             score_pairs)

STUB = Path(__file__).parent / "stub_scorer.py"


def stub_spec(mode: str, log: Path | None = None, **kwargs) -> ScorerSpec:
    locator = f"{sys.executable} {STUB} --mode {mode}"
    if log is not None:
        locator += f" --log {log}"
    kwargs.setdefault("scorer_id", f"stub/{mode}")
    return ScorerSpec(kind="subprocess", locator=locator, **kwargs)


def stub_score(rid: int) -> float:
    return ((rid * 37) % 100) / 100


class TestBuiltinOverlap:
    def test_identical_strings(self):
        assert builtin_overlap("the cat sat", "the cat sat") == 1.0

    def test_disjoint_vocabulary(self):
        assert builtin_overlap("aa bb cc", "xx yy") == 0.0

    def test_partial_overlap_four_sevenths(self):
        assert builtin_overlap("a b c d", "a b x") == pytest.approx(4 / 7)

    def test_multiset_counts(self):
        # overlap 2, precision 2/2, recall 2/3 -> F1 0.8
        assert builtin_overlap("a a b", "a a") == pytest.approx(0.8)

    def test_empty_hypothesis(self):
        assert builtin_overlap("x", "") == 0.0

    def test_case_insensitive(self):
        assert builtin_overlap("The Cat", "the cat") == 1.0

    def test_role_swap_is_f1_symmetric(self):
        assert builtin_overlap("a a b", "a a") == builtin_overlap("a a", "a a b")


class TestRequestsAndSpec:
    def test_empty_fields_rejected(self):
        with pytest.raises(InputError):
            ScoreRequest(0, "", "h")
        with pytest.raises(InputError):
            ScoreRequest(0, "p", "")

    def test_unknown_kind_rejected(self):
        with pytest.raises(InputError):
            ScorerSpec(kind="telepathy")

    def test_duplicate_ids_rejected(self):
        reqs = [ScoreRequest(1, "p", "h"), ScoreRequest(1, "q", "h")]
        with pytest.raises(InputError):
            score_pairs(ScorerSpec.builtin(), reqs)


class TestCache:
    def test_key_is_stable_and_field_sensitive(self):
        k = cache_key("s", "p", "h")
        assert k == cache_key("s", "p", "h")
        assert k != cache_key("s2", "p", "h")
        assert k != cache_key("s", "ph", "")  # length prefixing blocks splices

    def test_persists_across_instances(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        cache = ScoreCache(path)
        cache.put("abc", 0.25, "sid")
        again = ScoreCache(path)
        assert again.get("abc") == 0.25
        rec = json.loads(path.read_text().strip())
        assert rec == {"key": "abc", "score": 0.25, "scorer_id": "sid"}

    def test_second_run_issues_no_backend_calls(self, tmp_path, monkeypatch):
        calls = []
        original = BuiltinBackend.score_batch

        def counting(self, pairs):
            calls.append(len(pairs))
            return original(self, pairs)

        monkeypatch.setattr(BuiltinBackend, "score_batch", counting)
        cache = ScoreCache(tmp_path / "cache.jsonl")
        spec = ScorerSpec.builtin()
        reqs = [ScoreRequest(i, f"premise {i}", f"premise {i}") for i in range(4)]
        first = score_pairs(spec, reqs, cache)
        assert calls == [4]
        second = score_pairs(spec, reqs, cache)
        assert calls == [4]  # no new backend work
        assert first == second == [1.0] * 4

    def test_within_batch_dedupe(self, tmp_path, monkeypatch):
        calls = []
        original = BuiltinBackend.score_batch

        def counting(self, pairs):
            calls.append(len(pairs))
            return original(self, pairs)

        monkeypatch.setattr(BuiltinBackend, "score_batch", counting)
        reqs = [ScoreRequest(0, "same text", "same text"),
                ScoreRequest(1, "same text", "same text")]
        out = score_pairs(ScorerSpec.builtin(), reqs,
                          ScoreCache(tmp_path / "c.jsonl"))
        assert calls == [1]
        assert out == [1.0, 1.0]


class TestSubprocessBackend:
    def _requests(self, n):
        return [ScoreRequest(i, f"premise text {i}", f"claim {i}")
                for i in range(n)]

    def test_streaming_order(self):
        out = score_pairs(stub_spec("stream"), self._requests(5))
        assert out == [stub_score(i) for i in range(5)]

    def test_shuffled_responses_reordered(self):
        out = score_pairs(stub_spec("shuffle", max_in_flight=16),
                          self._requests(9))
        assert out == [stub_score(i) for i in range(9)]

    def test_out_of_range_score_is_protocol_error(self):
        with pytest.raises(ProtocolError, match=r"outside \[0, 1\]"):
            score_pairs(stub_spec("bad-score"), self._requests(2))

    def test_unknown_id_is_protocol_error(self):
        with pytest.raises(ProtocolError, match="unknown"):
            score_pairs(stub_spec("alien-id"), self._requests(2))

    def test_missing_id_is_transport_error_listing_ids(self):
        with pytest.raises(TransportError, match=r"\[0\]"):
            score_pairs(stub_spec("drop-first", retries=1), self._requests(3))

    def test_crash_exhausts_retries(self):
        with pytest.raises(TransportError, match="2 attempts"):
            score_pairs(stub_spec("die", retries=1), self._requests(2))

    def test_timeout(self):
        with pytest.raises(TransportError, match="silent"):
            score_pairs(stub_spec("hang", retries=0, timeout=0.5),
                        self._requests(1))

    def test_retry_recovers_from_crash(self, tmp_path):
        marker = tmp_path / "died-once"
        locator = f"{sys.executable} {STUB} --mode die-once --marker {marker}"
        spec = ScorerSpec(kind="subprocess", locator=locator,
                          scorer_id="stub/die-once", retries=1)
        out = score_pairs(spec, self._requests(3))
        assert out == [stub_score(i) for i in range(3)]
        assert marker.exists()


class _ScoreHandler(BaseHTTPRequestHandler):
    behavior = "ok"
    hits = 0

    def do_POST(self):
        assert self.path == "/v1/score"
        type(self).hits += 1
        length = int(self.headers["Content-Length"])
        pairs = json.loads(self.rfile.read(length))["pairs"]
        if self.behavior == "flaky-500":
            type(self).behavior = "ok"
            self.send_response(500)
            self.end_headers()
            return
        if self.behavior == "short":
            scores = [0.5] * (len(pairs) - 1)
        elif self.behavior == "strings":
            scores = ["high"] * len(pairs)
        else:
            scores = [builtin_overlap(p["premise"], p["hypothesis"])
                      for p in pairs]
        body = json.dumps({"scores": scores}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture
def http_scorer():
    server = HTTPServer(("127.0.0.1", 0), _ScoreHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _ScoreHandler.behavior = "ok"
    _ScoreHandler.hits = 0
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


class TestHttpBackend:
    def _spec(self, url, **kwargs):
        kwargs.setdefault("scorer_id", "http-test/1")
        return ScorerSpec(kind="http", locator=url, **kwargs)

    def test_scores_in_order(self, http_scorer):
        reqs = [ScoreRequest(0, "a b c d", "a b x"),
                ScoreRequest(1, "same words", "same words")]
        out = score_pairs(self._spec(http_scorer), reqs)
        assert out == pytest.approx([4 / 7, 1.0])

    def test_short_response_is_protocol_error(self, http_scorer):
        _ScoreHandler.behavior = "short"
        with pytest.raises(ProtocolError, match="missing ids"):
            score_pairs(self._spec(http_scorer),
                        [ScoreRequest(i, "p", "h" + str(i)) for i in range(3)])

    def test_non_numeric_score_is_protocol_error(self, http_scorer):
        _ScoreHandler.behavior = "strings"
        with pytest.raises(ProtocolError, match="number"):
            score_pairs(self._spec(http_scorer), [ScoreRequest(0, "p", "h")])

    def test_retry_on_500(self, http_scorer):
        _ScoreHandler.behavior = "flaky-500"
        out = score_pairs(self._spec(http_scorer, retries=2),
                          [ScoreRequest(0, "w x", "w x")])
        assert out == [1.0]

    def test_unreachable_endpoint(self):
        spec = self._spec("http://127.0.0.1:1", retries=0, timeout=0.5)
        with pytest.raises(TransportError):
            score_pairs(spec, [ScoreRequest(0, "p", "h")])

    def test_large_batches_split_across_posts(self, http_scorer):
        reqs = [ScoreRequest(i, f"text {i}", f"text {i}") for i in range(150)]
        out = score_pairs(self._spec(http_scorer), reqs)
        assert out == [1.0] * 150
        assert _ScoreHandler.hits == 3  # 64 + 64 + 22


class TestScorePairsEdges:
    def test_empty_requests_rejected(self):
        with pytest.raises(InputError):
            score_pairs(ScorerSpec.builtin(), [])
