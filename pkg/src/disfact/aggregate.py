"""Combine per-(sentence x segment) scores into a summary-level score.

The discourse re-weighting applies two exponent stages to each sentence
score s (scores live in [0, 1], so exponents > 1 shrink and < 1 boost):

    f(s_i)  = s_i ** (1 + (mean(x) - x_i))      # x_i: normalized depth score
    s_i^*   = f(s_i) ** (1 + h_i * alpha)        # h_i: subtree height

mean(x) runs over the whole summary, the sentence's own x_i included.
Scores are clamped to [epsilon, 1] before exponentiation so an exact-zero
backend score never meets a zero exponent.  Aggregation is then the mean of
raw scores, their minimum, or the mean of re-weighted scores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import InputError

STRATEGIES = ("mean", "min", "reweighted_mean")


@dataclass(frozen=True)
class AggregationConfig:
    strategy: str = "mean"
    alpha: float = 1.0
    epsilon: float = 1e-6

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise InputError(f"unknown strategy {self.strategy!r}; "
                             f"expected one of {STRATEGIES}")
        if not math.isfinite(self.alpha) or self.alpha < 0:
            raise InputError(f"alpha must be finite and >= 0, got {self.alpha}")
        if not 0 < self.epsilon <= 0.01:
            raise InputError(f"epsilon must lie in (0, 0.01], got {self.epsilon}")


@dataclass(frozen=True)
class SentenceScore:
    sentence_index: int
    raw: float
    depth_norm: float
    height: float
    reweighted: float


def max_over_segments(matrix: Sequence[Sequence[float]]) -> list[float]:
    """Per-sentence raw score: max over its per-segment scores."""
    out = []
    for i, row in enumerate(matrix):
        if not row:
            raise InputError(f"sentence {i} has no segment scores")
        for s in row:
            if not 0.0 <= s <= 1.0:
                raise InputError(f"sentence {i}: segment score {s} outside [0, 1]")
        out.append(max(row))
    return out


def reweight(scores: Sequence[float], depth_norms: Sequence[float],
             heights: Sequence[float], alpha: float = 1.0,
             epsilon: float = 1e-6) -> list[float]:
    """Apply both exponent stages; returns the re-weighted scores."""
    if not (len(scores) == len(depth_norms) == len(heights)):
        raise InputError(
            f"length mismatch: {len(scores)} scores, {len(depth_norms)} depth "
            f"norms, {len(heights)} heights")
    if not scores:
        raise InputError("empty summary")
    if not math.isfinite(alpha) or alpha < 0:
        raise InputError(f"alpha must be finite and >= 0, got {alpha}")
    for x in depth_norms:
        if not 0.0 <= x <= 1.0:
            raise InputError(f"depth norm {x} outside [0, 1]")
    for h in heights:
        if h < 0:
            raise InputError(f"negative subtree height {h}")

    clamped = [min(max(s, epsilon), 1.0) for s in scores]
    # fsum: correctly-rounded regardless of order, so permuting sentences
    # permutes outputs exactly
    x_mean = math.fsum(depth_norms) / len(depth_norms)
    out = []
    for s, x, h in zip(clamped, depth_norms, heights):
        f = s ** (1.0 + (x_mean - x))
        out.append(f ** (1.0 + h * alpha))
    return out


def build_sentence_scores(raws: Sequence[float], depth_norms: Sequence[float],
                          heights: Sequence[float],
                          config: AggregationConfig) -> list[SentenceScore]:
    reweighted = reweight(raws, depth_norms, heights, config.alpha, config.epsilon)
    return [SentenceScore(i, raw, x, h, rw)
            for i, (raw, x, h, rw) in enumerate(zip(raws, depth_norms, heights,
                                                    reweighted))]


def aggregate_summary(sentence_scores: Sequence[SentenceScore],
                      config: AggregationConfig) -> float:
    if not sentence_scores:
        raise InputError("cannot aggregate an empty summary")
    if config.strategy == "mean":
        return math.fsum(s.raw for s in sentence_scores) / len(sentence_scores)
    if config.strategy == "min":
        return min(s.raw for s in sentence_scores)
    return math.fsum(s.reweighted for s in sentence_scores) / len(sentence_scores)
