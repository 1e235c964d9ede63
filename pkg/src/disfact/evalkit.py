"""Benchmark metrics and statistical analyses.

ROC-AUC follows the Mann-Whitney pair statistic (ties count 0.5), Kendall's
tau is the tie-corrected tau-b, system comparison uses a one-sided paired
bootstrap over pair indices, and feature analysis uses Welch's two-sided
t-test.  ``aspl`` measures a discourse tree's average shortest path length
(all undirected parent-child edges), a proxy for branched versus chain-like
structure.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from math import inf, sqrt
from typing import Callable, Hashable, Sequence

import numpy as np
from scipy.special import betainc
from scipy.stats import rankdata

from .errors import InputError
from .tree import DiscourseTree


@dataclass(frozen=True)
class EvalRecord:
    pair_id: str
    system_score: float
    gold: float
    dataset_tag: str = "default"


def roc_auc(labels: Sequence[int], scores: Sequence[float]) -> float:
    """Probability a positive outranks a negative; ties count half."""
    if len(labels) != len(scores):
        raise InputError(f"{len(labels)} labels vs {len(scores)} scores")
    y = np.asarray(labels, dtype=float)
    s = np.asarray(scores, dtype=float)
    if not np.isin(y, (0.0, 1.0)).all():
        raise InputError("labels must be binary 0/1")
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise InputError("AUC undefined: both classes must be present")
    ranks = rankdata(s, method="average")
    u = float(ranks[y == 1.0].sum()) - n_pos * (n_pos + 1) / 2
    return u / (n_pos * n_neg)


def kendall_tau(x: Sequence[float], y: Sequence[float]) -> float:
    """Tau-b: tie-corrected concordant/discordant pair statistic."""
    if len(x) != len(y):
        raise InputError(f"{len(x)} vs {len(y)} values")
    n = len(x)
    if n < 2:
        raise InputError("tau undefined for fewer than 2 points")
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    iu = np.triu_indices(n, 1)
    dx = np.sign(xa[:, None] - xa[None, :])[iu]
    dy = np.sign(ya[:, None] - ya[None, :])[iu]
    prod = dx * dy
    concordant = int((prod > 0).sum())
    discordant = int((prod < 0).sum())
    ties_x = int((dx == 0).sum())
    ties_y = int((dy == 0).sum())
    n0 = n * (n - 1) // 2
    if n0 == ties_x or n0 == ties_y:
        raise InputError("tau undefined: an input is constant")
    return (concordant - discordant) / sqrt((n0 - ties_x) * (n0 - ties_y))


Metric = Callable[[np.ndarray, np.ndarray], float]


def paired_bootstrap(metric: Metric, gold: Sequence[float],
                     scores_a: Sequence[float], scores_b: Sequence[float],
                     n_resamples: int = 10000, seed: int = 0) -> float:
    """One-sided improvement test: p = fraction of resamples where
    metric(A) <= metric(B).

    Resamples draw pair indices with replacement; a resample on which the
    metric is undefined (single-class draw, constant ranks) is redrawn with
    a fresh derived seed, capped at 10 * n_resamples redraws overall.
    Deterministic given ``seed``: resample ``b`` uses the derived seed
    (seed, b, attempt).
    """
    g = np.asarray(gold, dtype=float)
    a = np.asarray(scores_a, dtype=float)
    b = np.asarray(scores_b, dtype=float)
    if not (len(g) == len(a) == len(b)):
        raise InputError("gold / A / B must be aligned, equal-length vectors")
    if len(g) == 0:
        raise InputError("empty inputs")
    if n_resamples < 1000:
        raise InputError(f"need at least 1000 resamples, got {n_resamples}")
    n = len(g)
    worse_or_equal = 0
    redraws = 0
    for i in range(n_resamples):
        attempt = 0
        while True:
            rng = np.random.default_rng((seed, i, attempt))
            idx = rng.integers(0, n, n)
            try:
                m_a = metric(g[idx], a[idx])
                m_b = metric(g[idx], b[idx])
                break
            except InputError:
                attempt += 1
                redraws += 1
                if redraws > 10 * n_resamples:
                    raise InputError(
                        f"metric undefined on too many resamples "
                        f"({redraws} redraws)") from None
        if m_a <= m_b:
            worse_or_equal += 1
    return worse_or_equal / n_resamples


def welch_t_test(sample_a: Sequence[float], sample_b: Sequence[float]) -> tuple[float, float]:
    """Welch's unequal-variance t-test; two-sided p via the Student-t CDF
    (regularized incomplete beta)."""
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise InputError("each sample needs at least 2 observations")
    mean_a, mean_b = a.mean(), b.mean()
    var_a = a.var(ddof=1)
    var_b = b.var(ddof=1)
    if var_a == 0.0 and var_b == 0.0:
        if mean_a == mean_b:
            return 0.0, 1.0
        return (inf if mean_a > mean_b else -inf), 0.0
    sa = var_a / len(a)
    sb = var_b / len(b)
    t = (mean_a - mean_b) / sqrt(sa + sb)
    df = (sa + sb) ** 2 / (sa ** 2 / (len(a) - 1) + sb ** 2 / (len(b) - 1))
    p = float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return float(t), p


def _bfs_distances(adj: dict, source: Hashable) -> dict:
    dist = {source: 0}
    frontier = deque([source])
    while frontier:
        node = frontier.popleft()
        for peer in adj[node]:
            if peer not in dist:
                dist[peer] = dist[node] + 1
                frontier.append(peer)
    return dist


def mean_pairwise_distance(adj: dict, targets: Sequence[Hashable] | None = None) -> float:
    """Mean BFS distance over unordered distinct pairs of ``targets``
    (default: every node) within the undirected graph ``adj``."""
    nodes = list(adj) if targets is None else list(targets)
    if len(nodes) < 2:
        raise InputError("need at least 2 nodes for a path length average")
    total = 0
    count = 0
    for i, src in enumerate(nodes):
        dist = _bfs_distances(adj, src)
        for dst in nodes[i + 1:]:
            if dst not in dist:
                raise InputError("graph is disconnected")
            total += dist[dst]
            count += 1
    return total / count


def tree_adjacency(tree: DiscourseTree) -> dict:
    """Undirected parent-child adjacency keyed by node (lo, hi) spans."""
    adj: dict[tuple[int, int], list] = {}
    for node in tree.nodes():
        adj.setdefault(node.span, [])
        for child in node.children:
            adj[node.span].append(child.span)
            adj.setdefault(child.span, []).append(node.span)
    return adj


def aspl(tree: DiscourseTree, node_set: str = "all") -> float:
    """Average shortest path length of the tree graph.

    ``node_set`` picks which pairs are averaged: "all" tree nodes (internal
    and leaves) or "leaves" only; distances always run through the full
    tree.
    """
    if node_set not in ("all", "leaves"):
        raise InputError(f"unknown node set {node_set!r}")
    adj = tree_adjacency(tree)
    targets = None
    if node_set == "leaves":
        targets = [n.span for n in tree.nodes() if n.is_leaf]
    return mean_pairwise_distance(adj, targets)


METRICS: dict[str, Metric] = {
    "auc": roc_auc,
    "tau": kendall_tau,
}
