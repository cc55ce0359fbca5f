"""Ranking-agreement and retrieval-quality metrics."""

from __future__ import annotations

from collections import Counter
from collections.abc import Hashable, Iterable, Sequence
from dataclasses import dataclass

import numpy as np
from scipy.stats import kendalltau

from .aggregate import Ranking


class InsufficientOverlap(ValueError):
    pass


class KTooLarge(ValueError):
    pass


class EmptyRetrieval(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


@dataclass(frozen=True)
class TauResult:
    tau: float
    n_common: int


def _scores(r) -> dict[str, float]:
    return r.scores if isinstance(r, Ranking) else dict(r)


def kendall_tau(a: Ranking, b: Ranking) -> TauResult:
    """Tau-b between the score vectors of two rankings, over their common models.

    Scores are compared, not positions, so equal scores count as ties.
    A constant score vector has no defined correlation and yields tau = 0.
    """
    sa, sb = _scores(a), _scores(b)
    common = sorted(sa.keys() & sb.keys())
    if len(common) < 2:
        raise InsufficientOverlap(f"rankings share {len(common)} model(s); need at least 2")
    x = np.array([sa[m] for m in common])
    y = np.array([sb[m] for m in common])
    if np.all(x == x[0]) or np.all(y == y[0]):
        return TauResult(0.0, len(common))
    tau = float(kendalltau(x, y, variant="b").statistic)
    # the sqrt in the tau-b denominator leaves 1 - 1e-16 for identical orders
    return TauResult(float(np.clip(round(tau, 14), -1.0, 1.0)), len(common))


def topk_overlap(a: Ranking, b: Ranking, k: int) -> float:
    """|top_k(a) & top_k(b)| / k."""
    if k < 1:
        raise ValueError("k must be positive")
    if len(a) < k or len(b) < k:
        raise KTooLarge(f"k={k} exceeds ranking length ({len(a)}, {len(b)})")
    return len(set(a.top(k)) & set(b.top(k))) / k


def average_precision(retrieved: Sequence[Hashable], relevant: Iterable[Hashable]) -> float:
    """Mean of precision@rank over the ranks where a relevant item was retrieved."""
    if len(retrieved) == 0:
        raise EmptyRetrieval("retrieved list is empty")
    relevant = set(relevant)
    hits, precisions = 0, []
    for rank, item in enumerate(retrieved, 1):
        if item in relevant:
            hits += 1
            precisions.append(hits / rank)
    if not precisions:
        return 0.0
    return float(np.mean(precisions))


def mean_ap(queries: Iterable[tuple[Sequence[Hashable], Iterable[Hashable]]]) -> float:
    aps = [average_precision(r, rel) for r, rel in queries]
    return float(np.mean(aps)) if aps else 0.0


def cmc_at_k(queries: Iterable[tuple[Sequence[Hashable], Iterable[Hashable]]], k: int) -> float:
    """Fraction of queries with at least one relevant item in the top k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    queries = list(queries)
    if not queries:
        return 0.0
    hit = sum(any(x in set(rel) for x in list(ret)[:k]) for ret, rel in queries)
    return hit / len(queries)


def cohen_kappa(labels_a: Sequence[Hashable], labels_b: Sequence[Hashable]) -> float:
    if len(labels_a) != len(labels_b):
        raise LengthMismatch(f"{len(labels_a)} vs {len(labels_b)} labels")
    n = len(labels_a)
    if n == 0:
        raise LengthMismatch("need at least one label pair")
    p_o = sum(x == y for x, y in zip(labels_a, labels_b)) / n
    ca, cb = Counter(labels_a), Counter(labels_b)
    p_e = sum(ca[c] * cb[c] for c in ca.keys() | cb.keys()) / (n * n)
    if p_e == 1.0:
        return 1.0 if p_o == 1.0 else 0.0
    return (p_o - p_e) / (1.0 - p_e)
