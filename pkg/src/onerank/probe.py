"""Capability probing: retrieve a sample subset, then rank models on it.

Retrieval combines metadata predicates with exact cosine search over
precomputed embeddings. The returned id list is the reproducibility handle:
aggregating over it again gives the same ranking.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable
from dataclasses import dataclass, field

import numpy as np

from .aggregate import Ranking, aggregate
from .store import DimensionMismatch, Sample, Store

DEFAULT_THRESHOLD = 0.3

Predicate = str | Callable[[object], bool]


class NoEmbeddings(ValueError):
    pass


class EmptyRetrieval(ValueError):
    pass


@dataclass(frozen=True)
class Query:
    text_embedding: tuple[float, ...] | None = None
    filters: tuple[tuple[str, Predicate], ...] = ()
    threshold: float = DEFAULT_THRESHOLD
    top_k: int | None = None
    exclude_ids: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.text_embedding is not None:
            object.__setattr__(self, "text_embedding", tuple(float(x) for x in self.text_embedding))
        object.__setattr__(self, "filters", tuple((str(k), p) for k, p in self.filters))
        object.__setattr__(self, "exclude_ids", frozenset(self.exclude_ids))
        if self.text_embedding is None and not self.filters:
            raise ValueError("a query needs an embedding, metadata filters, or both")
        if not -1.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must lie in [-1, 1]")
        if self.top_k is not None and self.top_k < 1:
            raise ValueError("top_k must be positive")


def _field(s: Sample, name: str):
    if name in ("id", "benchmark", "dataset", "task", "text"):
        return getattr(s, name)
    return s.metadata.get(name)


def _matches(s: Sample, filters) -> bool:
    for name, pred in filters:
        value = _field(s, name)
        if callable(pred):
            if not pred(value):
                return False
        elif value != pred:
            return False
    return True


def retrieve_scored(store: Store, q: Query) -> list[tuple[str, float | None]]:
    """(sample id, cosine similarity) pairs in retrieval order."""
    candidates = [
        s for sid, s in store.samples.items() if sid not in q.exclude_ids and _matches(s, q.filters)
    ]
    if q.text_embedding is None:
        out = [(s.id, None) for s in sorted(candidates, key=lambda s: s.id)]
    else:
        query = np.asarray(q.text_embedding, dtype=float)
        if store.embedding_dim is None or not any(s.embedding is not None for s in store.samples.values()):
            raise NoEmbeddings("store has no sample embeddings to search")
        if len(query) != store.embedding_dim:
            raise DimensionMismatch(
                f"query embedding has {len(query)} dims, store embeddings have {store.embedding_dim}"
            )
        qn = np.linalg.norm(query)
        if qn == 0:
            raise ValueError("query embedding has zero norm")
        ids, X = store.embedding_matrix(s.id for s in candidates)
        if not ids:
            return []
        sims = (X @ query) / (np.linalg.norm(X, axis=1) * qn)
        keep = np.nonzero(sims >= q.threshold)[0]
        out = sorted(((ids[i], float(sims[i])) for i in keep.tolist()), key=lambda e: (-e[1], e[0]))
    if q.top_k is not None:
        out = out[: q.top_k]
    return out


def retrieve(store: Store, q: Query) -> list[str]:
    """Ids passing every filter and, with an embedding, cosine >= threshold.

    Semantic results are sorted by similarity (ties by id); metadata-only
    results by id. Excluded ids are dropped before anything else.
    """
    return [sid for sid, _ in retrieve_scored(store, q)]


def probe(store: Store, q: Query, method: str = "pl", config=None) -> tuple[Ranking, list[str]]:
    ids = retrieve(store, q)
    if not ids:
        hint = (
            f" Try lowering the similarity threshold (currently {q.threshold})."
            if q.text_embedding is not None
            else " Try relaxing the metadata filters."
        )
        raise EmptyRetrieval("query retrieved no samples." + hint)
    return aggregate(store, method, sample_filter=ids, config=config), ids


def parse_filters(items: Iterable[str]) -> tuple[tuple[str, str], ...]:
    """Parse ``key=value`` strings into equality filters."""
    out = []
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ValueError(f"filter {item!r} is not of the form key=value")
        out.append((key, value))
    return tuple(out)
