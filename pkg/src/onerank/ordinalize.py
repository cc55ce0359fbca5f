"""Turn heterogeneous measurements into sample-level rankings and pairwise comparisons."""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass

import numpy as np

from .store import Measurement, Store

DEFAULT_TIE_TOLERANCE = 1e-9


class MixedMetricFamilies(ValueError):
    pass


class NoMeasurements(ValueError):
    pass


@dataclass(frozen=True)
class SampleRanking:
    """Ordered tie-groups; earlier groups are strictly better."""

    sample_id: str
    groups: tuple[frozenset[str], ...]

    def __post_init__(self):
        groups = tuple(frozenset(g) for g in self.groups)
        if not groups or any(not g for g in groups):
            raise ValueError("a sample ranking needs at least one group and no empty groups")
        seen: set[str] = set()
        for g in groups:
            if seen & g:
                raise ValueError(f"models {sorted(seen & g)} appear in more than one group")
            seen |= g
        object.__setattr__(self, "groups", groups)

    @property
    def models(self) -> list[str]:
        return [m for g in self.groups for m in sorted(g)]

    def __len__(self) -> int:
        return sum(len(g) for g in self.groups)


@dataclass(frozen=True, order=True)
class PairwiseComparison:
    sample_id: str
    winner: str
    loser: str

    def __post_init__(self):
        if self.winner == self.loser:
            raise ValueError(f"comparison of {self.winner!r} with itself")


class ComparisonSet(Sequence):
    """Columnar sequence of pairwise comparisons.

    Comparisons are stored as integer codes into ``sample_labels`` and
    ``model_labels``. Iteration and indexing yield PairwiseComparison objects,
    so the set behaves like a plain list while the fitters read the arrays.
    """

    def __init__(self, sample_labels, model_labels, sample_idx, winner_idx, loser_idx):
        self.sample_labels = list(sample_labels)
        self.model_labels = list(model_labels)
        self.sample_idx = np.asarray(sample_idx, dtype=np.int64)
        self.winner_idx = np.asarray(winner_idx, dtype=np.int64)
        self.loser_idx = np.asarray(loser_idx, dtype=np.int64)
        if not (len(self.sample_idx) == len(self.winner_idx) == len(self.loser_idx)):
            raise ValueError("column lengths differ")

    @classmethod
    def from_pairs(cls, comparisons: Iterable[PairwiseComparison]) -> ComparisonSet:
        """Encode comparisons, keeping their order."""
        if isinstance(comparisons, ComparisonSet):
            return comparisons
        comps = list(comparisons)
        s_lab = sorted({c.sample_id for c in comps})
        m_lab = sorted({c.winner for c in comps} | {c.loser for c in comps})
        s_code = {s: i for i, s in enumerate(s_lab)}
        m_code = {m: i for i, m in enumerate(m_lab)}
        return cls(
            s_lab,
            m_lab,
            [s_code[c.sample_id] for c in comps],
            [m_code[c.winner] for c in comps],
            [m_code[c.loser] for c in comps],
        )

    @classmethod
    def empty(cls) -> ComparisonSet:
        return cls([], [], [], [], [])

    def __len__(self) -> int:
        return len(self.sample_idx)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        return PairwiseComparison(
            self.sample_labels[self.sample_idx[i]],
            self.model_labels[self.winner_idx[i]],
            self.model_labels[self.loser_idx[i]],
        )

    def __iter__(self) -> Iterator[PairwiseComparison]:
        s, m = self.sample_labels, self.model_labels
        for a, w, l in zip(self.sample_idx.tolist(), self.winner_idx.tolist(), self.loser_idx.tolist()):
            yield PairwiseComparison(s[a], m[w], m[l])

    def __eq__(self, other) -> bool:
        if isinstance(other, (ComparisonSet, list, tuple)):
            return len(self) == len(other) and all(a == b for a, b in zip(self, other))
        return NotImplemented

    def __repr__(self) -> str:
        return f"ComparisonSet({len(self)} comparisons, {len(self.model_labels)} models)"

    def models(self) -> set[str]:
        used = np.union1d(self.winner_idx, self.loser_idx)
        return {self.model_labels[i] for i in used.tolist()}

    def win_matrix(self, model_ids: Sequence[str]) -> np.ndarray:
        """Count matrix W[i, j] = number of times model_ids[i] beat model_ids[j]."""
        pos = {m: i for i, m in enumerate(model_ids)}
        remap = np.array([pos.get(m, -1) for m in self.model_labels], dtype=np.int64)
        if len(self):
            missing = np.union1d(self.winner_idx, self.loser_idx)
            missing = missing[remap[missing] < 0]
            if len(missing):
                raise ValueError(
                    f"comparison mentions model {self.model_labels[missing[0]]!r} outside the model set"
                )
        n = len(model_ids)
        W = np.zeros((n, n))
        if len(self):
            np.add.at(W, (remap[self.winner_idx], remap[self.loser_idx]), 1.0)
        return W

    def sample_blocks(self) -> list[np.ndarray]:
        """Row indices grouped by sample, blocks in order of first appearance."""
        if not len(self):
            return []
        _, first, inverse = np.unique(self.sample_idx, return_index=True, return_inverse=True)
        order = np.argsort(inverse, kind="stable")
        bounds = np.cumsum(np.bincount(inverse))[:-1]
        blocks = np.split(order, bounds)
        return [blocks[k] for k in np.argsort(first, kind="stable")]


def metric_family(measurements: Sequence[Measurement], sample_id: str) -> str:
    if not measurements:
        raise NoMeasurements(f"sample {sample_id!r} has no measurements")
    families = {m.metric for m in measurements}
    if len(families) > 1:
        raise MixedMetricFamilies(f"sample {sample_id!r} mixes metric families {sorted(families)}")
    return families.pop()


def _tie_groups(values: np.ndarray, tolerance: float) -> np.ndarray:
    """Group index per entry (0 = best).

    On sorted values, chaining consecutive gaps <= tolerance is the transitive
    closure of pairwise closeness.
    """
    order = np.argsort(-values, kind="stable")
    gaps = -np.diff(values[order])
    group_sorted = np.concatenate([[0], np.cumsum(gaps > tolerance)])
    groups = np.empty(len(values), dtype=np.int64)
    groups[order] = group_sorted
    return groups


def ranking_from_values(sample_id: str, values: dict[str, float], tolerance: float = DEFAULT_TIE_TOLERANCE) -> SampleRanking:
    if tolerance < 0:
        raise ValueError("tolerance must be non-negative")
    ids = sorted(values)
    g = _tie_groups(np.array([values[i] for i in ids], dtype=float), tolerance)
    groups: list[set[str]] = [set() for _ in range(int(g.max()) + 1)]
    for i, k in zip(ids, g.tolist()):
        groups[k].add(i)
    return SampleRanking(sample_id, tuple(frozenset(x) for x in groups))


def to_sample_ranking(store: Store, sample_id: str, tolerance: float = DEFAULT_TIE_TOLERANCE) -> SampleRanking:
    """Rank the models measured on one cardinal or binary sample (higher is better)."""
    ms = store.measurements_for(sample_id)
    fam = metric_family(ms, sample_id)
    if fam == "preference":
        raise MixedMetricFamilies(
            f"sample {sample_id!r} holds preference data; use to_comparisons or preference_ballots"
        )
    return ranking_from_values(sample_id, {m.model_id: float(m.value) for m in ms}, tolerance)


def rank_break(r: SampleRanking) -> list[PairwiseComparison]:
    """Full breaking: every cross-group ordered pair, ties dropped."""
    out = []
    for i, better in enumerate(r.groups):
        worse = [m for g in r.groups[i + 1:] for m in sorted(g)]
        for w in sorted(better):
            out.extend(PairwiseComparison(r.sample_id, w, l) for l in worse)
    return out


def preference_ballots(store: Store, sample_id: str) -> list[SampleRanking]:
    """One two-model ballot per battle on a preference sample."""
    out = []
    for m in store.measurements_for(sample_id):
        if m.metric != "preference" or m.model_id > m.opponent:
            continue
        if m.outcome == "win":
            groups = (frozenset([m.model_id]), frozenset([m.opponent]))
        elif m.outcome == "loss":
            groups = (frozenset([m.opponent]), frozenset([m.model_id]))
        else:
            groups = (frozenset([m.model_id, m.opponent]),)
        out.append(SampleRanking(sample_id, groups))
    return out


def _select(store: Store, sample_filter) -> list[str]:
    ids = store.measured_sample_ids()
    if sample_filter is None:
        return ids
    keep = set(sample_filter)
    return [s for s in ids if s in keep]


def to_comparisons(
    store: Store,
    sample_filter: Iterable[str] | None = None,
    tolerance: float = DEFAULT_TIE_TOLERANCE,
) -> ComparisonSet:
    """All pairwise comparisons of the selected samples, canonically sorted.

    Order is (sample id, winner id, loser id), so the result does not depend
    on measurement insertion order.
    """
    sample_ids = sorted(_select(store, sample_filter))
    model_labels = sorted(store.models)
    m_code = {m: i for i, m in enumerate(model_labels)}
    s_col, w_col, l_col = [], [], []
    for s_i, sid in enumerate(sample_ids):
        ms = store.measurements_for(sid)
        fam = metric_family(ms, sid)
        if fam == "preference":
            pairs = [(m_code[m.model_id], m_code[m.opponent]) for m in ms if m.outcome == "win"]
            if not pairs:
                continue
            w, l = (np.array(x, dtype=np.int64) for x in zip(*pairs))
        else:
            codes = np.array([m_code[m.model_id] for m in ms], dtype=np.int64)
            g = _tie_groups(np.array([float(m.value) for m in ms]), tolerance)
            wi, li = np.nonzero(g[:, None] < g[None, :])
            w, l = codes[wi], codes[li]
        s_col.append(np.full(len(w), s_i, dtype=np.int64))
        w_col.append(w)
        l_col.append(l)
    if not s_col:
        return ComparisonSet(sample_ids, model_labels, [], [], [])
    s = np.concatenate(s_col)
    w = np.concatenate(w_col)
    l = np.concatenate(l_col)
    order = np.lexsort((l, w, s))
    return ComparisonSet(sample_ids, model_labels, s[order], w[order], l[order])


def sample_rankings(
    store: Store,
    sample_filter: Iterable[str] | None = None,
    tolerance: float = DEFAULT_TIE_TOLERANCE,
) -> list[SampleRanking]:
    """Ballots for positional rules: one per cardinal sample, one per battle."""
    out = []
    for sid in sorted(_select(store, sample_filter)):
        ms = store.measurements_for(sid)
        if metric_family(ms, sid) == "preference":
            out.extend(preference_ballots(store, sid))
        else:
            out.append(to_sample_ranking(store, sid, tolerance))
    return out
