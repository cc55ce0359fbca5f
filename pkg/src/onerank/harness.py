"""Experiment drivers: ground-truth comparison, sparsity sweeps, separability
and query-vs-random probing, plus the synthetic reproduction tables."""

from __future__ import annotations

import itertools
import warnings
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .aggregate import (
    BTConfig,
    EloConfig,
    PLConfig,
    Ranking,
    UnknownMethod,
    METHODS,
    borda,
    bt_fit,
    dowdall,
    elo_fit,
    observed_models,
    pl_fit,
)
from .metrics import kendall_tau, topk_overlap
from .ordinalize import DEFAULT_TIE_TOLERANCE, sample_rankings, to_comparisons
from .probe import Query, retrieve
from .store import Store
from .synth import GumbelConfig, derive_seed, gumbel_generate, remove_measurements, remove_samples

DEFAULT_SCHEDULE = tuple(round(x / 100, 2) for x in [*range(0, 91, 10), *range(91, 100)])
MODES = ("samples", "measurements")


class NoCardinalData(ValueError):
    pass


class InsufficientSamples(ValueError):
    pass


def ground_truth_ranking(store: Store) -> Ranking:
    """Mean of min-max normalized cardinal scores per model.

    Each (dataset, metric) column is normalized to [0, 1]; constant columns map
    to 0.5. A model's score is the mean over all its normalized measurements,
    so datasets weigh in proportion to their sample counts.
    """
    columns: dict[tuple[str, str], list[tuple[str, float]]] = {}
    for m in store.measurements:
        if m.metric == "preference":
            continue
        ds = store.samples[m.sample_id].dataset
        columns.setdefault((ds, m.metric), []).append((m.model_id, float(m.value)))
    if not columns:
        raise NoCardinalData("store has no binary or numeric measurements")
    per_model: dict[str, list[float]] = {}
    for cells in columns.values():
        vals = np.array([v for _, v in cells])
        lo, hi = vals.min(), vals.max()
        norm = np.full(len(vals), 0.5) if hi == lo else (vals - lo) / (hi - lo)
        for (model, _), x in zip(cells, norm.tolist()):
            per_model.setdefault(model, []).append(x)
    return Ranking.from_scores({k: float(np.mean(v)) for k, v in per_model.items()}, "ground_truth")


@dataclass
class _Prepared:
    """Comparisons and ballots computed once per store view."""

    store: Store
    models: list[str]
    tie_tolerance: float = DEFAULT_TIE_TOLERANCE
    _comps: object = None
    _ballots: object = None

    @property
    def comparisons(self):
        if self._comps is None:
            self._comps = to_comparisons(self.store, None, self.tie_tolerance)
        return self._comps

    @property
    def ballots(self):
        if self._ballots is None:
            self._ballots = sample_rankings(self.store, None, self.tie_tolerance)
        return self._ballots

    def fit(self, method: str, seed: int, configs: Mapping[str, object] | None = None) -> Ranking:
        cfg = (configs or {}).get(method)
        if method == "pl":
            return pl_fit(self.comparisons, self.models, self.store.baseline, cfg or PLConfig())
        if method == "bt":
            return bt_fit(self.comparisons, self.models, self.store.baseline, cfg or BTConfig())
        if method == "elo":
            base = cfg or EloConfig()
            return elo_fit(
                self.comparisons,
                self.models,
                EloConfig(base.k_factor, base.initial_rating, base.scale, base.passes, seed),
            )
        if method == "borda":
            return borda(self.ballots, self.models)
        if method == "dowdall":
            return dowdall(self.ballots, self.models)
        raise UnknownMethod(f"unknown method {method!r}")


def _check_methods(methods: Iterable[str]) -> list[str]:
    methods = list(methods)
    for m in methods:
        if m not in METHODS:
            raise UnknownMethod(f"unknown method {m!r}; expected one of {', '.join(METHODS)}")
    return methods


def _sd(x) -> float:
    if not len(x):
        return float("nan")
    # identical trials must report exactly 0, not a rounding residue
    return 0.0 if all(v == x[0] for v in x) else float(np.std(x))


@dataclass
class GTRow:
    method: str
    tau_mean: float
    tau_sd: float
    topk_mean: float
    taus: list[float]

    def as_dict(self, digits: int | None = None) -> dict:
        f = (lambda v: v) if digits is None else (lambda v: round(v, digits))
        return {
            "method": self.method,
            "tau_mean": f(self.tau_mean),
            "tau_sd": f(self.tau_sd),
            "top10_overlap": f(self.topk_mean),
            "n_trials": len(self.taus),
        }


def _trial_taus(prep: _Prepared, method: str, gt: Ranking, trial_seeds, topk: int, configs):
    taus, overlaps = [], []
    for ts in trial_seeds:
        r = prep.fit(method, ts, configs)
        taus.append(kendall_tau(r, gt).tau)
        common = set(r.scores) & set(gt.scores)
        k = min(topk, len(common))
        restrict = lambda x: Ranking.from_scores({m: s for m, s in x.scores.items() if m in common}, x.method)
        overlaps.append(topk_overlap(restrict(r), restrict(gt), k) if k else float("nan"))
    return taus, overlaps


def run_gt_comparison(
    store: Store,
    methods: Iterable[str],
    n_trials: int = 3,
    seed: int = 0,
    ground_truth: Ranking | None = None,
    topk: int = 10,
    configs: Mapping[str, object] | None = None,
) -> list[GTRow]:
    """Kendall tau (mean, sd over trials) of each method against the ground truth.

    Trials differ only in stochastic fitting (the Elo shuffle seed is
    ``derive_seed(seed, trial)``), so deterministic methods have sd 0.
    Also reports the top-k overlap with the ground truth.
    """
    methods = _check_methods(methods)
    if not methods:
        return []
    gt = ground_truth if ground_truth is not None else ground_truth_ranking(store)
    prep = _Prepared(store, observed_models(store))
    seeds = [derive_seed(seed, t) for t in range(n_trials)]
    rows = []
    for m in methods:
        taus, overlaps = _trial_taus(prep, m, gt, seeds, topk, configs)
        rows.append(GTRow(m, float(np.mean(taus)), _sd(taus), float(np.mean(overlaps)), taus))
    return rows


@dataclass
class SweepResult:
    mode: str
    schedule: list[float]
    methods: list[str]
    n_trials: int
    seed: int
    taus: dict[tuple[str, float], list[float]] = field(default_factory=dict)

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.schedule, self.schedule[1:])):
            raise ValueError("schedule must be strictly increasing")

    def mean(self, method: str, fraction: float) -> float:
        return float(np.mean(self.taus[(method, fraction)]))

    def sd(self, method: str, fraction: float) -> float:
        return _sd(self.taus[(method, fraction)])

    def rows(self) -> list[dict]:
        return [
            {
                "mode": self.mode,
                "missing_fraction": f,
                "method": m,
                "tau_mean": self.mean(m, f),
                "tau_sd": self.sd(m, f),
                "n_trials": self.n_trials,
            }
            for f in self.schedule
            for m in self.methods
        ]


def _frac_key(f: float) -> int:
    return int(round(f * 10_000))


def run_sparsity_sweep(
    store: Store,
    mode: str,
    methods: Iterable[str],
    seed: int = 0,
    n_trials: int = 3,
    schedule: Sequence[float] = DEFAULT_SCHEDULE,
    ground_truth: Ranking | None = None,
    configs: Mapping[str, object] | None = None,
) -> SweepResult:
    """Tau against the ground truth as samples or measurements go missing.

    For each fraction and trial the removal seed is
    ``derive_seed(seed, fraction, trial)``; fitting then uses the same trial
    seeds as ``run_gt_comparison``, so the fraction-0 row reproduces it.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    methods = _check_methods(methods)
    remover = remove_samples if mode == "samples" else remove_measurements
    gt = ground_truth if ground_truth is not None else ground_truth_ranking(store)
    result = SweepResult(mode, [float(f) for f in schedule], methods, n_trials, seed)
    for f in result.schedule:
        for m in methods:
            result.taus[(m, f)] = []
        for t in range(n_trials):
            view = remover(store, f, derive_seed(seed, _frac_key(f), t))
            prep = _Prepared(view, observed_models(view))
            for m in methods:
                taus, _ = _trial_taus(prep, m, gt, [derive_seed(seed, t)], 10, configs)
                result.taus[(m, f)].extend(taus)
    return result


@dataclass
class SeparabilityRow:
    method: str
    pct_mean: float
    pct_sd: float
    per_split: list[float]

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            "preserved_pct_mean": self.pct_mean,
            "preserved_pct_sd": self.pct_sd,
            "n_splits": len(self.per_split),
        }


def preserved_pairs(a: Ranking, b: Ranking, combined: Ranking, ignore: Iterable[str] = ()) -> tuple[int, int]:
    """(pairs strictly ordered the same way in a and b, of those kept in combined)."""
    sa, sb, sc = a.scores, b.scores, combined.scores
    skip = set(ignore)
    models = sorted((sa.keys() & sb.keys() & sc.keys()) - skip)
    total = kept = 0
    for x, y in itertools.combinations(models, 2):
        da, db = np.sign(sa[x] - sa[y]), np.sign(sb[x] - sb[y])
        if da != 0 and da == db:
            total += 1
            kept += int(np.sign(sc[x] - sc[y]) == da)
    return total, kept


def split_halves(store: Store, seed: int) -> tuple[list[str], list[str]]:
    """Random halves of the measured samples, stratified by benchmark."""
    by_bench: dict[str, list[str]] = {}
    for sid in sorted(store.measured_sample_ids()):
        by_bench.setdefault(store.samples[sid].benchmark, []).append(sid)
    rng = np.random.default_rng(seed)
    a, b = [], []
    for bench in sorted(by_bench):
        ids = by_bench[bench]
        perm = [ids[i] for i in rng.permutation(len(ids)).tolist()]
        h = len(ids) // 2
        a += perm[:h]
        b += perm[h:]
    return a, b


def run_separability(
    store: Store,
    methods: Iterable[str],
    n_splits: int = 5,
    seed: int = 0,
    configs: Mapping[str, object] | None = None,
) -> list[SeparabilityRow]:
    """Share of pairs ordered alike in two half-data rankings that the full-data ranking keeps.

    The baseline is left out of the pair count: it is an anchor, not a
    compared system.
    """
    methods = _check_methods(methods)
    if len(store.measured_sample_ids()) < 2:
        raise InsufficientSamples("separability needs at least 2 measured samples to split into halves")
    full = _Prepared(store, observed_models(store))
    rows = []
    per_method: dict[str, list[float]] = {m: [] for m in methods}
    for split in range(n_splits):
        a_ids, b_ids = split_halves(store, derive_seed(seed, split))
        if not a_ids or not b_ids:
            raise InsufficientSamples("a split produced an empty half; need at least 2 samples")
        halves = [store.view(ids) for ids in (a_ids, b_ids)]
        preps = [_Prepared(h, observed_models(h)) for h in halves]
        for m in methods:
            ra = preps[0].fit(m, derive_seed(seed, split, 0), configs)
            rb = preps[1].fit(m, derive_seed(seed, split, 1), configs)
            rc = full.fit(m, derive_seed(seed, split, 2), configs)
            total, kept = preserved_pairs(ra, rb, rc, ignore=[store.baseline] if store.baseline else [])
            per_method[m].append(100.0 * kept / total if total else float("nan"))
    for m in methods:
        v = per_method[m]
        rows.append(SeparabilityRow(m, float(np.mean(v)), _sd(v), v))
    return rows


@dataclass
class QueryVsRandomRow:
    size: int
    random_tau: float
    query_tau: float
    n_queries: int

    def as_dict(self) -> dict:
        return {
            "size": self.size,
            "random_tau": self.random_tau,
            "query_tau": self.query_tau,
            "n_queries": self.n_queries,
        }


def run_query_vs_random(
    store: Store,
    queries: Sequence[Query],
    sizes: Iterable[int] = (100, 1000, 10000),
    seed: int = 0,
    method: str = "pl",
    n_random: int = 5,
    config=None,
) -> list[QueryVsRandomRow]:
    """Tau to the global ranking of probe rankings vs random subsets of equal size.

    A size row is skipped (with a warning) when the pool or any query's
    retrieval is smaller than the size.
    """
    _check_methods([method])
    configs = {method: config} if config is not None else None
    global_prep = _Prepared(store, observed_models(store))
    global_rank = global_prep.fit(method, derive_seed(seed, 0), configs)
    retrieved = [retrieve(store, q) for q in queries]
    pool = sorted(store.measured_sample_ids())
    rows = []
    for n in sizes:
        short = [i for i, r in enumerate(retrieved) if len(r) < n]
        if n > len(pool) or short:
            warnings.warn(
                f"skipping size {n}: pool has {len(pool)} samples, queries {short} retrieve fewer than {n}",
                stacklevel=2,
            )
            continue

        def tau_on(ids, k):
            view = store.view(ids)
            r = _Prepared(view, observed_models(view)).fit(method, derive_seed(seed, n, k), configs)
            return kendall_tau(r, global_rank).tau

        q_taus = [tau_on(r[:n], i) for i, r in enumerate(retrieved)]
        r_taus = []
        for k in range(n_random):
            rng = np.random.default_rng(derive_seed(seed, n, 1_000 + k))
            pick = [pool[i] for i in rng.choice(len(pool), size=n, replace=False).tolist()]
            r_taus.append(tau_on(pick, 1_000 + k))
        rows.append(QueryVsRandomRow(int(n), float(np.mean(r_taus)), float(np.mean(q_taus)), len(queries)))
    return rows


# -- synthetic reproduction tables -------------------------------------------


def dispersion_table(
    dispersions: Sequence[float] = (0.01, 0.02, 0.05, 0.10),
    methods: Sequence[str] = ("elo", "bt", "pl"),
    seeds: Sequence[int] = (0, 1, 2),
    n_systems: int = 100,
    n_measurements: int = 1000,
    n_trials: int = 3,
) -> dict[tuple[float, str], list[float]]:
    """Tau to the index ground truth per (dispersion, method).

    One entry per dataset seed: the mean over ``n_trials`` fits (only Elo
    varies between trials).
    """
    out: dict[tuple[float, str], list[float]] = {}
    for phi in dispersions:
        for s in seeds:
            ds = gumbel_generate(GumbelConfig(n_systems, phi, 1.0, n_measurements, s))
            rows = run_gt_comparison(ds.store, methods, n_trials=n_trials, seed=s, ground_truth=ds.ground_truth)
            for row in rows:
                out.setdefault((phi, row.method), []).append(row.tau_mean)
    return out


def missing_data_table(
    fractions: Sequence[float] = (0.5, 0.9, 0.95, 0.99),
    methods: Sequence[str] = ("elo", "bt", "pl"),
    dispersion: float = 0.1,
    seed: int = 0,
    n_trials: int = 3,
    mode: str = "samples",
) -> SweepResult:
    """Sparsity sweep on one synthetic dataset.

    On synthetic data every measurement event is one sample, so "samples" mode
    removes whole measurement events.
    """
    ds = gumbel_generate(GumbelConfig(dispersion=dispersion, seed=seed))
    return run_sparsity_sweep(
        ds.store, mode, methods, seed=seed, n_trials=n_trials, schedule=fractions, ground_truth=ds.ground_truth
    )
