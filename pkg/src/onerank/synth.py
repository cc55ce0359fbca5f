"""Synthetic ground-truth data and missing-data simulation.

Systems are Gumbel random utilities with location ``dispersion * k`` for
k = 1..N, so a larger index is a better system. Measurement events are dealt
round-robin to three families: numeric (raw utilities of all systems on one
sample), binary (utility above a per-sample threshold) and ordinal (one
battle between two uniformly drawn systems).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .aggregate import Ranking
from .store import Measurement, Model, Sample, Store

FAMILIES = ("numeric", "binary", "ordinal")
BASELINE_ID = "random"


class InvalidFraction(ValueError):
    pass


@dataclass(frozen=True)
class GumbelConfig:
    n_systems: int = 100
    dispersion: float = 0.1
    scale: float = 1.0
    n_measurements: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.n_systems < 2:
            raise ValueError("need at least two systems")
        if not 0.0 <= self.dispersion <= 1.0:
            raise ValueError("dispersion must lie in [0, 1]")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if self.n_measurements < 1:
            raise ValueError("n_measurements must be positive")

    def locations(self) -> np.ndarray:
        return self.dispersion * np.arange(1, self.n_systems + 1, dtype=float)


@dataclass
class SynthDataset:
    store: Store
    ground_truth: Ranking
    config: GumbelConfig


def system_ids(n: int) -> list[str]:
    width = max(3, len(str(n)))
    return [f"sys{k:0{width}d}" for k in range(1, n + 1)]


def derive_seed(seed: int, *keys: int) -> int:
    """Independent, reproducible child seed for (seed, key, ...)."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFF, *(int(k) & 0xFFFFFFFF for k in keys)])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def _base_store(ids: list[str]) -> Store:
    store = Store()
    store.insert_model(Model(BASELINE_ID, "random baseline", "synthetic", True))
    for i in ids:
        store.insert_model(Model(i, i, "synthetic"))
    return store


def gumbel_generate(cfg: GumbelConfig) -> SynthDataset:
    rng = np.random.default_rng(cfg.seed)
    n, N = cfg.n_measurements, cfg.n_systems
    loc = cfg.locations()
    ids = system_ids(N)
    store = _base_store(ids)
    width = len(str(n - 1))

    fam_of = np.arange(n) % 3
    n_num, n_bin, n_ord = (int((fam_of == f).sum()) for f in range(3))
    numeric = rng.gumbel(loc, cfg.scale, size=(n_num, N))
    binary = rng.gumbel(loc, cfg.scale, size=(n_bin, N)) > rng.uniform(loc.min(), loc.max(), size=(n_bin, 1))
    pairs = np.array([rng.choice(N, 2, replace=False) for _ in range(n_ord)], dtype=np.int64).reshape(n_ord, 2)
    battle = rng.gumbel(loc[pairs], cfg.scale)

    counters = [0, 0, 0]
    for e in range(n):
        f = int(fam_of[e])
        j = counters[f]
        counters[f] += 1
        sid = f"s{e:0{width}d}"
        family = FAMILIES[f]
        store.insert_sample(
            Sample(sid, "synthetic", f"synthetic-{family}", family, {"family": family})
        )
        if f == 0:
            for i, v in zip(ids, numeric[j].tolist()):
                store.insert_measurement(Measurement(sid, i, "numeric", v))
        elif f == 1:
            for i, v in zip(ids, binary[j].tolist()):
                store.insert_measurement(Measurement(sid, i, "binary", int(v)))
        else:
            a, b = pairs[j].tolist()
            store.insert_battle(sid, ids[a], ids[b], "win" if battle[j, 0] > battle[j, 1] else "loss")

    truth = Ranking.from_scores({i: float(k) for k, i in enumerate(ids, 1)}, "ground_truth")
    return SynthDataset(store, truth, cfg)


def _check_fraction(f: float) -> None:
    if not 0.0 <= f < 1.0:
        raise InvalidFraction(f"fraction must lie in [0, 1), got {f!r}")


def remove_samples(store: Store, fraction: float, seed: int) -> Store:
    """View without floor(fraction * |samples|) uniformly drawn samples."""
    _check_fraction(fraction)
    ids = sorted(store.samples)
    k = int(np.floor(fraction * len(ids)))
    if k == 0:
        return store.view()
    rng = np.random.default_rng(seed)
    drop = {ids[i] for i in rng.choice(len(ids), size=k, replace=False).tolist()}
    return store.view([s for s in ids if s not in drop])


def measurement_units(store: Store) -> list[list[int]]:
    """Measurement indices grouped into removal units; a preference battle is one unit."""
    units: list[list[int]] = []
    battle_unit: dict[tuple, int] = {}
    for idx, m in enumerate(store.measurements):
        if m.metric == "preference":
            key = m.battle_key
            if key in battle_unit:
                units[battle_unit[key]].append(idx)
                continue
            battle_unit[key] = len(units)
        units.append([idx])
    return units


def remove_measurements(store: Store, fraction: float, seed: int) -> Store:
    """View without floor(fraction * units) uniformly drawn measurement units."""
    _check_fraction(fraction)
    units = measurement_units(store)
    k = int(np.floor(fraction * len(units)))
    if k == 0:
        return store.view()
    rng = np.random.default_rng(seed)
    keep = [True] * len(store.measurements)
    for u in rng.choice(len(units), size=k, replace=False).tolist():
        for idx in units[u]:
            keep[idx] = False
    return store.view(keep_measurement=keep)


def clustered_generate(
    n_systems: int = 10,
    cluster_sizes: tuple[int, ...] = (1500, 1000),
    dispersion: float = 0.3,
    dim: int = 8,
    noise: float = 0.1,
    seed: int = 0,
) -> tuple[Store, np.ndarray]:
    """Pool of numeric samples in concept clusters with different best systems.

    Cluster c has embedding centre e_c (a basis vector). Cluster 0 ranks
    systems by index; each further cluster uses a different fixed permutation
    (cluster 1 is the reversal). Returns the store and the cluster centres.
    """
    if len(cluster_sizes) > dim:
        raise ValueError("need dim >= number of clusters")
    rng = np.random.default_rng(seed)
    ids = system_ids(n_systems)
    store = _base_store(ids)
    centres = np.eye(dim)[: len(cluster_sizes)]
    total = sum(cluster_sizes)
    width = len(str(total - 1))
    base = np.arange(1, n_systems + 1, dtype=float)
    e = 0
    for c, size in enumerate(cluster_sizes):
        if c == 0:
            strength = base
        elif c == 1:
            strength = base[::-1].copy()
        else:
            strength = np.random.default_rng(derive_seed(seed, c)).permutation(base)
        loc = dispersion * strength
        emb = centres[c] + noise * rng.standard_normal((size, dim))
        utils = rng.gumbel(loc, 1.0, size=(size, n_systems))
        for j in range(size):
            sid = f"c{e:0{width}d}"
            e += 1
            store.insert_sample(
                Sample(
                    sid,
                    "synthetic-clusters",
                    f"cluster-{c}",
                    f"concept-{c}",
                    {"cluster": str(c)},
                    embedding=tuple(emb[j].tolist()),
                )
            )
            for i, v in zip(ids, utils[j].tolist()):
                store.insert_measurement(Measurement(sid, i, "numeric", v))
    return store, centres
