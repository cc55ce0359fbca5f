"""Global rankings from pairwise comparisons or positional ballots.

Plackett-Luce scores are fitted on the win-count matrix by iterative Luce
spectral ranking, safeguarded with minorization-maximization steps so the
likelihood never decreases (damped Newton steps take over where the spectral
chain is numerically degenerate). Bradley-Terry uses a Newton solver on the same likelihood and reports
on the Elo-like 400*log10 scale. Elo is sequential and order dependent. Borda
and Dowdall are positional rules over sample rankings.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .ordinalize import (
    DEFAULT_TIE_TOLERANCE,
    ComparisonSet,
    PairwiseComparison,
    SampleRanking,
    sample_rankings,
    to_comparisons,
)
from .store import Model, Store

METHODS = ("pl", "elo", "bt", "borda", "dowdall")
BT_SCALE = 400.0 / math.log(10.0)


class AggregationError(ValueError):
    pass


class NoModels(AggregationError):
    pass


class Disconnected(AggregationError):
    pass


class UnknownMethod(AggregationError):
    pass


class NonConvergence(RuntimeError):
    def __init__(self, msg: str, residual: float, iterations: int):
        super().__init__(f"{msg} (residual {residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class Ranking:
    """Models ordered by score, best first; equal scores break on model id."""

    entries: tuple[tuple[str, float], ...]
    method: str

    @classmethod
    def from_scores(cls, scores: dict[str, float], method: str) -> Ranking:
        entries = sorted(((m, float(s)) for m, s in scores.items()), key=lambda e: (-e[1], e[0]))
        return cls(tuple(entries), method)

    @property
    def scores(self) -> dict[str, float]:
        return dict(self.entries)

    @property
    def order(self) -> list[str]:
        return [m for m, _ in self.entries]

    def top(self, k: int) -> list[str]:
        return self.order[:k]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class PLConfig:
    tolerance: float = 1e-8
    max_iters: int = 10_000
    smoothing: float = 0.01

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.smoothing < 0:
            raise ValueError("smoothing must be non-negative")


@dataclass(frozen=True)
class BTConfig:
    tolerance: float = 1e-8
    max_iters: int = 500
    smoothing: float = 0.01

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.smoothing < 0:
            raise ValueError("smoothing must be non-negative")


@dataclass(frozen=True)
class EloConfig:
    k_factor: float = 32.0
    initial_rating: float = 1000.0
    scale: float = 400.0
    passes: int = 1
    shuffle_seed: int = 0

    def __post_init__(self):
        if not self.k_factor > 0:
            raise ValueError("k_factor must be positive")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if self.passes < 1:
            raise ValueError("passes must be positive")


def _model_ids(models: Iterable, baseline: str | None = None) -> list[str]:
    ids = {m.id if isinstance(m, Model) else str(m) for m in models}
    if baseline is not None:
        if baseline not in ids:
            raise AggregationError(f"baseline {baseline!r} is not in the model set")
    if not ids:
        raise NoModels("no models to rank")
    return sorted(ids)


def _as_set(comparisons) -> ComparisonSet:
    return ComparisonSet.from_pairs(comparisons)


def smoothed_win_matrix(comparisons, model_ids: Sequence[str], baseline: str, smoothing: float) -> np.ndarray:
    """Win counts plus ``smoothing`` pseudo-wins and pseudo-losses of every model against the baseline."""
    W = _as_set(comparisons).win_matrix(model_ids)
    if smoothing > 0:
        b = list(model_ids).index(baseline)
        others = np.arange(len(model_ids)) != b
        W[others, b] += smoothing
        W[b, others] += smoothing
    return W


def _check_connected(W: np.ndarray) -> None:
    n = W.shape[0]
    if n < 2:
        return
    k, _ = connected_components(W > 0, directed=True, connection="strong")
    if k > 1:
        raise Disconnected(
            f"comparison graph has {k} strongly connected components; the MLE does not exist (use smoothing > 0)"
        )


def pl_log_likelihood(theta: np.ndarray, W: np.ndarray) -> float:
    """Sum over comparisons of log(gamma_w / (gamma_w + gamma_l)) with gamma = exp(theta)."""
    diff = theta[:, None] - theta[None, :]
    mask = W > 0
    return float(-(W[mask] * np.logaddexp(0.0, -diff[mask])).sum())


def mm_solve(
    W: np.ndarray,
    anchor: int,
    tolerance: float = 1e-8,
    max_iters: int = 10_000,
    trace: Callable[[int, np.ndarray], None] | None = None,
) -> tuple[np.ndarray, int, float]:
    """Hunter's MM iteration for pairwise Plackett-Luce / Bradley-Terry strengths.

    Returns (theta, iterations, final residual) with theta[anchor] == 0.
    Each update maximizes a separable minorizer of the log-likelihood, then
    rescales so the anchor has unit strength; the likelihood is scale free,
    so every step is an ascent step.
    """
    N = W + W.T
    wins = W.sum(axis=1)
    n = W.shape[0]
    gamma = np.ones(n)
    theta = np.zeros(n)
    if trace is not None:
        trace(0, theta.copy())
    residual = math.inf
    for it in range(1, max_iters + 1):
        denom = (N / (gamma[:, None] + gamma[None, :])).sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            new = np.where(denom > 0, wins / denom, gamma)
        new = new / new[anchor]
        new_theta = np.log(new)
        residual = float(np.max(np.abs(new_theta - theta)))
        gamma, theta = new, new_theta
        theta[anchor] = 0.0
        if trace is not None:
            trace(it, theta.copy())
        if residual < tolerance:
            return theta, it, residual
    raise NonConvergence("Plackett-Luce MM did not converge", residual, max_iters)


def _lsr_step(W: np.ndarray, gamma: np.ndarray) -> np.ndarray | None:
    """Stationary distribution of the Luce spectral ranking chain at ``gamma``.

    Every comparison "w beats l" adds rate 1/(gamma_w + gamma_l) to the
    transition l -> w. Returns None if the chain cannot be solved.
    """
    n = len(gamma)
    rates = (W / (gamma[:, None] + gamma[None, :])).T
    np.fill_diagonal(rates, 0.0)
    gen = rates - np.diag(rates.sum(axis=1))
    A = gen.T.copy()
    A[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    try:
        pi = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(pi)) or np.any(pi <= 0):
        return None
    return pi


def _gradient_hessian(W: np.ndarray, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    N = W + W.T
    p = 1.0 / (1.0 + np.exp(-(theta[:, None] - theta[None, :])))
    grad = W.sum(axis=1) - (N * p).sum(axis=1)
    curv = N * p * p.T
    return grad, curv - np.diag(curv.sum(axis=1))


# likelihood differences below this are float noise near the optimum
_LL_SLACK = 1e-12


def _newton_step(W: np.ndarray, theta: np.ndarray, free: np.ndarray, ll: float) -> tuple[np.ndarray, float]:
    """Damped Newton ascent step in log space.

    A candidate is accepted if it raises the log-likelihood, or if it leaves
    it unchanged to within float noise while shrinking the gradient; the
    latter lets the last digits converge where the likelihood is flat.
    """
    grad, H = _gradient_hessian(W, theta)
    g0 = float(np.max(np.abs(grad[free]))) if len(free) else 0.0
    try:
        step = np.linalg.solve(H[np.ix_(free, free)], -grad[free])
    except np.linalg.LinAlgError:
        step = np.linalg.lstsq(H[np.ix_(free, free)], -grad[free], rcond=None)[0]
    t = 1.0
    while t >= 1e-10:
        cand = theta.copy()
        cand[free] += t * step
        cand_ll = pl_log_likelihood(cand, W)
        if cand_ll >= ll:
            return cand, cand_ll
        if cand_ll >= ll - _LL_SLACK:
            g1 = _gradient_hessian(W, cand)[0]
            if float(np.max(np.abs(g1[free]))) < g0:
                return cand, cand_ll
        t *= 0.5
    return theta.copy(), ll


def ilsr_solve(
    W: np.ndarray,
    anchor: int,
    tolerance: float = 1e-8,
    max_iters: int = 10_000,
    trace: Callable[[int, np.ndarray], None] | None = None,
) -> tuple[np.ndarray, int, float]:
    """Iterative Luce spectral ranking with an ascent safeguard.

    A spectral step is accepted only if it does not lower the
    log-likelihood. When it would (or when the chain is numerically
    degenerate, as happens for strengths spanning many orders of magnitude)
    a damped Newton step in log space is taken instead.
    Returns (theta, iterations, final residual) with theta[anchor] == 0.
    """
    n = W.shape[0]
    free = np.array([i for i in range(n) if i != anchor], dtype=np.int64)
    theta = np.zeros(n)
    ll = pl_log_likelihood(theta, W)
    if trace is not None:
        trace(0, theta.copy())
    residual = math.inf
    for it in range(1, max_iters + 1):
        new_ll = -math.inf
        with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
            pi = _lsr_step(W, np.exp(theta))
        if pi is not None:
            new_theta = np.log(pi / pi[anchor])
            new_theta[anchor] = 0.0
            new_ll = pl_log_likelihood(new_theta, W)
        if not new_ll >= ll:
            new_theta, new_ll = _newton_step(W, theta, free, ll)
        residual = float(np.max(np.abs(new_theta - theta)))
        theta, ll = new_theta, new_ll
        if trace is not None:
            trace(it, theta.copy())
        if residual < tolerance:
            return theta, it, residual
    raise NonConvergence("Plackett-Luce solver did not converge", residual, max_iters)


def pl_fit(
    comparisons,
    models: Iterable,
    baseline: str,
    cfg: PLConfig | None = None,
    trace: Callable[[int, np.ndarray], None] | None = None,
) -> Ranking:
    """Plackett-Luce MLE from pairwise comparisons; scores are natural-log strengths.

    The baseline is anchored at exactly 0. ``trace(iteration, theta)`` is
    called after every solver step, with theta indexed by sorted model id.
    """
    cfg = cfg or PLConfig()
    ids = _model_ids(models, baseline)
    W = smoothed_win_matrix(comparisons, ids, baseline, cfg.smoothing)
    if cfg.smoothing == 0:
        _check_connected(W)
    b = ids.index(baseline)
    theta, _, _ = ilsr_solve(W, b, cfg.tolerance, cfg.max_iters, trace)
    return Ranking.from_scores(dict(zip(ids, theta.tolist())), "pl")


def bt_fit(
    comparisons,
    models: Iterable,
    baseline: str,
    cfg: BTConfig | None = None,
) -> Ranking:
    """Bradley-Terry MLE by damped Newton steps, reported as 400*log10(gamma)."""
    cfg = cfg or BTConfig()
    ids = _model_ids(models, baseline)
    W = smoothed_win_matrix(comparisons, ids, baseline, cfg.smoothing)
    if cfg.smoothing == 0:
        _check_connected(W)
    b = ids.index(baseline)
    free = np.array([i for i in range(len(ids)) if i != b], dtype=np.int64)
    theta = np.zeros(len(ids))
    ll = pl_log_likelihood(theta, W)
    step_size = math.inf
    for _ in range(cfg.max_iters):
        if len(free) == 0:
            break
        new_theta, ll = _newton_step(W, theta, free, ll)
        step_size = float(np.max(np.abs(new_theta - theta)))
        theta = new_theta
        if step_size < cfg.tolerance:
            break
    else:
        raise NonConvergence("Bradley-Terry Newton solver did not converge", step_size, cfg.max_iters)
    theta[b] = 0.0
    return Ranking.from_scores(dict(zip(ids, (theta * BT_SCALE).tolist())), "bt")


def elo_fit(comparisons, models: Iterable, cfg: EloConfig | None = None) -> Ranking:
    """Sequential Elo ratings.

    Before each pass the order of the per-sample blocks of comparisons is
    shuffled with ``cfg.shuffle_seed``; comparisons inside a block keep their
    input order. A fixed seed makes the result deterministic.
    """
    cfg = cfg or EloConfig()
    ids = _model_ids(models)
    cs = _as_set(comparisons)
    pos = {m: i for i, m in enumerate(ids)}
    try:
        remap = np.array([pos[m] for m in cs.model_labels], dtype=np.int64)
    except KeyError as exc:
        raise AggregationError(f"comparison mentions model {exc.args[0]!r} outside the model set") from None
    rating = [float(cfg.initial_rating)] * len(ids)
    if len(cs):
        winners = remap[cs.winner_idx]
        losers = remap[cs.loser_idx]
        blocks = cs.sample_blocks()
        rng = np.random.default_rng(cfg.shuffle_seed)
        k, scale = float(cfg.k_factor), float(cfg.scale)
        for _ in range(cfg.passes):
            order = np.concatenate([blocks[i] for i in rng.permutation(len(blocks))])
            for w, l in zip(winners[order].tolist(), losers[order].tolist()):
                delta = k * (1.0 - 1.0 / (1.0 + 10.0 ** ((rating[l] - rating[w]) / scale)))
                rating[w] += delta
                rating[l] -= delta
    return Ranking.from_scores(dict(zip(ids, rating)), "elo")


def _positional(
    rankings: Iterable[SampleRanking],
    models: Iterable,
    points: Callable[[int, int], float],
    method: str,
) -> Ranking:
    ids = _model_ids(models)
    earned: dict[str, list[float]] = {m: [] for m in ids}
    for r in rankings:
        m = len(r)
        p = 1
        for group in r.groups:
            share = math.fsum(points(q, m) for q in range(p, p + len(group))) / len(group)
            for model in group:
                if model not in earned:
                    raise AggregationError(f"ballot mentions model {model!r} outside the model set")
                earned[model].append(share)
            p += len(group)
    return Ranking.from_scores({k: math.fsum(v) for k, v in earned.items()}, method)


def borda(rankings: Iterable[SampleRanking], models: Iterable) -> Ranking:
    """Position p of m earns m - p points; tied models share the mean of their span."""
    return _positional(rankings, models, lambda p, m: float(m - p), "borda")


def dowdall(rankings: Iterable[SampleRanking], models: Iterable) -> Ranking:
    """Position p earns 1/p points; tied models share the mean of their span."""
    return _positional(rankings, models, lambda p, m: 1.0 / p, "dowdall")


def observed_models(store: Store, sample_filter: Iterable[str] | None = None) -> list[str]:
    keep = None if sample_filter is None else set(sample_filter)
    seen = {m.model_id for m in store.measurements if keep is None or m.sample_id in keep}
    if store.baseline is not None:
        seen.add(store.baseline)
    return sorted(seen)


def aggregate(
    store: Store,
    method: str,
    sample_filter: Iterable[str] | None = None,
    config=None,
    tie_tolerance: float = DEFAULT_TIE_TOLERANCE,
) -> Ranking:
    """Rank the models observed in the (filtered) store with one of METHODS."""
    if method not in METHODS:
        raise UnknownMethod(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")
    if sample_filter is not None:
        sample_filter = set(sample_filter)
    models = observed_models(store, sample_filter)
    if method in ("borda", "dowdall"):
        ballots = sample_rankings(store, sample_filter, tie_tolerance)
        return (borda if method == "borda" else dowdall)(ballots, models)
    comps = to_comparisons(store, sample_filter, tie_tolerance)
    if method == "elo":
        return elo_fit(comps, models, config)
    if store.baseline is None:
        raise AggregationError("store has no baseline model")
    if method == "pl":
        return pl_fit(comps, models, store.baseline, config)
    return bt_fit(comps, models, store.baseline, config)


__all__ = [
    "METHODS",
    "AggregationError",
    "BTConfig",
    "Disconnected",
    "EloConfig",
    "NoModels",
    "NonConvergence",
    "PLConfig",
    "PairwiseComparison",
    "Ranking",
    "UnknownMethod",
    "aggregate",
    "borda",
    "bt_fit",
    "dowdall",
    "elo_fit",
    "ilsr_solve",
    "mm_solve",
    "observed_models",
    "pl_fit",
    "pl_log_likelihood",
    "smoothed_win_matrix",
]
