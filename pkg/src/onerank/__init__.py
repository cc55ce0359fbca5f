"""Sparse ordinal rank aggregation for model evaluation pools."""

from .aggregate import (
    BTConfig,
    EloConfig,
    PLConfig,
    Ranking,
    aggregate,
    borda,
    bt_fit,
    dowdall,
    elo_fit,
    pl_fit,
)
from .metrics import kendall_tau, topk_overlap
from .ordinalize import PairwiseComparison, SampleRanking, rank_break, to_comparisons, to_sample_ranking
from .probe import Query, probe, retrieve
from .store import Measurement, Model, Sample, Store, load, load_dir, save
from .synth import GumbelConfig, gumbel_generate, remove_measurements, remove_samples

__all__ = [
    "BTConfig",
    "EloConfig",
    "GumbelConfig",
    "Measurement",
    "Model",
    "PLConfig",
    "PairwiseComparison",
    "Query",
    "Ranking",
    "Sample",
    "SampleRanking",
    "Store",
    "aggregate",
    "borda",
    "bt_fit",
    "dowdall",
    "elo_fit",
    "gumbel_generate",
    "kendall_tau",
    "load",
    "load_dir",
    "pl_fit",
    "probe",
    "rank_break",
    "remove_measurements",
    "remove_samples",
    "retrieve",
    "save",
    "to_comparisons",
    "to_sample_ranking",
    "topk_overlap",
]
