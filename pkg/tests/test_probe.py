from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st

from onerank.aggregate import aggregate
from onerank.probe import EmptyRetrieval, NoEmbeddings, Query, parse_filters, probe, retrieve, retrieve_scored
from onerank.store import DimensionMismatch, Measurement, Model, Sample, Store
from onerank.synth import clustered_generate


def emb_store():
    st_ = Store()
    st_.insert_model(Model("base", is_baseline=True))
    for m in "AB":
        st_.insert_model(Model(m))
    rows = [
        ("s1", "captioning", (1.0, 0.0, 0.0)),
        ("s2", "vqa", (0.0, 1.0, 0.0)),
        ("s3", "captioning", (0.9, 0.1, 0.0)),
        ("s4", "vqa", (0.6, 0.0, 0.8)),
    ]
    for sid, task, e in rows:
        st_.insert_sample(Sample(sid, "bench", "ds", task, {"lang": "en"}, None, e))
    st_.insert_battle("s1", "A", "B", "win")
    st_.insert_battle("s2", "B", "A", "win")
    st_.insert_battle("s3", "A", "base", "win")
    st_.insert_battle("s4", "B", "base", "win")
    return st_


def test_identical_embedding_first():
    scored = retrieve_scored(emb_store(), Query((1.0, 0.0, 0.0)))
    assert scored[0] == ("s1", pytest.approx(1.0))


def test_orthogonal_excluded():
    assert "s2" not in retrieve(emb_store(), Query((1.0, 0.0, 0.0), threshold=0.3))


def test_metadata_filter():
    ids = retrieve(emb_store(), Query(filters=(("task", "captioning"),)))
    assert ids == ["s1", "s3"]


def test_callable_filter_and_exclusion():
    q = Query(filters=(("id", lambda v: v != "s4"),), exclude_ids={"s1"})
    assert retrieve(emb_store(), q) == ["s2", "s3"]


def test_top_k():
    assert retrieve(emb_store(), Query((1.0, 0.0, 0.0), threshold=-1.0, top_k=2)) == ["s1", "s3"]


def test_errors():
    with pytest.raises(ValueError):
        Query()
    with pytest.raises(DimensionMismatch):
        retrieve(emb_store(), Query((1.0, 0.0)))
    bare = Store()
    bare.insert_sample(Sample("x"))
    with pytest.raises(NoEmbeddings):
        retrieve(bare, Query((1.0,)))
    with pytest.raises(EmptyRetrieval, match="threshold"):
        probe(emb_store(), Query((0.0, 0.0, -1.0), threshold=0.9))


def test_probe_whole_pool_equals_global():
    st_ = emb_store()
    r, ids = probe(st_, Query((1.0, 0.0, 0.0), threshold=-1.0))
    assert sorted(ids) == sorted(st_.samples)
    assert r == aggregate(st_, "pl")


def test_probe_single_preference_sample():
    r, ids = probe(emb_store(), Query(filters=(("id", "s1"),)))
    assert ids == ["s1"]
    assert r.order.index("A") < r.order.index("B")


def test_parse_filters():
    assert parse_filters(["task=vqa", "lang=en=x"]) == (("task", "vqa"), ("lang", "en=x"))
    with pytest.raises(ValueError):
        parse_filters(["novalue"])


@pytest.fixture(scope="module")
def clusters():
    return clustered_generate(n_systems=5, cluster_sizes=(300, 200), dispersion=0.3, dim=4, seed=0)


def _cluster_top1_by_win_rate(store, cluster):
    wins, games = Counter(), Counter()
    for sid, s in store.samples.items():
        if s.metadata["cluster"] != cluster:
            continue
        vals = {m.model_id: m.value for m in store.measurements_for(sid)}
        for a in vals:
            for b in vals:
                if a != b:
                    games[a] += 1
                    wins[a] += vals[a] > vals[b]
    return max(games, key=lambda m: wins[m] / games[m])


def test_clustered_probes_differ_and_match_win_rates(clusters):
    store, centres = clusters
    tops = []
    for c in range(2):
        r, ids = probe(store, Query(tuple(centres[c]), threshold=0.7))
        assert {store.samples[i].metadata["cluster"] for i in ids} == {str(c)}
        assert r.order[0] == _cluster_top1_by_win_rate(store, str(c))
        tops.append(r.order[0])
    assert tops[0] != tops[1]


def test_probe_reproducible_from_ids(clusters):
    store, centres = clusters
    q = Query(tuple(centres[1]), threshold=0.5)
    r1, ids1 = probe(store, q)
    r2, ids2 = probe(store, q)
    assert ids1 == ids2 and r1 == r2
    assert aggregate(store, "pl", sample_filter=ids1) == r1


@given(
    q=st.lists(st.floats(-1, 1), min_size=4, max_size=4).filter(lambda v: np.linalg.norm(v) > 1e-3),
    t1=st.floats(-1, 1),
    t2=st.floats(-1, 1),
)
def test_lower_threshold_never_shrinks(clusters, q, t1, t2):
    store, _ = clusters
    lo, hi = sorted((t1, t2))
    assert set(retrieve(store, Query(tuple(q), threshold=hi))) <= set(retrieve(store, Query(tuple(q), threshold=lo)))
