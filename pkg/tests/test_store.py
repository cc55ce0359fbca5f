import json

import pytest
from hypothesis import given, strategies as st

from onerank.store import (
    DimensionMismatch,
    DuplicateBaseline,
    DuplicateId,
    IntegrityError,
    MalformedValue,
    Measurement,
    Model,
    ParseError,
    Sample,
    Store,
    UnknownModel,
    UnknownSample,
    load,
    load_dir,
    save,
)

from conftest import make_store


def test_insert_sample_base_case():
    st = Store()
    st.insert_sample(Sample("q1"))
    assert list(st.samples) == ["q1"]


def test_insert_sample_duplicate():
    st = Store()
    st.insert_sample(Sample("q1"))
    with pytest.raises(DuplicateId):
        st.insert_sample(Sample("q1"))


def test_insert_sample_dimension_mismatch():
    st = Store(embedding_dim=5)
    with pytest.raises(DimensionMismatch):
        st.insert_sample(Sample("q1", embedding=(1.0, 0.0, 0.0)))


def test_store_adopts_first_embedding_dim():
    st = Store()
    st.insert_sample(Sample("a", embedding=(1.0, 2.0)))
    assert st.embedding_dim == 2
    with pytest.raises(DimensionMismatch):
        st.insert_sample(Sample("b", embedding=(1.0, 2.0, 3.0)))


@pytest.mark.parametrize("emb", [(0.0, 0.0), (float("nan"), 1.0), (float("inf"), 1.0), ()])
def test_bad_embeddings_rejected(emb):
    with pytest.raises(MalformedValue):
        Sample("q", embedding=emb)


def test_empty_id_rejected():
    with pytest.raises(MalformedValue):
        Sample("")
    with pytest.raises(MalformedValue):
        Model("")


def test_insert_model_baseline():
    st = Store()
    st.insert_model(Model("base", is_baseline=True))
    assert st.baseline == "base"
    with pytest.raises(DuplicateBaseline):
        st.insert_model(Model("other", is_baseline=True))


def test_insert_model_duplicate_and_count():
    st = Store()
    for i in range(100):
        st.insert_model(Model(f"m{i}"))
    assert len(st.models) == 100
    with pytest.raises(DuplicateId):
        st.insert_model(Model("m0"))


def test_insert_measurement(small_store):
    small_store.insert_measurement(Measurement("q1", "A", "binary", 1))
    assert small_store.measurements == [Measurement("q1", "A", "binary", 1)]


def test_binary_half_rejected(small_store):
    with pytest.raises(MalformedValue):
        small_store.insert_measurement(Measurement("q1", "A", "binary", 0.5))


def test_unknown_refs(small_store):
    with pytest.raises(UnknownModel):
        small_store.insert_measurement(Measurement("q1", "ghost", "binary", 1))
    with pytest.raises(UnknownSample):
        small_store.insert_measurement(Measurement("nope", "A", "binary", 1))


@pytest.mark.parametrize(
    "meas",
    [
        Measurement("q1", "A", "numeric", float("nan")),
        Measurement("q1", "A", "numeric", float("inf")),
        Measurement("q1", "A", "accuracy", 1.0),
        Measurement("q1", "A", "numeric", "0.3"),
        Measurement("q1", "A", "numeric", True),
        Measurement("q1", "A", "numeric", 1.0, opponent="B"),
        Measurement("q1", "A", "preference", 1.0, opponent="B", outcome="draw"),
        Measurement("q1", "A", "preference", 0.0, opponent="B", outcome="win"),
        Measurement("q1", "A", "preference", 1.0, opponent="A", outcome="win"),
        Measurement("q1", "A", "preference", 1.0, opponent=None, outcome="win"),
    ],
)
def test_malformed_values(small_store, meas):
    with pytest.raises(MalformedValue):
        small_store.insert_measurement(meas)


def test_duplicate_cell_rejected(small_store):
    small_store.insert_measurement(Measurement("q1", "A", "numeric", 0.3))
    with pytest.raises(DuplicateId):
        small_store.insert_measurement(Measurement("q1", "A", "numeric", 0.4))


def test_insert_battle_pairs_records(small_store):
    small_store.insert_battle("q1", "A", "B", "win")
    a, b = small_store.measurements
    assert (a.model_id, a.outcome, a.opponent) == ("A", "win", "B")
    assert (b.model_id, b.outcome, b.opponent) == ("B", "loss", "A")
    small_store.validate()


def test_validate_catches_orphan_half_battle(small_store):
    small_store.insert_measurement(Measurement("q1", "A", "preference", 1.0, "B", "win"))
    with pytest.raises(IntegrityError):
        small_store.validate()


def test_exclusion_is_a_view(small_store):
    small_store.insert_sample(Sample("q2"))
    small_store.insert_measurement(Measurement("q1", "A", "binary", 1))
    small_store.insert_measurement(Measurement("q2", "A", "binary", 0))
    v = small_store.exclude(["q1"])
    assert list(v.samples) == ["q2"]
    assert [m.sample_id for m in v.measurements] == ["q2"]
    assert len(small_store.measurements) == 2


def _three_by_two() -> Store:
    st = Store()
    st.insert_model(Model("base", "Base", "x", True, {"org": "none"}))
    st.insert_model(Model("A", "Alpha", "x"))
    for i, emb in enumerate([(1.0, 0.0), (0.0, 1.0), (0.5, 0.5)]):
        st.insert_sample(Sample(f"q{i}", "b", "d", "t" if i else None, {"k": "v"}, "text ü", emb))
    st.insert_measurement(Measurement("q0", "A", "numeric", 0.1))
    st.insert_measurement(Measurement("q0", "base", "numeric", 1e-300))
    st.insert_measurement(Measurement("q1", "A", "binary", 1))
    st.insert_battle("q2", "A", "base", "tie")
    return st


def test_roundtrip_byte_identical(tmp_path):
    st = _three_by_two()
    save(st, tmp_path / "a")
    back = load_dir(tmp_path / "a")
    save(back, tmp_path / "b")
    for name in ("samples.jsonl", "models.jsonl", "measurements.jsonl"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert back.measurements == st.measurements
    assert back.samples == st.samples
    assert back.models == st.models


def test_load_dangling_model_is_integrity_error(tmp_path):
    save(_three_by_two(), tmp_path)
    with (tmp_path / "measurements.jsonl").open("a") as fh:
        fh.write(json.dumps({"sample_id": "q0", "model_id": "ghost", "metric": "numeric", "value": 1.0}) + "\n")
    with pytest.raises(IntegrityError, match="ghost"):
        load_dir(tmp_path)


def test_load_parse_error_has_line_number(tmp_path):
    save(_three_by_two(), tmp_path)
    lines = (tmp_path / "samples.jsonl").read_text().splitlines()
    lines.insert(1, "{not json")
    (tmp_path / "samples.jsonl").write_text("\n".join(lines) + "\n")
    with pytest.raises(ParseError) as exc:
        load_dir(tmp_path)
    assert exc.value.lineno == 2


def test_empty_files_give_empty_store(tmp_path):
    for name in ("s", "m", "x"):
        (tmp_path / name).write_text("")
    st = load(tmp_path / "s", tmp_path / "m", tmp_path / "x")
    assert not st.samples and not st.models and not st.measurements


# -- properties ---------------------------------------------------------------

MODEL_IDS = [f"m{i}" for i in range(5)]
SAMPLE_IDS = [f"s{i}" for i in range(5)]

ops = st.lists(
    st.one_of(
        st.tuples(st.just("sample"), st.sampled_from(SAMPLE_IDS + ["dup"])),
        st.tuples(st.just("model"), st.sampled_from(MODEL_IDS), st.booleans()),
        st.tuples(
            st.just("meas"),
            st.sampled_from(SAMPLE_IDS + ["ghost"]),
            st.sampled_from(MODEL_IDS + ["ghost"]),
            st.sampled_from(["binary", "numeric"]),
            st.sampled_from([0, 1, 0.25, 2.5]),
        ),
        st.tuples(
            st.just("battle"),
            st.sampled_from(SAMPLE_IDS),
            st.sampled_from(MODEL_IDS),
            st.sampled_from(MODEL_IDS),
            st.sampled_from(["win", "loss", "tie"]),
        ),
    ),
    max_size=60,
)


def _apply(ops_list):
    """Run an insert sequence, swallowing rejected inserts; return store and accepted measurements."""
    store = Store()
    accepted = []
    for op in ops_list:
        try:
            if op[0] == "sample":
                store.insert_sample(Sample(op[1]))
            elif op[0] == "model":
                store.insert_model(Model(op[1], is_baseline=op[2]))
            elif op[0] == "meas":
                m = Measurement(op[1], op[2], op[3], op[4])
                store.insert_measurement(m)
                accepted.append(m)
            else:
                before = len(store.measurements)
                store.insert_battle(op[1], op[2], op[3], op[4])
                accepted.extend(store.measurements[before:])
        except (ValueError,):
            pass
    return store, accepted


@given(ops_list=ops)
def test_referential_integrity_after_random_inserts(ops_list):
    store, _ = _apply(ops_list)
    for m in store.measurements:
        assert m.sample_id in store.samples
        assert m.model_id in store.models
        if m.metric == "preference":
            assert m.opponent in store.models
    assert sum(m.is_baseline for m in store.models.values()) <= 1


@given(ops_list=ops)
def test_append_only_multiset(ops_list):
    store, accepted = _apply(ops_list)
    assert store.measurements == accepted


@given(ops_list=ops)
def test_save_load_identity_random(ops_list, tmp_path_factory):
    store, _ = _apply(ops_list)
    if store.baseline is None:
        store.insert_model(Model("zz-base", is_baseline=True))
    d = tmp_path_factory.mktemp("rt")
    save(store, d)
    back = load_dir(d)
    assert back.measurements == store.measurements
    assert back.samples == store.samples
    assert back.models == store.models
