import csv
import json

import pytest

from onerank.cli import main
from onerank.reports import read_ranking_csv
from onerank.store import load_dir

from conftest import FIXTURES

RAW = FIXTURES / "ingest"


@pytest.fixture
def ingested(tmp_path):
    out = tmp_path / "store"
    rc = main([
        "ingest",
        "--samples", str(RAW / "samples.jsonl"),
        "--models", str(RAW / "models.jsonl"),
        "--measurements", str(RAW / "measurements.jsonl"),
        "--out", str(out),
    ])
    assert rc == 0
    return out


def test_ingest_adds_baseline(ingested):
    st = load_dir(ingested)
    assert st.baseline == "random"
    assert len(st.samples) == 100 and len(st.models) == 6


def test_breakdown_jsonl(ingested, tmp_path):
    out = tmp_path / "c.jsonl"
    assert main(["breakdown", "--store", str(ingested), "--out", str(out)]) == 0
    rows = [json.loads(l) for l in out.read_text().splitlines()]
    assert rows and set(rows[0]) == {"sample_id", "winner", "loser"}
    # planted order: no comparison goes against it
    order = ["alpha", "bravo", "charlie", "delta", "echo"]
    assert all(order.index(r["winner"]) < order.index(r["loser"]) for r in rows)


@pytest.mark.parametrize("method", ["pl", "bt", "elo", "borda", "dowdall"])
def test_rank_writes_csv(ingested, tmp_path, method):
    out = tmp_path / f"{method}.csv"
    assert main(["rank", "--store", str(ingested), "--method", method, "--out", str(out)]) == 0
    with out.open(encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["rank", "model_id", "score"]
    assert [r[0] for r in rows[1:]] == [str(i) for i in range(1, len(rows))]
    assert [r[1] for r in rows[1:] if r[1] != "random"] == ["alpha", "bravo", "charlie", "delta", "echo"]


def test_rank_exclude_and_compare(ingested, tmp_path, capsys):
    excl = tmp_path / "ex.txt"
    excl.write_text("num00\nnum01\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["rank", "--store", str(ingested), "--method", "pl", "--out", str(a)])
    main(["rank", "--store", str(ingested), "--method", "pl", "--exclude", str(excl), "--alpha", "0.1", "--out", str(b)])
    capsys.readouterr()
    assert main(["compare", "--a", str(a), "--b", str(b), "--topk", "3"]) == 0
    out = capsys.readouterr().out
    assert "tau\t1.000000" in out and "n_common\t6" in out and "top3_overlap\t1.000000" in out


def test_gt_compare_and_json(ingested, tmp_path):
    out = tmp_path / "gt.json"
    assert main(["gt-compare", "--store", str(ingested), "--methods", "pl,borda", "--out", str(out), "--json"]) == 0
    rows = json.loads(out.read_text())
    assert [r["method"] for r in rows] == ["pl", "borda"]
    assert rows[0]["tau_mean"] == 1.0 and rows[0]["tau_sd"] == 0.0


def test_probe_cli(ingested, tmp_path):
    out, ids = tmp_path / "p.csv", tmp_path / "ids.txt"
    rc = main(["probe", "--store", str(ingested), "--filter", "dataset=arena", "--out", str(out), "--ids-out", str(ids)])
    assert rc == 0
    assert len(ids.read_text().split()) == 30
    r = read_ranking_csv(out)
    assert r.order.index("alpha") < r.order.index("echo")


def test_probe_empty_is_error(ingested, tmp_path, capsys):
    rc = main(["probe", "--store", str(ingested), "--filter", "dataset=nope", "--out", str(tmp_path / "x.csv")])
    assert rc == 1
    assert "relaxing" in capsys.readouterr().err


def test_synth_sweep_separability(tmp_path):
    d = tmp_path / "syn"
    assert main(["synth", "--n-systems", "8", "--n", "60", "--seed", "1", "--out", str(d)]) == 0
    assert (d / "ground_truth.csv").exists()
    gt = str(d / "ground_truth.csv")
    assert main(["sweep", "--store", str(d), "--mode", "samples", "--methods", "pl", "--schedule", "0,0.5",
                 "--trials", "2", "--ground-truth", gt, "--out", str(tmp_path / "sw.csv")]) == 0
    assert len((tmp_path / "sw.csv").read_text().splitlines()) == 3
    assert main(["separability", "--store", str(d), "--methods", "pl", "--splits", "2",
                 "--out", str(tmp_path / "sep.csv")]) == 0


def test_bad_store_reports_error(tmp_path, capsys):
    (tmp_path / "samples.jsonl").write_text("{oops\n")
    (tmp_path / "models.jsonl").write_text("")
    (tmp_path / "measurements.jsonl").write_text("")
    assert main(["rank", "--store", str(tmp_path), "--method", "pl", "--out", str(tmp_path / "r.csv")]) == 1
    assert "samples.jsonl:1:" in capsys.readouterr().err
