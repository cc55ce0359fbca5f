"""Write the 100-sample ingestion fixture used by the test suite.

Five models with a strict planted order alpha > bravo > charlie > delta > echo,
measured across every metric family:

* 30 numeric samples on dataset "qa-score" (higher is better),
* 10 numeric samples on dataset "latency", recorded as negated seconds
  (lower-is-better metrics are negated at ingestion),
* 30 binary samples on dataset "exact-match",
* 30 preference samples on dataset "arena", one battle each; the better model
  wins, except for a handful of ties.

The files carry no baseline model, so ``onerank ingest`` adds one. Usage:

    python scripts/make_fixture.py tests/fixtures/ingest
"""

import json
import sys
from pathlib import Path

import numpy as np

MODELS = ["alpha", "bravo", "charlie", "delta", "echo"]


def build(seed: int = 2024):
    rng = np.random.default_rng(seed)
    samples, measurements = [], []
    strength = np.array([4.0, 3.0, 2.0, 1.0, 0.0])

    def sample(sid, dataset, task):
        samples.append(
            {
                "id": sid,
                "benchmark": "fixture",
                "dataset": dataset,
                "task": task,
                "metadata": {"split": "test"},
                "text": f"prompt for {sid}",
                "embedding": rng.standard_normal(4).round(6).tolist(),
            }
        )

    for i in range(30):
        sid = f"num{i:02d}"
        sample(sid, "qa-score", "qa")
        # sorted noise keeps the planted order strict within every sample
        vals = strength * 0.2 + np.sort(rng.uniform(0, 0.05, 5))[::-1]
        for m, v in zip(MODELS, vals.round(6).tolist()):
            measurements.append({"sample_id": sid, "model_id": m, "metric": "numeric", "value": v})
    for i in range(10):
        sid = f"lat{i:02d}"
        sample(sid, "latency", "speed")
        seconds = 1.0 + (4.0 - strength) * 0.5 + rng.uniform(0, 0.1)
        for m, v in zip(MODELS, (-seconds).round(6).tolist()):
            measurements.append({"sample_id": sid, "model_id": m, "metric": "numeric", "value": v})
    for i in range(30):
        sid = f"bin{i:02d}"
        sample(sid, "exact-match", "qa")
        cut = 1 + i % 4  # the best ``cut`` models answer correctly
        for rank, m in enumerate(MODELS):
            measurements.append({"sample_id": sid, "model_id": m, "metric": "binary", "value": int(rank < cut)})
    for i in range(30):
        sid = f"pref{i:02d}"
        sample(sid, "arena", "chat")
        a, b = sorted(rng.choice(5, size=2, replace=False).tolist())
        outcome = "tie" if i % 10 == 9 else "win"
        for me, other, out in ((a, b, outcome), (b, a, {"win": "loss", "tie": "tie"}[outcome])):
            measurements.append(
                {
                    "sample_id": sid,
                    "model_id": MODELS[me],
                    "metric": "preference",
                    "value": {"win": 1.0, "loss": 0.0, "tie": 0.5}[out],
                    "opponent": MODELS[other],
                    "outcome": out,
                }
            )
    models = [
        {"id": m, "name": m.capitalize(), "source": "fixture", "is_baseline": False, "metadata": {}}
        for m in MODELS
    ]
    return samples, models, measurements


def write(out: Path, seed: int = 2024) -> None:
    out.mkdir(parents=True, exist_ok=True)
    samples, models, measurements = build(seed)
    for name, rows in (("samples", samples), ("models", models), ("measurements", measurements)):
        with (out / f"{name}.jsonl").open("w", encoding="utf-8", newline="\n") as fh:
            for r in rows:
                fh.write(json.dumps(r, sort_keys=True) + "\n")


if __name__ == "__main__":
    write(Path(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures/ingest"))
