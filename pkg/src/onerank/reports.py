"""CSV / JSON writers and readers for rankings and result tables."""

from __future__ import annotations

import csv
import json
from collections.abc import Sequence
from pathlib import Path

from .aggregate import Ranking


def write_ranking_csv(r: Ranking, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "model_id", "score"])
        for i, (m, s) in enumerate(r.entries, 1):
            w.writerow([i, m, repr(s)])


def read_ranking_csv(path, method: str = "csv") -> Ranking:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows and not {"model_id", "score"} <= rows[0].keys():
        raise ValueError(f"{path}: expected columns rank,model_id,score")
    return Ranking.from_scores({r["model_id"]: float(r["score"]) for r in rows}, method)


def write_table(rows: Sequence[dict], path, as_json: bool = False) -> None:
    """Rows of dicts as CSV (header from the first row) or as a JSON list."""
    path = Path(path)
    if as_json:
        path.write_text(json.dumps(list(rows), indent=2) + "\n", encoding="utf-8")
        return
    with path.open("w", encoding="utf-8", newline="") as fh:
        if not rows:
            return
        w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
