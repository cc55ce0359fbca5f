"""Command-line entry point: ``onerank <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import harness, reports
from .aggregate import METHODS, BTConfig, EloConfig, PLConfig, aggregate
from .metrics import kendall_tau, topk_overlap
from .ordinalize import DEFAULT_TIE_TOLERANCE, to_comparisons
from .probe import DEFAULT_THRESHOLD, Query, parse_filters, probe
from .store import Model, StoreError, load, load_dir, save
from .synth import BASELINE_ID, GumbelConfig, gumbel_generate

log = logging.getLogger("onerank")


def _methods(text: str) -> list[str]:
    return [m.strip() for m in text.split(",") if m.strip()]


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _read_ids(path) -> list[str]:
    return [line.strip() for line in Path(path).read_text(encoding="utf-8").splitlines() if line.strip()]


def _configs(args) -> dict:
    out = {}
    if getattr(args, "alpha", None) is not None or getattr(args, "tol", None) is not None:
        kw = {}
        if args.alpha is not None:
            kw["smoothing"] = args.alpha
        if args.tol is not None:
            kw["tolerance"] = args.tol
        out["pl"] = PLConfig(**kw)
        out["bt"] = BTConfig(**kw)
    return out


def _ground_truth(args, store):
    if getattr(args, "ground_truth", None):
        return reports.read_ranking_csv(args.ground_truth, "ground_truth")
    return harness.ground_truth_ranking(store)


def cmd_ingest(args) -> int:
    store = load(args.samples, args.models, args.measurements, require_baseline=False)
    if store.baseline is None:
        log.info("no baseline model found; adding synthetic baseline %r", BASELINE_ID)
        store.insert_model(Model(BASELINE_ID, "random baseline", "onerank", True))
    store.validate()
    save(store, args.out)
    print(f"ingested {len(store.samples)} samples, {len(store.models)} models, "
          f"{len(store.measurements)} measurements -> {args.out}")
    return 0


def cmd_breakdown(args) -> int:
    store = load_dir(args.store)
    comps = to_comparisons(store, None, args.tie_tolerance)
    with Path(args.out).open("w", encoding="utf-8", newline="\n") as fh:
        for c in comps:
            fh.write(json.dumps({"sample_id": c.sample_id, "winner": c.winner, "loser": c.loser}) + "\n")
    print(f"{len(comps)} comparisons -> {args.out}")
    return 0


def cmd_rank(args) -> int:
    store = load_dir(args.store)
    if args.exclude:
        store = store.exclude(_read_ids(args.exclude))
    cfg = _configs(args).get(args.method)
    if args.method == "elo":
        cfg = EloConfig(shuffle_seed=args.seed)
    r = aggregate(store, args.method, config=cfg, tie_tolerance=args.tie_tolerance)
    reports.write_ranking_csv(r, args.out)
    print(f"{args.method} ranking of {len(r)} models -> {args.out}")
    return 0


def cmd_compare(args) -> int:
    a = reports.read_ranking_csv(args.a)
    b = reports.read_ranking_csv(args.b)
    t = kendall_tau(a, b)
    print(f"tau\t{t.tau:.6f}")
    print(f"n_common\t{t.n_common}")
    if args.topk:
        print(f"top{args.topk}_overlap\t{topk_overlap(a, b, args.topk):.6f}")
    return 0


def cmd_synth(args) -> int:
    cfg = GumbelConfig(args.n_systems, args.dispersion, args.scale, args.n, args.seed)
    ds = gumbel_generate(cfg)
    save(ds.store, args.out)
    reports.write_ranking_csv(ds.ground_truth, Path(args.out) / "ground_truth.csv")
    print(f"synthetic store ({len(ds.store.samples)} samples, {args.n_systems} systems) -> {args.out}")
    return 0


def cmd_probe(args) -> int:
    store = load_dir(args.store)
    emb = None
    if args.embedding:
        emb = json.loads(Path(args.embedding).read_text(encoding="utf-8"))["embedding"]
    q = Query(
        text_embedding=emb,
        filters=parse_filters(args.filter or []),
        threshold=args.threshold,
        top_k=args.top_k,
        exclude_ids=frozenset(_read_ids(args.exclude)) if args.exclude else frozenset(),
    )
    cfg = EloConfig(shuffle_seed=args.seed) if args.method == "elo" else None
    r, ids = probe(store, q, args.method, cfg)
    reports.write_ranking_csv(r, args.out)
    if args.ids_out:
        Path(args.ids_out).write_text("".join(i + "\n" for i in ids), encoding="utf-8")
    print(f"retrieved {len(ids)} samples; {args.method} ranking -> {args.out}")
    return 0


def cmd_gt_compare(args) -> int:
    store = load_dir(args.store)
    rows = harness.run_gt_comparison(
        store, _methods(args.methods), args.trials, args.seed, _ground_truth(args, store), args.topk, _configs(args)
    )
    reports.write_table([r.as_dict() for r in rows], args.out, args.json)
    for r in rows:
        print(f"{r.method}\t{r.tau_mean:.4f} ± {r.tau_sd:.4f}")
    return 0


def cmd_sweep(args) -> int:
    store = load_dir(args.store)
    schedule = _floats(args.schedule) if args.schedule else harness.DEFAULT_SCHEDULE
    res = harness.run_sparsity_sweep(
        store, args.mode, _methods(args.methods), args.seed, args.trials, schedule,
        _ground_truth(args, store), _configs(args),
    )
    reports.write_table(res.rows(), args.out, args.json)
    print(f"{len(res.rows())} sweep cells -> {args.out}")
    return 0


def cmd_separability(args) -> int:
    store = load_dir(args.store)
    rows = harness.run_separability(store, _methods(args.methods), args.splits, args.seed, _configs(args))
    reports.write_table([r.as_dict() for r in rows], args.out, args.json)
    for r in rows:
        print(f"{r.method}\t{r.pct_mean:.2f} ± {r.pct_sd:.2f}")
    return 0


def _load_queries(path, threshold: float) -> list[Query]:
    out = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            out.append(
                Query(
                    text_embedding=obj.get("embedding"),
                    filters=tuple((obj.get("filters") or {}).items()),
                    threshold=obj.get("threshold", threshold),
                    top_k=obj.get("top_k"),
                    exclude_ids=frozenset(obj.get("exclude_ids") or ()),
                )
            )
    return out


def cmd_query_vs_random(args) -> int:
    store = load_dir(args.store)
    queries = _load_queries(args.queries, args.threshold)
    rows = harness.run_query_vs_random(store, queries, _ints(args.sizes), args.seed, args.method)
    reports.write_table([r.as_dict() for r in rows], args.out, args.json)
    for r in rows:
        print(f"n={r.size}\trandom {r.random_tau:.4f}\tquery {r.query_tau:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="onerank", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", help="validate JSONL files and write a store directory")
    s.add_argument("--samples", required=True)
    s.add_argument("--models", required=True)
    s.add_argument("--measurements", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("breakdown", help="emit pairwise comparisons as JSONL")
    s.add_argument("--store", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--tie-tolerance", type=float, default=DEFAULT_TIE_TOLERANCE)
    s.set_defaults(func=cmd_breakdown)

    s = sub.add_parser("rank", help="fit a global ranking")
    s.add_argument("--store", required=True)
    s.add_argument("--method", choices=METHODS, required=True)
    s.add_argument("--alpha", type=float, default=None, help="baseline smoothing for pl/bt")
    s.add_argument("--tol", type=float, default=None, help="solver tolerance for pl/bt")
    s.add_argument("--seed", type=int, default=0, help="Elo shuffle seed")
    s.add_argument("--exclude", help="file of sample ids to leave out (contamination filter)")
    s.add_argument("--tie-tolerance", type=float, default=DEFAULT_TIE_TOLERANCE)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_rank)

    s = sub.add_parser("compare", help="Kendall tau and top-k overlap of two ranking CSVs")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--topk", type=int, default=None)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("synth", help="generate a Gumbel synthetic store")
    s.add_argument("--n-systems", type=int, default=100)
    s.add_argument("--dispersion", type=float, default=0.1)
    s.add_argument("--scale", type=float, default=1.0)
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("probe", help="capability-specific ranking for a query")
    s.add_argument("--store", required=True)
    s.add_argument("--embedding", help='JSON file {"embedding": [...]}')
    s.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    s.add_argument("--filter", action="append", help="key=value metadata filter (repeatable)")
    s.add_argument("--top-k", type=int, default=None)
    s.add_argument("--exclude", help="file of sample ids to leave out")
    s.add_argument("--method", choices=METHODS, default="pl")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--ids-out")
    s.set_defaults(func=cmd_probe)

    def table_args(s, methods="pl,elo,bt"):
        s.add_argument("--store", required=True)
        s.add_argument("--methods", default=methods)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--alpha", type=float, default=None)
        s.add_argument("--tol", type=float, default=None)
        s.add_argument("--out", required=True)
        s.add_argument("--json", action="store_true", help="write JSON instead of CSV")

    s = sub.add_parser("gt-compare", help="tau of each method against the ground truth")
    table_args(s)
    s.add_argument("--trials", type=int, default=3)
    s.add_argument("--topk", type=int, default=10)
    s.add_argument("--ground-truth", help="ranking CSV to use instead of the mean-score ground truth")
    s.set_defaults(func=cmd_gt_compare)

    s = sub.add_parser("sweep", help="sparsity sweep")
    table_args(s)
    s.add_argument("--mode", choices=harness.MODES, default="measurements")
    s.add_argument("--trials", type=int, default=3)
    s.add_argument("--schedule", help="comma-separated missing fractions")
    s.add_argument("--ground-truth")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("separability", help="separability of split-half rankings")
    table_args(s)
    s.add_argument("--splits", type=int, default=5)
    s.set_defaults(func=cmd_separability)

    s = sub.add_parser("query-vs-random", help="probe rankings vs random subsets")
    s.add_argument("--store", required=True)
    s.add_argument("--queries", required=True, help="JSONL of {embedding, filters, threshold, top_k}")
    s.add_argument("--sizes", default="100,1000,10000")
    s.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    s.add_argument("--method", choices=METHODS, default="pl")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_query_vs_random)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (StoreError, ValueError, RuntimeError) as exc:
        print(f"onerank {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
