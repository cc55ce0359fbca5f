"""Probe rankings vs random subsets on the two-cluster synthetic pool.

The pool has two concept clusters whose system orders are reversed. Each
query targets one cluster centre; its ranking should agree less with the
global ranking than a random subset of the same size does.

    python scripts/query_vs_random.py [--seed 0] [--threshold 0.7]
"""

import argparse

from onerank.harness import run_query_vs_random
from onerank.probe import Query
from onerank.synth import clustered_generate


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threshold", type=float, default=0.7)
    ap.add_argument("--sizes", default="100,1000")
    ap.add_argument("--method", default="pl")
    args = ap.parse_args()
    store, centres = clustered_generate(seed=args.seed)
    queries = [Query(tuple(c), threshold=args.threshold) for c in centres]
    sizes = [int(s) for s in args.sizes.split(",")]
    print("n       random tau  query tau")
    for r in run_query_vs_random(store, queries, sizes, args.seed, args.method):
        print(f"{r.size:<7} {r.random_tau:10.3f} {r.query_tau:10.3f}")


if __name__ == "__main__":
    main()
