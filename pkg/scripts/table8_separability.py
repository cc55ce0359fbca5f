"""Share of consistently ordered pairs kept by the full-data ranking (synthetic data).

    python scripts/table8_separability.py [--dispersion 0.1] [--seed 0] [--splits 5]
"""

import argparse

from onerank.harness import run_separability
from onerank.synth import GumbelConfig, gumbel_generate


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dispersion", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--splits", type=int, default=5)
    ap.add_argument("--methods", default="elo,bt,pl,borda,dowdall")
    args = ap.parse_args()
    ds = gumbel_generate(GumbelConfig(dispersion=args.dispersion, seed=args.seed))
    for r in run_separability(ds.store, args.methods.split(","), args.splits, args.seed):
        print(f"{r.method:<8} {r.pct_mean:6.2f} ± {r.pct_sd:.2f}")


if __name__ == "__main__":
    main()
