"""Kendall tau to the planted order as data goes missing (dispersion 0.1).

``--mode samples`` drops whole measurement events (each synthetic event is
one sample); ``--mode measurements`` drops individual records instead.

    python scripts/table5_missing.py [--mode samples] [--seed 0] [--full-schedule]
"""

import argparse

from onerank.harness import DEFAULT_SCHEDULE, missing_data_table

METHODS = ("elo", "bt", "pl", "borda", "dowdall")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--mode", choices=("samples", "measurements"), default="samples")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trials", type=int, default=3)
    ap.add_argument("--methods", default=",".join(METHODS))
    ap.add_argument("--full-schedule", action="store_true", help="0%%..90%% by 10, then 91%%..99%% by 1")
    args = ap.parse_args()
    fractions = DEFAULT_SCHEDULE if args.full_schedule else (0.5, 0.9, 0.95, 0.99)
    methods = tuple(args.methods.split(","))
    res = missing_data_table(fractions, methods, 0.1, args.seed, args.trials, args.mode)
    print(f"mode={args.mode} seed={args.seed} trials={args.trials}")
    print("method  " + "  ".join(f"{f:>13.0%}" for f in res.schedule))
    for m in methods:
        print(f"{m:<7} " + "  ".join(f"{res.mean(m, f):.2f} ± {res.sd(m, f):.2f}".rjust(13) for f in res.schedule))


if __name__ == "__main__":
    main()
