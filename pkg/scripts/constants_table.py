"""Empirical constants of the bounds suite next to the proven bounds.

    python3 scripts/constants_table.py --trials 2000 --weights pow:0.3,pow:0.5,log
"""
import argparse

from lowenergy.harness import SuiteConfig, run_bounds


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=10_000, help="polytope-side trials; X-side pairs are a tenth")
    ap.add_argument("--weights", default=None)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    kw = {"trials": args.trials, "seed": args.seed}
    if args.weights:
        kw["weights"] = tuple(args.weights.split(","))
    rep = run_bounds(SuiteConfig(**kw))
    print(f"{'constant':<22}{'bound':>10}{'observed':>12}{'headroom':>10}  source")
    for c in rep.constants:
        room = c.bound / c.observed if c.observed > 0 else float("inf")
        print(f"{c.name:<22}{c.bound:>10g}{c.observed:>12.5g}{room:>10.3g}  {c.source}")
    print(f"all bound records pass: {rep.passed}")


if __name__ == "__main__":
    main()
