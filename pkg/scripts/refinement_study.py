"""Geodesic constancy error on the X side against grid resolution.

Prints, per weight and resolution, the worst relative gap between the
X-side geodesic integrals and the dual-side distance, plus the observed
order of convergence between consecutive resolutions.

    python3 scripts/refinement_study.py --resolutions 512,1024,2048,4096 --pairs 8
"""
import argparse
import math

from lowenergy.harness.families import XGrids, trial_rng
from lowenergy.metric import MetricPair
from lowenergy.toric1d import random_symplectic_potential
from lowenergy.weights import parse_weight

TIMES = (0.0, 0.25, 0.5, 0.75, 1.0)


def worst_error(res, pairs, weights, seed):
    grids = XGrids(res)
    worst = {w.spec: 0.0 for w in weights}
    for i in range(pairs):
        rng = trial_rng(seed, "identities", 300, i)
        kind = ("smooth", "kinked")[i % 2]
        s0, s1 = (int(s) for s in rng.integers(0, 2**31, 2))
        F0 = grids.potential(random_symplectic_potential(s0, kind)(grids.x))
        F1 = grids.potential(random_symplectic_potential(s1, kind)(grids.x))
        pair = MetricPair.from_potentials(F0, F1, grids.P)
        for w in weights:
            d = pair.d_dual(w)
            e = max(abs(pair.d_x(w, t) - d) for t in TIMES) / d
            worst[w.spec] = max(worst[w.spec], e)
    return worst


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--resolutions", default="512,1024,2048,4096")
    ap.add_argument("--pairs", type=int, default=8)
    ap.add_argument("--weights", default="pow:0.3,pow:0.5,log")
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    resolutions = [int(r) for r in args.resolutions.split(",")]
    weights = [parse_weight(w) for w in args.weights.split(",")]
    table = {r: worst_error(r, args.pairs, weights, args.seed) for r in resolutions}
    print(f"{'weight':<10}{'resolution':>12}{'rel. error':>14}{'order':>8}")
    for w in weights:
        prev = None
        for r in resolutions:
            e = table[r][w.spec]
            order = "" if prev is None else f"{math.log(prev[1] / e) / math.log(r / prev[0]):8.2f}"
            print(f"{w.spec:<10}{r:>12}{e:>14.3e}{order:>8}")
            prev = (r, e)


if __name__ == "__main__":
    main()
