"""Write the t-slices of the geodesic from the reference potential to a
constant shift of it, with X-side, dual-side and closed-form distances.

    python3 scripts/geodesic_demo.py --shift 0.5 --out geodesic.csv
"""
import argparse

from lowenergy.harness.cli import demo_geodesic_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--resolution", type=int, default=1024)
    ap.add_argument("--shift", type=float, default=1.0)
    ap.add_argument("--weights", default="pow:0.5,log")
    ap.add_argument("--out", default="geodesic.csv")
    args = ap.parse_args()
    text = demo_geodesic_csv(args.resolution, args.shift, tuple(args.weights.split(",")))
    with open(args.out, "w", newline="") as fh:
        fh.write(text)
    print(f"wrote {text.count(chr(10)) - 1} rows to {args.out}")


if __name__ == "__main__":
    main()
