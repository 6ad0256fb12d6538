"""Command line entry point: ``lowenergy <subcommand> [flags]``.

Exit status is 0 when every check passes, 1 when a check fails (the first
failing record goes to stderr) and 2 on usage errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys

from ..convex import GridFunction
from ..metric import MetricPair
from ..toric1d import ToricPotential1D, moment_grid, reference_dual, y_grid
from ..weights import parse_weight
from . import run_all
from .config import ConfigError, SuiteConfig, load_config
from .report import Report
from .suites import SUITES, run_bounds

DEMO_TIMES = (0.0, 0.25, 0.5, 0.75, 1.0)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="plain-text key = value file; flags override it")
    common.add_argument("--seed", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--weights", help="comma-separated weight specs, e.g. pow:0.5,log,mix")
    common.add_argument("--resolution", type=int, help="X-side grid resolution")
    common.add_argument("--dim", help="polytope dimensions, e.g. 1 or 1,2")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--tolerance-scale", type=float)
    p = _Parser(prog="lowenergy", description="Numerical verification of d_psi metric properties.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in (("verify", "run every suite"),
                        ("axioms", "metric axioms on random duals"),
                        ("identities", "exact identities and geodesic constancy"),
                        ("bounds", "X-side comparability, sandwich, halfway and energy bounds"),
                        ("limits", "limits, cutoff masses and continuity"),
                        ("constants", "table of empirical constants against their bounds"),
                        ("demo-geodesic", "t-slices of a closed-form geodesic as CSV")):
        sub.add_parser(name, parents=[common], help=help_)
    return p


def _config(args) -> tuple[SuiteConfig, dict]:
    kw, cli = {}, {}
    if args.config:
        kw = load_config(args.config)
        cli = kw.pop("_cli", {})
    if args.seed is not None:
        kw["seed"] = args.seed
    if args.trials is not None:
        kw["trials"] = args.trials
    if args.weights:
        kw["weights"] = tuple(s.strip() for s in args.weights.split(",") if s.strip())
    if args.resolution is not None:
        kw["resolution"] = args.resolution
    if args.dim:
        kw["dims"] = tuple(int(s) for s in args.dim.split(",") if s.strip())
    if args.tolerance_scale is not None:
        kw["tolerance_scale"] = args.tolerance_scale
    if args.out:
        cli["out"] = args.out
    if args.format:
        cli["format"] = args.format
    return SuiteConfig(**kw), cli


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _constants_table(rep: Report) -> str:
    rows = [("constant", "bound", "observed", "source")]
    rows += [(c.name, f"{c.bound:g}", f"{c.observed:.6g}", c.source) for c in rep.constants]
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    return "".join("  ".join(v.ljust(wd) for v, wd in zip(r, widths)).rstrip() + "\n" for r in rows)


def demo_geodesic_csv(resolution: int = 1024, shift: float = 1.0, weights=("pow:0.5",)) -> str:
    """Geodesic from the reference potential to its shift by ``shift``.

    Rows hold t, y, u_t, its t-derivative and, per weight, the X-side
    integral at t, the dual-side value and the closed form psi(shift).
    """
    P = moment_grid(resolution)
    Yg = y_grid(resolution=resolution)
    phi = reference_dual(P.axes[0])
    F0 = ToricPotential1D.from_dual(GridFunction(P, phi), Yg)
    F1 = ToricPotential1D.from_dual(GridFunction(P, phi - shift), Yg)
    pair = MetricPair.from_potentials(F0, F1, P)
    ws = [parse_weight(w) for w in weights]
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    head = ["t", "y", "u", "velocity"]
    for w in ws:
        head += [f"d_x[{w.spec}]", f"d_dual[{w.spec}]", f"closed_form[{w.spec}]"]
    wr.writerow(head)
    for t in DEMO_TIMES:
        u, _, _ = pair.u(t)
        vel = pair.velocity(t)
        extra = []
        for w in ws:
            extra += [repr(pair.d_x(w, t)), repr(pair.d_dual(w)), repr(float(w(shift)))]
        for y, ut, vt in zip(Yg.axes[0], u, vel):
            wr.writerow([repr(t), repr(float(y)), repr(float(ut)), repr(float(vt))] + extra)
    return buf.getvalue()


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg, cli = _config(args)
    except (ConfigError, ValueError, OSError) as e:
        parser.print_usage(sys.stderr)
        print(f"lowenergy: error: {e}", file=sys.stderr)
        return 2
    fmt = cli.get("format", "json")
    out = cli.get("out")
    if fmt not in ("json", "csv"):
        print(f"lowenergy: error: unknown format {fmt!r}", file=sys.stderr)
        return 2

    if args.command == "demo-geodesic":
        _emit(demo_geodesic_csv(cfg.resolution, weights=cfg.weights), out)
        return 0
    if args.command == "constants":
        rep = run_bounds(cfg)
        _emit(_constants_table(rep), out)
    else:
        rep = run_all(cfg) if args.command == "verify" else SUITES[args.command](cfg)
        _emit(rep.to_json() if fmt == "json" else rep.to_csv(), out)
    bad = rep.first_failure()
    if bad is not None:
        print(bad.summary(), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
