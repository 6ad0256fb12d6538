"""Verification suites: axioms, identities, bounds and limits.

Each suite returns a :class:`Report` whose records fold all trials of one
(check, weight, dim, resolution) key. Polytope-side checks use near machine
precision tolerances; X-side checks use rounding-level tolerances when the
inequality is exact for the discrete model and refinement-calibrated ones
when quadrature error enters.
"""
from __future__ import annotations

import time

import numpy as np

from ..convex import GridFunction, convexify, interval, legendre, random_convex
from ..metric import (MetricPair, QuasiNormProblem, check_sandwich, d_hat_psi, d_psi_dual, i_psi,
                      psi_distance_arrays, quasi_norm, quasi_norm_values)
from ..toric1d import (ToricPotential1D, average_potential, canonical_cutoff, cutoff_mass, energy_E_psi,
                       ma_measure, random_symplectic_potential, reference_potential, slope_jumps,
                       slow_pole_potential, truncated_slope_potential, y_grid)
from ..weights import power_weight
from .config import SuiteConfig
from .families import (POLY_KINDS, X_KINDS, XGrids, nonpositive_ordered_pair, ordered_dual_triple,
                       ordered_pair_duals, polytope_for, random_triple, trial_rng,
                       x_pair_duals)
from .report import Aggregator, Constant, Report, digest

# bounds for n = 1
COMPARABILITY_BOUND = 128.0
HALFWAY_BOUND = 8.0
SANDWICH_FACTOR = 4.0

AXIOM_CHUNK = 500
EPS = np.finfo(float).eps


def _finish(name: str, agg: Aggregator, cfg: SuiteConfig, t0: float, constants=()) -> Report:
    return Report(name, agg.records(), list(constants), cfg.to_dict(), time.perf_counter() - t0)


def _rel(*vals) -> np.ndarray:
    return np.maximum.reduce([np.abs(np.asarray(v, dtype=float)) for v in vals])


# -- axioms --------------------------------------------------------------------

def run_axioms(cfg: SuiteConfig, generator=random_triple) -> Report:
    """Symmetry, identity, nondegeneracy and the triangle inequality on random
    triples of convex duals.

    ``generator(rng, P, kind)`` returns the three dual arrays of a trial.
    """
    t0 = time.perf_counter()
    agg = Aggregator("axioms")
    weights = cfg.weight_objects()
    tol = cfg.tol("exact")
    for dim in cfg.dims:
        P = polytope_for(dim, cfg.poly_resolution[dim - 1])
        quad = P.weights
        res = P.resolution
        for start in range(0, cfg.trials, AXIOM_CHUNK):
            ids = np.arange(start, min(cfg.trials, start + AXIOM_CHUNK))
            trip = [generator(trial_rng(cfg.seed, "axioms", dim, i), P, POLY_KINDS[i % len(POLY_KINDS)])
                    for i in ids]
            A = np.stack([t[0] for t in trip])
            B = np.stack([t[1] for t in trip])
            C = np.stack([t[2] for t in trip])
            dig = [digest(*t) for t in trip]
            axes = tuple(range(1, A.ndim))
            for w in weights:
                name = w.spec
                dab = psi_distance_arrays(A, B, quad, w)
                dba = psi_distance_arrays(B, A, quad, w)
                dbc = psi_distance_arrays(B, C, quad, w)
                dac = psi_distance_arrays(A, C, quad, w)
                daa = psi_distance_arrays(A, A, quad, w)
                agg.add("symmetry", name, dim, res, np.abs(dab - dba), 0.0, 0.0, ids, dig)
                agg.add("identity", name, dim, res, daa, 0.0, 0.0, ids, dig)
                for x, y, dxy in ((A, B, dab), (B, C, dbc), (A, C, dac)):
                    gap = np.max(np.abs(x - y), axis=axes)
                    sep = gap > 1e-8
                    if np.any(sep):
                        agg.add("nondegeneracy", name, dim, res, dxy[sep], 0.0, 0.0, ids[sep],
                                [d for d, s in zip(dig, sep) if s], lower=True, strict=True)
                scale = _rel(dab, dbc, dac)
                agg.add("triangle", name, dim, res, dac, dab + dbc, tol * scale, ids, dig)
    return _finish("axioms", agg, cfg, t0)


# -- identities ----------------------------------------------------------------

CONSTANCY_TIMES = (0.0, 0.25, 0.5, 0.75, 1.0)
STABILITY_EPS = (1e-1, 1e-3, 1e-6)


def _geodesic_velocity_integral(a, b, quad, w, t):
    """Integral of psi of the path velocity, by a difference quotient of
    geodesic samples around t, with a rounding bound for the result.

    The quotient has absolute error at most delta = 8 eps max(|a|, |b|) / dt
    per node. For concave psi vanishing at 0 the integrand then moves by at
    most min(psi(delta), delta psi(|b - a|) / |b - a|).
    """
    lo, hi = max(0.0, t - 0.25), min(1.0, t + 0.25)
    pa = (1 - lo) * a + lo * b
    pb = (1 - hi) * a + hi * b
    val = float(np.sum(w((pb - pa) / (hi - lo)) * quad))
    delta = 8 * EPS * np.maximum(np.abs(a), np.abs(b)) / (hi - lo)
    gap = np.abs(b - a)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(gap > 0, delta * w(gap) / gap, np.inf)
    return val, float(np.sum(np.minimum(w(delta), rel) * quad))


def run_identities(cfg: SuiteConfig) -> Report:
    """Pythagorean identity, contraction, monotone triples, geodesic constancy,
    d-hat linearity, uniform-approximation stability, Legendre involution and
    quasi-norm closed forms."""
    t0 = time.perf_counter()
    agg = Aggregator("identities")
    weights = cfg.weight_objects()
    ex, rnd, qn = cfg.tol("exact"), cfg.tol("rounding"), cfg.tol("quasi_norm")
    n = cfg.pair_trials
    for dim in cfg.dims:
        P = polytope_for(dim, cfg.poly_resolution[dim - 1])
        quad, res = P.weights, P.resolution
        for i in range(n):
            rng = trial_rng(cfg.seed, "identities", dim, i)
            a, b, c = random_triple(rng, P, POLY_KINDS[i % len(POLY_KINDS)])
            oa, ob, oc = ordered_dual_triple(rng, P)
            dig = [digest(a, b, c)]
            odig = [digest(oa, ob, oc)]
            m = np.maximum(a, b)
            eps = STABILITY_EPS[i % len(STABILITY_EPS)]
            ga = eps * rng.uniform(0, 1, a.shape)
            gb = -eps * rng.uniform(0, 1, a.shape)
            G = [GridFunction(P, v) for v in (a, b, c, oa, ob, oc)]
            for w in weights:
                name = w.spec
                d = lambda x, y: float(psi_distance_arrays(x, y, quad, w))
                dab = d(a, b)
                lhs = d(a, m) + d(b, m)
                agg.add("pythagorean", name, dim, res, abs(dab - lhs), 0.0, ex * max(dab, lhs), [i], dig)
                dc = d(np.maximum(a, c), np.maximum(b, c))
                agg.add("contraction", name, dim, res, dc, dab, ex * max(dab, dc), [i], dig)
                dac_, dab_, dbc_ = d(oa, oc), d(oa, ob), d(ob, oc)
                agg.add("monotone_triple", name, dim, res, max(dab_, dbc_), dac_, ex * dac_, [i], odig)
                hac = d_hat_psi(G[3], G[5], w)
                hab = d_hat_psi(G[3], G[4], w)
                hbc = d_hat_psi(G[4], G[5], w)
                agg.add("monotone_triple_hat", name, dim, res, max(hab, hbc), hac, qn * hac, [i], odig)
                vals = [_geodesic_velocity_integral(a, b, quad, w, t) for t in CONSTANCY_TIMES]
                err = max(abs(v - dab) for v, _ in vals)
                bound = max(r for _, r in vals) * cfg.tolerance_scale
                agg.add("geodesic_constancy_dual", name, dim, res, err, 0.0, rnd * dab + bound, [i], dig)
                # two geodesics from a common start: d-hat grows linearly in t
                h1 = d_hat_psi(G[1], G[2], w)
                lin = 0.0
                for t in (0.25, 0.5, 0.75):
                    at = GridFunction(P, (1 - t) * a + t * b)
                    ct = GridFunction(P, (1 - t) * a + t * c)
                    lin = max(lin, abs(d_hat_psi(at, ct, w) - t * h1))
                agg.add("d_hat_linearity", name, dim, res, lin, 0.0, qn * max(h1, 1e-300), [i], dig)
                dpert = d(a + ga, b + gb)
                bound = 2.0 * P.volume * float(w(eps))
                agg.add("uniform_stability", name, dim, res, abs(dpert - dab), bound, ex * max(dab, dpert),
                        [i], dig)

    _legendre_checks(cfg, agg)
    _quasi_norm_checks(cfg, agg)
    _x_constancy(cfg, agg)
    return _finish("identities", agg, cfg, t0)


def _legendre_checks(cfg: SuiteConfig, agg: Aggregator):
    k = cfg.tol("legendre")
    for dim in cfg.dims:
        P = polytope_for(dim, cfg.poly_resolution[dim - 1])
        h = P.spacing
        for i in range(max(1, min(cfg.pair_trials, 50))):
            f = random_convex(trial_rng(cfg.seed, "identities", 100 + dim, i), P)
            back = legendre(legendre(f, warn=False), P, warn=False)
            err = float(np.max(np.abs(back.values - f.values)))
            agg.add("legendre_involution", "-", dim, P.resolution, err, 0.0, k * h, [i], [digest(f.values)])
        X = np.stack(P.mesh, axis=-1)
        quad = GridFunction(P, 0.5 * np.sum(X**2, axis=-1))
        Lq = legendre(quad, P, warn=False)
        err = float(np.max(np.abs(Lq.values - quad.values)))
        agg.add("legendre_quadratic", "-", dim, P.resolution, err, 0.0, k * h, [0], [""])
        c = 0.7
        Lc = legendre(GridFunction(P, np.full(P.shape, c)), P, warn=False)
        target = np.sum(np.abs(X), axis=-1) - c
        err = float(np.max(np.abs(Lc.values - target)))
        agg.add("legendre_constant", "-", dim, P.resolution, err, 0.0, k * h, [0], [""])


def _quasi_norm_checks(cfg: SuiteConfig, agg: Aggregator):
    qn = cfg.tol("quasi_norm")
    # f = 1 against total mass 2 with psi = sqrt: 2 / sqrt(N) = 1
    N = quasi_norm_values(np.ones(4), np.full(4, 0.5), power_weight(0.5))
    agg.add("quasi_norm_closed_form", "pow:0.5", 0, 4, abs(N - 4.0), 0.0, qn * 4.0, [0], [""])
    for w in cfg.weight_objects():
        for i in range(max(1, min(cfg.pair_trials, 50))):
            rng = trial_rng(cfg.seed, "identities", 200, i)
            f = rng.normal(size=64) * 10 ** rng.uniform(-3, 3)
            m = rng.uniform(0, 1, 64) * 10 ** rng.uniform(-2, 1)
            lam = 10 ** rng.uniform(-3, 3)
            a = quasi_norm_values(lam * f, m, w)
            b = lam * quasi_norm_values(f, m, w)
            agg.add("quasi_norm_homogeneity", w.spec, 0, 64, abs(a - b), 0.0, qn * max(a, b), [i],
                    [digest(f, m)])


def _x_constancy(cfg: SuiteConfig, agg: Aggregator):
    """Geodesic integrals on the X side against the dual-side value, as a
    refinement study over ``cfg.resolutions``."""
    weights = cfg.weight_objects()
    errs = {w.spec: [] for w in weights}
    for res in cfg.resolutions:
        grids = XGrids(res)
        worst = {w.spec: (0.0, 0, "") for w in weights}
        for i in range(cfg.constancy_pairs):
            rng = trial_rng(cfg.seed, "identities", 300, i)
            kind = ("smooth", "kinked")[i % 2]
            seeds = rng.integers(0, 2**31, 2)
            p0 = random_symplectic_potential(int(seeds[0]), kind)(grids.x)
            p1 = random_symplectic_potential(int(seeds[1]), kind)(grids.x)
            F0, F1 = grids.potential(p0), grids.potential(p1)
            dig = digest(p0, p1)
            pair = MetricPair.from_potentials(F0, F1, grids.P)
            for w in weights:
                dd = pair.d_dual(w)
                e = max(abs(pair.d_x(w, t) - dd) for t in CONSTANCY_TIMES) / dd
                if e > worst[w.spec][0]:
                    worst[w.spec] = (e, i, dig)
        for w in weights:
            e, i, dig = worst[w.spec]
            errs[w.spec].append(e)
            agg.add("geodesic_constancy_x", w.spec, 1, res, e, np.inf if res != cfg.resolutions[-1]
                    else cfg.tol("constancy"), 0.0, [i], [dig])
    gain, growth = cfg.tol("refinement_gain"), cfg.tol("refinement_growth")
    for w in weights:
        e = errs[w.spec]
        if len(e) < 2:
            continue
        r0, r1 = cfg.resolutions[0], cfg.resolutions[-1]
        agg.add("refinement_gain", w.spec, 1, r1, e[0] / max(e[-1], 1e-300), gain, 0.0, [r0], [""], lower=True)
        ratio = max(b / max(a, 1e-300) for a, b in zip(e, e[1:]))
        agg.add("refinement_growth", w.spec, 1, r1, ratio, growth, 0.0, [r0], [""])


# -- bounds --------------------------------------------------------------------

def _ma_tol(F: ToricPotential1D, cfg: SuiteConfig) -> float:
    dy = float(np.min(np.diff(F.y)))
    return 64 * EPS * max(1.0, float(np.max(np.abs(F.values)))) / dy * cfg.tolerance_scale


def run_bounds(cfg: SuiteConfig) -> Report:
    """Comparability, sandwich, halfway, MA inequality and fundamental
    estimate on X-side pairs, with the empirical constants."""
    t0 = time.perf_counter()
    agg = Aggregator("bounds")
    weights = cfg.weight_objects()
    rnd = cfg.tol("rounding")
    C_test = cfg.tol("fundamental_C")
    res = cfg.resolution
    grids = XGrids(res)
    x = grids.x
    sup = {k: 0.0 for k in ("I/d", "d/I", "halfway", "A_u/d", "A_v/d", "d/A_u", "E(v)/E(u)")}

    def note(k, v):
        if np.isfinite(v):
            sup[k] = max(sup[k], float(v))

    for i in range(cfg.pair_trials):
        rng = trial_rng(cfg.seed, "bounds", 1, i)
        kind = X_KINDS[i % len(X_KINDS)]
        p0, p1 = x_pair_duals(rng, x, kind)
        dig = [digest(p0, p1)]
        F0, F1 = grids.potential(p0), grids.potential(p1)
        pair = MetricPair.from_potentials(F0, F1, grids.P)
        Fa = average_potential(F0, F1)
        half = MetricPair.from_potentials(F0, Fa, grids.P)
        j0 = slope_jumps(F0.y, F0.values)
        ja = slope_jumps(F0.y, Fa.values)
        agg.add("ma_average", "-", 1, res, float(np.max(j0 - 2 * ja)), 0.0, _ma_tol(F0, cfg), [i], dig)
        for w in weights:
            d = pair.d_x(w, 0.0)
            I = i_psi(F0, F1, w)
            dh = half.d_x(w, 0.0)
            agg.add("comparability_lower", w.spec, 1, res, d, I, rnd * max(d, I), [i], dig)
            agg.add("comparability_upper", w.spec, 1, res, I, COMPARABILITY_BOUND * d, rnd * I, [i], dig)
            agg.add("halfway", w.spec, 1, res, dh, HALFWAY_BOUND * d, rnd * dh, [i], dig)
            if d > 0:
                note("I/d", I / d)
                note("d/I", d / I)
                note("halfway", dh / d)
            if kind == "shift":
                c = abs(float(p0[0] - p1[0]))
                exact = float(w(c))
                agg.add("shift_closed_form_d", w.spec, 1, res, abs(d - exact), 0.0, rnd * exact, [i], dig)
                agg.add("shift_closed_form_I", w.spec, 1, res, abs(I - 2 * exact), 0.0, rnd * exact, [i], dig)

    for i in range(cfg.pair_trials):
        rng = trial_rng(cfg.seed, "bounds", 2, i)
        pu, pv = ordered_pair_duals(rng, x, i % 4)
        dig = [digest(pu, pv)]
        Fu, Fv = grids.potential(pu), grids.potential(pv)
        for w in weights:
            r = check_sandwich(Fu, Fv, w, grids.P, rtol=rnd)
            s = rnd * max(r.d, r.A_u, r.A_v)
            agg.add("sandwich_upper", w.spec, 1, res, r.d, r.A_u, s, [i], dig)
            agg.add("sandwich_lower_u", w.spec, 1, res, r.A_u / SANDWICH_FACTOR, r.d, s, [i], dig)
            agg.add("sandwich_lower_v", w.spec, 1, res, r.A_v, r.d1, rnd * max(r.d1, r.A_v), [i], dig)
            if r.d > 0:
                note("A_u/d", r.A_u / r.d)
                note("A_v/d", r.A_v / r.d1)
                note("d/A_u", r.d / r.A_u)

    for i in range(cfg.pair_trials):
        rng = trial_rng(cfg.seed, "bounds", 3, i)
        Fu, Fv = nonpositive_ordered_pair(rng, grids, i % 3)
        dig = [digest(Fu.values, Fv.values)]
        for w in weights:
            Eu, Ev = energy_E_psi(Fu, w), energy_E_psi(Fv, w)
            agg.add("fundamental_estimate", w.spec, 1, res, Ev, C_test * Eu, rnd * max(Ev, Eu), [i], dig)
            if Eu > 0:
                note("E(v)/E(u)", Ev / Eu)

    constants = [
        Constant("I/d", sup["I/d"], COMPARABILITY_BOUND, "comparability"),
        Constant("d/I", sup["d/I"], 1.0, "comparability"),
        Constant("d(u0,avg)/d(u0,u1)", sup["halfway"], HALFWAY_BOUND, "halfway"),
        Constant("A_u/d", sup["A_u/d"], SANDWICH_FACTOR, "sandwich"),
        Constant("A_v/d", sup["A_v/d"], 1.0, "sandwich"),
        Constant("d/A_u", sup["d/A_u"], 1.0, "sandwich"),
        Constant("E(v)/E(u)", sup["E(v)/E(u)"], C_test, "configured C_test"),
    ]
    return _finish("bounds", agg, cfg, t0, constants)


# -- limits --------------------------------------------------------------------

MONOTONE_CAPS = (1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0)
MONOTONE_RESOLUTION = 65536
MEMBERSHIP_RESOLUTIONS = (1024, 4096, 16384, 65536)
SLOW_POLE_GRID = (1e6, 65537)
CUTOFF_LEVELS = (0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0)
CONTINUITY_STEPS = tuple(2.0 ** (-4 * k) for k in range(1, 17))
CUTOFF_STEPS = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0)


def _schedule(agg, check, weight, res, errs, cfg, final_scale, trial_tag, monotone=True):
    """A convergence schedule with the last error below ``limit * final_scale``.

    With ``monotone`` the errors must also never grow by more than the
    refinement growth factor; otherwise the whole second half of the
    sequence must already sit below the final tolerance.
    """
    errs = np.asarray(errs, dtype=float)
    tol = cfg.tol("limit") * final_scale
    if monotone:
        if errs.size < 2 or np.all(errs == 0):
            ratio = 0.0
        elif np.all(errs[:-1] == 0):
            ratio = np.inf
        else:
            prev = errs[:-1]
            ratio = float(np.max(np.where(prev > 0, errs[1:] / np.where(prev > 0, prev, 1.0),
                                          np.where(errs[1:] > 0, np.inf, 0.0))))
        agg.add(check + "_monotone", weight, 1, res, ratio, cfg.tol("refinement_growth"), 0.0,
                [trial_tag], [""])
    else:
        tail = errs[errs.size // 2:]
        agg.add(check + "_tail", weight, 1, res, float(tail.max()), tol, 0.0, [trial_tag], [""])
    agg.add(check + "_final", weight, 1, res, float(errs[-1]), tol, 0.0, [trial_tag], [""])


def _rate(ks, ds) -> float:
    ks, ds = np.asarray(ks, float), np.asarray(ds, float)
    keep = ds > 0
    if keep.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(ks[keep]), np.log(ds[keep]), 1)[0])


def run_limits(cfg: SuiteConfig) -> Report:
    """Monotone convergence, Cauchy behaviour, cutoff masses, energy and MA
    continuity, membership of an unbounded dual, quasi-norm convergence."""
    t0 = time.perf_counter()
    agg = Aggregator("limits")
    weights = cfg.weight_objects()
    constants = []

    # (a), (b): phi_k = convex envelope of min(phi, k) increases to phi
    P = interval(-1.0, 1.0, MONOTONE_RESOLUTION, "midpoint")
    x = P.axes[0]
    phi = GridFunction(P, (1 - x**2) ** -0.25)
    seq = [convexify(GridFunction(P, np.minimum(phi.values, k))) for k in MONOTONE_CAPS]
    for w in weights:
        ds = [d_psi_dual(s, phi, w) for s in seq]
        _schedule(agg, "monotone_limit", w.spec, P.resolution, ds, cfg, ds[0], 0)
        tails = [max(d_psi_dual(seq[k], seq[l], w) for l in range(k + 1, len(seq)))
                 for k in range(len(seq) - 1)]
        _schedule(agg, "cauchy_tail", w.spec, P.resolution, tails, cfg, tails[0], 0)
        constants.append(Constant(f"monotone rate {w.spec}", _rate(MONOTONE_CAPS, ds), float("nan"),
                                  "descriptive"))
    # the limit has finite psi-integral: quadrature refinement settles
    for w in weights:
        vals = []
        for N in MEMBERSHIP_RESOLUTIONS:
            xs = interval(-1.0, 1.0, N, "midpoint")
            vals.append(float(np.sum(w((1 - xs.axes[0] ** 2) ** -0.25) * xs.weights)))
        diffs = np.abs(np.diff(vals))
        _schedule(agg, "limit_integral", w.spec, MEMBERSHIP_RESOLUTIONS[-1], diffs, cfg, vals[-1], 0)

    # (c) cutoff masses
    Yb, nb = SLOW_POLE_GRID
    slow = ToricPotential1D.from_callable(slow_pole_potential, y_grid(Yb, nb))
    masses = [cutoff_mass(slow, h) for h in CUTOFF_LEVELS]
    steps = np.diff(masses)
    agg.add("cutoff_mass_increasing", "-", 1, nb, float(-steps.min()), 0.0, 0.0, [0], [""])
    agg.add("cutoff_mass_full", "-", 1, nb, masses[-1], 1.0 - cfg.tol("full_mass"), 0.0, [0], [""],
            lower=True)
    trunc = ToricPotential1D.from_callable(truncated_slope_potential(), y_grid())
    tm = [cutoff_mass(trunc, h) for h in CUTOFF_LEVELS + (16.0,)]
    agg.add("cutoff_mass_increasing_truncated", "-", 1, trunc.grid.resolution, float(-np.diff(tm).min()),
            0.0, 0.0, [0], [""])
    agg.add("cutoff_mass_truncated_limit", "-", 1, trunc.grid.resolution, abs(tm[-1] - 0.5), 0.0,
            cfg.tol("full_mass"), [0], [""])
    agg.add("cutoff_mass_truncated_deficit", "-", 1, trunc.grid.resolution, tm[-1],
            1.0 - cfg.tol("full_mass"), 0.0, [0], [""])

    # (d) energy and MA continuity along decreasing sequences
    F = ToricPotential1D.from_callable(slow_pole_potential, y_grid())
    top = ToricPotential1D.from_values(reference_potential(F.y) + 1.0, F.grid)
    mu = ma_measure(F)
    nodes = F.y
    cdf = mu.cdf(nodes)
    # written as F + c (top - F) so that c below machine epsilon still counts
    convex_seq = [ToricPotential1D.from_values(F.values + c * (top.values - F.values), F.grid)
                  for c in CONTINUITY_STEPS]
    cut_seq = [canonical_cutoff(F, h) for h in CUTOFF_STEPS]
    for tag, seq_F in (("convex_combination", convex_seq), ("cutoff", cut_seq)):
        cdf_err = [float(np.max(np.abs(ma_measure(G).cdf(nodes) - cdf))) for G in seq_F]
        _schedule(agg, f"ma_continuity_{tag}", "-", F.grid.resolution, cdf_err, cfg, 1.0, 0, monotone=False)
        for w in weights:
            E = energy_E_psi(F, w)
            errs = [abs(energy_E_psi(G, w) - E) for G in seq_F]
            _schedule(agg, f"energy_continuity_{tag}", w.spec, F.grid.resolution, errs, cfg, max(E, 1e-300), 0,
                      monotone=False)

    # (e) an unbounded dual with finite sqrt-integral and divergent integral
    half, lin = [], []
    for N in MEMBERSHIP_RESOLUTIONS:
        g = interval(-1.0, 1.0, N, "midpoint")
        phi_e = 1.0 / (1 - g.axes[0] ** 2)
        half.append(float(np.sum(np.sqrt(phi_e) * g.weights)))
        lin.append(float(np.sum(phi_e * g.weights)))
    herr = [abs(v - np.pi) for v in half]
    _schedule(agg, "membership_sqrt_integral", "pow:0.5", MEMBERSHIP_RESOLUTIONS[-1], herr, cfg, np.pi, 0)
    inc = np.diff(lin)
    agg.add("membership_linear_divergence", "pow:1", 1, MEMBERSHIP_RESOLUTIONS[-1], float(inc.min()),
            0.5 * float(inc[0]), 0.0, [0], [""], lower=True)

    # quasi-norm convergence under uniform and weak perturbation
    for w in weights:
        rng = trial_rng(cfg.seed, "limits", 1, 0)
        locs = np.sort(rng.uniform(0, 1, 200))
        m = rng.uniform(0.1, 1.0, 200)
        m /= m.sum()

        def f(t):
            return 1.0 + np.sin(3 * t) + 2 * t**2

        r, s = rng.uniform(-1, 1, 200), rng.uniform(-1, 1, 200)
        base = quasi_norm(QuasiNormProblem(f(locs), m, w))
        errs_u, errs_w = [], []
        for k in range(1, 13):
            eps = 2.0**-k
            errs_u.append(abs(quasi_norm_values(f(locs) + eps * np.cos(5 * locs), m, w) - base))
            errs_w.append(abs(quasi_norm_values(f(locs + eps * r), m * (1 + eps * s), w) - base))
        _schedule(agg, "quasi_norm_uniform", w.spec, 200, errs_u, cfg, base, 0, monotone=False)
        _schedule(agg, "quasi_norm_weak", w.spec, 200, errs_w, cfg, base, 0, monotone=False)

    return _finish("limits", agg, cfg, t0, constants)


SUITES = {"axioms": run_axioms, "identities": run_identities, "bounds": run_bounds, "limits": run_limits}


__all__ = ["run_axioms", "run_identities", "run_bounds", "run_limits", "SUITES", "COMPARABILITY_BOUND",
           "HALFWAY_BOUND", "SANDWICH_FACTOR"]
