"""Acceptance criteria at full default scale.

Each test carries a ``criterion`` mark; the terminal summary prints one
PASS/FAIL line per criterion with the measured quantities.
"""
import subprocess
import sys
import time

import numpy as np
import pytest

from lowenergy.convex import GridFunction, box, interval, legendre, random_convex
from lowenergy.harness import SuiteConfig, run_axioms, run_bounds, run_identities, run_limits
from lowenergy.harness.families import POLY_KINDS, polytope_for, random_triple, trial_rng
from lowenergy.metric import psi_distance_arrays, quasi_norm_values
from lowenergy.weights import builtin_weights, power_weight

pytestmark = pytest.mark.slow

DEFAULT = SuiteConfig()
WEIGHTS = builtin_weights()


class Timed:
    def __init__(self, fn, cfg):
        t0 = time.perf_counter()
        self.report = fn(cfg)
        self.seconds = time.perf_counter() - t0

    def records(self, *checks):
        out = [r for r in self.report.records if r.check in checks]
        assert out, f"no records for {checks}"
        return out


@pytest.fixture(scope="module")
def bounds():
    return Timed(run_bounds, DEFAULT)


@pytest.fixture(scope="module")
def identities():
    return Timed(run_identities, DEFAULT)


@pytest.fixture(scope="module")
def limits():
    return Timed(run_limits, DEFAULT)


def violations(records):
    return sum(r.violations for r in records)


def trials(records):
    return sum(r.trials for r in records)


@pytest.mark.criterion(1, "triangle inequality, 10^4 triples, dims 1-2, six weights, <= 60 s")
def test_triangle_inequality(record_property):
    run = Timed(run_axioms, DEFAULT)
    tri = run.records("triangle")
    record_property("runtime_s", f"{run.seconds:.1f}")
    record_property("violations", violations(tri))
    assert {r.dim for r in tri} == {1, 2}
    assert {r.weight for r in tri} == {w.spec for w in WEIGHTS}
    assert all(r.trials == 10_000 for r in tri)
    assert violations(tri) == 0
    assert run.report.passed
    assert run.seconds <= 60.0


@pytest.mark.criterion(2, "Pythagorean identity to 1e-12 relative on 10^3 pairs, <= 10 s")
def test_pythagorean_identity(record_property):
    t0 = time.perf_counter()
    worst = 0.0
    for dim in (1, 2):
        P = polytope_for(dim, DEFAULT.poly_resolution[dim - 1])
        pairs = [random_triple(trial_rng(DEFAULT.seed, "identities", 900 + dim, i), P,
                               POLY_KINDS[i % len(POLY_KINDS)])[:2] for i in range(1000)]
        A = np.stack([p[0] for p in pairs])
        B = np.stack([p[1] for p in pairs])
        top = np.maximum(A, B)
        for w in WEIGHTS:
            d = psi_distance_arrays(A, B, P.weights, w)
            parts = psi_distance_arrays(A, top, P.weights, w) + psi_distance_arrays(B, top, P.weights, w)
            rel = np.abs(d - parts) / np.maximum(d, 1e-300)
            worst = max(worst, float(np.max(np.where(d > 0, rel, np.abs(parts)))))
    seconds = time.perf_counter() - t0
    record_property("max_rel_error", f"{worst:.2e}")
    record_property("runtime_s", f"{seconds:.1f}")
    assert worst <= 1e-12
    assert seconds <= 10.0


@pytest.mark.criterion(3, "d <= I and I <= 128 d on 10^3 X-side pairs, <= 120 s")
def test_comparability(bounds, record_property):
    recs = bounds.records("comparability_lower", "comparability_upper")
    sup = next(c for c in bounds.report.constants if c.name == "I/d")
    record_property("sup_I_over_d", f"{sup.observed:.4g}")
    record_property("violations", violations(recs))
    record_property("runtime_s", f"{bounds.seconds:.1f}")
    assert sup.bound == 128.0
    assert all(r.trials >= 1000 for r in recs)
    assert violations(recs) == 0
    assert bounds.seconds <= 120.0


@pytest.mark.criterion(4, "sandwich A_u/4 <= d <= A_u and A_v <= d on 10^3 ordered pairs")
def test_sandwich(bounds, record_property):
    recs = bounds.records("sandwich_upper", "sandwich_lower_u", "sandwich_lower_v")
    record_property("violations", violations(recs))
    record_property("pairs_per_record", min(r.trials for r in recs))
    assert all(r.trials >= 1000 for r in recs)
    assert violations(recs) == 0


@pytest.mark.criterion(5, "halfway d(u0,avg) <= 8 d(u0,u1) and 2 MA(avg) >= MA(u0)")
def test_halfway(bounds, record_property):
    half = bounds.records("halfway")
    ma = bounds.records("ma_average")
    sup = next(c for c in bounds.report.constants if c.source == "halfway")
    record_property("sup_ratio", f"{sup.observed:.4g}")
    record_property("violations", violations(half) + violations(ma))
    assert sup.bound == 8.0
    assert all(r.trials >= 1000 for r in half)
    assert violations(half) == 0 and violations(ma) == 0


@pytest.mark.criterion(6, "X-side geodesic constancy within 1e-3 at 4096, error shrinks >= 2x from 1024")
def test_geodesic_constancy(identities, record_property):
    fine = [r for r in identities.records("geodesic_constancy_x") if r.resolution == 4096]
    gain = identities.records("refinement_gain")
    record_property("max_rel_error_4096", f"{max(r.value for r in fine):.2e}")
    record_property("min_gain", f"{min(r.value for r in gain):.3g}")
    assert DEFAULT.resolutions[0] == 1024 and DEFAULT.resolutions[-1] == 4096
    assert all(r.value <= 1e-3 for r in fine)
    assert all(r.value >= 2.0 for r in gain)
    assert violations(identities.records("geodesic_constancy_dual")) == 0


@pytest.mark.criterion(7, "Legendre involution and analytic transforms within 5h")
def test_legendre(identities, record_property):
    worst = 0.0
    for P in (interval(-1, 1, 257), box([(-1, 1), (-1, 1)], 33)):
        h = P.spacing
        X = np.stack(P.mesh, axis=-1)
        for seed in range(100):
            f = random_convex(seed, P, roughness=seed % 4)
            back = legendre(legendre(f, warn=False), P, warn=False)
            worst = max(worst, float(np.max(np.abs(back.values - f.values))) / h)
        sq = 0.5 * np.sum(X**2, axis=-1)
        worst = max(worst, float(np.max(np.abs(legendre(GridFunction(P, sq), P).values - sq))) / h)
        c = 0.3
        Lc = legendre(GridFunction(P, np.full(P.shape, c)), P)
        worst = max(worst, float(np.max(np.abs(Lc.values - (np.sum(np.abs(X), axis=-1) - c)))) / h)
    record_property("max_error_over_h", f"{worst:.3g}")
    assert worst <= 5.0
    assert violations(identities.records("legendre_involution", "legendre_quadratic", "legendre_constant")) == 0


@pytest.mark.criterion(8, "quasi-norm closed form and homogeneity to 1e-8; convergence schedules")
def test_quasi_norm(identities, limits, record_property):
    half = power_weight(0.5)
    N = quasi_norm_values(np.ones(8), np.full(8, 0.25), half)
    rng = np.random.default_rng(DEFAULT.seed)
    hom = 0.0
    for w in WEIGHTS:
        f, m = rng.normal(size=50), rng.uniform(0, 1, 50)
        base = quasi_norm_values(f, m, w)
        for c in (0.5, 2.0, 10.0):
            hom = max(hom, abs(quasi_norm_values(c * f, m, w) - c * base) / (c * base))
    conv = [r for r in limits.report.records if r.check.startswith("quasi_norm_")]
    record_property("closed_form_rel_error", f"{abs(N - 4) / 4:.1e}")
    record_property("homogeneity_rel_error", f"{hom:.1e}")
    assert abs(N - 4.0) <= 4e-8
    assert hom <= 1e-8
    assert violations(identities.records("quasi_norm_closed_form", "quasi_norm_homogeneity")) == 0
    assert conv and violations(conv) == 0


@pytest.mark.criterion(9, "monotone limits, cutoff masses, energy and MA continuity, <= 120 s")
def test_limits(limits, record_property):
    recs = limits.report.records
    full = limits.records("cutoff_mass_full")
    trunc = limits.records("cutoff_mass_truncated_limit", "cutoff_mass_truncated_deficit")
    continuity = [r for r in recs if r.check.startswith(("energy_continuity", "ma_continuity"))]
    monotone = limits.records("monotone_limit_final", "monotone_limit_monotone")
    record_property("records", len(recs))
    record_property("failures", sum(not r.passed for r in recs))
    record_property("runtime_s", f"{limits.seconds:.1f}")
    assert continuity and monotone and full and trunc
    assert limits.report.passed
    assert limits.seconds <= 120.0


@pytest.mark.criterion(10, "verify --seed 42 twice gives byte-identical reports")
def test_reproducibility(tmp_path, record_property):
    outs = []
    for k in range(2):
        path = tmp_path / f"run{k}.json"
        proc = subprocess.run([sys.executable, "-m", "lowenergy", "verify", "--seed", "42", "--out", str(path)],
                              capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outs.append(path.read_bytes())
    record_property("report_bytes", len(outs[0]))
    assert outs[0] == outs[1]
