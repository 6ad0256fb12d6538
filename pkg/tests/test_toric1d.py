import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import expit, logit

from lowenergy.convex import GridFunction, interval
from lowenergy.toric1d import (DiscreteMeasure, InversionError, NonConvexPotentialError, ToricPotential1D,
                               average_potential, canonical_cutoff, cutoff_mass, energy_E_psi,
                               has_full_mass, integrate_against_ma, logistic_mixture, ma_measure,
                               moment_grid, moment_pushforward, random_symplectic_potential,
                               reference_dual, reference_potential, slope_jumps, slow_pole_potential,
                               truncated_slope_potential, y_grid)
from lowenergy.weights import builtin_weights, power_weight

seeds = st.integers(0, 2**32 - 1)
kinds = st.sampled_from(["smooth", "kinked"])
REF = ToricPotential1D.from_callable(reference_potential, y_grid(resolution=4096))


def random_potential(seed, kind, resolution=2048):
    phi = random_symplectic_potential(seed, kind)
    P = moment_grid(resolution)
    return ToricPotential1D.from_dual(GridFunction(P, phi(P.axes[0])), y_grid(resolution=resolution))


# -- construction -----------------------------------------------------------------

def test_potential_invariants():
    G = y_grid(resolution=64)
    with pytest.raises(NonConvexPotentialError):
        ToricPotential1D.from_callable(lambda y: -reference_potential(y), G)
    with pytest.raises(ValueError):
        ToricPotential1D.from_callable(lambda y: 2 * reference_potential(y), G)
    with pytest.raises(ValueError):
        ToricPotential1D.from_callable(lambda y: y**2, interval(-1, 1, 9))
    assert REF.v.max() == 0.0 and REF.v.min() == 0.0


def test_reference_dual_matches_conjugate():
    P = moment_grid(257)
    np.testing.assert_allclose(REF.dual(P).values, reference_dual(P.axes[0]), atol=1e-5)


def test_measure_basics():
    with pytest.raises(ValueError):
        DiscreteMeasure([0.0, 1.0], [1.0, -1e-3])
    with pytest.raises(ValueError):
        DiscreteMeasure([0.0, 1.0], [1.0])
    mu = DiscreteMeasure([2.0, 0.0, 1.0], [0.5, 0.25, 0.25])
    assert mu.total_mass == 1.0
    np.testing.assert_array_equal(mu.cdf([-1, 0, 1.5, 2]), [0, 0.25, 0.5, 1.0])
    assert mu.restrict(mu.locations > 0.5).total_mass == 0.75
    assert mu.integrate(lambda y: y) == 1.25
    assert mu.to_csv().splitlines() == ["location,mass", "2.0,0.5", "0.0,0.25", "1.0,0.25"]
    assert REF.to_csv().splitlines()[0] == "y,F,v"


# -- Monge-Ampere measure ---------------------------------------------------------

def test_ma_examples():
    fine = ToricPotential1D.from_callable(reference_potential, y_grid(40.0, 8001))
    assert abs(ma_measure(fine).total_mass - 1.0) <= 2 * expit(-39.99)
    G = interval(-2, 2, 9)
    hinge = ma_measure(ToricPotential1D.from_callable(lambda y: np.maximum(0.0, y), G))
    np.testing.assert_array_equal(hinge.masses[hinge.masses > 0], [1.0])
    assert hinge.locations[hinge.masses > 0][0] == 0.0
    affine = ma_measure(ToricPotential1D.from_callable(lambda y: 0.3 * y + 1, G))
    assert affine.total_mass == pytest.approx(0.0, abs=1e-15)


def test_nonconvex_jumps_raise():
    y = np.linspace(-1, 1, 5)
    with pytest.raises(NonConvexPotentialError):
        slope_jumps(y, np.array([0, 0.5, 0.6, 0.7, 1.0]))


def test_integrate_against_ma_examples():
    mu = ma_measure(REF)
    assert integrate_against_ma(np.ones(mu.masses.size), REF) == mu.total_mass
    assert integrate_against_ma(lambda y: 0 * y, REF) == 0.0
    half = integrate_against_ma(lambda y: (y > 0).astype(float), REF)
    assert abs(half - 0.5) <= REF.grid.spacing


@given(seed=seeds, kind=kinds)
def test_mass_is_slope_range(seed, kind):
    F = random_potential(seed, kind, 512)
    s = F.slopes
    assert ma_measure(F).total_mass == pytest.approx(s[-1] - s[0], abs=1e-12)
    assert np.all(ma_measure(F).masses >= 0)


# -- energy -----------------------------------------------------------------------

@pytest.mark.parametrize("w", builtin_weights(), ids=lambda w: w.spec)
def test_energy_examples(w):
    assert energy_E_psi(REF, w) == 0.0
    c = -0.7
    shifted = ToricPotential1D.from_values(REF.values + c, REF.grid)
    assert energy_E_psi(shifted, w) == pytest.approx(w(c) * ma_measure(shifted).total_mass, rel=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_energy_matches_dense_quadrature(seed):
    F, F2 = logistic_mixture(seed)
    w = power_weight(0.5)
    Y = 30.0
    pot = ToricPotential1D.from_callable(F, y_grid(Y, 8193))
    ref, _ = quad(lambda y: w(F(y) - reference_potential(y)) * F2(y), -Y, Y, limit=400)
    assert energy_E_psi(pot, w) == pytest.approx(ref, abs=1e-4)


# -- cutoffs ---------------------------------------------------------------------

def test_cutoff_examples():
    low = ToricPotential1D.from_values(REF.values - 1.0, REF.grid)
    np.testing.assert_array_equal(canonical_cutoff(low, 5.0).values, low.values)
    np.testing.assert_array_equal(canonical_cutoff(low, 0.0).values, REF.values)
    assert cutoff_mass(low, 0.0) == 0.0
    with pytest.raises(ValueError):
        canonical_cutoff(low, -1.0)


@pytest.mark.parametrize("h", [0.5, 2.0, 4.0])
def test_cutoff_relative_potential(h):
    F = ToricPotential1D.from_callable(slow_pole_potential, y_grid(1e4, 20001))
    np.testing.assert_allclose(canonical_cutoff(F, h).v, np.maximum(-h, F.v), atol=1e-12)


@pytest.mark.parametrize("h", [2.0, 3.0, 4.0, 5.0, 6.0])
def test_cutoff_mass_of_slow_pole(h):
    Y, n = 1e6, 65537
    F = ToricPotential1D.from_callable(slow_pole_potential, y_grid(Y, n))
    yh = brentq(lambda y: slow_pole_potential(y) - reference_potential(y) + h, -Y, 0.0)
    expected = expit(Y) - 0.5 / (1 - yh)
    # the crossing is resolved to within one cell, where the slope moves by dy * F''
    tol = 2 * (2 * Y / (n - 1)) * 0.5 / (1 - yh) ** 2
    assert abs(cutoff_mass(F, h) - expected) <= tol


def test_cutoff_mass_increases_to_one():
    F = ToricPotential1D.from_callable(slow_pole_potential, y_grid(1e6, 65537))
    m = [cutoff_mass(F, h) for h in range(9)]
    assert all(b >= a for a, b in zip(m, m[1:]))
    assert 1 - m[-1] < 1e-6


def test_truncated_slope_range_has_deficit():
    F = ToricPotential1D.from_callable(truncated_slope_potential(), y_grid(60.0, 8193))
    assert not has_full_mass(F)
    m = [cutoff_mass(F, h) for h in (0, 5, 20, 80)]
    assert all(b >= a for a, b in zip(m, m[1:]))
    assert m[-1] == pytest.approx(0.5, abs=1e-6)
    assert has_full_mass(ToricPotential1D.from_callable(reference_potential, y_grid(30.0, 1025)))


@given(seed=seeds, kind=kinds, hs=st.lists(st.floats(0, 50), min_size=2, max_size=6))
def test_cutoff_mass_monotone(seed, kind, hs):
    F = random_potential(seed, kind, 512)
    lower = ToricPotential1D.from_values(F.values - 3.0, F.grid)
    m = [cutoff_mass(lower, h) for h in sorted(hs)]
    assert all(b >= a - 1e-15 for a, b in zip(m, m[1:]))


# -- pushforward -------------------------------------------------------------------

def test_pushforward_examples():
    c = moment_pushforward(REF, lambda y: np.full_like(y, 2.5))
    np.testing.assert_array_equal(c.values, 2.5)
    g = moment_pushforward(REF, lambda y: y, moment_grid(101, "midpoint"))
    x = g.polytope.axes[0]
    np.testing.assert_allclose(g.values, logit(x), atol=5e-3)


def test_pushforward_consistency_refines():
    errs = []
    for n in (1024, 4096):
        F = ToricPotential1D.from_callable(logistic_mixture(7)[0], y_grid(resolution=n))
        h = np.cos
        a = integrate_against_ma(h, F)
        b = float(np.sum(moment_pushforward(F, h).values * moment_grid(n, "midpoint").weights))
        errs.append(abs(a - b))
    assert errs[1] < errs[0] and errs[1] <= 1e-3


def test_pushforward_flat_stretch():
    G = interval(-2, 2, 41)
    F = ToricPotential1D.from_callable(lambda y: np.maximum(0.0, 0.5 * y), G)
    with pytest.raises(InversionError) as err:
        moment_pushforward(F, lambda y: y)
    assert err.value.location is not None


# -- averages ---------------------------------------------------------------------

def test_average_examples():
    assert np.array_equal(average_potential(REF, REF).values, REF.values)
    G = interval(0.0, 0.5, 201)
    a = ToricPotential1D.from_callable(lambda y: y**2 / 2, G)
    b = ToricPotential1D.from_callable(lambda y: y**2, G)
    avg = average_potential(a, b)
    np.testing.assert_allclose(avg.values, 0.75 * G.axes[0] ** 2, rtol=1e-15)
    P = interval(0.0, 0.75, 61)
    x = P.axes[0]
    # dual of a sampled quadratic is exact at grid slopes, off by at most dy^2 * 3/8 in between
    np.testing.assert_allclose(avg.dual(P).values, x**2 / 3, atol=0.375 * G.spacing**2 + 1e-15)
    with pytest.raises(ValueError):
        average_potential(REF, a)


@given(s0=seeds, s1=seeds, kind=kinds)
def test_average_ma_inequality(s0, s1, kind):
    F0 = random_potential(s0, kind, 512)
    F1 = random_potential(s1, "smooth", 512)
    avg = average_potential(F0, F1)
    assert np.all(2 * ma_measure(avg).masses >= ma_measure(F0).masses - 1e-12)


# -- continuity along decreasing sequences ---------------------------------------------

@given(seed=seeds, kind=kinds)
def test_ma_and_energy_continuity(seed, kind):
    F = random_potential(seed, kind, 512)
    top = F.F_ref + 1.0
    w = power_weight(0.5)
    cdf_err, e_err = [], []
    base = ma_measure(F)
    for k in range(1, 9):
        c = 2.0 ** (-4 * k)
        Fk = ToricPotential1D.from_values(F.values + c * (top - F.values), F.grid)
        mk = ma_measure(Fk)
        cdf_err.append(np.max(np.abs(mk.cdf(F.y) - base.cdf(F.y))))
        e_err.append(abs(energy_E_psi(Fk, w) - energy_E_psi(F, w)))
    assert cdf_err[-1] <= 1e-8
    assert e_err[-1] <= 1e-3 * max(1.0, energy_E_psi(F, w))
