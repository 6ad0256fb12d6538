"""S^1-invariant potentials on the Riemann sphere in log coordinates.

A potential is a convex function F(y) on a uniform grid over [-Y, Y] whose
slopes lie in the moment interval [0, 1]. The reference potential is
F_ref(y) = log(1 + e^y) and v = F - F_ref is the relative potential. The
Monge-Ampere measure of F is the slope-jump measure of its piecewise-linear
interpolant, one atom per interior node.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import expit, xlogy

from .convex import (
    VERIFIED,
    GridFunction,
    Polytope,
    conjugate_1d,
    interval,
    is_convex,
)
from .weights import Weight

__all__ = [
    "Y_DEFAULT",
    "RESOLUTION_DEFAULT",
    "FULL_MASS_TOL",
    "NonConvexPotentialError",
    "InversionError",
    "DiscreteMeasure",
    "ToricPotential1D",
    "y_grid",
    "moment_grid",
    "reference_potential",
    "reference_dual",
    "slope_jumps",
    "ma_measure",
    "integrate_against_ma",
    "energy_E_psi",
    "canonical_cutoff",
    "cutoff_mass",
    "has_full_mass",
    "moment_pushforward",
    "average_potential",
    "logistic_mixture",
    "slow_pole_potential",
    "truncated_slope_potential",
    "slow_pole_slope",
    "random_symplectic_potential",
]

Y_DEFAULT = 30.0
RESOLUTION_DEFAULT = 4096
FULL_MASS_TOL = 1e-6
SLOPE_TOL = 1e-9


class NonConvexPotentialError(ValueError):
    pass


class InversionError(ValueError):
    """The slope map has a flat stretch inside the requested moment range."""

    def __init__(self, msg, location=None):
        super().__init__(msg)
        self.location = location


def y_grid(Y: float = Y_DEFAULT, resolution: int = RESOLUTION_DEFAULT) -> Polytope:
    return interval(-Y, Y, resolution)


def moment_grid(resolution: int = RESOLUTION_DEFAULT, rule: str = "trapezoid") -> Polytope:
    """The moment interval P = [0, 1]; |P| = V = 1."""
    return interval(0.0, 1.0, resolution, rule)


def reference_potential(y):
    return np.logaddexp(0.0, y)


def reference_dual(x):
    """Legendre dual of F_ref: x log x + (1 - x) log(1 - x) on [0, 1]."""
    return xlogy(x, x) + xlogy(1.0 - x, 1.0 - x)


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    locations: np.ndarray
    masses: np.ndarray
    total_mass: float = field(init=False)

    def __post_init__(self):
        loc = np.array(self.locations, dtype=np.float64)
        m = np.array(self.masses, dtype=np.float64)
        if loc.shape != m.shape or loc.ndim != 1:
            raise ValueError("locations and masses must be matching 1-D arrays")
        if np.any(m < 0):
            raise ValueError("masses must be nonnegative")
        loc.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "total_mass", float(np.sum(m)))

    def cdf(self, points) -> np.ndarray:
        order = np.argsort(self.locations, kind="stable")
        cum = np.concatenate(([0.0], np.cumsum(self.masses[order])))
        idx = np.searchsorted(self.locations[order], np.asarray(points, dtype=np.float64), side="right")
        return cum[idx]

    def restrict(self, mask) -> "DiscreteMeasure":
        mask = np.asarray(mask, dtype=bool)
        return DiscreteMeasure(self.locations[mask], self.masses[mask])

    def integrate(self, h) -> float:
        vals = h(self.locations) if callable(h) else np.asarray(h, dtype=np.float64)
        return float(np.sum(vals * self.masses))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["location", "mass"])
        for a, b in zip(self.locations, self.masses):
            w.writerow([repr(float(a)), repr(float(b))])
        return buf.getvalue()


@dataclass(frozen=True, eq=False)
class ToricPotential1D:
    F: GridFunction

    def __post_init__(self):
        if self.F.dim != 1:
            raise ValueError("toric potentials live on a 1-D grid")
        if self.F.convex_flag != VERIFIED:
            if not is_convex(self.F):
                raise NonConvexPotentialError("potential is not convex on its grid")
            object.__setattr__(self, "F", self.F.with_values(self.F.values, VERIFIED))
        s = self.slopes
        if s.min() < -SLOPE_TOL or s.max() > 1 + SLOPE_TOL:
            raise ValueError(f"slopes [{s.min():.3g}, {s.max():.3g}] leave the moment interval [0, 1]")

    @classmethod
    def from_values(cls, values, grid: Polytope) -> "ToricPotential1D":
        return cls(GridFunction(grid, values))

    @classmethod
    def from_callable(cls, fn: Callable, grid: Polytope | None = None) -> "ToricPotential1D":
        grid = y_grid() if grid is None else grid
        return cls(GridFunction(grid, fn(grid.axes[0])))

    @classmethod
    def from_dual(cls, phi, grid: Polytope | None = None) -> "ToricPotential1D":
        """F = L(phi) on the y-grid, phi a grid function on the moment interval."""
        grid = y_grid() if grid is None else grid
        vals, _ = conjugate_1d(phi.polytope.axes[0], phi.values, grid.axes[0])
        return cls(GridFunction(grid, vals, VERIFIED))

    @property
    def grid(self) -> Polytope:
        return self.F.polytope

    @property
    def y(self) -> np.ndarray:
        return self.F.polytope.axes[0]

    @property
    def values(self) -> np.ndarray:
        return self.F.values

    @property
    def F_ref(self) -> np.ndarray:
        return reference_potential(self.y)

    @property
    def v(self) -> np.ndarray:
        return self.values - self.F_ref

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.y)

    def dual(self, P: Polytope | None = None) -> GridFunction:
        P = moment_grid(self.grid.resolution) if P is None else P
        vals, _ = conjugate_1d(self.y, self.values, P.axes[0])
        return GridFunction(P, vals, VERIFIED)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["y", "F", "v"])
        for a, b, c in zip(self.y, self.values, self.v):
            w.writerow([repr(float(a)), repr(float(b)), repr(float(c))])
        return buf.getvalue()


def slope_jumps(y: np.ndarray, values: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Slope jumps of the PL interpolant at interior nodes.

    Jumps are taken from the running maximum of the chord slopes, so they
    are nonnegative and telescope to ``max(slopes) - slopes[0]``. A slope
    drop larger than ``tol`` (default: rounding level) means the input is
    not convex.
    """
    s = np.diff(values) / np.diff(y)
    run = np.maximum.accumulate(s)
    if tol is None:
        tol = 64 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(values)))) / float(np.min(np.diff(y)))
    drop = run - s
    if drop.size and drop.max() > tol:
        k = int(np.argmax(drop))
        raise NonConvexPotentialError(f"slope drops by {drop[k]:.3e} at y={y[k]:.6g}")
    return np.diff(run)


def ma_measure(F: ToricPotential1D) -> DiscreteMeasure:
    return DiscreteMeasure(F.y[1:-1], slope_jumps(F.y, F.values))


def integrate_against_ma(h, F: ToricPotential1D) -> float:
    """Sum of h(location) * mass over the atoms of MA(F); ``h`` is a callable
    or an array of values at the atoms."""
    return ma_measure(F).integrate(h)


def energy_E_psi(F: ToricPotential1D, w: Weight) -> float:
    v = F.v[1:-1]
    return integrate_against_ma(w(v), F)


def canonical_cutoff(F: ToricPotential1D, h: float) -> ToricPotential1D:
    """max(F_ref - h, F), whose relative potential is max(-h, v)."""
    if h < 0:
        raise ValueError("cutoff level must be >= 0")
    vals = np.maximum(F.F_ref - h, F.values)
    return ToricPotential1D(GridFunction(F.grid, vals))


def cutoff_mass(F: ToricPotential1D, h: float) -> float:
    """Mass of MA(max(v, -h)) on the set {v > -h}.

    The set is taken as its discrete interior (an atom counts when it and
    both neighbours satisfy v > -h), where the cutoff coincides with F. The
    kink of the cutoff sits on {v = -h} and is excluded, as in the continuum.
    """
    mu = ma_measure(canonical_cutoff(F, h))
    above = F.v > -h
    inside = above[1:-1] & above[:-2] & above[2:]
    return float(np.sum(mu.masses[inside]))


def has_full_mass(F: ToricPotential1D, tol: float = FULL_MASS_TOL) -> bool:
    """Toric full-mass test: the slope range fills (0, 1)."""
    s = F.slopes
    return bool(s[0] <= tol and s[-1] >= 1 - tol)


def moment_pushforward(F: ToricPotential1D, h: Callable, P: Polytope | None = None,
                       flat_tol: float = 0.0) -> GridFunction:
    """x -> h((F')^{-1}(x)) on the moment grid.

    Chord slopes are attached to cell midpoints and the slope map is inverted
    by monotone linear interpolation. The default grid is the open midpoint
    grid on (0, 1) so that unbounded h are fine near the poles.
    """
    P = moment_grid(F.grid.resolution, rule="midpoint") if P is None else P
    x = P.axes[0]
    y = F.y
    s = F.slopes
    mid = 0.5 * (y[1:] + y[:-1])
    lo, hi = float(x.min()), float(x.max())
    flat = np.diff(s) <= flat_tol
    overlap = (s[1:] >= lo) & (s[:-1] <= hi)
    bad = np.flatnonzero(flat & overlap)
    if bad.size:
        k = int(bad[0])
        raise InversionError(
            f"slope map is flat near y={y[k + 1]:.6g} (slope {s[k]:.6g}) inside moment range", y[k + 1])
    if s[0] > lo or s[-1] < hi:
        raise InversionError(f"slope range [{s[0]:.3g}, {s[-1]:.3g}] misses moment range [{lo:.3g}, {hi:.3g}]")
    y_of_x = np.interp(x, np.maximum.accumulate(s), mid)
    return GridFunction(P, np.broadcast_to(np.asarray(h(y_of_x), dtype=np.float64), x.shape))


def average_potential(F0: ToricPotential1D, F1: ToricPotential1D) -> ToricPotential1D:
    if F0.grid != F1.grid:
        raise ValueError("grid mismatch")
    return ToricPotential1D(GridFunction(F0.grid, 0.5 * (F0.values + F1.values)))


# -- analytic families ---------------------------------------------------------

def logistic_mixture(seed, n_terms: int = 3):
    """Random smooth full-mass potential sum_j c_j softplus(k_j y + b_j) / k_j.

    Returns ``(F, F'')`` as callables. Weights c_j sum to one, so slopes fill
    (0, 1) and v = F - F_ref stays bounded.
    """
    rng = np.random.default_rng(seed)
    c = rng.dirichlet(np.ones(n_terms))
    k = rng.uniform(0.3, 3.0, n_terms)
    b = rng.uniform(-3.0, 3.0, n_terms)

    def F(y):
        y = np.asarray(y, dtype=np.float64)[..., None]
        return np.sum(c * np.logaddexp(0.0, k * y + b) / k, axis=-1)

    def F2(y):
        y = np.asarray(y, dtype=np.float64)[..., None]
        s = expit(k * y + b)
        return np.sum(c * k * s * (1 - s), axis=-1)

    return F, F2


def slow_pole_potential(y):
    """Full-mass potential with v -> -inf at y -> -inf.

    Slope 1 / (2 (1 - y)) on y <= 0 (not integrable against dy, so v diverges
    like -log|y| / 2) glued to F_ref on y >= 0.
    """
    y = np.asarray(y, dtype=np.float64)
    left = np.log(2.0) - 0.5 * np.log1p(-np.minimum(y, 0.0))
    return np.where(y <= 0, left, reference_potential(y))


def slow_pole_slope(y):
    y = np.asarray(y, dtype=np.float64)
    return np.where(y <= 0, 0.5 / (1.0 - np.minimum(y, 0.0)), expit(y))


def truncated_slope_potential(lo: float = 0.25, hi: float = 0.75):
    """Potential with slope range (lo, hi): mass hi - lo < 1."""

    def F(y):
        return lo * np.asarray(y, dtype=np.float64) + (hi - lo) * reference_potential(y)

    return F


def random_symplectic_potential(seed, kind: str = "smooth"):
    """Random dual potential x -> x log x + (1 - x) log(1 - x) + g(x) on [0, 1].

    ``g`` is a bounded convex perturbation, smooth (quadratic plus a scaled
    softplus) or kinked (quadratic plus a max of affine pieces). Returns a
    callable that can be sampled at any resolution.
    """
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.0, 2.0)
    b = rng.uniform(-2.0, 2.0)
    e = rng.uniform(-1.0, 1.0)
    c = rng.uniform(0.1, 0.9)
    if kind == "smooth":
        kappa = rng.uniform(0.0, 2.0)
        tau = rng.uniform(0.05, 0.3)
        c2 = rng.uniform(0.1, 0.9)

        def g(x):
            return a * (x - c) ** 2 + b * x + e + kappa * tau * np.logaddexp(0.0, (x - c2) / tau)
    elif kind == "kinked":
        k = int(rng.integers(2, 5))
        slopes = rng.uniform(-3.0, 3.0, k)
        offs = rng.uniform(-0.5, 0.5, k)

        def g(x):
            x = np.asarray(x, dtype=np.float64)
            return a * (x - c) ** 2 + e + np.max(slopes * x[..., None] + offs, axis=-1)
    else:
        raise ValueError(f"unknown family {kind!r}")

    def phi(x):
        return reference_dual(x) + g(x)

    phi.perturbation = g
    return phi
