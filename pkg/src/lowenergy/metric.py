"""Weak quasi-norms and the d_psi metric in the toric model.

On the polytope side a potential is its Legendre dual phi, geodesics are
affine in phi, the rooftop envelope P(u, v) is dual to max(phi_u, phi_v),
and d_psi(u0, u1) is the integral of psi(phi_0 - phi_1) against Lebesgue
measure. The X-side helpers evaluate the same quantities through
Monge-Ampere measures on the log-coordinate grid, as an independent route.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .convex import VERIFIED, GridFunction, Polytope, conjugate_1d, integrate
from .toric1d import DiscreteMeasure, ToricPotential1D, moment_grid, slope_jumps
from .weights import Weight

__all__ = [
    "ZERO_DIFF_RTOL",
    "UnboundedNormError",
    "OrderingError",
    "QuasiNormProblem",
    "quasi_norm",
    "quasi_norm_values",
    "d_psi_dual",
    "d_hat_psi",
    "MetricPair",
    "GeodesicEvaluation",
    "d_psi_x",
    "i_psi",
    "rooftop_dual",
    "geodesic_dual",
    "check_triangle",
    "SandwichReport",
    "check_sandwich",
    "psi_distance_arrays",
]

ZERO_DIFF_RTOL = 1e-14
BISECTION_STEPS = 60
MAX_DOUBLINGS = 200


class UnboundedNormError(ArithmeticError):
    pass


class OrderingError(ValueError):
    pass


# -- quasi-norm ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class QuasiNormProblem:
    """``inf {N > 0 : sum_i psi(f_i / N) m_i <= 1}`` for a discrete measure."""

    f: np.ndarray
    masses: np.ndarray
    weight: Weight
    tolerance: float = 1e-10

    def __post_init__(self):
        f = np.asarray(self.f, dtype=np.float64).ravel()
        m = np.asarray(self.masses, dtype=np.float64).ravel()
        if f.shape != m.shape:
            raise ValueError("f and masses must have the same size")
        if not np.all(np.isfinite(f)):
            raise ValueError("f must be finite")
        if np.any(m < 0) or not m.sum() > 0:
            raise ValueError("measure needs nonnegative masses and positive total mass")
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "masses", m)

    @classmethod
    def on_measure(cls, f, mu: DiscreteMeasure, weight: Weight, tolerance: float = 1e-10):
        return cls(f, mu.masses, weight, tolerance)

    @classmethod
    def on_polytope(cls, f: GridFunction, weight: Weight, tolerance: float = 1e-10):
        return cls(f.values, f.polytope.weights, weight, tolerance)


def quasi_norm(problem: QuasiNormProblem) -> float:
    """Bisection on N for the monotone map N -> sum psi(f / N) dmu.

    The bracket starts at [1e-30, 1]; the upper end is doubled until the
    integral drops to <= 1 (or halved down while it already does), then 60
    bisection steps are taken on a factor-2 bracket, well below the
    configured relative tolerance.
    """
    m = problem.masses
    f = np.abs(problem.f)
    # zero atoms contribute psi(0) = 0 for every N
    keep = (m > 0) & (f > 0)
    f = f[keep]
    m = m[keep] / problem.weight.divisor
    if f.size == 0:
        return 0.0
    profile = problem.weight.profile

    def mass(N):
        # f / N is finite and positive here, so the profile is called directly
        return float(np.dot(profile(f / N), m))

    hi = 1.0
    if mass(hi) > 1.0:
        for _ in range(MAX_DOUBLINGS):
            hi *= 2.0
            if mass(hi) <= 1.0:
                break
        else:
            raise UnboundedNormError("no N with integral <= 1 after 200 doublings")
    else:
        while hi > 1e-30 and mass(hi) <= 1.0:
            hi *= 0.5
        if mass(hi) <= 1.0:
            return hi
        hi *= 2.0
    lo = 0.5 * hi
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if mass(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    return hi


def quasi_norm_values(f, masses, weight: Weight, tolerance: float = 1e-10) -> float:
    return quasi_norm(QuasiNormProblem(f, masses, weight, tolerance))


# -- polytope side -------------------------------------------------------------

def _check_pair(phi0: GridFunction, phi1: GridFunction):
    if phi0.polytope != phi1.polytope:
        raise ValueError("grid mismatch")


def _is_zero_diff(a: np.ndarray, b: np.ndarray) -> bool:
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    return float(np.max(np.abs(a - b))) <= ZERO_DIFF_RTOL * scale


def psi_distance_arrays(a: np.ndarray, b: np.ndarray, quad: np.ndarray, w: Weight) -> np.ndarray:
    """Batched d_psi over leading axes; trailing axes match ``quad``.

    Applies the same zero-difference rule as :func:`d_psi_dual`.
    """
    nd = quad.ndim
    axes = tuple(range(-nd, 0))
    diff = a - b
    out = np.sum(w(diff) * quad, axis=axes)
    scale = np.maximum(np.max(np.abs(a), axis=axes), np.max(np.abs(b), axis=axes))
    zero = np.max(np.abs(diff), axis=axes) <= ZERO_DIFF_RTOL * scale
    return np.where(zero, 0.0, out)


def d_psi_dual(phi0: GridFunction, phi1: GridFunction, w: Weight) -> float:
    """Integral of psi(phi_0 - phi_1) over the polytope."""
    _check_pair(phi0, phi1)
    if _is_zero_diff(phi0.values, phi1.values):
        return 0.0
    return integrate(phi0.with_values(w(phi0.values - phi1.values)))


def d_hat_psi(phi0: GridFunction, phi1: GridFunction, w: Weight, tolerance: float = 1e-10) -> float:
    """Quasi-norm of phi_1 - phi_0 against Lebesgue measure on the polytope."""
    _check_pair(phi0, phi1)
    if _is_zero_diff(phi0.values, phi1.values):
        return 0.0
    return quasi_norm(QuasiNormProblem(phi1.values - phi0.values, phi0.polytope.weights, w, tolerance))


def rooftop_dual(phi0: GridFunction, phi1: GridFunction) -> GridFunction:
    """Dual of the rooftop envelope P(u0, u1): the pointwise max of duals."""
    _check_pair(phi0, phi1)
    flag = VERIFIED if phi0.convex_flag == phi1.convex_flag == VERIFIED else phi0.convex_flag
    return phi0.with_values(np.maximum(phi0.values, phi1.values), flag)


def geodesic_dual(phi0: GridFunction, phi1: GridFunction, t: float) -> GridFunction:
    _check_pair(phi0, phi1)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t={t} outside [0, 1]")
    flag = VERIFIED if phi0.convex_flag == phi1.convex_flag == VERIFIED else phi0.convex_flag
    return phi0.with_values((1.0 - t) * phi0.values + t * phi1.values, flag)


def check_triangle(phi0: GridFunction, phi1: GridFunction, phi2: GridFunction, w: Weight) -> float:
    """Signed slack d(0, 2) - d(0, 1) - d(1, 2); nonpositive for a metric."""
    return d_psi_dual(phi0, phi2, w) - d_psi_dual(phi0, phi1, w) - d_psi_dual(phi1, phi2, w)


# -- X side --------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MetricPair:
    """Two potentials in dual form on a common moment grid, together with the
    log-coordinate grid used for X-side evaluation.

    ``u(t)`` is the geodesic L((1 - t) phi_0 + t phi_1) on the y-grid. Its
    t-derivative is exact for the discrete model: at a node y with maximizing
    moment node x*, d/dt u_t(y) = (phi_0 - phi_1)(x*).
    """

    phi0: GridFunction
    phi1: GridFunction
    ygrid: Polytope | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        _check_pair(self.phi0, self.phi1)

    @classmethod
    def from_potentials(cls, F0: ToricPotential1D, F1: ToricPotential1D, P: Polytope | None = None):
        if F0.grid != F1.grid:
            raise ValueError("grid mismatch")
        P = moment_grid(F0.grid.resolution) if P is None else P
        return cls(F0.dual(P), F1.dual(P), F0.grid)

    @property
    def polytope(self) -> Polytope:
        return self.phi0.polytope

    def u(self, t: float):
        """(values, argmax, jumps) of the geodesic at time t on the y-grid."""
        key = float(t)
        if key not in self._cache:
            phit = (1.0 - t) * self.phi0.values + t * self.phi1.values
            y = self.ygrid.axes[0]
            vals, arg = conjugate_1d(self.polytope.axes[0], phit, y)
            self._cache[key] = (vals, arg, slope_jumps(y, vals))
        return self._cache[key]

    def potential(self, t: float) -> ToricPotential1D:
        vals, _, _ = self.u(t)
        return ToricPotential1D(GridFunction(self.ygrid, vals, VERIFIED))

    def velocity(self, t: float) -> np.ndarray:
        _, arg, _ = self.u(t)
        return (self.phi0.values - self.phi1.values)[arg]

    def ma(self, t: float) -> DiscreteMeasure:
        _, _, jumps = self.u(t)
        return DiscreteMeasure(self.ygrid.axes[0][1:-1], jumps)

    def d_dual(self, w: Weight) -> float:
        return d_psi_dual(self.phi0, self.phi1, w)

    def d_hat(self, w: Weight) -> float:
        return d_hat_psi(self.phi0, self.phi1, w)

    def d_x(self, w: Weight, t: float = 0.0) -> float:
        """Integral of psi(du_t/dt) against MA(u_t)."""
        if _is_zero_diff(self.phi0.values, self.phi1.values):
            return 0.0
        _, _, jumps = self.u(t)
        return float(np.sum(w(self.velocity(t)[1:-1]) * jumps))

    def d_hat_x(self, w: Weight, t: float = 0.0) -> float:
        if _is_zero_diff(self.phi0.values, self.phi1.values):
            return 0.0
        _, _, jumps = self.u(t)
        return quasi_norm_values(self.velocity(t)[1:-1], jumps, w)


@dataclass(frozen=True)
class GeodesicEvaluation:
    dual: float
    x_side: dict

    @property
    def max_rel_error(self) -> float:
        if self.dual == 0.0:
            return max(abs(v) for v in self.x_side.values())
        return max(abs(v - self.dual) for v in self.x_side.values()) / abs(self.dual)


GEODESIC_TIMES = (0.0, 0.25, 0.5, 0.75, 1.0)


def d_psi_x(F0: ToricPotential1D, F1: ToricPotential1D, w: Weight, P: Polytope | None = None,
            times=GEODESIC_TIMES) -> GeodesicEvaluation:
    """d_psi of two X-side potentials, dual-side and along the geodesic.

    The duals phi_i = L(F_i) give the polytope integral; the X-side values
    integrate psi of the geodesic velocity against MA(u_t) at each t.
    """
    pair = MetricPair.from_potentials(F0, F1, P)
    return GeodesicEvaluation(pair.d_dual(w), {float(t): pair.d_x(w, t) for t in times})


def i_psi(F0: ToricPotential1D, F1: ToricPotential1D, w: Weight) -> float:
    """Integral of psi(u0 - u1) against MA(u0) + MA(u1); F_ref cancels."""
    if F0.grid != F1.grid:
        raise ValueError("grid mismatch")
    y = F0.y
    g = w((F0.values - F1.values)[1:-1])
    return float(np.sum(g * slope_jumps(y, F0.values)) + np.sum(g * slope_jumps(y, F1.values)))


@dataclass(frozen=True)
class SandwichReport:
    """Sandwich terms for u <= v.

    ``d`` and ``d_end`` are the geodesic integrals at t = 0 and t = 1. They
    agree up to discretization error; each inequality is compared with the
    slice on which it holds exactly for the discrete model (the velocity at
    t = 0 is at most v - u, the velocity at t = 1 at least v - u).
    """

    d: float
    A_u: float
    A_v: float
    rtol: float
    d_end: float | None = None

    @property
    def d1(self) -> float:
        return self.d if self.d_end is None else self.d_end

    def _slack(self, *vals) -> float:
        return self.rtol * max(*vals, 1e-300)

    @property
    def lower_u_ok(self) -> bool:
        return 0.25 * self.A_u <= self.d + self._slack(self.d, self.A_u)

    @property
    def lower_v_ok(self) -> bool:
        return self.A_v <= self.d1 + self._slack(self.d1, self.A_v)

    @property
    def lower_ok(self) -> bool:
        return self.lower_u_ok and self.lower_v_ok

    @property
    def upper_ok(self) -> bool:
        return self.d <= self.A_u + self._slack(self.d, self.A_u)

    @property
    def ok(self) -> bool:
        return self.lower_ok and self.upper_ok


def check_sandwich(F_u: ToricPotential1D, F_v: ToricPotential1D, w: Weight, P: Polytope | None = None,
                   rtol: float = 1e-10) -> SandwichReport:
    """max(A_u / 4, A_v) <= d(u, v) <= A_u for u <= v, with
    A_w = integral of psi(v - u) against MA(w).

    Every quantity is evaluated on the grid closures u = L(L(F_u)),
    v = L(L(F_v)), so d is a geodesic integral of the same discrete model
    that defines A_u and A_v.
    """
    if np.any(F_u.values > F_v.values):
        raise OrderingError("check_sandwich needs F_u <= F_v nodewise")
    pair = MetricPair.from_potentials(F_u, F_v, P)
    u, _, ju = pair.u(0.0)
    v, _, jv = pair.u(1.0)
    g = w((v - u)[1:-1])
    return SandwichReport(pair.d_x(w, 0.0), float(np.sum(g * ju)), float(np.sum(g * jv)), rtol,
                          pair.d_x(w, 1.0))
