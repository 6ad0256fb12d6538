"""Grid-sampled convex functions on boxes of dimension 1 and 2.

Covers the discrete lower convex envelope, the discrete Legendre-Fenchel
transform (exact max over grid nodes), tensor quadrature and seeded random
convex generators.
"""
from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.spatial import ConvexHull, QhullError

__all__ = [
    "M_CLIP",
    "VERIFIED",
    "UNKNOWN",
    "NONCONVEX",
    "DualRangeWarning",
    "LegendreConsistencyError",
    "Polytope",
    "GridFunction",
    "interval",
    "box",
    "lower_hull_1d",
    "is_convex",
    "convexify",
    "conjugate_1d",
    "default_dual_grid",
    "legendre_1d",
    "legendre_2d",
    "integrate",
    "random_convex",
]

M_CLIP = 1e8

VERIFIED = "verified-convex"
UNKNOWN = "unknown"
NONCONVEX = "non-convex"


class DualRangeWarning(UserWarning):
    """The dual grid does not cover the slope range of the input."""


class LegendreConsistencyError(RuntimeError):
    """Separable and brute-force transforms disagree."""


@dataclass(frozen=True)
class Polytope:
    """Axis-aligned box with a uniform tensor grid and quadrature rule.

    ``rule="trapezoid"`` puts nodes on the closed box; ``rule="midpoint"``
    uses cell centres, so integrands may blow up on the boundary.
    """

    bounds: tuple[tuple[float, float], ...]
    resolution: int
    rule: str = "trapezoid"

    def __post_init__(self):
        b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        object.__setattr__(self, "bounds", b)
        if len(b) not in (1, 2):
            raise ValueError("only dimensions 1 and 2 are supported")
        if any(not hi > lo for lo, hi in b):
            raise ValueError(f"degenerate bounds {b}")
        if self.rule not in ("trapezoid", "midpoint"):
            raise ValueError(f"unknown quadrature rule {self.rule!r}")
        if self.resolution < 2:
            raise ValueError("resolution must be >= 2")

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.resolution,) * self.dim

    @property
    def volume(self) -> float:
        return math.prod(hi - lo for lo, hi in self.bounds)

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        out = []
        for lo, hi in self.bounds:
            n = self.resolution
            if self.rule == "trapezoid":
                ax = np.linspace(lo, hi, n)
            else:
                h = (hi - lo) / n
                ax = lo + h * (np.arange(n) + 0.5)
            ax.setflags(write=False)
            out.append(ax)
        return tuple(out)

    @property
    def spacing(self) -> float:
        n = self.resolution - 1 if self.rule == "trapezoid" else self.resolution
        return max((hi - lo) / n for lo, hi in self.bounds)

    @cached_property
    def weights(self) -> np.ndarray:
        ws = []
        for lo, hi in self.bounds:
            n = self.resolution
            if self.rule == "trapezoid":
                h = (hi - lo) / (n - 1)
                w = np.full(n, h)
                w[0] = w[-1] = 0.5 * h
            else:
                w = np.full(n, (hi - lo) / n)
            ws.append(w)
        out = ws[0] if self.dim == 1 else np.outer(ws[0], ws[1])
        out.setflags(write=False)
        return out

    @cached_property
    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.axes, indexing="ij"))

    def points(self) -> np.ndarray:
        return np.stack([m.ravel() for m in self.mesh], axis=1)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "bounds": [list(b) for b in self.bounds],
                "resolution": self.resolution, "rule": self.rule}

    @classmethod
    def from_dict(cls, d: dict) -> "Polytope":
        return cls(tuple(tuple(b) for b in d["bounds"]), int(d["resolution"]), d.get("rule", "trapezoid"))


def interval(a: float, b: float, resolution: int, rule: str = "trapezoid") -> Polytope:
    return Polytope(((a, b),), resolution, rule)


def box(bounds, resolution: int, rule: str = "trapezoid") -> Polytope:
    return Polytope(tuple(bounds), resolution, rule)


@dataclass(frozen=True, eq=False)
class GridFunction:
    polytope: Polytope
    values: np.ndarray = field(repr=False)
    convex_flag: str = UNKNOWN

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.shape != self.polytope.shape:
            raise ValueError(f"values shape {v.shape} != grid shape {self.polytope.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, polytope: Polytope, fn: Callable, clip: float = M_CLIP, convex_flag: str = UNKNOWN):
        """Sample ``fn`` on the grid, capping magnitudes (and infinities) at ``clip``."""
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            v = np.asarray(fn(*polytope.mesh), dtype=np.float64)
        v = np.broadcast_to(v, polytope.shape)
        v = np.where(np.isnan(v), clip, v)
        v = np.clip(v, -clip, clip)
        return cls(polytope, v, convex_flag)

    @property
    def dim(self) -> int:
        return self.polytope.dim

    def with_values(self, values, convex_flag: str = UNKNOWN) -> "GridFunction":
        return GridFunction(self.polytope, values, convex_flag)

    def __neg__(self):
        return self.with_values(-self.values)

    def sup_distance(self, other: "GridFunction") -> float:
        _check_same_grid(self, other)
        return float(np.max(np.abs(self.values - other.values)))

    def to_json(self) -> str:
        return json.dumps({"polytope": self.polytope.to_dict(), "convex_flag": self.convex_flag,
                           "values": self.values.ravel().tolist()})

    @classmethod
    def from_json(cls, s: str) -> "GridFunction":
        d = json.loads(s)
        p = Polytope.from_dict(d["polytope"])
        return cls(p, np.asarray(d["values"], dtype=np.float64).reshape(p.shape), d.get("convex_flag", UNKNOWN))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = ["x"] if self.dim == 1 else ["x1", "x2"]
        w.writerow(cols + ["value"])
        for row, val in zip(self.polytope.points(), self.values.ravel()):
            w.writerow([repr(float(c)) for c in row] + [repr(float(val))])
        return buf.getvalue()


def _check_same_grid(f: GridFunction, g: GridFunction):
    if f.polytope != g.polytope:
        raise ValueError("grid mismatch")


# -- convexity ---------------------------------------------------------------

def lower_hull_1d(x: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Indices of the lower convex hull vertices of the points (x_i, f_i).

    ``x`` must be strictly increasing. Collinear points are dropped.
    """
    n = len(x)
    if n <= 2:
        return np.arange(n)
    s = np.diff(f) / np.diff(x)
    if np.all(np.diff(s) > 0):
        return np.arange(n)
    hull = [0, 1]
    for i in range(2, n):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # drop b unless it lies strictly below the chord a -> i
            if (f[b] - f[a]) * (x[i] - x[a]) < (f[i] - f[a]) * (x[b] - x[a]):
                break
            hull.pop()
        hull.append(i)
    return np.asarray(hull)


def _convex_tol(f: GridFunction, rtol: float) -> float:
    return rtol * max(1.0, float(np.max(np.abs(f.values))))


def is_convex(f: GridFunction, rtol: float = 1e-10) -> bool:
    """Dim 1: nondecreasing chord slopes. Dim 2: f sits on its lower hull.

    Both tests allow an absolute value slack of ``rtol * max(1, |f|_inf)``.
    """
    tol = _convex_tol(f, rtol)
    if f.dim == 1:
        dx = np.diff(f.polytope.axes[0])
        s = np.diff(f.values) / dx
        # a value perturbation of size tol moves a slope jump by at most 4 tol / dx
        return bool(np.all(np.diff(s) >= -4 * tol / dx.min()))
    return bool(np.max(f.values - _lower_envelope_2d(f)) <= tol)


def _lower_envelope_2d(f: GridFunction) -> np.ndarray:
    pts = f.polytope.points()
    z = f.values.ravel()
    try:
        hull = ConvexHull(np.column_stack([pts, z]))
    except QhullError:
        # all points coplanar: f is affine
        A = np.column_stack([pts, np.ones(len(pts))])
        coef, *_ = np.linalg.lstsq(A, z, rcond=None)
        return (A @ coef).reshape(f.polytope.shape)
    eq = hull.equations
    lower = eq[eq[:, 2] < -1e-12]
    # facet planes as z = a.x + b
    a = -lower[:, :2] / lower[:, 2:3]
    b = -lower[:, 3] / lower[:, 2]
    out = np.full(len(pts), -np.inf)
    for start in range(0, len(lower), 512):
        sl = slice(start, start + 512)
        out = np.maximum(out, (pts @ a[sl].T + b[sl]).max(axis=1))
    return np.minimum(out, z).reshape(f.polytope.shape)


def convexify(f: GridFunction) -> GridFunction:
    """Largest grid-convex minorant: the lower hull of the sampled graph
    evaluated back on the grid."""
    if f.dim == 1:
        x = f.polytope.axes[0]
        idx = lower_hull_1d(x, f.values)
        vals = np.interp(x, x[idx], f.values[idx])
        vals = np.minimum(vals, f.values)
    else:
        vals = _lower_envelope_2d(f)
    return f.with_values(vals, VERIFIED)


# -- Legendre transform ------------------------------------------------------

def conjugate_1d(x: np.ndarray, f: np.ndarray, y: np.ndarray):
    """Exact discrete conjugate ``max_i (x_i y - f_i)`` at every y.

    Returns ``(values, argmax)``; the argmax is the first maximizing node.
    Works for any input: the max over nodes only sees the lower hull.
    """
    hull = lower_hull_1d(x, f)
    xh, fh = x[hull], f[hull]
    s = np.diff(fh) / np.diff(xh)
    # vertex j maximizes iff s[j-1] <= y <= s[j]; side="left" picks the first
    j = np.searchsorted(s, y, side="left")
    vals = xh[j] * y - fh[j]
    return vals, hull[j]


def default_dual_grid(f: GridFunction) -> Polytope:
    """Box covering the slope range of f, widened by 1%, same resolution."""
    bounds = []
    for axis in range(f.dim):
        x = f.polytope.axes[axis]
        s = np.diff(f.values, axis=axis) / np.diff(x).reshape([-1 if k == axis else 1 for k in range(f.dim)])
        lo, hi = float(s.min()), float(s.max())
        mag = max(1.0, abs(lo), abs(hi))
        # an affine f has a slope range of rounding width only
        pad = 0.01 * (hi - lo) if hi - lo > 1e-8 * mag else 0.01 * mag
        bounds.append((lo - pad, hi + pad))
    return Polytope(tuple(bounds), f.polytope.resolution)


def _warn_range(f: GridFunction, dual: Polytope):
    for axis in range(f.dim):
        x = f.polytope.axes[axis]
        s = np.diff(f.values, axis=axis) / np.diff(x).reshape([-1 if k == axis else 1 for k in range(f.dim)])
        lo, hi = dual.bounds[axis]
        smin, smax = float(s.min()), float(s.max())
        # chord slopes carry rounding of order eps |f| / h
        slack = 16 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(f.values)))) / float(np.min(np.diff(x)))
        if smin < lo - slack or smax > hi + slack:
            warnings.warn(
                f"dual grid axis {axis} [{lo:g}, {hi:g}] does not cover slope range "
                f"[{smin:g}, {smax:g}]; transform is clipped to the grid",
                DualRangeWarning, stacklevel=3)


def legendre_1d(f: GridFunction, dual_grid: Polytope | None = None, warn: bool = True) -> GridFunction:
    if f.dim != 1:
        raise ValueError("legendre_1d needs a 1-D grid function")
    dual = default_dual_grid(f) if dual_grid is None else dual_grid
    if warn:
        _warn_range(f, dual)
    vals, _ = conjugate_1d(f.polytope.axes[0], f.values, dual.axes[0])
    return GridFunction(dual, vals, VERIFIED)


def _legendre_2d_brute(f: GridFunction, dual: Polytope) -> np.ndarray:
    X = f.polytope.points()
    fv = f.values.ravel()
    Yp = dual.points()
    out = np.empty(len(Yp))
    for start in range(0, len(Yp), 256):
        sl = slice(start, start + 256)
        out[sl] = (Yp[sl] @ X.T - fv).max(axis=1)
    return out.reshape(dual.shape)


def _legendre_2d_separable(f: GridFunction, dual: Polytope) -> np.ndarray:
    x1, x2 = f.polytope.axes
    y1, y2 = dual.axes
    # g(y1, x2) = max_x1 (x1 y1 - f(x1, x2))
    g = np.empty((len(y1), len(x2)))
    for k in range(len(x2)):
        g[:, k], _ = conjugate_1d(x1, f.values[:, k], y1)
    # L f(y1, y2) = max_x2 (x2 y2 - (-g(y1, x2)))
    out = np.empty((len(y1), len(y2)))
    for i in range(len(y1)):
        out[i], _ = conjugate_1d(x2, -g[i], y2)
    return out


def legendre_2d(f: GridFunction, dual_grid: Polytope | None = None, method: str = "separable",
                check: bool = False, rtol: float = 1e-12, warn: bool = True) -> GridFunction:
    """Discrete Legendre transform on a box, one axis at a time.

    With ``check=True`` the result is compared against the O(N^2)-per-node
    brute force and a :class:`LegendreConsistencyError` is raised on mismatch.
    """
    if f.dim != 2:
        raise ValueError("legendre_2d needs a 2-D grid function")
    dual = default_dual_grid(f) if dual_grid is None else dual_grid
    if warn:
        _warn_range(f, dual)
    if method == "brute":
        vals = _legendre_2d_brute(f, dual)
    elif method == "separable":
        vals = _legendre_2d_separable(f, dual)
        if check:
            ref = _legendre_2d_brute(f, dual)
            scale = max(1.0, float(np.max(np.abs(ref))), float(np.max(np.abs(f.values))))
            err = float(np.max(np.abs(vals - ref)))
            if err > rtol * scale * 16:
                raise LegendreConsistencyError(f"separable vs brute-force mismatch {err:.3e}")
    else:
        raise ValueError(f"unknown method {method!r}")
    # samples of a max of affine functions lie on their own lower hull
    return GridFunction(dual, vals, VERIFIED)


def legendre(f: GridFunction, dual_grid: Polytope | None = None, warn: bool = True) -> GridFunction:
    return legendre_1d(f, dual_grid, warn) if f.dim == 1 else legendre_2d(f, dual_grid, warn=warn)


# -- quadrature and generators ----------------------------------------------

def integrate(f) -> float:
    """Quadrature of a GridFunction (or raw values paired with a polytope)."""
    if isinstance(f, GridFunction):
        return float(np.sum(f.values * f.polytope.weights))
    values, polytope = f
    return float(np.sum(np.asarray(values) * polytope.weights))


def random_convex(seed, polytope: Polytope, roughness: float = 1.0, verify: bool = True) -> GridFunction:
    """Seeded random convex function on the grid.

    Dim 1 integrates a sorted random slope sequence; dim 2 takes the max of
    ``1 + round(8 * roughness)`` random affine functions. ``roughness=0``
    gives an affine function in both cases.
    """
    rng = np.random.default_rng(seed)
    if polytope.dim == 1:
        x = polytope.axes[0]
        n = len(x)
        base = rng.normal()
        slopes = base + roughness * np.sort(rng.normal(size=n - 1))
        vals = np.concatenate(([0.0], np.cumsum(slopes * np.diff(x)))) + rng.normal()
    else:
        k = 1 + int(round(8 * roughness))
        grads = rng.normal(size=(k, 2))
        offs = rng.normal(size=k) * (roughness if k > 1 else 1.0)
        X1, X2 = polytope.mesh
        vals = np.max(grads[:, 0, None, None] * X1 + grads[:, 1, None, None] * X2 + offs[:, None, None], axis=0)
    f = GridFunction(polytope, vals, UNKNOWN)
    if verify:
        return f.with_values(f.values, VERIFIED if is_convex(f) else NONCONVEX)
    return f
