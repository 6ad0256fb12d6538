"""Concave and convex energy weights.

A weight is an even function psi: R -> [0, inf) with psi(0) = 0 that grows
without bound. The metric layer only ever evaluates weights, so a weight is
just a named, vectorized evaluation rule plus metadata.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "WeightDomainError",
    "Weight",
    "SubadditivityReport",
    "Classification",
    "power_weight",
    "log_weight",
    "mix_weight",
    "builtin_weights",
    "parse_weight",
    "eval_weight",
    "scale",
    "check_subadditive",
    "check_weight_axioms",
    "classify_weight",
    "log_grid",
]

W_MINUS = "W-minus"
W_PLUS = "W-plus"
OTHER = "other"

DEFAULT_GROWTH_CHECKS = ((1e6, 10.0), (1e12, 20.0))


class WeightDomainError(ValueError):
    """Raised when a weight is evaluated at a non-finite argument."""


@dataclass(frozen=True)
class Weight:
    name: str
    profile: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    parameter: float | None = None
    declared_class: str = W_MINUS
    divisor: float = 1.0

    def __call__(self, t):
        return eval_weight(self, t)

    @property
    def spec(self) -> str:
        """String form accepted by :func:`parse_weight` (ignores scaling)."""
        return self.name


def eval_weight(w: Weight, t):
    """Evaluate ``psi(|t|)``; scalar in, float out, array in, array out."""
    arr = np.asarray(t, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise WeightDomainError(f"weight {w.name!r} evaluated at non-finite argument")
    a = np.abs(arr)
    out = w.profile(a)
    # psi(0) = 0 exactly, independent of profile rounding
    out = np.where(a == 0.0, 0.0, out)
    if w.divisor != 1.0:
        out = out / w.divisor
    if np.ndim(arr) == 0:
        return float(out)
    return out


def _pow_profile(p: float):
    def profile(a):
        return np.power(a, p)

    return profile


def power_weight(p: float) -> Weight:
    if not p > 0:
        raise ValueError("power weight needs p > 0")
    cls = W_MINUS if p <= 1 else W_PLUS
    return Weight(f"pow:{p:g}", _pow_profile(float(p)), float(p), cls)


def log_weight() -> Weight:
    return Weight("log", np.log1p, None, W_MINUS)


def _mix_profile(a):
    # sqrt(1+a) - 1 without cancellation near 0
    return a / (np.sqrt(1.0 + a) + 1.0)


def mix_weight() -> Weight:
    return Weight("mix", _mix_profile, None, W_MINUS)


def builtin_weights() -> list[Weight]:
    return [power_weight(p) for p in (0.3, 0.5, 0.75, 1.0)] + [log_weight(), mix_weight()]


def parse_weight(spec: str) -> Weight:
    """Build a weight from ``"pow:<p>"``, ``"log"`` or ``"mix"``."""
    s = spec.strip().lower()
    if s == "log":
        return log_weight()
    if s == "mix":
        return mix_weight()
    if s.startswith("pow:"):
        try:
            p = float(s[4:])
        except ValueError:
            raise ValueError(f"bad power in weight spec {spec!r}") from None
        return power_weight(p)
    raise ValueError(f"unknown weight spec {spec!r}")


def scale(w: Weight, c: float) -> Weight:
    """Return the weight ``t -> psi(t) / c`` (c > 0)."""
    if not c > 0:
        raise ValueError("scale factor must be positive")
    return Weight(f"{w.name}/{c:g}", w.profile, w.parameter, w.declared_class, w.divisor * c)


@dataclass(frozen=True)
class SubadditivityReport:
    max_violation: float
    worst_pair: tuple[float, float] | None
    n_pairs: int

    @property
    def ok(self) -> bool:
        return self.max_violation <= 1e-12


def check_subadditive(w: Weight, pairs) -> SubadditivityReport:
    """Max over pairs of ``psi(a+b) - psi(a) - psi(b)``."""
    arr = np.asarray(pairs, dtype=np.float64).reshape(-1, 2)
    if arr.shape[0] == 0:
        return SubadditivityReport(-math.inf, None, 0)
    a, b = arr[:, 0], arr[:, 1]
    viol = w(a + b) - w(a) - w(b)
    k = int(np.argmax(viol))
    return SubadditivityReport(float(viol[k]), (float(a[k]), float(b[k])), arr.shape[0])


def log_grid(lo: float = 1e-6, hi: float = 1e6, n: int = 1201) -> np.ndarray:
    return np.geomspace(lo, hi, n)


def check_weight_axioms(
    w: Weight,
    grid: np.ndarray | None = None,
    growth_checks: Sequence[tuple[float, float]] = DEFAULT_GROWTH_CHECKS,
    rtol: float = 1e-9,
) -> dict[str, bool]:
    """Sampled checks of the weight axioms: normalization, evenness,
    monotonicity, growth, and (for declared W-minus weights) concavity."""
    t = log_grid() if grid is None else np.asarray(grid, dtype=np.float64)
    vals = w(t)
    out = {
        "zero": w(0.0) == 0.0,
        "even": bool(np.array_equal(vals, w(-t))),
        "nondecreasing": bool(np.all(np.diff(vals) >= 0.0)),
        "nonnegative": bool(np.all(vals >= 0.0)),
        "unbounded": all(w(T) > M for T, M in growth_checks),
    }
    if w.declared_class == W_MINUS:
        out["concave"] = _slope_violation(t, vals, concave=True) <= rtol
    return out


def _slopes(t, vals):
    tt = np.concatenate(([0.0], t))
    vv = np.concatenate(([0.0], vals))
    return tt, vv, np.diff(vv) / np.diff(tt)


def _slope_violation(t, vals, concave: bool) -> float:
    """Largest relative increase (concave) or decrease (convex) of
    consecutive chord slopes."""
    _, _, s = _slopes(t, vals)
    ds = np.diff(s)
    ref = np.maximum(np.abs(s[:-1]), np.abs(s[1:]))
    ref = np.where(ref == 0.0, 1.0, ref)
    rel = (ds if concave else -ds) / ref
    return float(max(rel.max(initial=0.0), 0.0))


@dataclass(frozen=True)
class Classification:
    label: str
    p: float | None = None
    flags: tuple[str, ...] = ()
    diagnostics: dict = field(default_factory=dict)

    def __str__(self):
        return f"{self.label}({self.p:g})" if self.label == W_PLUS else self.label


def classify_weight(w: Weight, grid: np.ndarray | None = None, rtol: float = 1e-9) -> Classification:
    """Classify by sampled chord slopes on a logarithmic grid.

    Concave on [0, T] gives W-minus. Convex gives W-plus(p) with p the sampled
    supremum of ``t psi'(t) / psi(t)``, the derivative taken as a chord slope
    attached to the chord midpoint. Linear weights pass both tests and are
    reported as W-minus with a boundary flag.
    """
    t = log_grid() if grid is None else np.sort(np.asarray(grid, dtype=np.float64))
    vals = w(t)
    concave_v = _slope_violation(t, vals, concave=True)
    convex_v = _slope_violation(t, vals, concave=False)
    is_concave = concave_v <= rtol
    is_convex = convex_v <= rtol
    diag = {"concavity_violation": concave_v, "convexity_violation": convex_v}
    tt, _, s = _slopes(t, vals)
    mid = 0.5 * (tt[1:] + tt[:-1])
    psi_mid = w(mid)
    ok = psi_mid > 0
    ratio = mid[ok] * s[ok] / psi_mid[ok]
    p_hat = float(ratio.max()) if ratio.size else math.nan
    diag["growth_exponent"] = p_hat
    if is_concave and is_convex:
        return Classification(W_MINUS, 1.0, ("boundary p=1",), diag)
    if is_concave:
        return Classification(W_MINUS, None, (), diag)
    if is_convex:
        p = max(1.0, p_hat)
        p_round = round(p)
        if abs(p - p_round) <= 1e-6 * max(1.0, p):
            p = float(p_round)
        return Classification(W_PLUS, p, (), diag)
    return Classification(OTHER, None, ("ambiguous",), diag)
