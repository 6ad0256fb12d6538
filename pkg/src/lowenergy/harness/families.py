"""Seeded generators for the verification suites.

Every draw goes through ``trial_rng(seed, suite, *keys)``, a generator seeded
by the tuple itself, so a trial can be regenerated from its index alone and
trial order never affects the values.
"""
from __future__ import annotations

import numpy as np
from scipy.special import xlogy

from ..convex import M_CLIP, GridFunction, Polytope, box, random_convex
from ..toric1d import (ToricPotential1D, canonical_cutoff, moment_grid, random_symplectic_potential,
                       reference_dual, y_grid)

SUITE_IDS = {"axioms": 1, "identities": 2, "bounds": 3, "limits": 4}

POLY_KINDS = ("smooth", "kinked", "near-degenerate", "boundary-singular")
NEAR_DEGENERATE_GAP = 1e-6


def trial_rng(seed: int, suite: str, *keys: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), SUITE_IDS[suite], *(int(k) for k in keys)])


def polytope_for(dim: int, resolution: int) -> Polytope:
    return box([(-1.0, 1.0)] * dim, resolution)


# -- polytope side -------------------------------------------------------------

def _smooth(rng, P: Polytope) -> np.ndarray:
    X = np.stack(P.mesh, axis=-1)
    d = P.dim
    M = rng.normal(size=(d, d))
    A = M @ M.T + 0.1 * np.eye(d)
    b = rng.uniform(-2, 2, d)
    q = 0.5 * np.einsum("...i,ij,...j->...", X, A, X)
    k = rng.uniform(0.5, 3.0)
    dirn = rng.normal(size=d)
    dirn /= np.linalg.norm(dirn)
    return q + X @ b + rng.uniform(-1, 1) + rng.uniform(0, 1) * np.exp(k * (X @ dirn)) / k


def _kinked(rng, P: Polytope) -> np.ndarray:
    f = random_convex(rng, P, roughness=rng.uniform(0.2, 1.5), verify=False).values
    X = np.stack(P.mesh, axis=-1)
    return f + rng.uniform(0, 0.5) * np.sum(X**2, axis=-1)


def _boundary_singular(rng, P: Polytope) -> np.ndarray:
    X = np.stack(P.mesh, axis=-1)
    ent = np.sum(xlogy(1 + X, 1 + X) + xlogy(1 - X, 1 - X), axis=-1)
    f = rng.uniform(0.2, 2.0) * ent + X @ rng.uniform(-1, 1, P.dim)
    if rng.random() < 0.5:
        # blows up on the boundary; clipped there like any non-finite sample
        with np.errstate(divide="ignore"):
            blow = np.prod(np.clip(1 - X**2, 0, None), axis=-1) ** -0.25
        f = f + rng.uniform(0.1, 1.0) * np.minimum(blow, M_CLIP)
    return f


def _bump(P: Polytope) -> np.ndarray:
    X = np.stack(P.mesh, axis=-1)
    b = np.sum(X**2, axis=-1)
    return b / b.max()


def random_dual_values(rng, P: Polytope, kind: str) -> np.ndarray:
    if kind == "smooth":
        return _smooth(rng, P)
    if kind == "kinked":
        return _kinked(rng, P)
    if kind == "boundary-singular":
        return _boundary_singular(rng, P)
    raise ValueError(f"unknown kind {kind!r}")


def random_dual(rng, P: Polytope, kind: str) -> GridFunction:
    return GridFunction(P, random_dual_values(rng, P, kind))


def random_triple(rng, P: Polytope, kind: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Three convex duals. ``near-degenerate`` gives phi_1 = phi_0 + 1e-6 bump
    (sup distance exactly 1e-6) and phi_2 a constant 1e-6 shift of phi_0."""
    if kind == "near-degenerate":
        a = _smooth(rng, P) if rng.random() < 0.5 else _kinked(rng, P)
        return a, a + NEAR_DEGENERATE_GAP * _bump(P), a - NEAR_DEGENERATE_GAP
    pick = [k for k in POLY_KINDS if k != "near-degenerate"]
    kinds = [kind] + [pick[int(rng.integers(len(pick)))] for _ in range(2)]
    return tuple(random_dual_values(rng, P, k) for k in kinds)


def ordered_dual_triple(rng, P: Polytope) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """phi_a >= phi_b >= phi_c nodewise, all convex (maxima of convex)."""
    kinds = ("smooth", "kinked", "boundary-singular")
    c = random_dual_values(rng, P, kinds[int(rng.integers(3))])
    b = np.maximum(c, random_dual_values(rng, P, kinds[int(rng.integers(3))]))
    a = np.maximum(b, random_dual_values(rng, P, kinds[int(rng.integers(3))]))
    return a, b, c


# -- X side (one-dimensional) --------------------------------------------------

class XGrids:
    """Moment grid and log-coordinate grid at a common resolution."""

    def __init__(self, resolution: int, Y: float = 30.0):
        self.P = moment_grid(resolution)
        self.Y = y_grid(Y, resolution)
        self.x = self.P.axes[0]

    def potential(self, phi_values) -> ToricPotential1D:
        return ToricPotential1D.from_dual(GridFunction(self.P, phi_values), self.Y)


X_KINDS = ("smooth", "kinked", "shift", "near-degenerate", "boundary")


def x_pair_duals(rng, x: np.ndarray, kind: str) -> tuple[np.ndarray, np.ndarray]:
    s0, s1 = (int(v) for v in rng.integers(0, 2**31, 2))
    fam = "smooth" if kind in ("smooth", "shift", "near-degenerate") else "kinked"
    p0 = random_symplectic_potential(s0, fam)(x)
    if kind == "shift":
        return p0, p0 - rng.uniform(-2, 2)
    if kind == "near-degenerate":
        return p0, p0 + NEAR_DEGENERATE_GAP * np.sin(7 * x) ** 2
    if kind == "boundary":
        # extra entropy mass near the ends of the moment interval
        p1 = random_symplectic_potential(s1, "smooth")(x) + rng.uniform(0.5, 2.0) * reference_dual(x)
        return p0, p1
    return p0, random_symplectic_potential(s1, fam)(x)


def ordered_pair_duals(rng, x: np.ndarray, mode: int) -> tuple[np.ndarray, np.ndarray]:
    """(phi_u, phi_v) with phi_u >= phi_v, i.e. u <= v on the X side."""
    s0, s1 = (int(v) for v in rng.integers(0, 2**31, 2))
    fam = ("smooth", "kinked")[int(rng.integers(2))]
    pu = random_symplectic_potential(s0, fam)(x)
    if mode == 0:
        # move part of the way toward a tangent minorant of the perturbation
        g = pu - reference_dual(x)
        i = min(int(np.searchsorted(x, rng.uniform(0.1, 0.9))), x.size - 2)
        sl = (g[i + 1] - g[i]) / (x[i + 1] - x[i])
        h = np.minimum(g[i] + sl * (x - x[i]) - rng.uniform(0, 0.5), g)
        lam = rng.uniform(0, 1)
        pv = (1 - lam) * pu + lam * (reference_dual(x) + h) - rng.uniform(0, 1)
    elif mode == 1:
        pv = random_symplectic_potential(s1, fam)(x)
        pu = np.maximum(pu, pv)
    elif mode == 2:
        pv = pu - rng.uniform(0, 2)
    else:
        pv = random_symplectic_potential(s1, fam)(x)
        pu = np.maximum(pu, pv + rng.uniform(0, 0.2))
    return pu, pv


def nonpositive_ordered_pair(rng, grids: XGrids, mode: int) -> tuple[ToricPotential1D, ToricPotential1D]:
    """u <= v <= 0 in relative terms (F_u <= F_v <= F_ref)."""
    x = grids.x
    gu = (rng.uniform(0, 3) * (x - rng.uniform(0, 1)) ** 2
          + np.maximum(0, rng.uniform(-4, 4) * (x - rng.uniform(0, 1))) + rng.uniform(0, 2))
    Fu = grids.potential(reference_dual(x) + gu)
    if mode == 0:
        Fv = grids.potential(reference_dual(x) + rng.uniform(0, 1) * gu)
    elif mode == 1:
        Fv = grids.potential(reference_dual(x) + np.maximum(gu - rng.uniform(0, 2), 0))
    else:
        Fv = canonical_cutoff(Fu, rng.uniform(0, 1) * float(-Fu.v.min()))
    return Fu, Fv


__all__ = ["SUITE_IDS", "POLY_KINDS", "X_KINDS", "trial_rng", "polytope_for", "random_dual",
           "random_dual_values", "random_triple", "ordered_dual_triple", "XGrids", "x_pair_duals",
           "ordered_pair_duals", "nonpositive_ordered_pair"]
