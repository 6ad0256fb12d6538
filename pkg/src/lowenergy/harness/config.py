"""Suite configuration and its plain-text ``key = value`` file form."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..weights import parse_weight

DEFAULT_WEIGHTS = ("pow:0.3", "pow:0.5", "pow:0.75", "pow:1", "log", "mix")

# relative tolerances; the proven bounds are constants in suites.py
DEFAULT_TOLERANCES = {
    "exact": 1e-12,          # nodewise identities and the triangle inequality
    "rounding": 1e-10,       # X-side inequalities that can hold with equality
    "constancy": 1e-3,       # X-side geodesic integrals vs dual side
    "refinement_gain": 2.0,  # error ratio from the coarsest to the finest resolution
    "refinement_growth": 1.05,
    "legendre": 5.0,         # sup error in units of the grid spacing
    "quasi_norm": 1e-8,
    "fundamental_C": 16.0,   # configured constant for E(v) <= C E(u)
    "limit": 1e-2,
    "full_mass": 1e-6,
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 42
    trials: int = 10_000
    x_trials: int | None = None
    weights: tuple[str, ...] = DEFAULT_WEIGHTS
    dims: tuple[int, ...] = (1, 2)
    poly_resolution: tuple[int, int] = (257, 33)
    resolution: int = 1024
    resolutions: tuple[int, ...] = (1024, 2048, 4096)
    constancy_pairs: int = 8
    tolerance_scale: float = 1.0
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.weights:
            raise ConfigError("at least one weight is required")
        for w in self.weights:
            try:
                parse_weight(w)
            except ValueError as e:
                raise ConfigError(str(e)) from None
        if any(b <= a for a, b in zip(self.resolutions, self.resolutions[1:])):
            raise ConfigError("resolutions must be strictly increasing")
        if any(d not in (1, 2) for d in self.dims) or not self.dims:
            raise ConfigError("dims must be a nonempty subset of {1, 2}")
        if self.resolution < 16:
            raise ConfigError("resolution must be >= 16")
        if not self.tolerance_scale > 0:
            raise ConfigError("tolerance_scale must be positive")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigError(f"unknown tolerance keys {sorted(unknown)}")
        tol = dict(DEFAULT_TOLERANCES)
        tol.update(self.tolerances)
        bad = [k for k, v in tol.items() if not 0 <= v < float("inf")]
        if bad:
            raise ConfigError(f"tolerances must be finite and nonnegative: {sorted(bad)}")
        object.__setattr__(self, "tolerances", tol)

    @property
    def pair_trials(self) -> int:
        """Trial count for X-side pairs (a tenth of the polytope-side count)."""
        return self.x_trials if self.x_trials is not None else max(1, self.trials // 10)

    def tol(self, name: str) -> float:
        """Tolerance scaled by ``tolerance_scale``; ratio-type knobs are not scaled."""
        v = self.tolerances[name]
        if name in ("refinement_gain", "refinement_growth", "fundamental_C"):
            return v
        return v * self.tolerance_scale

    def weight_objects(self):
        return [parse_weight(w) for w in self.weights]

    def to_dict(self) -> dict:
        return {"seed": self.seed, "trials": self.trials, "x_trials": self.pair_trials,
                "weights": list(self.weights), "dims": list(self.dims),
                "poly_resolution": list(self.poly_resolution), "resolution": self.resolution,
                "resolutions": list(self.resolutions), "constancy_pairs": self.constancy_pairs,
                "tolerance_scale": self.tolerance_scale, "tolerances": dict(self.tolerances)}

    def updated(self, **kw) -> "SuiteConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def _split(v: str):
    return [p.strip() for p in v.replace(";", ",").split(",") if p.strip()]


_CONVERTERS = {
    "seed": int,
    "trials": int,
    "x_trials": int,
    "weights": lambda v: tuple(_split(v)),
    "dims": lambda v: tuple(int(p) for p in _split(v)),
    "dim": lambda v: tuple(int(p) for p in _split(v)),
    "poly_resolution": lambda v: tuple(int(p) for p in _split(v)),
    "resolution": int,
    "resolutions": lambda v: tuple(int(p) for p in _split(v)),
    "constancy_pairs": int,
    "tolerance_scale": float,
}


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines (``#`` comments). Returns keyword arguments
    for :class:`SuiteConfig`; ``tolerance.<name>`` keys go into ``tolerances``
    and keys such as ``out`` or ``format`` are returned under ``"_cli"``."""
    kw: dict = {}
    tolerances: dict = {}
    cli: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, val = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key.startswith("tolerance."):
            try:
                tolerances[key.split(".", 1)[1]] = float(val)
            except ValueError:
                raise ConfigError(f"line {lineno}: bad value for {key}") from None
        elif key in ("out", "format"):
            cli[key] = val
        elif key in _CONVERTERS:
            try:
                kw["dims" if key == "dim" else key] = _CONVERTERS[key](val)
            except ValueError:
                raise ConfigError(f"line {lineno}: bad value for {key}") from None
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    if tolerances:
        kw["tolerances"] = tolerances
    if cli:
        kw["_cli"] = cli
    return kw


def load_config(path: str) -> dict:
    with open(path) as fh:
        return parse_config_text(fh.read())


__all__ = ["SuiteConfig", "ConfigError", "DEFAULT_WEIGHTS", "DEFAULT_TOLERANCES", "parse_config_text",
           "load_config"]
