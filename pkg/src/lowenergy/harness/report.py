"""Machine-readable verification reports.

A report holds one record per (check, weight, dim, resolution). Trials are
folded into the record: it keeps the worst trial (largest margin over the
tolerance), its input digest and the number of violations. Reports are
versioned JSON; the CSV form is a flat projection of the records.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

SCHEMA_VERSION = "1.0"

CSV_COLUMNS = ["suite", "check", "trial", "weight", "dim", "resolution", "value", "bound", "slack", "pass"]


def digest(*arrays) -> str:
    h = hashlib.sha256()
    for a in arrays:
        a = np.ascontiguousarray(a, dtype=np.float64)
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()[:16]


def _num(x):
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return repr(x)
    return x


@dataclass
class Record:
    suite: str
    check: str
    weight: str
    dim: int
    resolution: int
    trials: int
    value: float
    bound: float
    slack: float
    tolerance: float
    passed: bool
    trial: int
    digest: str
    violations: int
    note: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("value", "bound", "slack", "tolerance"):
            d[k] = _num(d[k])
        return d

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.suite}/{self.check} weight={self.weight} dim={self.dim} "
                f"res={self.resolution} value={self.value:.6g} bound={self.bound:.6g} "
                f"slack={self.slack:.3e} tol={self.tolerance:.1e} trial={self.trial} "
                f"violations={self.violations}/{self.trials}")


@dataclass
class Constant:
    """An empirical constant next to the bound it is checked against."""

    name: str
    observed: float
    bound: float
    source: str

    def to_dict(self) -> dict:
        return {"name": self.name, "observed": _num(self.observed), "bound": _num(self.bound),
                "source": self.source}


@dataclass
class Report:
    suite: str
    records: list[Record] = field(default_factory=list)
    constants: list[Constant] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    runtime: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def first_failure(self) -> Record | None:
        return next((r for r in self.records if not r.passed), None)

    def to_dict(self, include_runtime: bool = False) -> dict:
        d = {"schema_version": SCHEMA_VERSION, "suite": self.suite, "passed": self.passed,
             "config": self.config,
             "records": [r.to_dict() for r in self.records],
             "constants": [c.to_dict() for c in self.constants]}
        if include_runtime:
            d["runtime_seconds"] = self.runtime
        return d

    def to_json(self, include_runtime: bool = False) -> str:
        return json.dumps(self.to_dict(include_runtime), indent=2, sort_keys=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.records:
            w.writerow([r.suite, r.check, r.trial, r.weight, r.dim, r.resolution,
                        repr(float(r.value)), repr(float(r.bound)), repr(float(r.slack)), int(r.passed)])
        return buf.getvalue()


def merge(name: str, reports: list[Report], config: dict | None = None) -> Report:
    """Ordered merge; the order of ``reports`` fixes the output bytes."""
    out = Report(name, config=config or {})
    for r in reports:
        out.records.extend(r.records)
        out.constants.extend(r.constants)
        out.runtime += r.runtime
    return out


class Aggregator:
    """Folds per-trial results into one Record per key.

    ``add`` takes arrays over trials. For an upper bound (``value <= bound``)
    the slack is ``value - bound``; for a lower bound it is ``bound - value``.
    A trial passes when slack <= tol (slack < tol when ``strict``).
    """

    def __init__(self, suite: str):
        self.suite = suite
        self._state: dict[tuple, dict] = {}

    def add(self, check: str, weight: str, dim: int, resolution: int, value, bound, tol,
            trial_ids, digests, lower: bool = False, strict: bool = False, note: str = ""):
        value = np.atleast_1d(np.asarray(value, dtype=np.float64))
        bound = np.broadcast_to(np.asarray(bound, dtype=np.float64), value.shape)
        tol = np.broadcast_to(np.asarray(tol, dtype=np.float64), value.shape)
        slack = bound - value if lower else value - bound
        bad = slack >= tol if strict else slack > tol
        # NaN slack counts as a violation
        bad = bad | np.isnan(slack)
        margin = np.where(np.isnan(slack), np.inf, slack - tol)
        k = int(np.argmax(margin))
        key = (check, weight, dim, resolution)
        st = self._state.get(key)
        cand = {"margin": float(margin[k]), "value": float(value[k]), "bound": float(bound[k]),
                "slack": float(slack[k]), "tol": float(tol[k]), "trial": int(np.atleast_1d(trial_ids)[k]),
                "digest": digests[k] if digests is not None else ""}
        if st is None:
            st = {"order": len(self._state), "trials": 0, "violations": 0, "worst": cand, "note": note,
                  "strict": strict}
            self._state[key] = st
        elif cand["margin"] > st["worst"]["margin"]:
            st["worst"] = cand
        st["trials"] += value.size
        st["violations"] += int(np.sum(bad))

    def records(self) -> list[Record]:
        out = []
        for key, st in sorted(self._state.items(), key=lambda kv: kv[1]["order"]):
            check, weight, dim, res = key
            w = st["worst"]
            out.append(Record(self.suite, check, weight, dim, res, st["trials"], w["value"], w["bound"],
                              w["slack"], w["tol"], st["violations"] == 0, w["trial"], w["digest"],
                              st["violations"], st["note"]))
        return out
