"""Verification suites, seeded generators, reports and the command line."""
from .config import ConfigError, SuiteConfig
from .report import Record, Report, merge
from .suites import SUITES, run_axioms, run_bounds, run_identities, run_limits


def run_all(cfg: SuiteConfig) -> Report:
    """All suites in fixed order, merged into one report."""
    return merge("verify", [SUITES[name](cfg) for name in SUITES], cfg.to_dict())


__all__ = ["SuiteConfig", "ConfigError", "Report", "Record", "merge", "run_axioms", "run_identities",
           "run_bounds", "run_limits", "run_all", "SUITES"]
