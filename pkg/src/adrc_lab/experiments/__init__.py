from .metrics import Metrics, compute_metrics, delta_u_std, iae_between
from .config import (
    SweepSpec,
    load_scenario_file,
    scenario_from_dict,
    scenario_to_dict,
    set_by_path,
)
from .suites import Suite, SuiteJob, UnknownSuite, list_suites, load_suite
from .runner import run_suite, run_sweep

__all__ = [
    "Metrics",
    "compute_metrics",
    "delta_u_std",
    "iae_between",
    "SweepSpec",
    "load_scenario_file",
    "scenario_from_dict",
    "scenario_to_dict",
    "set_by_path",
    "Suite",
    "SuiteJob",
    "UnknownSuite",
    "list_suites",
    "load_suite",
    "run_suite",
    "run_sweep",
]
