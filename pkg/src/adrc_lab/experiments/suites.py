"""The catalog of built-in experiment suites.

Each suite is a checked-in YAML config (configs/<id>.yaml) describing one
or more jobs: a base scenario, optionally a swept parameter, and metric
settings. Sweep values and seeds live in the config files, nowhere else.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

import yaml

from ..lti import InvalidInput
from ..simulate import Scenario
from .config import SCHEMA_VERSION, SweepSpec, scenario_from_dict, set_by_path

SUITE_IDS = (
    "adrc1-param-K",
    "adrc1-param-T",
    "adrc1-eso",
    "adrc1-saturation",
    "adrc1-deadtime",
    "adrc1-structure",
    "adrc1-pi-compare",
    "adrc1-disturbance",
    "adrc2-param-K",
    "adrc2-param-D",
    "adrc2-param-T",
    "adrc2-eso",
    "adrc2-saturation",
    "adrc2-deadtime",
    "adrc2-structure",
    "adrc2-pid-compare",
    "adrc2-disturbance",
    "discrete-Ts",
    "discrete-noise",
    "discrete-kESO",
)


class UnknownSuite(InvalidInput):
    def __init__(self, suite_id: str):
        super().__init__(
            f"unknown suite {suite_id!r}; valid ids: {', '.join(SUITE_IDS)}")


@dataclass(frozen=True)
class SuiteJob:
    """One sweep (or single run) inside a suite."""

    name: str
    scenario: Scenario
    sweep: SweepSpec | None = None
    step_time: float = 0.0
    disturbance_window: tuple[float, float] | None = None

    def scenarios(self) -> list[tuple[str, Scenario]]:
        """Labelled concrete scenarios: one per sweep value."""
        if self.sweep is None:
            return [(self.name, self.scenario)]
        return [("%g" % v, set_by_path(self.scenario, self.sweep.parameter, v))
                for v in self.sweep.values]


@dataclass(frozen=True)
class Suite:
    suite_id: str
    title: str
    jobs: tuple[SuiteJob, ...]


def list_suites() -> tuple[str, ...]:
    return SUITE_IDS


def load_suite(suite_id: str) -> Suite:
    if suite_id not in SUITE_IDS:
        raise UnknownSuite(suite_id)
    ref = resources.files(__package__).joinpath(f"configs/{suite_id}.yaml")
    data = yaml.safe_load(ref.read_text())
    if data.get("schema") != SCHEMA_VERSION:
        raise InvalidInput(f"suite {suite_id}: unsupported schema version")
    jobs = []
    for job in data["jobs"]:
        scenario = scenario_from_dict(job["scenario"])
        sweep = None
        if "sweep" in job:
            sweep = SweepSpec(parameter=job["sweep"]["parameter"],
                              values=tuple(job["sweep"]["values"]))
            set_by_path(scenario, sweep.parameter, sweep.values[0])
        window = job.get("disturbance_window")
        jobs.append(SuiteJob(
            name=job["name"],
            scenario=scenario,
            sweep=sweep,
            step_time=float(job.get("step_time", 0.0)),
            disturbance_window=tuple(window) if window else None,
        ))
    return Suite(suite_id=suite_id, title=data.get("title", suite_id),
                 jobs=tuple(jobs))
