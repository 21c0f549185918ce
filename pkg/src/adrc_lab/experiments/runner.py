"""Suite execution: run every scenario, write trajectory CSVs, a metrics
summary per job and one overlay figure per job.

Sweep points may run in parallel worker processes; results are collected
and written in sweep order, so the output does not depend on the worker
count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from ..simulate import Scenario, Trajectory, run_closed_loop
from .config import SweepSpec
from .metrics import compute_metrics, iae_between
from .plots import overlay_plot
from .suites import Suite, SuiteJob, load_suite

SUMMARY_COLUMNS = ("sweep_value", "settling_time", "overshoot_pct", "iae",
                   "u_max", "steady_state_error")


def _run_all(scenarios: list[Scenario], workers: int | None) -> list[Trajectory]:
    if workers is None:
        workers = min(len(scenarios), os.cpu_count() or 1, 8)
    if workers <= 1 or len(scenarios) <= 1:
        return [run_closed_loop(s) for s in scenarios]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_closed_loop, scenarios))


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    return "%.10g" % value


def _write_summary(path: Path, rows: list[tuple]) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(SUMMARY_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def run_sweep(scenario: Scenario, sweep: SweepSpec | None, out_dir,
              step_time: float = 0.0, workers: int | None = None,
              name: str = "sweep") -> list[tuple[str, Trajectory]]:
    """Run one (possibly single-point) sweep and write its outputs."""
    job = SuiteJob(name=name, scenario=scenario, sweep=sweep, step_time=step_time)
    return _run_job(job, Path(out_dir), workers)


def _run_job(job: SuiteJob, job_dir: Path,
             workers: int | None) -> list[tuple[str, Trajectory]]:
    job_dir.mkdir(parents=True, exist_ok=True)
    labelled = job.scenarios()
    trajectories = _run_all([s for _, s in labelled], workers)
    results = list(zip([label for label, _ in labelled], trajectories))

    rows = []
    for label, traj in results:
        traj.write_csv(job_dir / (f"traj_{label}.csv" if job.sweep else "traj.csv"))
        m = compute_metrics(traj, job.step_time)
        rows.append((label, m.settling_time_2pct, m.overshoot_pct, m.iae,
                     m.u_max, m.steady_state_error))
    _write_summary(job_dir / "summary.csv", rows)

    limit = job.scenario.saturation_limit
    overlay_plot(job.name, results, job_dir / "plot.svg", saturation_limit=limit)
    return results


def run_suite(suite: Suite | str, out_dir, workers: int | None = None) -> Path:
    """Run a full suite into out_dir/<suite-id>/ and return that path."""
    if isinstance(suite, str):
        suite = load_suite(suite)
    suite_dir = Path(out_dir) / suite.suite_id
    window_rows = []
    for job in suite.jobs:
        results = _run_job(job, suite_dir / job.name, workers)
        if job.disturbance_window:
            lo, hi = job.disturbance_window
            for label, traj in results:
                window_rows.append((job.name if job.sweep is None else
                                    f"{job.name}_{label}",
                                    lo, hi, iae_between(traj, lo, hi)))
    if window_rows:
        with open(suite_dir / "iae_window.csv", "w", newline="\n") as fh:
            fh.write("job,window_start,window_end,iae_window\n")
            for row in window_rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
    return suite_dir
