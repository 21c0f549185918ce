"""Self-checks behind the `adrc-lab verify` command: observer pole
placement (continuous and discrete) and the classical state-space
equivalence, each over randomized designs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .controllers import assemble_discrete_eso
from .design import (
    AdrcDesign,
    design_first_order,
    design_second_order,
    discrete_gains_for,
)
from .equivalence import verify_equivalence
from .lti import Polynomial, characteristic_polynomial

PLACEMENT_TOL = 1e-9
EQUIVALENCE_TOL = 1e-9


@dataclass(frozen=True)
class CheckResult:
    name: str
    samples: int
    max_deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


def _random_design(rng, order: int) -> AdrcDesign:
    b0 = rng.uniform(0.1, 10.0) * rng.choice([-1.0, 1.0])
    t_settle = rng.uniform(0.2, 20.0)
    k_eso = rng.uniform(1.0, 100.0)
    make = design_first_order if order == 1 else design_second_order
    return make(b0, t_settle, k_eso)


def _random_sample_time(rng, design: AdrcDesign) -> float:
    # Keep |s_eso| * Ts below 40 so z stays clear of the subnormal range.
    upper = min(0.2, 40.0 / abs(design.s_eso))
    return math.exp(rng.uniform(math.log(1e-4), math.log(upper)))


def continuous_observer_matrix(design: AdrcDesign) -> np.ndarray:
    model = design.observer_model()
    l = np.array(design.l_cont).reshape(-1, 1)
    return model.a - l @ model.c


def check_continuous_placement(order: int, samples: int = 500,
                               seed: int = 2023) -> CheckResult:
    rng = np.random.default_rng(seed + order)
    worst = 0.0
    for _ in range(samples):
        design = _random_design(rng, order)
        got = characteristic_polynomial(continuous_observer_matrix(design))
        want = Polynomial.from_single_root(design.s_eso, order + 1)
        worst = max(worst, max(abs(a - b) for a, b
                               in zip(got.coefficients, want.coefficients)))
    return CheckResult(f"continuous observer placement (order {order})",
                       samples, worst, PLACEMENT_TOL)


def check_discrete_placement(order: int, samples: int = 500,
                             seed: int = 2023) -> CheckResult:
    rng = np.random.default_rng(seed + 10 * order)
    worst = 0.0
    for _ in range(samples):
        design = _random_design(rng, order)
        ts = _random_sample_time(rng, design)
        gains = discrete_gains_for(design, ts)
        eso = assemble_discrete_eso(design, gains)
        got = characteristic_polynomial(eso.a_obs)
        want = Polynomial.from_single_root(gains.z_eso, order + 1)
        worst = max(worst, max(abs(a - b) for a, b
                               in zip(got.coefficients, want.coefficients)))
    return CheckResult(f"discrete observer placement (order {order})",
                       samples, worst, PLACEMENT_TOL)


def check_equivalence(order: int, samples: int = 200,
                      seed: int = 2023) -> CheckResult:
    rng = np.random.default_rng(seed + 100 * order)
    worst = 0.0
    for _ in range(samples):
        design = _random_design(rng, order)
        report = verify_equivalence(design, tolerance=EQUIVALENCE_TOL)
        worst = max(worst, report.max_deviation)
    return CheckResult(f"state-space design equivalence (order {order})",
                       samples, worst, EQUIVALENCE_TOL)


def run_all_checks(seed: int = 2023) -> list[CheckResult]:
    results = []
    for order in (1, 2):
        results.append(check_continuous_placement(order, seed=seed))
        results.append(check_discrete_placement(order, seed=seed))
        results.append(check_equivalence(order, seed=seed))
    return results
