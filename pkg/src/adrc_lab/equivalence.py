"""Classical state-space design with disturbance estimation/compensation.

This module rebuilds the controller from the augmented-observer side
(state feedback + reference gain + disturbance compensation + observer
placed by Ackermann's formula) and checks, parameter by parameter, that it
lands on exactly the same numbers as the ADRC design equations. All small
matrix products here run in plain Python floats so the comparison is a
deterministic IEEE-arithmetic identity, not a tolerance hunt.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .design import AdrcDesign
from .lti import InvalidInput, zoh_discretize


def _matmul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    return [[sum(a[i][p] * b[p][j] for p in range(k)) for j in range(m)]
            for i in range(n)]


def _solve(a, rhs):
    """Gaussian elimination with partial pivoting for tiny systems."""
    n = len(a)
    m = [row[:] + [rhs[i]] for i, row in enumerate(a)]
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(m[r][col]))
        if m[pivot][col] == 0.0:
            raise InvalidInput("singular matrix")
        m[col], m[pivot] = m[pivot], m[col]
        for r in range(col + 1, n):
            f = m[r][col] / m[col][col]
            if f != 0.0:
                for c in range(col, n + 1):
                    m[r][c] -= f * m[col][c]
    x = [0.0] * n
    for r in range(n - 1, -1, -1):
        acc = m[r][n]
        for c in range(r + 1, n):
            acc -= m[r][c] * x[c]
        x[r] = acc / m[r][r]
    return x


def observer_gain_ackermann(a, c, pole: float) -> list[float]:
    """Observer gain placing every eigenvalue of (a - L c) at pole.

    L = q(a) O^-1 e_n with q(s) = (s - pole)^n and O the observability
    matrix; independent of any closed-form gain expression.
    """
    a = [[float(v) for v in row] for row in np.atleast_2d(a)]
    c_row = [float(v) for v in np.ravel(c)]
    n = len(a)
    shifted = [[a[i][j] - (pole if i == j else 0.0) for j in range(n)]
               for i in range(n)]
    q = shifted
    for _ in range(n - 1):
        q = _matmul(q, shifted)
    obs_rows = [c_row]
    for _ in range(n - 1):
        prev = obs_rows[-1]
        obs_rows.append([sum(prev[k] * a[k][j] for k in range(n)) for j in range(n)])
    e_n = [0.0] * n
    e_n[-1] = 1.0
    w = _solve(obs_rows, e_n)
    return [sum(q[i][j] * w[j] for j in range(n)) for i in range(n)]


def design_feedback(a, b, target_pole: float, order: int) -> list[float]:
    """State feedback placing all closed-loop poles of the integrator
    chain at target_pole (closed form)."""
    b_vec = np.ravel(b)
    b0 = float(b_vec[order - 1]) if order <= len(b_vec) else 0.0
    if b0 == 0.0:
        raise InvalidInput("input map has no gain entry")
    if order == 1:
        return [-target_pole / b0]
    if order == 2:
        return [(target_pole * target_pole) / b0, (-2.0 * target_pole) / b0]
    raise InvalidInput("only orders 1 and 2 are supported")


def gain_compensation(a, b, c, k) -> float:
    """Reference gain G = -(C (A - B K)^-1 B)^-1 removing steady-state
    tracking error."""
    a = [[float(v) for v in row] for row in np.atleast_2d(a)]
    b_vec = [float(v) for v in np.ravel(b)]
    c_row = [float(v) for v in np.ravel(c)]
    k_row = [float(v) for v in np.ravel(k)]
    n = len(a)
    closed = [[a[i][j] - b_vec[i] * k_row[j] for j in range(n)] for i in range(n)]
    x = _solve(closed, b_vec)
    dc = sum(c_row[j] * x[j] for j in range(n))
    if dc == 0.0:
        raise InvalidInput("closed loop has zero DC path from r to y")
    return -1.0 / dc


def disturbance_gain(b, e, c_d_gen: float) -> float:
    """Compensation gain solving B Kd = E Cd componentwise."""
    b_vec = [float(v) for v in np.ravel(b)]
    target = [float(v) * c_d_gen for v in np.ravel(e)]
    scale = max(1.0, max(abs(v) for v in target))
    candidates = []
    for bi, ti in zip(b_vec, target):
        if bi == 0.0:
            if abs(ti) > 1e-12 * scale:
                raise InvalidInput("matching condition B Kd = E Cd is infeasible")
        else:
            candidates.append(ti / bi)
    if not candidates:
        raise InvalidInput("input map is zero")
    spread = max(candidates) - min(candidates)
    if spread > 1e-12 * max(1.0, max(abs(v) for v in candidates)):
        raise InvalidInput("matching condition B Kd = E Cd is infeasible")
    return candidates[0]


def prediction_observer_gains(order: int, b0: float, z_eso: float,
                              sample_time: float) -> list[float]:
    """Gains of the plain one-step-delayed observer, for reference only:
    places the eigenvalues of (Ad - Lp Cd) instead of the current
    observer's error matrix."""
    from .design import extended_chain_model

    disc = zoh_discretize(extended_chain_model(order, b0), sample_time)
    return observer_gain_ackermann(disc.a, disc.c, z_eso)


@dataclass(frozen=True)
class AugmentedDesign:
    """Everything produced by the classical route for one plant case."""

    k_fb: tuple[float, ...]
    k_d: float
    g: float
    l_aug: tuple[float, ...]
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    e: np.ndarray
    a_d_gen: float
    c_d_gen: float


def build_augmented_design(order: int, b0: float, s_cl: float, s_eso: float,
                           plant_T: float = 1.0) -> AugmentedDesign:
    """Run the classical design for the (double) integrator plant with a
    constant-disturbance generator."""
    if order == 1:
        a = np.array([[0.0]])
        b = np.array([b0])
        c = np.array([1.0])
        e = np.array([1.0 / plant_T])
        c_d_gen = plant_T
    elif order == 2:
        a = np.array([[0.0, 1.0], [0.0, 0.0]])
        b = np.array([0.0, b0])
        c = np.array([1.0, 0.0])
        t2 = plant_T * plant_T
        e = np.array([0.0, 1.0 / t2])
        c_d_gen = t2
    else:
        raise InvalidInput("only orders 1 and 2 are supported")
    k_fb = design_feedback(a, b, s_cl, order)
    g = gain_compensation(a, b, c, k_fb)
    k_d = disturbance_gain(b, e, c_d_gen)
    n = order
    a_aug = np.zeros((n + 1, n + 1))
    a_aug[:n, :n] = a
    a_aug[:n, n] = e * c_d_gen
    c_aug = np.zeros(n + 1)
    c_aug[:n] = c
    l_aug = observer_gain_ackermann(a_aug, c_aug, s_eso)
    return AugmentedDesign(k_fb=tuple(k_fb), k_d=k_d, g=g, l_aug=tuple(l_aug),
                           a=a, b=b, c=c, e=e, a_d_gen=0.0, c_d_gen=c_d_gen)


@dataclass(frozen=True)
class EquivalenceCheck:
    name: str
    deviation: float
    passed: bool


@dataclass(frozen=True)
class EquivalenceReport:
    checks: tuple[EquivalenceCheck, ...]
    tolerance: float

    @property
    def max_deviation(self) -> float:
        return max(c.deviation for c in self.checks)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed_names(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]


def verify_equivalence(design: AdrcDesign, plant_T: float = 1.0,
                       tolerance: float = 1e-9) -> EquivalenceReport:
    """Compare the classical augmented design against an ADRC design.

    Checks K = [KP, KD]/b0, G = K1, Kd = 1/b0 and the augmented observer
    gains against the ADRC observer gains; failures are reported, never
    raised.
    """
    aug = build_augmented_design(design.order, design.b0, design.s_cl,
                                 design.s_eso, plant_T)
    checks = []

    def add(name, got, want):
        dev = abs(got - want)
        checks.append(EquivalenceCheck(name, dev, dev <= tolerance))

    add("k1", aug.k_fb[0], design.k_p / design.b0)
    if design.order == 2:
        add("k2", aug.k_fb[1], design.k_d / design.b0)
    add("g_equals_k1", aug.g, aug.k_fb[0])
    add("kd", aug.k_d, 1.0 / design.b0)
    for i, (got, want) in enumerate(zip(aug.l_aug, design.l_cont)):
        add(f"l{i + 1}", got, want)
    return EquivalenceReport(checks=tuple(checks), tolerance=tolerance)
