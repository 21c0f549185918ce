"""Runtime controllers: continuous and discrete ADRC, the latency-optimized
discrete form, and PI / PIDT1 baselines.

The pure update rules live in module-level functions; the classes at the
bottom wrap them behind the sample-by-sample interface the simulator uses
(update(y, r, r_next) -> raw output, then commit(applied output)).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from .design import AdrcDesign, DiscreteEsoGains
from .lti import InvalidInput, StateSpaceModel, zoh_discretize


@dataclass
class ControllerState:
    """Mutable runtime state of one controller instance."""

    x_hat: np.ndarray
    u_prev: float = 0.0
    u_precomputed: float = 0.0
    u_delay_buffer: deque = field(default_factory=lambda: deque(maxlen=0))

    @staticmethod
    def initial(n_states: int, delay_steps: int = 0) -> "ControllerState":
        buf = deque([0.0] * delay_steps, maxlen=delay_steps)
        return ControllerState(x_hat=np.zeros(n_states), u_delay_buffer=buf)


def eso_derivative(design: AdrcDesign, x_hat, u_effective: float, y: float):
    """Time derivative of the observer state.

    u_effective must be the value actually applied to the plant (after
    saturation, possibly delayed), which is what keeps the disturbance
    estimate consistent when the actuator limits.
    """
    e = y - x_hat[0]
    l = design.l_cont
    if design.order == 1:
        return np.array([
            x_hat[1] + design.b0 * u_effective + l[0] * e,
            l[1] * e,
        ])
    return np.array([
        x_hat[1] + l[0] * e,
        x_hat[2] + design.b0 * u_effective + l[1] * e,
        l[2] * e,
    ])


def control_law(design: AdrcDesign, x_hat, r: float) -> float:
    """Proportional(-derivative) state feedback plus disturbance rejection."""
    if design.order == 1:
        return (design.k_p * (r - x_hat[0]) - x_hat[1]) / design.b0
    return (design.k_p * (r - x_hat[0]) - design.k_d * x_hat[1] - x_hat[2]) / design.b0


def apply_saturation(u: float, limit: float) -> float:
    """Clamp u to [-limit, +limit]."""
    if not limit > 0.0:
        raise InvalidInput("saturation limit must be > 0")
    if u > limit:
        return limit
    if u < -limit:
        return -limit
    return u


@dataclass(frozen=True)
class DiscreteEso:
    """Precomputed matrices of the discrete current observer.

    x_hat(k) = a_obs x_hat(k-1) + b_obs u(k-1) + l y(k)
    """

    design: AdrcDesign
    a_obs: np.ndarray
    b_obs: np.ndarray
    l: np.ndarray
    sample_time: float


def assemble_discrete_eso(design: AdrcDesign, gains: DiscreteEsoGains) -> DiscreteEso:
    """Combine a design with current-observer gains into update matrices."""
    model = zoh_discretize(design.observer_model(), gains.sample_time)
    ad, bd, cd = model.a, model.b.ravel(), model.c
    lc = np.asarray(gains.l_current, dtype=float).reshape(-1, 1)
    a_obs = ad - lc @ (cd @ ad)
    b_obs = bd - (lc * (cd @ bd)).ravel()
    return DiscreteEso(design=design, a_obs=a_obs, b_obs=b_obs,
                       l=lc.ravel(), sample_time=gains.sample_time)


def discrete_adrc_update(state: ControllerState, eso: DiscreteEso,
                         y_k: float, r_k: float) -> tuple[float, ControllerState]:
    """One current-observer step followed by the control law.

    state.u_prev must hold the output actually applied in the previous
    cycle (post-saturation when a limit is configured).
    """
    x_hat = eso.a_obs @ state.x_hat + eso.b_obs * state.u_prev + eso.l * y_k
    u_k = control_law(eso.design, x_hat, r_k)
    return u_k, replace(state, x_hat=x_hat)


@dataclass(frozen=True)
class TransformedEso:
    """Observer matrices in the scaled coordinates that reduce the control
    law to a plain sum, plus the two precomputed output constants."""

    design: AdrcDesign
    a_t: np.ndarray
    b_t: np.ndarray
    l_t: np.ndarray
    l_sum: float
    r_gain: float
    sample_time: float


def build_transformed(design: AdrcDesign, gains: DiscreteEsoGains) -> TransformedEso:
    """Similarity-transform the current observer so each state carries its
    control-law weight, making the output a sum of the states."""
    if design.k_p == 0.0 or (design.order == 2 and design.k_d == 0.0):
        raise InvalidInput("transformation is singular for zero gains")
    eso = assemble_discrete_eso(design, gains)
    if design.order == 1:
        scale = np.array([design.k_p, 1.0]) / design.b0
    else:
        scale = np.array([design.k_p, design.k_d, 1.0]) / design.b0
    t_inv = np.diag(scale)
    t = np.diag(1.0 / scale)
    a_t = t_inv @ eso.a_obs @ t
    b_t = t_inv @ eso.b_obs
    l_t = t_inv @ eso.l
    return TransformedEso(design=design, a_t=a_t, b_t=b_t, l_t=l_t,
                          l_sum=float(l_t.sum()), r_gain=design.k_p / design.b0,
                          sample_time=gains.sample_time)


def optimized_latency_update(state: ControllerState, t: TransformedEso,
                             y_k: float) -> float:
    # Deliberately a single multiply and a single subtract: this is the
    # whole measurement-to-output path of the optimized form.
    return state.u_precomputed - t.l_sum * y_k


def optimized_post_step(state: ControllerState, t: TransformedEso, u_k: float,
                        y_k: float, r_next: float) -> ControllerState:
    """Housekeeping after the output went out: fold the measurement into
    the state, predict the next cycle and precompute its output."""
    x_next = t.a_t @ (state.x_hat + t.l_t * y_k) + t.b_t * u_k
    u_pre = t.r_gain * r_next - float(x_next.sum())
    return replace(state, x_hat=x_next, u_precomputed=u_pre)


@dataclass(frozen=True)
class PidGains:
    """PI or PIDT1 baseline parameters (two-pole-two-zero form for PIDT1)."""

    k_p: float = 0.0
    k_i: float = 0.0
    t_z1: float = 0.0
    t_z2: float = 0.0
    t_1: float = 0.0
    form: str = "PI"

    def __post_init__(self):
        if self.form not in ("PI", "PIDT1"):
            raise InvalidInput(f"unknown controller form {self.form!r}")
        if self.form == "PIDT1" and not self.t_1 > 0.0:
            raise InvalidInput("PIDT1 needs t_1 > 0")


class PiController:
    """Textbook PI with trapezoidal integration, fixed-step invocation."""

    def __init__(self, gains: PidGains, sample_time: float):
        self.gains = gains
        self.sample_time = sample_time
        self._integral = 0.0
        self._e_prev = 0.0
        self.x_hat = None

    def update(self, y: float, r: float, r_next: float) -> float:
        e = r - y
        self._integral += 0.5 * self.sample_time * (e + self._e_prev)
        self._e_prev = e
        return self.gains.k_p * e + self.gains.k_i * self._integral

    def commit(self, u_applied: float) -> None:
        pass


class Pidt1Controller:
    """PIDT1 baseline run as a discretized state-space filter.

    The two-pole-two-zero transfer function is realized in controllable
    canonical form and ZOH-discretized, so the derivative action never
    differentiates the error signal directly.
    """

    def __init__(self, gains: PidGains, sample_time: float):
        if gains.form != "PIDT1":
            raise InvalidInput("gains are not in PIDT1 form")
        self.gains = gains
        self.sample_time = sample_time
        n2 = gains.k_i * gains.t_z1 * gains.t_z2
        n1 = gains.k_i * (gains.t_z1 + gains.t_z2)
        n0 = gains.k_i
        t1 = gains.t_1
        self._feedthrough = n2 / t1
        a = np.array([[0.0, 1.0], [0.0, -1.0 / t1]])
        b = np.array([[0.0], [1.0]])
        c = np.array([[n0 / t1, (n1 - n2 / t1) / t1]])
        d = np.array([[self._feedthrough]])
        disc = zoh_discretize(StateSpaceModel(a, b, c, d), sample_time)
        self._ad = disc.a
        self._bd = disc.b.ravel()
        self._cd = disc.c.ravel()
        self._x = np.zeros(2)
        self.x_hat = None

    def update(self, y: float, r: float, r_next: float) -> float:
        e = r - y
        u = float(self._cd @ self._x) + self._feedthrough * e
        self._x = self._ad @ self._x + self._bd * e
        return u

    def commit(self, u_applied: float) -> None:
        pass


class DiscreteAdrc:
    """Discrete ADRC built on the current observer."""

    def __init__(self, eso: DiscreteEso, delay_steps: int = 0):
        self.eso = eso
        self.state = ControllerState.initial(eso.design.order + 1, delay_steps)

    @property
    def x_hat(self):
        return self.state.x_hat

    def update(self, y: float, r: float, r_next: float) -> float:
        u, self.state = discrete_adrc_update(self.state, self.eso, y, r)
        return u

    def commit(self, u_applied: float) -> None:
        buf = self.state.u_delay_buffer
        if buf.maxlen:
            delayed = buf[0]
            buf.append(u_applied)
            self.state.u_prev = delayed
        else:
            self.state.u_prev = u_applied


class OptimizedAdrc:
    """Latency-optimized discrete ADRC.

    update() only finishes the precomputed output; everything else happens
    in commit(), i.e. after the output is already on its way out.
    """

    def __init__(self, transformed: TransformedEso, initial_reference: float = 0.0):
        self.t = transformed
        self.state = ControllerState.initial(transformed.design.order + 1)
        self.state.u_precomputed = transformed.r_gain * initial_reference
        self._y = 0.0
        self._r_next = initial_reference
        # Back-transform of the filtered estimate, kept for recording only.
        d = transformed.design
        weights = [d.k_p, d.k_d, 1.0] if d.order == 2 else [d.k_p, 1.0]
        self._t_diag = d.b0 / np.array(weights)
        self.x_hat = np.zeros(d.order + 1)

    def update(self, y: float, r: float, r_next: float) -> float:
        self._y = y
        self._r_next = r_next
        return optimized_latency_update(self.state, self.t, y)

    def commit(self, u_applied: float) -> None:
        filtered = self.state.x_hat + self.t.l_t * self._y
        self.x_hat = self._t_diag * filtered
        self.state = optimized_post_step(self.state, self.t, u_applied,
                                         self._y, self._r_next)
