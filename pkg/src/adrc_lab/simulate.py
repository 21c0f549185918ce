"""Deterministic fixed-step closed-loop simulation.

Plants are small continuous LTI models integrated with classic RK4 at a
fixed sub-step. Sampled controllers (discrete ADRC, PI, PIDT1) run at
their own sample time with outputs held between samples; the continuous
ADRC is co-integrated with the plant inside the same RK4 step so that the
loop keeps the integrator's full order of accuracy.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .controllers import (
    DiscreteAdrc,
    OptimizedAdrc,
    PidGains,
    PiController,
    Pidt1Controller,
    assemble_discrete_eso,
    build_transformed,
)
from .design import AdrcDesign, design_first_order, design_second_order, discrete_gains_for
from .lti import InvalidInput, StateSpaceModel

STATE_ABORT_THRESHOLD = 1e9

PLANT_KINDS = ("first_order", "second_order", "integrator")
CONTROLLER_KINDS = ("adrc_continuous", "adrc_discrete", "adrc_optimized", "pi", "pid")


class SimulationDiverged(RuntimeError):
    """Loop state exceeded the abort threshold (closed loop unstable)."""


@dataclass(frozen=True)
class PlantSpec:
    """Description of one LTI test plant, plus optional dead time and an
    optional extra series lag (unit DC gain) for structural-uncertainty
    studies."""

    kind: str
    K: float = 1.0
    T: float = 1.0
    D: float = 1.0
    K_I: float = 1.0
    extra_pole_T: float = 0.0
    dead_time: float = 0.0

    def __post_init__(self):
        if self.kind not in PLANT_KINDS:
            raise InvalidInput(f"unknown plant kind {self.kind!r}")
        if self.kind in ("first_order", "second_order") and not self.T > 0.0:
            raise InvalidInput("plant time constant T must be > 0")
        if self.extra_pole_T < 0.0:
            raise InvalidInput("extra_pole_T must be >= 0")
        if self.dead_time < 0.0:
            raise InvalidInput("dead_time must be >= 0")


@dataclass(frozen=True)
class ControllerConfig:
    """Controller selection plus its parameters.

    ADRC kinds use (order, b0, t_settle, k_eso); pi/pid use gains.
    t_dead_eso delays the controller output fed back into the observer,
    for plants with known dead time.
    """

    kind: str
    order: int = 1
    b0: float = 1.0
    t_settle: float = 1.0
    k_eso: float = 10.0
    t_dead_eso: float = 0.0
    gains: PidGains | None = None

    def __post_init__(self):
        if self.kind not in CONTROLLER_KINDS:
            raise InvalidInput(f"unknown controller kind {self.kind!r}")
        if self.kind in ("pi", "pid") and self.gains is None:
            raise InvalidInput(f"{self.kind} controller needs gains")
        if self.kind.startswith("adrc") and self.order not in (1, 2):
            raise InvalidInput("ADRC order must be 1 or 2")

    def design(self) -> AdrcDesign | None:
        if not self.kind.startswith("adrc"):
            return None
        if self.order == 1:
            return design_first_order(self.b0, self.t_settle, self.k_eso)
        return design_second_order(self.b0, self.t_settle, self.k_eso)


Schedule = tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class Scenario:
    """Declarative description of one closed-loop experiment."""

    plant: PlantSpec
    controller: ControllerConfig
    reference: Schedule = ((0.0, 1.0),)
    input_disturbance: Schedule = ()
    saturation_limit: float | None = None
    noise_variance: float = 0.0
    noise_seed: int = 1
    sim_step: float = 1e-3
    controller_sample_time: float | None = None
    horizon: float = 6.0

    def __post_init__(self):
        if not self.horizon > 0.0:
            raise InvalidInput("horizon must be > 0")
        if not self.sim_step > 0.0:
            raise InvalidInput("sim_step must be > 0")
        if self.saturation_limit is not None and not self.saturation_limit > 0.0:
            raise InvalidInput("saturation_limit must be > 0")
        if self.noise_variance < 0.0:
            raise InvalidInput("noise_variance must be >= 0")
        object.__setattr__(self, "reference",
                           tuple((float(t), float(v)) for t, v in self.reference))
        object.__setattr__(self, "input_disturbance",
                           tuple((float(t), float(v)) for t, v in self.input_disturbance))

    @property
    def sample_time(self) -> float:
        return self.controller_sample_time if self.controller_sample_time is not None \
            else self.sim_step

    def steps_per_sample(self) -> int:
        ns = round(self.sample_time / self.sim_step)
        if ns < 1 or abs(ns * self.sim_step - self.sample_time) > 1e-9:
            raise InvalidInput(
                "controller_sample_time must be an integer multiple of sim_step")
        return ns


@dataclass
class Trajectory:
    """Uniformly sampled record of one closed-loop run."""

    t: np.ndarray
    r: np.ndarray
    y: np.ndarray
    y_clean: np.ndarray
    u_raw: np.ndarray
    u_lim: np.ndarray
    x_hat: np.ndarray | None = None

    def column_names(self) -> list[str]:
        names = ["t", "r", "y", "y_clean", "u_raw", "u_lim"]
        if self.x_hat is not None:
            names += [f"xhat{i + 1}" for i in range(self.x_hat.shape[1])]
        return names

    def write_csv(self, path) -> None:
        cols = [self.t, self.r, self.y, self.y_clean, self.u_raw, self.u_lim]
        if self.x_hat is not None:
            cols += [self.x_hat[:, i] for i in range(self.x_hat.shape[1])]
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(self.column_names()) + "\n")
            for k in range(len(self.t)):
                fh.write(",".join("%.10g" % col[k] for col in cols) + "\n")

    @staticmethod
    def read_csv(path) -> "Trajectory":
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            data = np.array([[float(v) for v in line.split(",")]
                             for line in fh if line.strip()])
        base = {name: data[:, header.index(name)]
                for name in ("t", "r", "y", "y_clean", "u_raw", "u_lim")}
        xhat_cols = [i for i, name in enumerate(header) if name.startswith("xhat")]
        x_hat = data[:, xhat_cols] if xhat_cols else None
        return Trajectory(x_hat=x_hat, **base)


def gaussian_noise(seed: int, n: int, variance: float = 1.0) -> np.ndarray:
    """Reproducible Gaussian samples: splitmix64 stream fed through
    Box-Muller pairs, scaled to the requested variance."""
    if n < 0:
        raise InvalidInput("n must be >= 0")
    if variance < 0.0:
        raise InvalidInput("variance must be >= 0")
    if n == 0:
        return np.zeros(0)
    if variance == 0.0:
        return np.zeros(n)
    pairs = (n + 1) // 2
    raw = _splitmix64(seed, 2 * pairs)
    u1 = ((raw >> np.uint64(11))[0::2] + np.uint64(1)).astype(np.float64) * 2.0 ** -53
    u2 = (raw >> np.uint64(11))[1::2].astype(np.float64) * 2.0 ** -53
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    z = np.empty(2 * pairs)
    z[0::2] = radius * np.cos(angle)
    z[1::2] = radius * np.sin(angle)
    return math.sqrt(variance) * z[:n]


def _splitmix64(seed: int, count: int) -> np.ndarray:
    golden = np.uint64(0x9E3779B97F4A7C15)
    state0 = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    z = state0 + np.arange(1, count + 1, dtype=np.uint64) * golden
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def build_plant(spec: PlantSpec, sim_step: float) -> tuple[StateSpaceModel, int]:
    """Continuous realization of a plant spec plus its dead time expressed
    in integer sub-steps."""
    if spec.kind == "first_order":
        a = [[-1.0 / spec.T]]
        b = [[spec.K / spec.T]]
        c = [[1.0]]
    elif spec.kind == "second_order":
        a = [[0.0, 1.0], [-1.0 / (spec.T * spec.T), -2.0 * spec.D / spec.T]]
        b = [[0.0], [spec.K / (spec.T * spec.T)]]
        c = [[1.0, 0.0]]
    else:
        a = [[0.0]]
        b = [[spec.K_I]]
        c = [[1.0]]
    if spec.extra_pole_T > 0.0:
        # Series unit-gain lag in front of the base plant.
        n = len(a)
        te = spec.extra_pole_T
        a = [row + [b[i][0]] for i, row in enumerate(a)]
        a.append([0.0] * n + [-1.0 / te])
        b = [[0.0]] * n + [[1.0 / te]]
        c = [row + [0.0] for row in c]
    model = StateSpaceModel(np.array(a), np.array(b), np.array(c),
                            np.zeros((1, 1)))
    delay_steps = int(round(spec.dead_time / sim_step))
    return model, delay_steps


def _plant_sub_cycles(spec: PlantSpec, sim_step: float) -> int:
    # A very fast extra lag needs a finer step to keep RK4 accurate.
    if spec.extra_pole_T > 0.0 and spec.extra_pole_T < 10.0 * sim_step:
        return 10
    return 1


class _ScheduleCursor:
    """Piecewise-constant schedule lookup for monotonically increasing t."""

    __slots__ = ("times", "values", "idx")

    def __init__(self, schedule: Schedule):
        self.times = [t for t, _ in schedule]
        self.values = [v for _, v in schedule]
        self.idx = -1

    def value_at(self, t: float) -> float:
        while self.idx + 1 < len(self.times) and self.times[self.idx + 1] <= t + 1e-9:
            self.idx += 1
        return self.values[self.idx] if self.idx >= 0 else 0.0


def _schedule_value(schedule: Schedule, t: float) -> float:
    value = 0.0
    for when, v in schedule:
        if when <= t + 1e-9:
            value = v
    return value


def _rows(matrix: np.ndarray) -> tuple:
    return tuple(tuple(float(v) for v in row) for row in matrix)


def _check_state(x, t: float) -> None:
    for v in x:
        if not (-STATE_ABORT_THRESHOLD <= v <= STATE_ABORT_THRESHOLD):
            raise SimulationDiverged(
                f"state magnitude exceeded {STATE_ABORT_THRESHOLD:g} at t={t:.6f}")


def _rk4_step(rhs, x: list, h: float) -> list:
    n = len(x)
    k1 = rhs(x)
    k2 = rhs([x[j] + 0.5 * h * k1[j] for j in range(n)])
    k3 = rhs([x[j] + 0.5 * h * k2[j] for j in range(n)])
    k4 = rhs([x[j] + h * k3[j] for j in range(n)])
    sixth = h / 6.0
    return [x[j] + sixth * (k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j]) for j in range(n)]


def simulate_plant(model: StateSpaceModel, u_schedule: Schedule, sim_step: float,
                   horizon: float, delay_steps: int = 0,
                   sub_cycles: int = 1) -> Trajectory:
    """Open-loop run: a piecewise-constant input through the plant alone.

    Used by the fidelity checks; shares the RK4 stepper with the closed
    loop.
    """
    nsteps = round(horizon / sim_step)
    a_rows = _rows(model.a)
    b_col = tuple(float(v) for v in model.b[:, 0])
    c_row = tuple(float(v) for v in model.c[0])
    n = model.n
    x = [0.0] * n
    fifo = deque([0.0] * delay_steps, maxlen=delay_steps or None)
    cursor = _ScheduleCursor(u_schedule)
    t_out = np.empty(nsteps + 1)
    y_out = np.empty(nsteps + 1)
    u_out = np.empty(nsteps + 1)
    h_sub = sim_step / sub_cycles
    for i in range(nsteps + 1):
        t = i * sim_step
        u = cursor.value_at(t)
        t_out[i] = t
        y_out[i] = sum(c_row[j] * x[j] for j in range(n))
        u_out[i] = u
        if i == nsteps:
            break
        if delay_steps:
            u_eff = fifo.popleft()
            fifo.append(u)
        else:
            u_eff = u

        def rhs(s, u_eff=u_eff):
            return [sum(a_rows[p][q] * s[q] for q in range(n)) + b_col[p] * u_eff
                    for p in range(n)]

        for _ in range(sub_cycles):
            x = _rk4_step(rhs, x, h_sub)
        _check_state(x, t + sim_step)
    return Trajectory(t=t_out, r=np.zeros(nsteps + 1), y=y_out.copy(),
                      y_clean=y_out, u_raw=u_out, u_lim=u_out.copy())


def run_closed_loop(scenario: Scenario) -> Trajectory:
    """Run one scenario and record the full trajectory at sim_step."""
    model, delay_steps = build_plant(scenario.plant, scenario.sim_step)
    if scenario.controller.kind == "adrc_continuous":
        return _run_continuous(scenario, model, delay_steps)
    return _run_sampled(scenario, model, delay_steps)


def _run_continuous(scn: Scenario, model: StateSpaceModel,
                    delay_steps: int) -> Trajectory:
    h = scn.sim_step
    if scn.controller_sample_time is not None and scn.steps_per_sample() != 1:
        raise InvalidInput("continuous ADRC runs at the simulation step")
    nsteps = round(scn.horizon / h)
    design = scn.controller.design()
    order = design.order
    b0 = design.b0
    k_p = design.k_p
    k_d = design.k_d
    l = design.l_cont
    limit = scn.saturation_limit
    sub_cycles = _plant_sub_cycles(scn.plant, h)
    h_sub = h / sub_cycles

    a_rows = _rows(model.a)
    b_col = tuple(float(v) for v in model.b[:, 0])
    c_row = tuple(float(v) for v in model.c[0])
    n_p = model.n
    n_o = order + 1

    ref = _ScheduleCursor(scn.reference)
    dist = _ScheduleCursor(scn.input_disturbance)
    noise = gaussian_noise(scn.noise_seed, nsteps + 1, scn.noise_variance)

    eso_delay = int(round(scn.controller.t_dead_eso / h))
    plant_fifo = deque([0.0] * delay_steps, maxlen=delay_steps or None)
    eso_fifo = deque([0.0] * eso_delay, maxlen=eso_delay or None)

    xp = [0.0] * n_p
    xh = [0.0] * n_o

    t_out = np.empty(nsteps + 1)
    r_out = np.empty(nsteps + 1)
    y_out = np.empty(nsteps + 1)
    yc_out = np.empty(nsteps + 1)
    uraw_out = np.empty(nsteps + 1)
    ulim_out = np.empty(nsteps + 1)
    xhat_out = np.empty((nsteps + 1, n_o))

    def law(state_hat, r):
        if order == 1:
            return (k_p * (r - state_hat[0]) - state_hat[1]) / b0
        return (k_p * (r - state_hat[0]) - k_d * state_hat[1] - state_hat[2]) / b0

    for i in range(nsteps + 1):
        t = i * h
        r_i = ref.value_at(t)
        d_i = dist.value_at(t)
        nz = noise[i]
        y_c = sum(c_row[j] * xp[j] for j in range(n_p))
        u_raw = law(xh, r_i)
        u_lim = u_raw if limit is None else min(limit, max(-limit, u_raw))

        t_out[i] = t
        r_out[i] = r_i
        y_out[i] = y_c + nz
        yc_out[i] = y_c
        uraw_out[i] = u_raw
        ulim_out[i] = u_lim
        for j in range(n_o):
            xhat_out[i, j] = xh[j]
        if i == nsteps:
            break

        if delay_steps:
            plant_delayed = plant_fifo.popleft()
            plant_fifo.append(u_lim)
        else:
            plant_delayed = None
        if eso_delay:
            eso_delayed = eso_fifo.popleft()
            eso_fifo.append(u_lim)
        else:
            eso_delayed = None

        def rhs(x):
            y_stage = sum(c_row[j] * x[j] for j in range(n_p))
            u = law(x[n_p:], r_i)
            if limit is not None:
                u = min(limit, max(-limit, u))
            u_plant = (u if plant_delayed is None else plant_delayed) + d_i
            u_eso = u if eso_delayed is None else eso_delayed
            dx = [sum(a_rows[p][q] * x[q] for q in range(n_p)) + b_col[p] * u_plant
                  for p in range(n_p)]
            e = (y_stage + nz) - x[n_p]
            if order == 1:
                dx.append(x[n_p + 1] + b0 * u_eso + l[0] * e)
                dx.append(l[1] * e)
            else:
                dx.append(x[n_p + 1] + l[0] * e)
                dx.append(x[n_p + 2] + b0 * u_eso + l[1] * e)
                dx.append(l[2] * e)
            return dx

        x = xp + xh
        for _ in range(sub_cycles):
            x = _rk4_step(rhs, x, h_sub)
        _check_state(x, t + h)
        xp = x[:n_p]
        xh = x[n_p:]

    return Trajectory(t=t_out, r=r_out, y=y_out, y_clean=yc_out,
                      u_raw=uraw_out, u_lim=ulim_out, x_hat=xhat_out)


def _make_sampled_controller(scn: Scenario):
    cfg = scn.controller
    ts = scn.sample_time
    if cfg.kind == "pi":
        return PiController(cfg.gains, ts)
    if cfg.kind == "pid":
        return Pidt1Controller(cfg.gains, ts)
    design = cfg.design()
    gains = discrete_gains_for(design, ts)
    if cfg.kind == "adrc_discrete":
        delay = int(round(cfg.t_dead_eso / ts))
        return DiscreteAdrc(assemble_discrete_eso(design, gains), delay)
    transformed = build_transformed(design, gains)
    r0 = _schedule_value(scn.reference, 0.0)
    return OptimizedAdrc(transformed, initial_reference=r0)


def _run_sampled(scn: Scenario, model: StateSpaceModel,
                 delay_steps: int) -> Trajectory:
    h = scn.sim_step
    ns = scn.steps_per_sample()
    nsteps = round(scn.horizon / h)
    limit = scn.saturation_limit
    sub_cycles = _plant_sub_cycles(scn.plant, h)
    h_sub = h / sub_cycles

    a_rows = _rows(model.a)
    b_col = tuple(float(v) for v in model.b[:, 0])
    c_row = tuple(float(v) for v in model.c[0])
    n_p = model.n

    controller = _make_sampled_controller(scn)
    has_xhat = controller.x_hat is not None
    n_o = len(controller.x_hat) if has_xhat else 0

    ref = _ScheduleCursor(scn.reference)
    dist = _ScheduleCursor(scn.input_disturbance)
    n_samples = nsteps // ns + 1
    noise = gaussian_noise(scn.noise_seed, n_samples, scn.noise_variance)

    plant_fifo = deque([0.0] * delay_steps, maxlen=delay_steps or None)
    xp = [0.0] * n_p

    t_out = np.empty(nsteps + 1)
    r_out = np.empty(nsteps + 1)
    y_out = np.empty(nsteps + 1)
    yc_out = np.empty(nsteps + 1)
    uraw_out = np.empty(nsteps + 1)
    ulim_out = np.empty(nsteps + 1)
    xhat_out = np.empty((nsteps + 1, n_o)) if has_xhat else None

    held_u_raw = 0.0
    held_u_lim = 0.0
    held_noise = 0.0

    for i in range(nsteps + 1):
        t = i * h
        r_i = ref.value_at(t)
        y_c = sum(c_row[j] * xp[j] for j in range(n_p))
        if i % ns == 0:
            k = i // ns
            held_noise = noise[k]
            y_meas = y_c + held_noise
            r_next = _schedule_value(scn.reference, t + scn.sample_time)
            u_raw = controller.update(y_meas, r_i, r_next)
            u_lim = u_raw if limit is None else min(limit, max(-limit, u_raw))
            controller.commit(u_lim)
            held_u_raw = u_raw
            held_u_lim = u_lim

        t_out[i] = t
        r_out[i] = r_i
        y_out[i] = y_c + held_noise
        yc_out[i] = y_c
        uraw_out[i] = held_u_raw
        ulim_out[i] = held_u_lim
        if has_xhat:
            for j in range(n_o):
                xhat_out[i, j] = controller.x_hat[j]
        if i == nsteps:
            break

        if delay_steps:
            u_eff = plant_fifo.popleft()
            plant_fifo.append(held_u_lim)
        else:
            u_eff = held_u_lim
        u_in = u_eff + dist.value_at(t)

        def rhs(s, u_in=u_in):
            return [sum(a_rows[p][q] * s[q] for q in range(n_p)) + b_col[p] * u_in
                    for p in range(n_p)]

        for _ in range(sub_cycles):
            xp = _rk4_step(rhs, xp, h_sub)
        _check_state(xp, t + h)

    return Trajectory(t=t_out, r=r_out, y=y_out, y_clean=yc_out,
                      u_raw=uraw_out, u_lim=ulim_out, x_hat=xhat_out)
