"""Gain design for first- and second-order linear ADRC.

Turns the user-facing tuning knobs (input gain estimate b0, desired 2%
settling time, observer-speed factor) into controller gains and observer
gain vectors, for continuous time and for the discrete current observer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lti import InvalidInput, StateSpaceModel


@dataclass(frozen=True)
class AdrcDesign:
    """Complete gain set for one ADRC instance.

    l_cont places all poles of the continuous observer error dynamics at
    s_eso; k_p (and k_d for order 2) place the closed-loop poles at s_cl.
    """

    order: int
    b0: float
    k_p: float
    k_d: float
    s_cl: float
    s_eso: float
    l_cont: tuple[float, ...]
    k_eso: float

    def observer_model(self) -> StateSpaceModel:
        """Continuous model the observer runs on: an integrator chain of
        length order+1 whose last state is the lumped disturbance."""
        return extended_chain_model(self.order, self.b0)


def extended_chain_model(order: int, b0: float) -> StateSpaceModel:
    """Integrator chain of length order+1 with the input gain b0 entering
    one state above the disturbance state."""
    if order not in (1, 2):
        raise InvalidInput("order must be 1 or 2")
    n = order + 1
    a = np.eye(n, k=1)
    b = np.zeros((n, 1))
    b[order - 1, 0] = b0
    c = np.zeros((1, n))
    c[0, 0] = 1.0
    return StateSpaceModel(a, b, c, np.zeros((1, 1)))


@dataclass(frozen=True)
class DiscreteEsoGains:
    """Correction gains for the discrete current observer.

    All eigenvalues of the resulting error-dynamics matrix sit at z_eso.
    """

    z_eso: float
    l_current: tuple[float, ...]
    sample_time: float


def design_first_order(b0: float, t_settle: float, k_eso: float) -> AdrcDesign:
    """Design a first-order ADRC from b0, settling time and observer factor.

    The closed-loop pole is -4/t_settle (2% settling of a first-order lag)
    and both observer poles go to k_eso times that.
    """
    _check_design_args(b0, t_settle, k_eso)
    s_cl = -4.0 / t_settle
    s_eso = k_eso * s_cl
    l_cont = (-2.0 * s_eso, s_eso * s_eso)
    return AdrcDesign(order=1, b0=b0, k_p=-s_cl, k_d=0.0, s_cl=s_cl,
                      s_eso=s_eso, l_cont=l_cont, k_eso=k_eso)


def design_second_order(b0: float, t_settle: float, k_eso: float) -> AdrcDesign:
    """Design a second-order ADRC (critically damped closed loop).

    Closed-loop double pole at -6/t_settle, triple observer pole at
    k_eso times that.
    """
    _check_design_args(b0, t_settle, k_eso)
    s_cl = -6.0 / t_settle
    s_eso = k_eso * s_cl
    s2 = s_eso * s_eso
    l_cont = (-3.0 * s_eso, 3.0 * s2, -(s2 * s_eso))
    return AdrcDesign(order=2, b0=b0, k_p=s_cl * s_cl, k_d=-2.0 * s_cl,
                      s_cl=s_cl, s_eso=s_eso, l_cont=l_cont, k_eso=k_eso)


def _check_design_args(b0: float, t_settle: float, k_eso: float) -> None:
    if b0 == 0.0:
        raise InvalidInput("b0 must be nonzero (the control law divides by it)")
    if not t_settle > 0.0:
        raise InvalidInput("t_settle must be > 0")
    if not k_eso >= 1.0:
        raise InvalidInput("k_eso must be >= 1 (observer at least as fast as the loop)")


def map_pole_to_z(s_eso: float, sample_time: float) -> float:
    """Map a continuous pole to the z-plane for the given sample time."""
    if not sample_time > 0.0:
        raise InvalidInput("sample_time must be > 0")
    return math.exp(s_eso * sample_time)


def _check_z(z_eso: float) -> None:
    # z == 0 is the deadbeat limit and perfectly usable; negative z has no
    # continuous counterpart and z > 1 would make the observer unstable.
    if z_eso < 0.0 or z_eso > 1.0:
        raise InvalidInput("z_eso must lie in [0, 1]")


def discrete_gains_first(z_eso: float, sample_time: float) -> DiscreteEsoGains:
    """Current-observer gains for order 1, both poles at z_eso.

    l1 = 1 - z^2 and l2 = (1 - z)^2 / Ts; this is the variant that places
    the eigenvalues of the error-dynamics matrix exactly (the tests check
    against that identity rather than any transcribed formula).
    """
    if not sample_time > 0.0:
        raise InvalidInput("sample_time must be > 0")
    _check_z(z_eso)
    one_minus = 1.0 - z_eso
    l = (1.0 - z_eso * z_eso, one_minus * one_minus / sample_time)
    return DiscreteEsoGains(z_eso=z_eso, l_current=l, sample_time=sample_time)


def discrete_gains_second(z_eso: float, sample_time: float) -> DiscreteEsoGains:
    """Current-observer gains for order 2, all three poles at z_eso."""
    if not sample_time > 0.0:
        raise InvalidInput("sample_time must be > 0")
    _check_z(z_eso)
    z2 = z_eso * z_eso
    one_minus = 1.0 - z_eso
    om2 = one_minus * one_minus
    l = (
        1.0 - z2 * z_eso,
        1.5 * om2 * (1.0 + z_eso) / sample_time,
        om2 * one_minus / (sample_time * sample_time),
    )
    return DiscreteEsoGains(z_eso=z_eso, l_current=l, sample_time=sample_time)


def discrete_gains_for(design: AdrcDesign, sample_time: float) -> DiscreteEsoGains:
    """Map a continuous design to current-observer gains at sample_time."""
    z = map_pole_to_z(design.s_eso, sample_time)
    if design.order == 1:
        return discrete_gains_first(z, sample_time)
    return discrete_gains_second(z, sample_time)
