"""Small dense state-space kernel.

Everything in this package works with models of at most four states, so
characteristic polynomials and determinants are evaluated in closed form
instead of calling an iterative eigensolver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_STATES = 4
MAX_INPUTS = 2
MAX_OUTPUTS = 1

_ZOH_REL_TOL = 1e-15
_ZOH_MAX_TERMS = 64


class InvalidInput(ValueError):
    """An argument violated an operation's contract."""


def _as_matrix(value, name: str) -> np.ndarray:
    m = np.atleast_2d(np.asarray(value, dtype=float))
    if not np.all(np.isfinite(m)):
        raise InvalidInput(f"{name} contains non-finite entries")
    return m


@dataclass(frozen=True)
class StateSpaceModel:
    """LTI model (a, b, c, d); continuous when sample_time is None."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    sample_time: float | None = None

    def __post_init__(self):
        a = _as_matrix(self.a, "a")
        b = _as_matrix(self.b, "b")
        c = _as_matrix(self.c, "c")
        d = _as_matrix(self.d, "d")
        n = a.shape[0]
        if a.shape != (n, n):
            raise InvalidInput("a must be square")
        if n > MAX_STATES:
            raise InvalidInput(f"at most {MAX_STATES} states supported, got {n}")
        if b.shape[0] != n or b.shape[1] > MAX_INPUTS:
            raise InvalidInput("b has incompatible shape")
        if c.shape[1] != n or c.shape[0] > MAX_OUTPUTS:
            raise InvalidInput("c has incompatible shape")
        if d.shape != (c.shape[0], b.shape[1]):
            raise InvalidInput("d has incompatible shape")
        if self.sample_time is not None and not self.sample_time > 0.0:
            raise InvalidInput("discrete models need sample_time > 0")
        for field, mat in (("a", a), ("b", b), ("c", c), ("d", d)):
            object.__setattr__(self, field, mat)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def is_discrete(self) -> bool:
        return self.sample_time is not None


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial; coefficients ordered highest degree first."""

    coefficients: tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        if not coeffs:
            raise InvalidInput("polynomial needs at least one coefficient")
        if len(coeffs) > MAX_STATES + 1:
            raise InvalidInput("degree above 4 not supported")
        if not all(np.isfinite(c) for c in coeffs):
            raise InvalidInput("polynomial coefficients must be finite")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def normalized(self) -> "Polynomial":
        """Return the monic version (leading coefficient scaled to one)."""
        lead = self.coefficients[0]
        if lead == 0.0:
            raise InvalidInput("leading coefficient is zero")
        if lead == 1.0:
            return self
        return Polynomial(tuple(c / lead for c in self.coefficients))

    def __call__(self, s: float) -> float:
        acc = 0.0
        for c in self.coefficients:
            acc = acc * s + c
        return acc

    @staticmethod
    def from_single_root(root: float, degree: int) -> "Polynomial":
        """Monic polynomial (s - root)**degree, expanded in closed form."""
        r = float(root)
        if degree == 1:
            return Polynomial((1.0, -r))
        if degree == 2:
            return Polynomial((1.0, -2.0 * r, r * r))
        if degree == 3:
            r2 = r * r
            return Polynomial((1.0, -3.0 * r, 3.0 * r2, -(r2 * r)))
        if degree == 4:
            r2 = r * r
            return Polynomial((1.0, -4.0 * r, 6.0 * r2, -4.0 * (r2 * r), r2 * r2))
        raise InvalidInput(f"unsupported degree {degree}")


def zoh_discretize(model: StateSpaceModel, sample_time: float) -> StateSpaceModel:
    """Discretize a continuous model under a zero-order hold.

    The transition matrix and input map are built from the exponential
    series; summation stops once a term vanishes exactly (nilpotent a,
    the common case here) or drops below 1e-15 relative to the sums.
    """
    if model.is_discrete:
        raise InvalidInput("model is already discrete")
    if not sample_time > 0.0:
        raise InvalidInput("sample_time must be > 0")
    n = model.n
    a = model.a
    # u_i accumulates A^(i-1) Ts^i / i!; the matching Ad term is a @ u_i.
    u = np.eye(n) * sample_time
    b_factor = u.copy()
    ad = np.eye(n) + a @ u
    for i in range(2, _ZOH_MAX_TERMS + 1):
        u = (u @ a) * (sample_time / i)
        t = a @ u
        ad += t
        b_factor += u
        scale = max(1.0, np.abs(ad).max(), np.abs(b_factor).max())
        if max(np.abs(t).max(), np.abs(u).max()) <= _ZOH_REL_TOL * scale:
            break
    return StateSpaceModel(ad, b_factor @ model.b, model.c, model.d,
                           sample_time=sample_time)


def characteristic_polynomial(m) -> Polynomial:
    """Monic characteristic polynomial det(sI - m) for n in {1, 2, 3}.

    Coefficients come from the closed-form trace / principal-minor /
    determinant expansion, so no iteration tolerance is involved.
    """
    m = _as_matrix(m, "m")
    n = m.shape[0]
    if m.shape != (n, n) or n not in (1, 2, 3):
        raise InvalidInput("expected a square matrix with 1 to 3 states")
    if n == 1:
        return Polynomial((1.0, -m[0, 0]))
    if n == 2:
        return Polynomial((
            1.0,
            -(m[0, 0] + m[1, 1]),
            m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0],
        ))
    c1 = -(m[0, 0] + m[1, 1] + m[2, 2])
    c2 = (
        (m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
        + (m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0])
        + (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
    )
    det = (
        m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
        - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
        + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0])
    )
    return Polynomial((1.0, c1, c2, -det))


def poly_roots_all_equal(p: Polynomial, expected_root: float, tol: float) -> bool:
    """True iff p matches (s - expected_root)**degree coefficient-wise."""
    if p.degree > 3:
        raise InvalidInput("degree above 3 not supported")
    target = Polynomial.from_single_root(expected_root, p.degree)
    return all(
        abs(a - b) <= tol
        for a, b in zip(p.coefficients, target.coefficients)
    )
