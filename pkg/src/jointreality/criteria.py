"""Joint-reality constraints and the linear / determinant no-go criteria.

Expectations enter as an :class:`ExpectationQuartet` of the observables
A (sigma_x) and B (sigma_z) on the four ensembles eps_+, eps_-, eps'_+,
eps'_-. Both criteria accept arbitrary quartets, not only the ideal family,
so that measured data can be fed in directly.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .bloch import (
    EnsembleQuartet,
    Observable,
    ensemble_quartet,
    expectation,
    family_parameters,
)


class Region(enum.Enum):
    FORCES_ABOVE = "forces_above"
    FORCES_BELOW = "forces_below"
    UNCONSTRAINED = "unconstrained"


@dataclass(frozen=True)
class ExpectationQuartet:
    a_ep: float
    b_ep: float
    a_em: float
    b_em: float
    a_epp: float
    b_epp: float
    a_epm: float
    b_epm: float

    def __post_init__(self):
        for name, value in zip(self.field_names(), self.as_tuple()):
            if not -1.0 - 1e-12 <= value <= 1.0 + 1e-12 or math.isnan(value):
                raise ValueError(f"{name} = {value!r} is outside [-1, 1]")

    @staticmethod
    def field_names() -> tuple[str, ...]:
        return ("a_ep", "b_ep", "a_em", "b_em", "a_epp", "b_epp", "a_epm", "b_epm")

    def as_tuple(self) -> tuple[float, ...]:
        return (
            self.a_ep, self.b_ep, self.a_em, self.b_em,
            self.a_epp, self.b_epp, self.a_epm, self.b_epm,
        )

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=float)

    @classmethod
    def from_array(cls, arr) -> "ExpectationQuartet":
        return cls(*(float(v) for v in arr))

    def points(self) -> np.ndarray:
        """(A, B) coordinates of eps_+, eps_-, eps'_+, eps'_- as a (4, 2) array."""
        return self.as_array().reshape(4, 2)

    @classmethod
    def from_ensembles(cls, quartet: EnsembleQuartet) -> "ExpectationQuartet":
        vals = []
        for state in quartet.states:
            vals.append(expectation(state, Observable.A))
            vals.append(expectation(state, Observable.B))
        return cls(*vals)


@dataclass(frozen=True)
class SignChoice:
    p: int
    q: int
    r: int
    s: int

    def __post_init__(self):
        if any(v not in (-1, 1) for v in self.as_tuple()):
            raise ValueError("sign entries must be +1 or -1")
        if self.p * self.q * self.r * self.s != -1:
            raise ValueError("sign choice must satisfy p*q*r*s = -1")

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.p, self.q, self.r, self.s)

    def negated(self) -> "SignChoice":
        return SignChoice(-self.p, -self.q, -self.r, -self.s)

    def __str__(self) -> str:
        return "".join("+" if v > 0 else "-" for v in self.as_tuple())


SIGN_CHOICES: tuple[SignChoice, ...] = tuple(
    SignChoice(*v)
    for v in itertools.product((1, -1), repeat=4)
    if v[0] * v[1] * v[2] * v[3] == -1
)
_SIGN_ARRAY = np.array([s.as_tuple() for s in SIGN_CHOICES], dtype=np.float64)


@dataclass(frozen=True)
class CriterionReport:
    ell: float
    ell_argmax_c: float
    tau: float
    tau_argmax: SignChoice

    @property
    def violated_linear(self) -> bool:
        return self.ell > 0.0

    @property
    def violated_nonlinear(self) -> bool:
        return self.tau > 0.0


def _check_c(c: float) -> None:
    if not -1.0 < c < 1.0:
        raise ValueError(f"c must lie in the open interval (-1, 1), got {c!r}")


def constraint_region(expA: float, expB: float, c: float) -> Region:
    """Classify (<A>, <B>) by what joint reality forces on <AB> relative to c."""
    _check_c(c)
    s, d = expA + expB, expA - expB
    if s > 1.0 + c or s < -1.0 - c:
        return Region.FORCES_ABOVE
    if d > 1.0 - c or d < -1.0 + c:
        return Region.FORCES_BELOW
    return Region.UNCONSTRAINED


def linear_terms(q: ExpectationQuartet, c: float) -> tuple[float, float, float, float]:
    return (
        q.a_ep + q.b_ep - 1.0 - c,
        -q.a_em - q.b_em - 1.0 - c,
        q.a_epp - q.b_epp - 1.0 + c,
        -q.a_epm + q.b_epm - 1.0 + c,
    )


def linear_criterion(q: ExpectationQuartet, c: float) -> float:
    """ell_c; a positive value rules out joint reality."""
    _check_c(c)
    return min(linear_terms(q, c))


def linear_criterion_max(q: ExpectationQuartet) -> tuple[float, float]:
    """Maximise ell_c over c in closed form.

    ell_c = min(D - c, I + c) with D, I the c-free parts of the decreasing
    and increasing terms, so the optimum sits at c = (D - I)/2. When that
    crossing falls outside (-1, 1) the supremum is taken at the clipped
    endpoint.
    """
    ell, c_star = kernels.ell_batch(q.as_array()[None, :])
    return float(ell[0]), float(c_star[0])


def determinant(q: ExpectationQuartet, sign: SignChoice) -> float:
    """The 4x4 determinant for one sign choice, by cofactor expansion."""
    p, qq, r, s = sign.as_tuple()
    a = (q.a_ep, q.a_epp, q.a_epm, q.a_em)
    b = (q.b_ep, q.b_epp, q.b_epm, q.b_em)
    c = (
        p * q.a_ep + qq * q.b_ep - 1.0,
        r * q.a_epp + s * q.b_epp + 1.0,
        -r * q.a_epm - s * q.b_epm + 1.0,
        -p * q.a_em - qq * q.b_em - 1.0,
    )
    return _det4(a, b, c)


def _det4(a, b, c) -> float:
    # expansion along the column of ones, each 3x3 minor by its first row
    rows = [(a[i], b[i], c[i]) for i in range(4)]
    total = 0.0
    for i in range(4):
        m = [rows[k] for k in range(4) if k != i]
        minor = (
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        )
        total += (-1.0) ** (i + 3) * minor
    return total


def nonlinear_criterion(q: ExpectationQuartet) -> tuple[float, SignChoice]:
    """tau = max of the determinant over the eight sign choices with pqrs = -1."""
    tau, idx = kernels.tau_batch(q.as_array()[None, :], _SIGN_ARRAY)
    return float(tau[0]), SIGN_CHOICES[int(idx[0])]


def evaluate(q: ExpectationQuartet) -> CriterionReport:
    ell, c_star = linear_criterion_max(q)
    tau, best = nonlinear_criterion(q)
    return CriterionReport(ell=ell, ell_argmax_c=c_star, tau=tau, tau_argmax=best)


def evaluate_batch(quartets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised (ell, tau) for an (n, 8) array of quartets."""
    quartets = np.asarray(quartets, dtype=np.float64)
    ell, _ = kernels.ell_batch(quartets)
    tau, _ = kernels.tau_batch(quartets, _SIGN_ARRAY)
    return ell, tau


def _check_theta_mu(theta: float, mu: float) -> None:
    if not 0.0 <= theta <= math.pi / 2 + 1e-15:
        raise ValueError(f"theta must lie in [0, pi/2], got {theta!r}")
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"mu must lie in [0, 1], got {mu!r}")


def ell_theta_mu(theta: float, mu: float) -> float:
    """Closed-form maximal linear violation for the family under dephasing."""
    _check_theta_mu(theta, mu)
    m_plus, _, delta = family_parameters(theta)
    return -mu * m_plus + delta - 1.0


def tau_theta_mu(theta: float, mu: float) -> float:
    """Closed-form maximal determinant violation for the family under dephasing."""
    _check_theta_mu(theta, mu)
    _, _, delta = family_parameters(theta)
    s2 = math.sin(theta) ** 2
    return 4.0 * delta * (1.0 - mu) * (-mu * s2 + delta * (delta - 1.0))


def ell_threshold(theta: float) -> float:
    """Dephasing factor beyond which the family stops violating the linear test."""
    m_plus, _, delta = family_parameters(theta)
    return (delta - 1.0) / m_plus


def tau_threshold(theta: float) -> float:
    """Dephasing factor beyond which the family stops violating the determinant test."""
    _, _, delta = family_parameters(theta)
    return delta * (delta - 1.0) / math.sin(theta) ** 2


def family_quartet(theta: float, mu: float = 0.0) -> ExpectationQuartet:
    """Expectations of the dephased ensemble family."""
    return ExpectationQuartet.from_ensembles(ensemble_quartet(theta).dephased(mu))
