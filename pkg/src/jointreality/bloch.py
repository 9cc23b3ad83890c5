"""Qubit preparations as Bloch vectors.

Only the operations the no-go tests need are modelled: projective
expectations along the coordinate axes, the z-dephasing channel, the
microwave rotation gate and the one-parameter ensemble family used in the
experiment.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

TOL = 1e-9


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    @classmethod
    def from_array(cls, arr) -> "BlochVector":
        x, y, z = (float(v) for v in arr)
        return cls(x, y, z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def is_physical(self, tol: float = TOL) -> bool:
        return self.x * self.x + self.y * self.y + self.z * self.z <= 1.0 + tol

    def __add__(self, other: "BlochVector") -> "BlochVector":
        return BlochVector(self.x + other.x, self.y + other.y, self.z + other.z)

    def scale(self, k: float) -> "BlochVector":
        return BlochVector(k * self.x, k * self.y, k * self.z)


class Observable(enum.Enum):
    """Pauli observables; the value is the label used in tables and CSVs."""

    A = "x"  # sigma_x
    Y = "y"  # sigma_y
    B = "z"  # sigma_z

    @property
    def axis(self) -> tuple[float, float, float]:
        return _AXES[self]

    @classmethod
    def from_label(cls, label: str) -> "Observable":
        return cls(label)


_AXES = {
    Observable.A: (1.0, 0.0, 0.0),
    Observable.Y: (0.0, 1.0, 0.0),
    Observable.B: (0.0, 0.0, 1.0),
}

# Measurement order used throughout (tables, GPT states).
MEASUREMENTS = (Observable.A, Observable.Y, Observable.B)


def expectation(state: BlochVector, obs: Observable) -> float:
    """Return <n.sigma_axis> for a physical state, clamped to [-1, 1]."""
    if not state.is_physical():
        raise ValueError(f"non-physical Bloch vector, |n| = {state.norm():.12g}")
    ax, ay, az = obs.axis
    value = state.x * ax + state.y * ay + state.z * az
    return min(1.0, max(-1.0, value))


def dephase(state: BlochVector, mu: float) -> BlochVector:
    """Apply rho -> (1 - mu/2) rho + (mu/2) sZ rho sZ.

    In Bloch space the channel scales the transverse components by (1 - mu)
    and leaves z untouched.
    """
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"dephasing factor must lie in [0, 1], got {mu!r}")
    k = 1.0 - mu
    return BlochVector(state.x * k, state.y * k, state.z)


def rotate(state: BlochVector, Theta: float, phi: float) -> BlochVector:
    """Image of ``state`` under conjugation by the gate R(Theta, phi).

    R(Theta, phi) = cos(Theta/2) I - i sin(Theta/2) (cos(phi) sX + sin(phi) sY),
    i.e. a rotation by Theta about the equatorial axis (cos phi, sin phi, 0).
    """
    kx, ky = math.cos(phi), math.sin(phi)
    c, s = math.cos(Theta), math.sin(Theta)
    x, y, z = state.x, state.y, state.z
    kdotn = kx * x + ky * y
    # Rodrigues formula with k = (kx, ky, 0)
    cx, cy, cz = ky * z, -kx * z, kx * y - ky * x
    return BlochVector(
        x * c + cx * s + kx * kdotn * (1.0 - c),
        y * c + cy * s + ky * kdotn * (1.0 - c),
        z * c + cz * s,
    )


def family_parameters(theta: float) -> tuple[float, float, float]:
    """Return (m_plus, m_minus, delta) for the ensemble family at angle theta."""
    if not 0.0 <= theta <= math.pi / 2 + 1e-15:
        raise ValueError(f"theta must lie in [0, pi/2], got {theta!r}")
    ct = math.cos(theta)
    delta = math.sqrt(2.0 - ct * ct)
    return (ct + delta) / 2.0, (ct - delta) / 2.0, delta


def intersection_weight(theta: float) -> float:
    """Weight t at which t*eps_+ + (1-t)*eps_- meets (1-t)*eps'_+ + t*eps'_-."""
    _, _, delta = family_parameters(theta)
    return (delta + math.cos(theta)) / (2.0 * delta)


@dataclass(frozen=True)
class EnsembleQuartet:
    eps_plus: BlochVector
    eps_minus: BlochVector
    eps_prime_plus: BlochVector
    eps_prime_minus: BlochVector
    theta: float
    t: float

    @property
    def states(self) -> tuple[BlochVector, BlochVector, BlochVector, BlochVector]:
        return (self.eps_plus, self.eps_minus, self.eps_prime_plus, self.eps_prime_minus)

    def dephased(self, mu: float) -> "EnsembleQuartet":
        return EnsembleQuartet(
            *(dephase(s, mu) for s in self.states), theta=self.theta, t=self.t
        )

    def mixture_gap(self) -> float:
        """Max-norm distance between the two convex mixtures (0 for the family)."""
        t = self.t
        left = self.eps_plus.scale(t) + self.eps_minus.scale(1 - t)
        right = self.eps_prime_plus.scale(1 - t) + self.eps_prime_minus.scale(t)
        return float(np.max(np.abs(left.as_array() - right.as_array())))


def ensemble_quartet(theta: float) -> EnsembleQuartet:
    """The four pure preparations of the one-parameter family in the x-z plane."""
    m_plus, m_minus, _ = family_parameters(theta)
    # m_+^2 + m_-^2 = 1, so sqrt(1 - m_+^2) = |m_-|; the direct form avoids cancellation near theta = 0
    sp = abs(m_minus)
    sm = abs(m_plus)
    return EnsembleQuartet(
        eps_plus=BlochVector(sp, 0.0, m_plus),
        eps_minus=BlochVector(-sm, 0.0, m_minus),
        eps_prime_plus=BlochVector(sm, 0.0, m_minus),
        eps_prime_minus=BlochVector(-sp, 0.0, m_plus),
        theta=theta,
        t=intersection_weight(theta),
    )


POLE = BlochVector(0.0, 0.0, 1.0)

# Gate settings (Theta, phi) preparing eps_+, eps_-, eps'_+, eps'_- at theta = pi/3.
PREPARATION_PULSES = {
    "eps_plus": (0.134967 * math.pi, math.pi / 2),
    "eps_minus": (0.634967 * math.pi, 3 * math.pi / 2),
    "eps_prime_plus": (0.634967 * math.pi, math.pi / 2),
    "eps_prime_minus": (0.134967 * math.pi, 3 * math.pi / 2),
}


def prepare_from_pulse(Theta: float, phi: float) -> BlochVector:
    return rotate(POLE, Theta, phi)


def y_calibration_states() -> tuple[BlochVector, BlochVector]:
    """Eigenstates of sigma_y used as the extra calibration preparations."""
    return BlochVector(0.0, 1.0, 0.0), BlochVector(0.0, -1.0, 0.0)
