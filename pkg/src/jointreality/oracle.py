"""Brute-force certifier for joint-reality explanations.

Given expectations of A and B on the four ensembles and the mixture weight
t, decide whether there exist joint distributions N(alpha, beta | e)/N for
every ensemble that reproduce the observed marginals and coincide on the
two operationally equivalent mixtures. This is a 16-variable feasibility
LP solved with the package's own simplex; it never consults the
determinant criterion and so serves as an independent check of it.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import simplex
from .criteria import ExpectationQuartet

FEASIBLE_TOL = 1e-9
DEGENERATE_TOL = 1e-7

ENSEMBLES = ("eps_plus", "eps_minus", "eps_prime_plus", "eps_prime_minus")
# joint outcome order for the four entries of each distribution
OUTCOMES = ((1, 1), (1, -1), (-1, 1), (-1, -1))


class DegenerateLP(ValueError):
    """Phase-1 objective lies in the band where no verdict is trustworthy."""

    def __init__(self, objective: float):
        super().__init__(
            f"degenerate: phase-1 objective {objective:.3e} lies in "
            f"({FEASIBLE_TOL:g}, {DEGENERATE_TOL:g})"
        )
        self.objective = objective


@dataclass(frozen=True)
class JointRealityModel:
    """Joint distributions over (alpha, beta), one row per ensemble."""

    distributions: np.ndarray  # shape (4, 4): ENSEMBLES x OUTCOMES

    def marginals(self) -> np.ndarray:
        """(4, 2) array of induced <A>, <B> per ensemble."""
        alpha = np.array([o[0] for o in OUTCOMES], dtype=float)
        beta = np.array([o[1] for o in OUTCOMES], dtype=float)
        d = self.distributions
        return np.stack([d @ alpha, d @ beta], axis=1)

    def correlations(self) -> np.ndarray:
        ab = np.array([o[0] * o[1] for o in OUTCOMES], dtype=float)
        return self.distributions @ ab

    def mixture_gap(self, t: float) -> float:
        d = self.distributions
        diff = t * d[0] + (1 - t) * d[1] - (1 - t) * d[2] - t * d[3]
        return float(np.max(np.abs(diff)))

    def violations(self, q: ExpectationQuartet, t: float) -> list[str]:
        """Return the invariants this model breaks (empty if it is valid)."""
        problems = []
        d = self.distributions
        if d.min() < -FEASIBLE_TOL:
            problems.append(f"negative entry {d.min():.3e}")
        sums = d.sum(axis=1)
        if np.max(np.abs(sums - 1.0)) > FEASIBLE_TOL:
            problems.append(f"normalisation off by {np.max(np.abs(sums - 1.0)):.3e}")
        marg_err = np.max(np.abs(self.marginals() - q.points()))
        if marg_err > DEGENERATE_TOL:
            problems.append(f"marginals off by {marg_err:.3e}")
        gap = self.mixture_gap(t)
        if gap > DEGENERATE_TOL:
            problems.append(f"mixtures differ by {gap:.3e}")
        return problems


@dataclass(frozen=True)
class FeasibilityVerdict:
    feasible: bool
    model: JointRealityModel | None
    phase1_objective: float


def constraint_system(q: ExpectationQuartet, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Equality system A x = b over the 16 joint probabilities.

    Rows: 4 normalisations, 8 marginals (A then B per ensemble), 3 mixture
    equalities (the fourth follows from normalisation).
    """
    pts = q.points()
    A = np.zeros((15, 16))
    b = np.zeros(15)
    for e in range(4):
        cols = slice(4 * e, 4 * e + 4)
        A[e, cols] = 1.0
        b[e] = 1.0
        A[4 + 2 * e, cols] = [o[0] for o in OUTCOMES]
        b[4 + 2 * e] = pts[e, 0]
        A[5 + 2 * e, cols] = [o[1] for o in OUTCOMES]
        b[5 + 2 * e] = pts[e, 1]
    weights = (t, 1.0 - t, -(1.0 - t), -t)
    for k in range(3):
        for e, w in enumerate(weights):
            A[12 + k, 4 * e + k] = w
    return A, b


def check_joint_reality(q: ExpectationQuartet, t: float) -> FeasibilityVerdict:
    """Decide by phase-1 simplex whether a joint-reality model exists.

    Raises :class:`DegenerateLP` when the phase-1 objective falls between
    the feasibility and infeasibility tolerances.
    """
    if not isinstance(q, ExpectationQuartet):
        raise TypeError("q must be an ExpectationQuartet")
    if not 0.0 < t < 1.0:
        raise ValueError(f"mixture weight must lie in (0, 1), got {t!r}")
    A, b = constraint_system(q, t)
    res = simplex.feasibility(A, b, tol=FEASIBLE_TOL)
    obj = res.phase1_objective
    if FEASIBLE_TOL < obj < DEGENERATE_TOL:
        raise DegenerateLP(obj)
    if obj > FEASIBLE_TOL:
        return FeasibilityVerdict(False, None, obj)
    dist = np.clip(res.x.reshape(4, 4), 0.0, None)
    return FeasibilityVerdict(True, JointRealityModel(dist), obj)


def reconstruct_region(expA: float, expB: float) -> tuple[float, float]:
    """Interval of <AB> values whose four joint probabilities are nonnegative."""
    if abs(expA) > 1.0 or abs(expB) > 1.0:
        raise ValueError("expectations must lie in [-1, 1]")
    lower = abs(expA + expB) - 1.0
    upper = 1.0 - abs(expA - expB)
    assert lower <= upper + 1e-15
    return lower, upper


def orientation(q: ExpectationQuartet) -> float:
    """Twice the signed area of the triangle eps'_+ -> eps'_- -> eps_-.

    Positive for the labelling of the construction used to derive the
    determinant criterion; a negative value flips the sign of every
    determinant and the criterion no longer applies.
    """
    _, em, epp, epm = q.points()
    u, v = epm - epp, em - epp
    return float(u[0] * v[1] - u[1] * v[0])


@dataclass
class GeneratorStats:
    accepted: int = 0
    rejected: Counter = field(default_factory=Counter)


def random_intersection_quartet(
    rng: np.random.Generator,
    stats: GeneratorStats | None = None,
    max_tries: int = 100_000,
) -> tuple[ExpectationQuartet, float]:
    """Draw an intersection-valid quartet in the unit (A, B) disc.

    eps_+, eps_- and eps'_+ are uniform in the disc and the crossing point
    is uniform along [eps_-, eps_+]; eps'_- is then placed on the ray from
    eps'_+ through that point so that both mixtures meet with the same t.
    Draws leaving the disc, nearly collinear segments and reversed
    orientation are rejected and tallied in ``stats``.
    """
    if stats is None:
        stats = GeneratorStats()
    for _ in range(max_tries):
        pts = []
        while len(pts) < 3:
            p = rng.uniform(-1.0, 1.0, size=2)
            if p @ p <= 1.0:
                pts.append(p)
        ep, em, epp = pts
        t = rng.uniform(0.0, 1.0)
        if not 0.02 < t < 0.98:
            stats.rejected["extreme_weight"] += 1
            continue
        meet = t * ep + (1.0 - t) * em
        epm = (meet - (1.0 - t) * epp) / t
        if epm @ epm > 1.0:
            stats.rejected["outside_disc"] += 1
            continue
        d1, d2 = ep - em, epm - epp
        cross = d1[0] * d2[1] - d1[1] * d2[0]
        if abs(cross) < 1e-6 * math.hypot(*d1) * math.hypot(*d2) + 1e-12:
            stats.rejected["collinear"] += 1
            continue
        q = ExpectationQuartet(*ep, *em, *epp, *epm)
        if orientation(q) <= 0.0:
            stats.rejected["orientation"] += 1
            continue
        stats.accepted += 1
        return q, float(t)
    raise RuntimeError("could not draw an intersection-valid quartet")
