"""Device-independent operational-equivalence pipeline.

raw frequencies -> primary preparations (fitted, consistent states)
              -> secondary preparations (convex mixtures of the six
                 primaries that are exactly operationally equivalent).

A GPT state here is the vector of +1 probabilities for the three
tomographically complete measurements (sigma_x, sigma_y, sigma_z).
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import simplex
from .criteria import ExpectationQuartet
from .sampler import PREPARATIONS, FrequencyTable, NoiseConfig

QUARTET = PREPARATIONS[:4]
LP_TOL = 1e-9


class FitError(ValueError):
    pass


class NoEquivalentMixture(RuntimeError):
    """No t on the grid admits operationally equivalent secondaries."""


class Provenance(enum.Enum):
    RAW = "raw"
    PRIMARY = "primary"
    SECONDARY = "secondary"


@dataclass(frozen=True)
class GptState:
    p: tuple[float, float, float]  # p(+1 | sigma_x), p(+1 | sigma_y), p(+1 | sigma_z)
    provenance: Provenance
    name: str = ""

    def __post_init__(self):
        if any(not -1e-12 <= v <= 1.0 + 1e-12 for v in self.p):
            raise ValueError(f"probabilities out of range: {self.p}")

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.p, dtype=float)

    def bloch(self) -> np.ndarray:
        return 2.0 * self.array - 1.0


def _states(arr, provenance, names) -> list[GptState]:
    return [
        GptState(tuple(float(v) for v in row), provenance, name)
        for row, name in zip(np.asarray(arr), names)
    ]


@dataclass(frozen=True)
class FitResult:
    raw: list[GptState]
    primaries: list[GptState]
    distances: np.ndarray  # Euclidean distance raw -> primary, probability space


def raw_states(raw: FrequencyTable, readout: NoiseConfig | None = None) -> list[GptState]:
    missing = [p for p in PREPARATIONS if p not in raw.preparations]
    if missing:
        raise FitError(f"table lacks preparations {missing}")
    sub = raw.subset(PREPARATIONS)
    if np.any(sub.trials == 0):
        i, j = np.argwhere(sub.trials == 0)[0]
        raise FitError(f"cell {PREPARATIONS[i]}/{'xyz'[j]} has zero trials")
    p = sub.frequencies()
    if readout is not None:
        p = readout.invert_readout(p)
    return _states(p, Provenance.RAW, PREPARATIONS)


def _inverse_variance(p: np.ndarray, trials: np.ndarray) -> np.ndarray:
    q = np.clip(p, 0.5 / trials, 1.0 - 0.5 / trials)
    return trials / (q * (1.0 - q))


def project_to_ball(r: np.ndarray, w: np.ndarray) -> np.ndarray:
    """argmin_n sum w (n - r)^2 subject to |n| <= 1."""
    if r @ r <= 1.0:
        return r.copy()

    def excess(lam):
        n = w * r / (w + lam)
        return n @ n - 1.0

    hi = float(w.max())
    while excess(hi) > 0.0:
        hi *= 2.0
    lam = brentq(excess, 0.0, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
    n = w * r / (w + lam)
    return n / max(1.0, float(np.linalg.norm(n)))


def weighted_low_rank(D: np.ndarray, W: np.ndarray, rank: int, iters: int = 500) -> np.ndarray:
    """Weighted alternating least squares: D ~ S @ E with inner dimension ``rank``."""
    U, s, Vt = np.linalg.svd(D, full_matrices=False)
    S = U[:, :rank] * s[:rank]
    E = Vt[:rank]
    prev = np.inf
    for _ in range(iters):
        for i in range(D.shape[0]):
            Ew = E * W[i]
            S[i] = np.linalg.lstsq(Ew @ E.T, Ew @ D[i], rcond=None)[0]
        for j in range(D.shape[1]):
            Sw = S.T * W[:, j]
            E[:, j] = np.linalg.lstsq(Sw @ S, Sw @ D[:, j], rcond=None)[0]
        loss = float(np.sum(W * (D - S @ E) ** 2))
        if prev - loss <= 1e-14 * max(1.0, prev):
            break
        prev = loss
    return S @ E


def fit_primaries(
    raw: FrequencyTable,
    mode: str = "qubit",
    readout: NoiseConfig | None = None,
    rank: int = 4,
) -> FitResult:
    """Fit the six raw preparations to consistent primary states.

    ``mode="qubit"`` projects each implied Bloch vector onto the unit ball
    (least squares weighted by inverse binomial variance). ``mode="gpt_rank"``
    fits the preparation x effect matrix with a rank-limited weighted ALS
    factorisation and clips the result to [0, 1].
    """
    raws = raw_states(raw, readout)
    p = np.array([s.array for s in raws])
    trials = raw.subset(PREPARATIONS).trials.astype(float)
    w = _inverse_variance(p, trials)
    if mode == "qubit":
        fitted = np.empty_like(p)
        for i in range(p.shape[0]):
            n = project_to_ball(2.0 * p[i] - 1.0, w[i])
            fitted[i] = (n + 1.0) / 2.0
        fitted = np.where(np.abs(fitted - p) < 1e-15, p, fitted)
    elif mode == "gpt_rank":
        D = np.empty((p.shape[0], 6))
        D[:, 0::2] = p
        D[:, 1::2] = 1.0 - p
        W = np.repeat(w, 2, axis=1)
        fitted = np.clip(weighted_low_rank(D, W, rank)[:, 0::2], 0.0, 1.0)
    else:
        raise FitError(f"unknown fit mode {mode!r}")
    primaries = _states(fitted, Provenance.PRIMARY, PREPARATIONS)
    return FitResult(raws, primaries, np.linalg.norm(fitted - p, axis=1))


def equivalence_residual(states, t: float) -> float:
    """Max-norm gap between t*s0 + (1-t)*s1 and (1-t)*s2 + t*s3."""
    s = [st.array if isinstance(st, GptState) else np.asarray(st, float) for st in states]
    diff = t * s[0] + (1.0 - t) * s[1] - (1.0 - t) * s[2] - t * s[3]
    return float(np.max(np.abs(diff)))


def estimate_intersection_weight(states) -> float:
    """Least-squares t for which the two mixtures of the quartet coincide."""
    s = [st.array if isinstance(st, GptState) else np.asarray(st, float) for st in states[:4]]
    d = s[0] - s[1] + s[2] - s[3]
    r = s[2] - s[1]
    dd = float(d @ d)
    if dd == 0.0:
        return 0.5
    return float(np.clip((d @ r) / dd, 0.05, 0.95))


@dataclass(frozen=True)
class SecondaryAssignment:
    weights: np.ndarray  # (4, 6), rows on the simplex
    t_star: float
    similarity: float
    primaries: tuple[GptState, ...]

    def secondaries(self) -> list[GptState]:
        P = np.array([s.array for s in self.primaries])
        S = np.clip(self.weights @ P, 0.0, 1.0)
        return _states(S, Provenance.SECONDARY, QUARTET)

    def own_weights(self) -> np.ndarray:
        return np.diag(self.weights[:, :4]).copy()


def _secondary_lp(P: np.ndarray, t: float):
    n_sec, n_pri = 4, P.shape[0]
    nv = n_sec * n_pri
    A = np.zeros((4 + 3, nv))
    b = np.zeros(7)
    for i in range(n_sec):
        A[i, i * n_pri:(i + 1) * n_pri] = 1.0
        b[i] = 1.0
    coef = (t, 1.0 - t, -(1.0 - t), -t)
    for j in range(3):
        for i in range(n_sec):
            A[4 + j, i * n_pri:(i + 1) * n_pri] = coef[i] * P[:, j]
    c = np.zeros(nv)
    for i in range(n_sec):
        c[i * n_pri + i] = -0.25
    return simplex.solve(c, A, b, tol=LP_TOL)


def find_secondaries(
    primaries,
    t_hint: float | None = None,
    t_center: float | None = None,
    half_width: float = 0.05,
    step: float = 1e-3,
) -> SecondaryAssignment:
    """Most similar operationally equivalent mixtures of the six primaries.

    For each candidate t (only ``t_hint`` if given, otherwise a grid of
    ``step`` around ``t_center``) an LP maximises the mean weight each
    secondary keeps on its own primary subject to exact equivalence.
    """
    primaries = tuple(primaries)
    if len(primaries) != 6:
        raise ValueError("find_secondaries needs the six primaries")
    P = np.array([s.array for s in primaries])
    if t_hint is not None:
        grid = [float(t_hint)]
    else:
        if t_center is None:
            t_center = estimate_intersection_weight(primaries)
        k = int(round(half_width / step))
        offsets = sorted(range(-k, k + 1), key=lambda i: (abs(i), i))
        grid = [t_center + i * step for i in offsets]
        grid = [t for t in grid if 0.0 < t < 1.0]
    best = None
    for t in grid:
        res = _secondary_lp(P, t)
        if res.status != "optimal":
            continue
        sim = -res.objective
        if best is None or sim > best[0] + 1e-12:
            best = (sim, t, res.x)
    if best is None:
        raise NoEquivalentMixture("no operationally equivalent mixture exists")
    sim, t, x = best
    w = np.clip(x.reshape(4, 6), 0.0, None)
    w /= w.sum(axis=1, keepdims=True)
    return SecondaryAssignment(w, t, float(np.mean(np.diag(w[:, :4]))), primaries)


def criteria_from_states(states) -> ExpectationQuartet:
    """Map four GPT states to <A> = 2 p_x - 1 and <B> = 2 p_z - 1; sigma_y is dropped."""
    vals = []
    for st in list(states)[:4]:
        p = st.array if isinstance(st, GptState) else np.asarray(st, float)
        vals.append(float(np.clip(2.0 * p[0] - 1.0, -1.0, 1.0)))
        vals.append(float(np.clip(2.0 * p[2] - 1.0, -1.0, 1.0)))
    return ExpectationQuartet(*vals)


def ideal_states(bloch_vectors, provenance=Provenance.PRIMARY) -> list[GptState]:
    """Born-rule GPT states for a sequence of Bloch vectors."""
    arr = np.array([v.as_array() for v in bloch_vectors])
    return _states(np.clip((arr + 1.0) / 2.0, 0.0, 1.0), provenance, PREPARATIONS)


@dataclass(frozen=True)
class PipelineResult:
    fit: FitResult
    assignment: SecondaryAssignment

    @property
    def secondaries(self) -> list[GptState]:
        return self.assignment.secondaries()

    def residuals(self) -> dict[str, float]:
        t = self.assignment.t_star
        return {
            "raw": equivalence_residual(self.fit.raw[:4], t),
            "primary": equivalence_residual(self.fit.primaries[:4], t),
            "secondary": equivalence_residual(self.secondaries, t),
        }

    def report_rows(self):
        res = self.residuals()
        own = self.assignment.own_weights()
        rows = []
        for stage, states in (
            ("raw", self.fit.raw),
            ("primary", self.fit.primaries),
            ("secondary", self.secondaries),
        ):
            for i, st in enumerate(states):
                sim = float(own[i]) if stage == "secondary" else ""
                rows.append((stage, st.name, *st.p, sim, res[stage]))
        rows.append(("summary", "all", "", "", "", self.assignment.similarity, res["secondary"]))
        return rows

    def report_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("stage", "preparation", "p_x", "p_y", "p_z", "similarity", "residual"))
        for row in self.report_rows():
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.12g}"
    return v


def run_pipeline(
    raw: FrequencyTable,
    fit_mode: str = "qubit",
    readout: NoiseConfig | None = None,
    t_hint: float | None = None,
    t_center: float | None = None,
) -> PipelineResult:
    fit = fit_primaries(raw, mode=fit_mode, readout=readout)
    assignment = find_secondaries(fit.primaries, t_hint=t_hint, t_center=t_center)
    return PipelineResult(fit, assignment)
