"""Finite-statistics simulation of the preparation/measurement experiment.

Every (preparation, measurement) cell draws from its own counter-based
Philox stream keyed by ``(seed, preparation index, measurement index)``, so
tables are bit-reproducible regardless of the order in which cells are
sampled. Readout errors are classical flips applied after the Born-rule
draw.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bloch import (
    MEASUREMENTS,
    BlochVector,
    EnsembleQuartet,
    Observable,
    dephase,
    y_calibration_states,
)
from .criteria import ExpectationQuartet, evaluate_batch

PREPARATIONS = (
    "eps_plus",
    "eps_minus",
    "eps_prime_plus",
    "eps_prime_minus",
    "y_plus",
    "y_minus",
)
MIXTURES = {
    "mix_eps": ("eps_plus", "eps_minus"),
    "mix_eps_prime": ("eps_prime_plus", "eps_prime_minus"),
}
MEASUREMENT_LABELS = tuple(m.value for m in MEASUREMENTS)  # ("x", "y", "z")
OUTCOME_LABELS = ("+1", "-1")
CSV_HEADER = ("preparation", "measurement", "outcome", "count", "trials")


class SamplingError(ValueError):
    pass


class TableParseError(ValueError):
    def __init__(self, row: int, column: str, message: str):
        super().__init__(f"row {row}, column {column!r}: {message}")
        self.row = row
        self.column = column


@dataclass(frozen=True)
class NoiseConfig:
    err_up: float = 0.0208  # P(read -1 | +1)
    err_down: float = 0.0171  # P(read +1 | -1)
    mu: float = 0.0

    def __post_init__(self):
        for name in ("err_up", "err_down", "mu"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise SamplingError(f"{name} must lie in [0, 1], got {value!r}")
        if self.err_up + self.err_down >= 1.0:
            raise SamplingError("readout error rates must sum to less than 1")

    @classmethod
    def noiseless(cls, mu: float = 0.0) -> "NoiseConfig":
        return cls(0.0, 0.0, mu)

    def readout(self, p_plus):
        """Probability of reading +1 given the true probability ``p_plus``."""
        return p_plus * (1.0 - self.err_up) + (1.0 - p_plus) * self.err_down

    def invert_readout(self, p_read):
        """Linear inversion of :meth:`readout`, clipped to [0, 1]."""
        p = (np.asarray(p_read, dtype=float) - self.err_down) / (
            1.0 - self.err_up - self.err_down
        )
        return np.clip(p, 0.0, 1.0)


@dataclass(frozen=True)
class ShotPlan:
    shots_plus: int = 6890
    shots_minus: int = 3110
    shots_calibration: int = 10000

    def __post_init__(self):
        for name in ("shots_plus", "shots_minus", "shots_calibration"):
            if getattr(self, name) <= 0:
                raise SamplingError(f"{name} must be positive")

    @classmethod
    def for_weight(cls, t: float, total: int = 10000, calibration: int | None = None):
        n_plus = int(round(t * total))
        n_plus = min(max(n_plus, 1), total - 1)
        return cls(n_plus, total - n_plus, calibration or total)

    @property
    def weight(self) -> float:
        return self.shots_plus / (self.shots_plus + self.shots_minus)

    def shots(self) -> dict[str, int]:
        """Shots per measurement for each preparation."""
        return {
            "eps_plus": self.shots_plus,
            "eps_minus": self.shots_minus,
            "eps_prime_plus": self.shots_minus,
            "eps_prime_minus": self.shots_plus,
            "y_plus": self.shots_calibration,
            "y_minus": self.shots_calibration,
        }


@dataclass(frozen=True)
class FrequencyTable:
    """Outcome counts; ``counts[i, j, 0]`` is the number of +1 results."""

    preparations: tuple[str, ...]
    counts: np.ndarray  # (n_prep, 3, 2) integers

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.shape != (len(self.preparations), 3, 2):
            raise ValueError(f"counts have shape {counts.shape}")
        if np.any(counts < 0):
            raise ValueError("negative counts")

    @property
    def trials(self) -> np.ndarray:
        return self.counts.sum(axis=-1)

    def index(self, preparation: str) -> int:
        return self.preparations.index(preparation)

    def frequencies(self) -> np.ndarray:
        """p(+1 | measurement, preparation) as an (n_prep, 3) array."""
        trials = self.trials
        if np.any(trials == 0):
            raise ZeroDivisionError("cell with zero trials")
        return self.counts[..., 0] / trials

    def frequency(self, preparation: str, measurement: str, outcome: str = "+1") -> float:
        i = self.index(preparation)
        j = MEASUREMENT_LABELS.index(measurement)
        k = OUTCOME_LABELS.index(outcome)
        return float(self.counts[i, j, k] / self.trials[i, j])

    def subset(self, preparations) -> "FrequencyTable":
        idx = [self.index(p) for p in preparations]
        return FrequencyTable(tuple(preparations), self.counts[idx].copy())

    def rows(self):
        out = []
        trials = self.trials
        for i, prep in enumerate(self.preparations):
            for j, meas in enumerate(MEASUREMENT_LABELS):
                for k, outcome in enumerate(OUTCOME_LABELS):
                    out.append((prep, meas, outcome, int(self.counts[i, j, k]), int(trials[i, j])))
        out.sort(key=lambda r: (r[0], r[1], r[2]))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(self.rows())
        return buf.getvalue()

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> "FrequencyTable":
        reader = csv.reader(io.StringIO(text))
        try:
            header = next(reader)
        except StopIteration:
            raise TableParseError(1, "preparation", "empty file") from None
        if tuple(h.strip() for h in header) != CSV_HEADER:
            raise TableParseError(1, "preparation", f"expected header {','.join(CSV_HEADER)}")
        cells: dict[tuple[str, str], dict[str, tuple[int, int, int]]] = {}
        order: list[str] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CSV_HEADER):
                col = CSV_HEADER[min(len(row), len(CSV_HEADER) - 1)]
                raise TableParseError(lineno, col, f"expected 5 fields, got {len(row)}")
            prep, meas, outcome = (v.strip() for v in row[:3])
            if not prep:
                raise TableParseError(lineno, "preparation", "empty preparation name")
            if meas not in MEASUREMENT_LABELS:
                raise TableParseError(lineno, "measurement", f"unknown measurement {meas!r}")
            if outcome not in OUTCOME_LABELS:
                raise TableParseError(lineno, "outcome", f"unknown outcome {outcome!r}")
            values = []
            for col, raw in zip(("count", "trials"), row[3:]):
                try:
                    values.append(int(raw))
                except ValueError:
                    raise TableParseError(lineno, col, f"not an integer: {raw!r}") from None
                if values[-1] < 0:
                    raise TableParseError(lineno, col, "negative value")
            count, trials = values
            if count > trials:
                raise TableParseError(lineno, "count", "count exceeds trials")
            cell = cells.setdefault((prep, meas), {})
            if outcome in cell:
                raise TableParseError(lineno, "outcome", "duplicate row")
            cell[outcome] = (count, trials, lineno)
            if prep not in order:
                order.append(prep)
        preps = tuple(p for p in PREPARATIONS + tuple(MIXTURES) if p in order)
        preps += tuple(p for p in order if p not in preps)
        counts = np.zeros((len(preps), 3, 2), dtype=np.int64)
        last = 1 + sum(len(c) for c in cells.values())
        for i, prep in enumerate(preps):
            for j, meas in enumerate(MEASUREMENT_LABELS):
                cell = cells.get((prep, meas), {})
                for k, outcome in enumerate(OUTCOME_LABELS):
                    if outcome not in cell:
                        raise TableParseError(
                            last + 1, "outcome", f"missing {prep}/{meas}/{outcome}"
                        )
                    counts[i, j, k] = cell[outcome][0]
                (_, t1, _), (_, t2, line2) = cell["+1"], cell["-1"]
                if t1 != t2 or counts[i, j].sum() != t1:
                    raise TableParseError(line2, "trials", f"counts of {prep}/{meas} do not sum to trials")
        return cls(preps, counts)

    @classmethod
    def read_csv(cls, path) -> "FrequencyTable":
        return cls.from_csv(Path(path).read_text())


def cell_rng(seed: int, prep_index: int, meas_index: int) -> np.random.Generator:
    """Independent Philox stream for one (preparation, measurement) cell."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(prep_index, meas_index))
    return np.random.Generator(np.random.Philox(ss))


def born_plus(state: BlochVector, obs: Observable) -> float:
    ax, ay, az = obs.axis
    return 0.5 * (1.0 + state.x * ax + state.y * ay + state.z * az)


def sample_outcome(
    state: BlochVector, obs: Observable, noise: NoiseConfig, rng: np.random.Generator
) -> int:
    """One measurement shot: Born draw on the dephased state, then readout flip."""
    if not state.is_physical():
        raise SamplingError("non-physical state")
    p = born_plus(dephase(state, noise.mu), obs)
    outcome = 1 if rng.random() < p else -1
    if outcome == 1 and rng.random() < noise.err_up:
        return -1
    if outcome == -1 and rng.random() < noise.err_down:
        return 1
    return outcome


def preparation_states(quartet: EnsembleQuartet) -> dict[str, BlochVector]:
    y_plus, y_minus = y_calibration_states()
    states = dict(zip(PREPARATIONS[:4], quartet.states))
    states["y_plus"] = y_plus
    states["y_minus"] = y_minus
    return states


def sample_table(
    states: dict[str, BlochVector],
    shots: dict[str, int],
    noise: NoiseConfig,
    seed: int,
    mixtures: dict[str, tuple[str, str]] | None = None,
) -> FrequencyTable:
    """Sample counts for every preparation in ``states`` (table order = PREPARATIONS)."""
    preps = tuple(p for p in PREPARATIONS if p in states) + tuple(
        p for p in states if p not in PREPARATIONS
    )
    counts = np.zeros((len(preps), 3, 2), dtype=np.int64)
    for i, prep in enumerate(preps):
        # stream key: canonical index, so a cell's draws do not depend on which others exist
        key = PREPARATIONS.index(prep) if prep in PREPARATIONS else i
        state = states[prep]
        if not state.is_physical():
            raise SamplingError(f"preparation {prep} is not a physical state")
        n = int(shots[prep])
        if n <= 0:
            raise SamplingError(f"preparation {prep} has no shots")
        dephased = dephase(state, noise.mu)
        for j, obs in enumerate(MEASUREMENTS):
            p_read = noise.readout(min(1.0, max(0.0, born_plus(dephased, obs))))
            k = cell_rng(seed, key, j).binomial(n, p_read)
            counts[i, j] = (k, n - k)
    table = FrequencyTable(preps, counts)
    if mixtures:
        table = add_mixture_rows(table, mixtures)
    return table


def add_mixture_rows(table: FrequencyTable, mixtures=None) -> FrequencyTable:
    """Pool the shots of each mixture's two arms into an extra row."""
    mixtures = MIXTURES if mixtures is None else mixtures
    extra = [table.counts[table.index(a)] + table.counts[table.index(b)] for a, b in mixtures.values()]
    return FrequencyTable(
        table.preparations + tuple(mixtures), np.concatenate([table.counts, np.array(extra)])
    )


def run_protocol(
    quartet: EnsembleQuartet,
    plan: ShotPlan,
    noise: NoiseConfig,
    seed: int,
    states: dict[str, BlochVector] | None = None,
) -> FrequencyTable:
    """Simulate the six preparations x three measurements plus mixture rows.

    ``states`` overrides the ideal preparations (e.g. with perturbed ones).
    """
    if states is None:
        states = preparation_states(quartet)
    return sample_table(states, plan.shots(), noise, seed, mixtures=MIXTURES)


def perturb_states(
    states: dict[str, BlochVector], amplitude: float, rng: np.random.Generator
) -> dict[str, BlochVector]:
    """Displace each Bloch vector by ``amplitude`` in a uniformly random direction.

    Vectors pushed outside the ball are scaled back onto its surface.
    """
    out = {}
    for name, state in states.items():
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        v = state.as_array() + amplitude * d
        norm = np.linalg.norm(v)
        if norm > 1.0:
            v /= norm
        out[name] = BlochVector.from_array(v)
    return out


def table_expectations(
    table: FrequencyTable, readout: NoiseConfig | None = None
) -> ExpectationQuartet:
    """<sigma_x>, <sigma_z> of the four quartet preparations.

    With ``readout`` given, the known detection errors are inverted first.
    """
    p = table.frequencies()
    if readout is not None:
        p = readout.invert_readout(p)
    return _quartet_from_p(p, [table.index(n) for n in PREPARATIONS[:4]])


def _quartet_from_p(p: np.ndarray, rows) -> ExpectationQuartet:
    e = np.clip(2.0 * p - 1.0, -1.0, 1.0)
    vals = []
    for i in rows:
        vals.extend((e[i, 0], e[i, 2]))
    return ExpectationQuartet(*vals)


@dataclass(frozen=True)
class BootstrapResult:
    expectation_std: np.ndarray  # (n_prep, 3)
    ell_std: float
    tau_std: float
    ell_samples: np.ndarray
    tau_samples: np.ndarray


def bootstrap_errorbars(
    table: FrequencyTable,
    resamples: int,
    seed: int,
    readout: NoiseConfig | None = None,
) -> BootstrapResult:
    """Parametric-binomial bootstrap of expectations, ell and tau.

    Each cell is resampled as Binomial(trials, observed frequency).
    """
    if resamples < 100:
        raise ValueError("need at least 100 resamples")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(99,))))
    trials = table.trials
    p_hat = table.frequencies()
    k = rng.binomial(np.broadcast_to(trials, (resamples,) + trials.shape), p_hat)
    p = k / trials
    if readout is not None:
        p = readout.invert_readout(p)
    e = np.clip(2.0 * p - 1.0, -1.0, 1.0)
    rows = [table.index(n) for n in PREPARATIONS[:4]]
    quartets = e[:, rows][:, :, [0, 2]].reshape(resamples, 8)
    ell, tau = evaluate_batch(quartets)
    return BootstrapResult(
        expectation_std=e.std(axis=0, ddof=1),
        ell_std=float(ell.std(ddof=1)),
        tau_std=float(tau.std(ddof=1)),
        ell_samples=ell,
        tau_samples=tau,
    )


def binomial_sigma(p: float, n: int) -> float:
    return math.sqrt(p * (1.0 - p) / n)
