"""Flat ``key = value`` run configuration.

Units are part of the key names (``theta_rad``). ``#`` starts a comment
that runs to the end of the line. Lists are comma separated. ``dumps(loads(text))`` is stable
and ``loads(dumps(cfg)) == cfg`` for every valid config.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path


class ConfigError(ValueError):
    pass


DEFAULT_SWEEP_MU = (0.014, 0.220, 0.512, 0.653)


@dataclass(frozen=True)
class RunConfig:
    theta_rad: float = math.pi / 3
    mu_list: tuple[float, ...] = (0.014,)
    shots_plus: int = 6890
    shots_minus: int = 3110
    shots_calibration: int = 10000
    err_up: float = 0.0208
    err_down: float = 0.0171
    readout_correction: bool = True
    seed: int = 0
    fit_mode: str = "qubit"
    t_mode: str = "scan"
    bootstrap_resamples: int = 200
    prep_noise: float = 0.0
    oracle_instances: int = 1000
    jobs: int = 1
    out_dir: str = "out"

    def validate(self) -> "RunConfig":
        if not 0.0 <= self.theta_rad <= math.pi / 2 + 1e-15:
            raise ConfigError(f"theta_rad must lie in [0, pi/2], got {self.theta_rad}")
        if not self.mu_list:
            raise ConfigError("mu_list must not be empty")
        for mu in self.mu_list:
            if not 0.0 <= mu <= 1.0:
                raise ConfigError(f"mu values must lie in [0, 1], got {mu}")
        for name in ("shots_plus", "shots_minus", "shots_calibration"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("err_up", "err_down"):
            if not 0.0 <= getattr(self, name) < 0.5:
                raise ConfigError(f"{name} must lie in [0, 0.5)")
        if self.fit_mode not in ("qubit", "gpt_rank"):
            raise ConfigError(f"fit_mode must be qubit or gpt_rank, got {self.fit_mode!r}")
        if self.t_mode not in ("fixed", "scan"):
            raise ConfigError(f"t_mode must be fixed or scan, got {self.t_mode!r}")
        if self.bootstrap_resamples < 100:
            raise ConfigError("bootstrap_resamples must be at least 100")
        if not 0.0 <= self.prep_noise <= 1.0:
            raise ConfigError("prep_noise must lie in [0, 1]")
        if self.oracle_instances < 0:
            raise ConfigError("oracle_instances must be nonnegative")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        return self

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes).validate()


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _parse_value(key: str, raw: str, lineno: int):
    kind = _FIELDS[key].type
    try:
        if kind == "bool":
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind.startswith("tuple"):
            return tuple(float(v) for v in raw.split(",") if v.strip())
        return raw
    except ValueError:
        raise ConfigError(f"line {lineno}: bad value for {key}: {raw!r}") from None


def loads(text: str) -> RunConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _parse_value(key, raw, lineno)
    return RunConfig(**values).validate()


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    if "#" in str(value):
        raise ConfigError(f"value {value!r} cannot contain '#'")
    return str(value)


def dumps(cfg: RunConfig) -> str:
    return "".join(f"{name} = {_format(getattr(cfg, name))}\n" for name in _FIELDS)


def load(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return loads(text)
