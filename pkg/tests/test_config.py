import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from jointreality.config import DEFAULT_SWEEP_MU, ConfigError, RunConfig, dumps, load, loads

configs = st.builds(
    RunConfig,
    theta_rad=st.floats(0.0, math.pi / 2),
    mu_list=st.lists(st.floats(0.0, 1.0), min_size=1, max_size=6).map(tuple),
    shots_plus=st.integers(1, 10**7),
    shots_minus=st.integers(1, 10**7),
    err_up=st.floats(0.0, 0.49),
    err_down=st.floats(0.0, 0.49),
    readout_correction=st.booleans(),
    seed=st.integers(0, 2**63),
    fit_mode=st.sampled_from(["qubit", "gpt_rank"]),
    t_mode=st.sampled_from(["fixed", "scan"]),
    bootstrap_resamples=st.integers(100, 5000),
    prep_noise=st.floats(0.0, 1.0),
    out_dir=st.from_regex(r"[A-Za-z0-9_./-]{1,20}", fullmatch=True),
)


def test_defaults():
    cfg = RunConfig().validate()
    assert cfg.theta_rad == math.pi / 3
    assert (cfg.shots_plus, cfg.shots_minus) == (6890, 3110)
    assert (cfg.err_up, cfg.err_down) == (0.0208, 0.0171)
    assert DEFAULT_SWEEP_MU == (0.014, 0.220, 0.512, 0.653)


@given(configs)
def test_round_trip(cfg):
    text = dumps(cfg)
    assert loads(text) == cfg
    assert dumps(loads(text)) == text


def test_comments_and_whitespace(tmp_path):
    text = ("# a run\n\ntheta_rad = 1.0  # radians\n  mu_list = 0.1, 0.2 \nfit_mode=gpt_rank\n"
            "readout_correction = no\n")
    cfg = loads(text)
    assert cfg.theta_rad == 1.0 and cfg.mu_list == (0.1, 0.2)
    assert cfg.fit_mode == "gpt_rank" and cfg.readout_correction is False
    path = tmp_path / "run.cfg"
    path.write_text(text)
    assert load(path) == cfg


@pytest.mark.parametrize(
    "text",
    [
        "theta_rad = 2.0\n",
        "mu_list = 0.1, 1.5\n",
        "mu_list =\n",
        "shots_plus = 0\n",
        "err_up = 0.5\n",
        "fit_mode = cubic\n",
        "t_mode = free\n",
        "bootstrap_resamples = 10\n",
        "seed = -1\n",
        "seed = 1.5\n",
        "jobs = 0\n",
        "readout_correction = maybe\n",
        "colour = blue\n",
        "seed = 1\nseed = 2\n",
        "just words\n",
    ],
)
def test_invalid(text):
    with pytest.raises(ConfigError):
        loads(text)


def test_hash_in_value_not_serialisable():
    with pytest.raises(ConfigError):
        dumps(RunConfig(out_dir="a#b"))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load(tmp_path / "nope.cfg")


def test_replace_validates():
    with pytest.raises(ConfigError):
        RunConfig().replace(theta_rad=-1.0)
    assert RunConfig().replace(seed=5).seed == 5
