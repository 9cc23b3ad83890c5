import csv
import math

import numpy as np
import pytest

from jointreality import cli, runner
from jointreality.bloch import ensemble_quartet
from jointreality.config import RunConfig
from jointreality.criteria import ell_theta_mu, tau_theta_mu
from jointreality.gpt import NoEquivalentMixture
from jointreality.sampler import NoiseConfig, SamplingError, ShotPlan, perturb_states, preparation_states, run_protocol

THETA = math.pi / 3


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_simulate_analytic_ideal(tmp_path):
    cfg = write_cfg(tmp_path, "mu_list = 0.0\n")
    assert run("simulate", "--config", cfg, "--analytic", "--out", tmp_path / "o") == 0
    rows = read_rows(tmp_path / "o" / "report.csv")
    assert len(rows) == 1
    assert float(rows[0]["ell"]) == pytest.approx((math.sqrt(7) - 2) / 2, abs=1e-11)
    assert float(rows[0]["tau"]) == pytest.approx(7 * (math.sqrt(7) - 2) / 2, abs=1e-11)
    assert rows[0]["lp_feasible"] == "false"
    assert (tmp_path / "o" / "fig2.svg").read_text().startswith("<svg")
    assert not (tmp_path / "o" / "raw.csv").exists()


def test_simulate_complete_dephasing_no_violation(tmp_path):
    cfg = write_cfg(tmp_path, "mu_list = 1.0\n")
    assert run("simulate", "--config", cfg, "--analytic", "--out", tmp_path / "o") == 0
    row = read_rows(tmp_path / "o" / "report.csv")[0]
    assert float(row["ell"]) <= 0 and float(row["tau"]) <= 0
    assert row["verdict"] == "no violation"


def test_simulate_sampled_within_error_bars(tmp_path):
    assert run("simulate", "--seed", 3, "--out", tmp_path / "o") == 0
    rows = {r["source"]: r for r in read_rows(tmp_path / "o" / "report.csv")}
    assert set(rows) == {"analytic", "raw", "secondary"}
    raw = rows["raw"]
    assert abs(float(raw["ell"]) - ell_theta_mu(THETA, 0.014)) <= 3 * float(raw["ell_std"])
    assert abs(float(raw["tau"]) - tau_theta_mu(THETA, 0.014)) <= 3 * float(raw["tau_std"])
    assert float(rows["secondary"]["similarity"]) > 0.98
    pipeline = read_rows(tmp_path / "o" / "pipeline.csv")
    assert float(pipeline[-1]["residual"]) <= 1e-9


def test_simulate_deterministic(tmp_path):
    for d in ("a", "b"):
        assert run("simulate", "--seed", 11, "--fit-mode", "gpt_rank", "--out", tmp_path / d) == 0
    for name in ("report.csv", "pipeline.csv", "raw.csv", "fig2.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_simulate_requires_single_mu(tmp_path):
    cfg = write_cfg(tmp_path, "mu_list = 0.1, 0.2\n")
    assert run("simulate", "--config", cfg, "--out", tmp_path / "o") == 2
    assert not (tmp_path / "o").exists()


def test_invalid_config_exit_2_without_output(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "theta_rad = 3.0\n")
    for cmd in ("simulate", "sweep", "oracle", "report"):
        assert run(cmd, "--config", cfg, "--out", tmp_path / "o") == 2
    assert "theta_rad" in capsys.readouterr().err
    assert run("simulate", "--config", tmp_path / "missing.cfg") == 2
    assert not (tmp_path / "o").exists()


def test_sweep_default_settings(tmp_path):
    assert run("sweep", "--seed", 0, "--out", tmp_path / "o") == 0
    rows = read_rows(tmp_path / "o" / "sweep.csv")
    assert [float(r["mu"]) for r in rows] == [0.014, 0.22, 0.512, 0.653]
    assert [float(r["ell_mc"]) > 0 for r in rows] == [True, True, False, False]
    assert [float(r["tau_mc"]) > 0 for r in rows] == [True, True, True, False]
    for r in rows:
        assert float(r["ell_analytic"]) == pytest.approx(ell_theta_mu(THETA, float(r["mu"])), abs=1e-11)


def test_sweep_deterministic_across_jobs(tmp_path):
    cfg = write_cfg(tmp_path, "mu_list = 0.653, 0.014, 0.3, 0.22, 0.512\n")
    assert run("sweep", "--config", cfg, "--jobs", 1, "--out", tmp_path / "a") == 0
    assert run("sweep", "--config", cfg, "--jobs", 3, "--out", tmp_path / "b") == 0
    for name in ("sweep.csv", "fig3.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    mus = [float(r["mu"]) for r in read_rows(tmp_path / "a" / "sweep.csv")]
    assert mus == sorted(mus)


def test_sweep_analytic_brackets_thresholds(tmp_path):
    grid = ", ".join(f"{0.005 * i:.3f}" for i in range(141))
    cfg = write_cfg(tmp_path, f"mu_list = {grid}\n")
    assert run("sweep", "--config", cfg, "--analytic", "--out", tmp_path / "o") == 0
    rows = read_rows(tmp_path / "o" / "sweep.csv")
    mus = np.array([float(r["mu"]) for r in rows])
    for col, threshold in (("ell_analytic", 0.35425), ("tau_analytic", 0.56950)):
        vals = np.array([float(r[col]) for r in rows])
        flips = np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))
        assert len(flips) == 1
        assert mus[flips[0]] < threshold < mus[flips[0] + 1]
    assert all(r["ell_mc"] == "nan" for r in rows)


def test_sweep_single_zero_matches_simulate(tmp_path):
    cfg = write_cfg(tmp_path, "mu_list = 0.0\n")
    assert run("sweep", "--config", cfg, "--analytic", "--out", tmp_path / "s") == 0
    assert run("simulate", "--config", cfg, "--analytic", "--out", tmp_path / "m") == 0
    s = read_rows(tmp_path / "s" / "sweep.csv")[0]
    m = read_rows(tmp_path / "m" / "report.csv")[0]
    assert s["ell_analytic"] == m["ell"] and s["tau_analytic"] == m["tau"]


def test_oracle_agreement_and_replay(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "oracle_instances = 300\n")
    assert run("oracle", "--config", cfg, "--seed", 4, "--out", tmp_path / "a") == 0
    summary = dict((r["metric"], r["value"]) for r in read_rows(tmp_path / "a" / "oracle_summary.csv"))
    assert summary["instances"] == "300"
    assert summary["disagree"] == "0"
    assert float(summary["agreement_rate"]) == 1.0
    out = capsys.readouterr().out
    assert "agreement_rate: 1" in out
    assert run("oracle", "--instances", tmp_path / "a" / "instances.csv", "--out", tmp_path / "b") == 0
    assert (tmp_path / "a" / "oracle.csv").read_bytes() == (tmp_path / "b" / "oracle.csv").read_bytes()
    assert (tmp_path / "a" / "instances.csv").read_bytes() == (tmp_path / "b" / "instances.csv").read_bytes()


def test_oracle_zero_instances(tmp_path):
    cfg = write_cfg(tmp_path, "oracle_instances = 0\n")
    assert run("oracle", "--config", cfg, "--out", tmp_path / "o") == 0
    assert read_rows(tmp_path / "o" / "oracle.csv") == []


def test_oracle_bad_instance_file(tmp_path):
    path = tmp_path / "inst.csv"
    path.write_text("index,foo\n0,1\n")
    assert run("oracle", "--instances", path, "--out", tmp_path / "o") == 6


def test_fit_noiseless_csv_similarity_one(tmp_path, capsys):
    n = 10**9
    table = run_protocol(ensemble_quartet(THETA), ShotPlan(n, n, n), NoiseConfig.noiseless(), seed=0)
    table.write_csv(tmp_path / "raw.csv")
    cfg = write_cfg(tmp_path, "readout_correction = false\n")
    assert run("fit", tmp_path / "raw.csv", "--config", cfg, "--out", tmp_path / "o") == 0
    row = read_rows(tmp_path / "o" / "report.csv")[0]
    assert float(row["similarity"]) == pytest.approx(1.0, abs=1e-3)
    assert "similarity" in capsys.readouterr().out


def test_fit_one_percent_noise_over_50_seeds(tmp_path):
    cfg = RunConfig()
    readout = NoiseConfig(cfg.err_up, cfg.err_down, 0.014)
    quartet = ensemble_quartet(THETA)
    good = 0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        states = perturb_states(preparation_states(quartet), 0.01, rng)
        table = run_protocol(quartet, ShotPlan(), readout, seed, states=states)
        path = tmp_path / f"raw{seed}.csv"
        table.write_csv(path)
        result = runner.fit_external(cfg, path)
        good += result.rows[0].similarity >= 0.99
    assert good >= 40


def test_fit_parse_errors(tmp_path, capsys):
    table = run_protocol(ensemble_quartet(THETA), ShotPlan(), NoiseConfig(), seed=0)
    text = table.to_csv()
    (tmp_path / "trunc.csv").write_text(text[: len(text) // 3])
    assert run("fit", tmp_path / "trunc.csv", "--out", tmp_path / "o") == 6
    lines = text.splitlines()
    lines[6] = lines[6].replace(",+1,", ",+2,").replace(",-1,", ",-2,")
    (tmp_path / "bad.csv").write_text("\n".join(lines) + "\n")
    assert run("fit", tmp_path / "bad.csv", "--out", tmp_path / "o") == 6
    err = capsys.readouterr().err
    assert "row 7" in err and "'outcome'" in err
    assert run("fit", tmp_path / "absent.csv", "--out", tmp_path / "o") == 6
    assert not (tmp_path / "o").exists()


def test_fit_missing_preparations_exit_4(tmp_path):
    table = run_protocol(ensemble_quartet(THETA), ShotPlan(), NoiseConfig(), seed=0)
    table.subset(("eps_plus", "eps_minus", "eps_prime_plus", "eps_prime_minus")).write_csv(tmp_path / "r.csv")
    assert run("fit", tmp_path / "r.csv", "--out", tmp_path / "o") == 4


@pytest.mark.parametrize("exc, code", [(SamplingError("x"), 3), (NoEquivalentMixture("no mixture"), 5)])
def test_stage_exit_codes(tmp_path, monkeypatch, exc, code):
    def boom(*args, **kwargs):
        raise exc

    monkeypatch.setattr(runner, "simulate", boom)
    assert run("simulate", "--out", tmp_path / "o") == code


def test_report_regenerates_figure(tmp_path, capsys):
    assert run("sweep", "--out", tmp_path / "o") == 0
    fig = (tmp_path / "o" / "fig3.svg").read_bytes()
    (tmp_path / "o" / "fig3.svg").unlink()
    assert run("simulate", "--out", tmp_path / "o") == 0
    assert run("report", "--out", tmp_path / "o") == 0
    assert (tmp_path / "o" / "fig3.svg").read_bytes() == fig
    assert "report.csv" in capsys.readouterr().out
    assert run("report", "--out", tmp_path / "empty") == 6


def test_help_lists_subcommands(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["--help"])
    assert info.value.code == 0
    out = capsys.readouterr().out
    for cmd in ("simulate", "sweep", "oracle", "fit", "report"):
        assert cmd in out
