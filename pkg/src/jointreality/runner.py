"""End-to-end runs behind the command-line subcommands.

Each ``run_*`` function computes everything first and only then writes its
artifacts, so a failing stage never leaves partial output behind.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import gpt, oracle, svg
from .bloch import dephase, ensemble_quartet, intersection_weight
from .config import ConfigError, RunConfig
from .criteria import (
    CriterionReport,
    ExpectationQuartet,
    ell_theta_mu,
    ell_threshold,
    evaluate,
    family_quartet,
    nonlinear_criterion,
    tau_theta_mu,
    tau_threshold,
)
from .sampler import (
    FrequencyTable,
    NoiseConfig,
    ShotPlan,
    bootstrap_errorbars,
    perturb_states,
    preparation_states,
    run_protocol,
    table_expectations,
)

REPORT_HEADER = (
    "source", "mu", "ell", "ell_c", "tau", "tau_sign", "ell_std", "tau_std",
    "t", "similarity", "lp_feasible", "verdict",
)
SWEEP_HEADER = ("mu", "ell_analytic", "tau_analytic", "ell_mc", "tau_mc", "ell_std", "tau_std")
INSTANCE_HEADER = ("index",) + ExpectationQuartet.field_names() + ("t",)
ORACLE_HEADER = ("index", "tau", "lp_feasible", "phase1_objective", "status")
BORDERLINE = 1e-7


def fmt(value) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "nan" if math.isnan(value) else f"{value:.12g}"
    return str(value)


def write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    path.write_text(buf.getvalue())


def verdict(report: CriterionReport) -> str:
    if report.violated_linear and report.violated_nonlinear:
        return "linear+nonlinear violation"
    if report.violated_nonlinear:
        return "nonlinear violation only"
    if report.violated_linear:
        return "linear violation only"
    return "no violation"


def noise_for(cfg: RunConfig, mu: float) -> NoiseConfig:
    return NoiseConfig(cfg.err_up, cfg.err_down, mu)


def plan_for(cfg: RunConfig) -> ShotPlan:
    return ShotPlan(cfg.shots_plus, cfg.shots_minus, cfg.shots_calibration)


def derived_seed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence(entropy=seed, spawn_key=key).generate_state(1)[0])


@dataclass
class ReportRow:
    source: str
    mu: float
    report: CriterionReport
    ell_std: float | None = None
    tau_std: float | None = None
    t: float | None = None
    similarity: float | None = None
    lp_feasible: bool | str | None = None

    def as_row(self):
        r = self.report
        return (
            self.source, self.mu, r.ell, r.ell_argmax_c, r.tau, str(r.tau_argmax),
            self.ell_std, self.tau_std, self.t, self.similarity, self.lp_feasible, verdict(r),
        )


def _lp_verdict(q: ExpectationQuartet, t: float):
    try:
        return oracle.check_joint_reality(q, t).feasible
    except oracle.DegenerateLP:
        return "degenerate"


def _ideal_pipeline(cfg: RunConfig, mu: float) -> gpt.PipelineResult:
    """Pipeline stages for exact Born probabilities (no sampling)."""
    states = preparation_states(ensemble_quartet(cfg.theta_rad))
    vecs = [dephase(s, mu) for s in states.values()]
    primaries = gpt.ideal_states(vecs)
    raws = gpt.ideal_states(vecs, gpt.Provenance.RAW)
    fit = gpt.FitResult(raws, primaries, np.zeros(len(primaries)))
    assignment = gpt.find_secondaries(primaries, t_hint=intersection_weight(cfg.theta_rad))
    return gpt.PipelineResult(fit, assignment)


@dataclass
class SimulationResult:
    rows: list[ReportRow]
    pipeline: gpt.PipelineResult
    table_csv: str | None

    def row(self, source: str) -> ReportRow:
        return next(r for r in self.rows if r.source == source)


def simulate(cfg: RunConfig, analytic: bool = False) -> SimulationResult:
    if len(cfg.mu_list) != 1:
        raise ConfigError("simulate needs exactly one value in mu_list")
    mu = cfg.mu_list[0]
    theta = cfg.theta_rad
    t_ideal = intersection_weight(theta)
    exact = evaluate(family_quartet(theta, mu))
    analytic_report = CriterionReport(
        ell_theta_mu(theta, mu), exact.ell_argmax_c, tau_theta_mu(theta, mu), exact.tau_argmax
    )
    rows = [ReportRow("analytic", mu, analytic_report, t=t_ideal,
                      lp_feasible=_lp_verdict(family_quartet(theta, mu), t_ideal))]
    if analytic:
        pipe = _ideal_pipeline(cfg, mu)
        return SimulationResult(rows, pipe, None)

    noise = noise_for(cfg, mu)
    readout = noise if cfg.readout_correction else None
    quartet = ensemble_quartet(theta)
    states = preparation_states(quartet)
    if cfg.prep_noise > 0.0:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(cfg.seed, spawn_key=(7,))))
        states = perturb_states(states, cfg.prep_noise, rng)
    table = run_protocol(quartet, plan_for(cfg), noise, cfg.seed, states=states)

    raw_q = table_expectations(table, readout=readout)
    boot = bootstrap_errorbars(table, cfg.bootstrap_resamples, cfg.seed, readout=readout)
    rows.append(ReportRow("raw", mu, evaluate(raw_q), boot.ell_std, boot.tau_std, t=plan_for(cfg).weight,
                          lp_feasible=_lp_verdict(raw_q, t_ideal)))

    t_hint = t_ideal if cfg.t_mode == "fixed" else None
    pipe = gpt.run_pipeline(table, fit_mode=cfg.fit_mode, readout=readout, t_hint=t_hint,
                            t_center=None if t_hint is not None else t_ideal)
    sec_q = gpt.criteria_from_states(pipe.secondaries)
    a = pipe.assignment
    rows.append(ReportRow("secondary", mu, evaluate(sec_q), t=a.t_star, similarity=a.similarity,
                          lp_feasible=_lp_verdict(sec_q, a.t_star)))
    return SimulationResult(rows, pipe, table.to_csv())


def _disc_svg(title: str, pipe: gpt.PipelineResult) -> str:
    def xz(states):
        return [(2 * s.p[0] - 1, 2 * s.p[2] - 1) for s in states[:4]]

    return svg.disc_figure(title, xz(pipe.fit.raw), xz(pipe.fit.primaries), xz(pipe.secondaries))


def write_simulation(result: SimulationResult, out: Path, title: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "report.csv", REPORT_HEADER, [r.as_row() for r in result.rows])
    (out / "pipeline.csv").write_text(result.pipeline.report_csv())
    (out / "fig2.svg").write_text(_disc_svg(title, result.pipeline))
    if result.table_csv is not None:
        (out / "raw.csv").write_text(result.table_csv)


@dataclass(frozen=True)
class SweepPoint:
    mu: float
    ell_analytic: float
    tau_analytic: float
    ell_mc: float = math.nan
    tau_mc: float = math.nan
    ell_std: float = math.nan
    tau_std: float = math.nan

    def as_row(self):
        return (self.mu, self.ell_analytic, self.tau_analytic, self.ell_mc, self.tau_mc,
                self.ell_std, self.tau_std)


def sweep_point(cfg: RunConfig, mu: float, seed: int, analytic: bool = False) -> SweepPoint:
    theta = cfg.theta_rad
    la, ta = ell_theta_mu(theta, mu), tau_theta_mu(theta, mu)
    if analytic:
        return SweepPoint(mu, la, ta)
    noise = noise_for(cfg, mu)
    readout = noise if cfg.readout_correction else None
    table = run_protocol(ensemble_quartet(theta), plan_for(cfg), noise, seed)
    rep = evaluate(table_expectations(table, readout=readout))
    boot = bootstrap_errorbars(table, cfg.bootstrap_resamples, seed, readout=readout)
    return SweepPoint(mu, la, ta, rep.ell, rep.tau, boot.ell_std, boot.tau_std)


def _sweep_task(args):
    return sweep_point(*args)


def sweep(cfg: RunConfig, analytic: bool = False, jobs: int | None = None) -> list[SweepPoint]:
    tasks = [
        (cfg, mu, derived_seed(cfg.seed, i), analytic) for i, mu in enumerate(cfg.mu_list)
    ]
    jobs = cfg.jobs if jobs is None else jobs
    if jobs <= 1 or len(tasks) <= 1:
        points = [_sweep_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(_sweep_task, tasks))
    return sorted(points, key=lambda p: p.mu)


def sweep_svg(cfg: RunConfig, points) -> str:
    theta = cfg.theta_rad
    mus = [i * 0.005 for i in range(141)]
    curve = (mus, [ell_theta_mu(theta, m) for m in mus], [tau_theta_mu(theta, m) for m in mus])
    pts = [(p.mu, p.ell_mc, p.tau_mc, p.ell_std, p.tau_std) for p in points]
    thresholds = []
    if theta > 0:
        thresholds = [ell_threshold(theta), tau_threshold(theta)]
    return svg.sweep_figure(theta, curve, pts, thresholds)


def write_sweep(cfg: RunConfig, points, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "sweep.csv", SWEEP_HEADER, [p.as_row() for p in points])
    (out / "fig3.svg").write_text(sweep_svg(cfg, points))


def read_sweep(path: Path) -> list[SweepPoint]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [SweepPoint(*(float(row[k]) for k in SWEEP_HEADER)) for row in reader]


@dataclass
class OracleReport:
    instances: list[tuple[ExpectationQuartet, float]]
    rows: list[tuple]
    rejected: dict

    def count(self, status: str) -> int:
        return sum(1 for r in self.rows if r[-1] == status)

    @property
    def compared(self) -> int:
        return self.count("agree") + self.count("disagree")

    @property
    def agreement_rate(self) -> float:
        return self.count("agree") / self.compared if self.compared else math.nan

    def counterexamples(self):
        return [(self.instances[r[0]], r) for r in self.rows if r[-1] == "disagree"]

    def summary_rows(self):
        rows = [
            ("instances", len(self.rows)),
            ("compared", self.compared),
            ("agree", self.count("agree")),
            ("disagree", self.count("disagree")),
            ("borderline", self.count("borderline")),
            ("degenerate", self.count("degenerate")),
            ("agreement_rate", self.agreement_rate),
        ]
        rows += [(f"rejected_{k}", v) for k, v in sorted(self.rejected.items())]
        return rows


def generate_instances(n: int, seed: int):
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    stats = oracle.GeneratorStats()
    inst = [oracle.random_intersection_quartet(rng, stats) for _ in range(n)]
    return inst, dict(stats.rejected)


def compare_instance(q: ExpectationQuartet, t: float):
    tau, _ = nonlinear_criterion(q)
    try:
        v = oracle.check_joint_reality(q, t)
    except oracle.DegenerateLP as exc:
        return (tau, "", exc.objective, "degenerate")
    if abs(tau) <= BORDERLINE:
        status = "borderline"
    else:
        status = "agree" if (tau > 0) == (not v.feasible) else "disagree"
    return (tau, v.feasible, v.phase1_objective, status)


def run_oracle(instances, rejected=None) -> OracleReport:
    rows = [(i, *compare_instance(q, t)) for i, (q, t) in enumerate(instances)]
    return OracleReport(list(instances), rows, dict(rejected or {}))


def write_instances(path: Path, instances) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(INSTANCE_HEADER)
    for i, (q, t) in enumerate(instances):
        writer.writerow([i, *(repr(float(v)) for v in q.as_tuple()), repr(float(t))])
    path.write_text(buf.getvalue())


def read_instances(path) -> list[tuple[ExpectationQuartet, float]]:
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != INSTANCE_HEADER:
            raise ValueError(f"{path}: expected header {','.join(INSTANCE_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                vals = [float(row[k]) for k in ExpectationQuartet.field_names()]
                out.append((ExpectationQuartet(*vals), float(row["t"])))
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}: row {lineno}: {exc}") from None
    return out


def write_oracle(report: OracleReport, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_instances(out / "instances.csv", report.instances)
    write_csv(out / "oracle.csv", ORACLE_HEADER, report.rows)
    write_csv(out / "oracle_summary.csv", ("metric", "value"), report.summary_rows())


def fit_external(cfg: RunConfig, raw_csv: str | Path):
    """Run the equivalence pipeline on a user-supplied frequency table."""
    table = FrequencyTable.read_csv(raw_csv)
    mu = cfg.mu_list[0]
    readout = noise_for(cfg, mu) if cfg.readout_correction else None
    t_ideal = intersection_weight(cfg.theta_rad)
    t_hint = t_ideal if cfg.t_mode == "fixed" else None
    pipe = gpt.run_pipeline(table, fit_mode=cfg.fit_mode, readout=readout, t_hint=t_hint)
    sec_q = gpt.criteria_from_states(pipe.secondaries)
    a = pipe.assignment
    row = ReportRow("secondary", mu, evaluate(sec_q), t=a.t_star, similarity=a.similarity,
                    lp_feasible=_lp_verdict(sec_q, a.t_star))
    return SimulationResult([row], pipe, None)
