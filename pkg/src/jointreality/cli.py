"""Command-line front end.

Exit codes: 0 success, 2 config error, 3 sampling stage, 4 fit stage,
5 no operationally equivalent mixture (LP infeasible), 6 I/O or parse error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import config as config_mod
from . import runner
from .config import DEFAULT_SWEEP_MU, ConfigError, RunConfig
from .gpt import FitError, NoEquivalentMixture
from .sampler import SamplingError, TableParseError

EXIT_OK, EXIT_CONFIG, EXIT_SAMPLING, EXIT_FIT, EXIT_LP, EXIT_IO = 0, 2, 3, 4, 5, 6


def _load_config(args, command: str) -> RunConfig:
    if args.config:
        cfg = config_mod.load(args.config)
    elif command == "sweep":
        cfg = RunConfig(mu_list=DEFAULT_SWEEP_MU)
    else:
        cfg = RunConfig()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["out_dir"] = args.out
    if getattr(args, "fit_mode", None):
        changes["fit_mode"] = args.fit_mode
    if getattr(args, "jobs", None) is not None:
        changes["jobs"] = args.jobs
    return cfg.replace(**changes) if changes else cfg.validate()


def _print_rows(rows) -> None:
    for r in rows:
        rep = r.report
        extra = ""
        if r.ell_std is not None:
            extra = f"  (std {r.ell_std:.4f}, {r.tau_std:.4f})"
        if r.similarity is not None:
            extra += f"  similarity {r.similarity:.4f} at t={r.t:.4f}"
        print(
            f"{r.source:>9}: ell = {rep.ell:+.6f}  tau = {rep.tau:+.6f}{extra}  "
            f"[{runner.verdict(rep)}]"
        )


def cmd_simulate(args, cfg: RunConfig) -> int:
    result = runner.simulate(cfg, analytic=args.analytic)
    out = Path(cfg.out_dir)
    runner.write_simulation(result, out, f"theta={cfg.theta_rad:.4f}, mu={cfg.mu_list[0]:g}")
    _print_rows(result.rows)
    print(f"wrote {out}/report.csv, pipeline.csv, fig2.svg")
    return EXIT_OK


def cmd_sweep(args, cfg: RunConfig) -> int:
    points = runner.sweep(cfg, analytic=args.analytic)
    out = Path(cfg.out_dir)
    runner.write_sweep(cfg, points, out)
    for p in points:
        print(
            f"mu={p.mu:.3f}  ell {p.ell_analytic:+.4f} / {p.ell_mc:+.4f} +- {p.ell_std:.4f}   "
            f"tau {p.tau_analytic:+.4f} / {p.tau_mc:+.4f} +- {p.tau_std:.4f}"
        )
    print(f"wrote {out}/sweep.csv, fig3.svg")
    return EXIT_OK


def cmd_oracle(args, cfg: RunConfig) -> int:
    if args.instances:
        instances, rejected = runner.read_instances(args.instances), {}
    else:
        instances, rejected = runner.generate_instances(cfg.oracle_instances, cfg.seed)
    report = runner.run_oracle(instances, rejected)
    out = Path(cfg.out_dir)
    runner.write_oracle(report, out)
    for name, value in report.summary_rows():
        print(f"{name}: {runner.fmt(value)}")
    for (q, t), row in report.counterexamples():
        print(f"counterexample {row[0]}: quartet={q.as_tuple()} t={t!r} tau={row[1]!r} feasible={row[2]}")
    return EXIT_OK


def cmd_fit(args, cfg: RunConfig) -> int:
    result = runner.fit_external(cfg, args.raw_csv)
    out = Path(cfg.out_dir)
    runner.write_simulation(result, out, f"fit of {Path(args.raw_csv).name}")
    _print_rows(result.rows)
    return EXIT_OK


def cmd_report(args, cfg: RunConfig) -> int:
    out = Path(cfg.out_dir)
    found = False
    sweep_csv = out / "sweep.csv"
    if sweep_csv.exists():
        points = runner.read_sweep(sweep_csv)
        (out / "fig3.svg").write_text(runner.sweep_svg(cfg, points))
        print(f"{sweep_csv}: {len(points)} points, fig3.svg regenerated")
        found = True
    for name in ("report.csv", "oracle_summary.csv"):
        path = out / name
        if path.exists():
            print(f"== {path}")
            with open(path, newline="") as fh:
                for row in csv.reader(fh):
                    print("  " + ", ".join(row))
            found = True
    if not found:
        raise FileNotFoundError(f"no run outputs found in {out}")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "oracle": cmd_oracle,
    "fit": cmd_fit,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jointreality",
        description="No-go tests of joint reality under operational completeness.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat key = value run configuration")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--out", metavar="DIR", help="override the output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="one dephasing setting, full pipeline")
    p.add_argument("--analytic", action="store_true", help="skip sampling; exact probabilities")
    p.add_argument("--fit-mode", choices=("qubit", "gpt_rank"))

    p = sub.add_parser("sweep", parents=[common], help="criteria over the configured mu list")
    p.add_argument("--analytic", action="store_true", help="closed forms only")
    p.add_argument("--jobs", type=int, help="worker processes")

    p = sub.add_parser("oracle", parents=[common], help="determinant criterion vs LP oracle")
    p.add_argument("--instances", metavar="PATH", help="replay a saved instances.csv")

    p = sub.add_parser("fit", parents=[common], help="equivalence pipeline on an external table")
    p.add_argument("raw_csv", help="frequency table CSV")
    p.add_argument("--fit-mode", choices=("qubit", "gpt_rank"))

    sub.add_parser("report", parents=[common], help="summarise an output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args, args.command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SamplingError as exc:
        print(f"sampling error: {exc}", file=sys.stderr)
        return EXIT_SAMPLING
    except FitError as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        return EXIT_FIT
    except NoEquivalentMixture as exc:
        print(f"LP infeasible: {exc}", file=sys.stderr)
        return EXIT_LP
    except TableParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (OSError, ValueError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
