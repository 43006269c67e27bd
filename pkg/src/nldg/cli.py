"""Command-line interface: ``simulate``, ``convergence``, and ``bench``
subcommands with plot-ready CSV/JSON outputs.

Configuration precedence: CLI flags override the optional JSON config
file, which overrides scenario defaults. Exit codes: 0 success, 2
configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analysis import convergence_rows_to_csv
from .config import ConfigError, RunConfig
from .experiments import (
    BENCH_VARIANTS,
    DEFAULT_N_VALUES,
    DEFAULT_P_VALUES,
    run_bench,
    run_convergence_study,
)
from .mesh import field_to_csv
from .scenarios import UnknownScenarioError, config_from_scenario, scenario_names

__all__ = ["build_parser", "main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _int_list(text: str):
    return tuple(int(v) for v in text.split(",") if v.strip())


def _float_list(text: str):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _add_run_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--scenario", default=None, choices=scenario_names())
    sub.add_argument("--config", default=None, metavar="FILE",
                     help="JSON file with RunConfig fields (flags win)")
    sub.add_argument("--p", type=int, default=None)
    sub.add_argument("--n", type=int, default=None)
    sub.add_argument("--beta", type=float, default=None)
    sub.add_argument("--T", dest="t_final", type=float, default=None)
    sub.add_argument("--gamma", type=float, default=None)
    sub.add_argument("--kappa", type=float, default=None)
    sub.add_argument("--mtvb", dest="m_tvb", type=float, default=None)
    sub.add_argument("--limiter", choices=("on", "off"), default=None)
    sub.add_argument("--bc", choices=("periodic", "frozen"), default=None)
    sub.add_argument("--alpha", choices=("global", "local"), default=None)
    sub.add_argument("--integrand", choices=("full", "simplified"), default=None)
    sub.add_argument("--snapshots", type=_float_list, default=None, metavar="T1,T2,...")
    sub.add_argument("--out", default=None, metavar="DIR")
    sub.add_argument("--repeats", type=int, default=None)
    sub.add_argument("--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nldg",
        description="Non-local diffusive traffic flow with a local "
                    "discontinuous Galerkin scheme")
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("simulate", help="run one scenario and export snapshots")
    _add_run_flags(sim)

    conv = subs.add_parser("convergence", help="grid study against a fine reference")
    _add_run_flags(conv)
    conv.add_argument("--p-values", type=_int_list, default=DEFAULT_P_VALUES)
    conv.add_argument("--n-values", type=_int_list, default=DEFAULT_N_VALUES)
    conv.add_argument("--ref-p", type=int, default=4)
    conv.add_argument("--ref-n", type=int, default=640)

    bench = subs.add_parser("bench", help="repeated-run timing benchmark")
    _add_run_flags(bench)
    bench.add_argument("--n-values", type=_int_list, default=DEFAULT_N_VALUES)
    return parser


def _collect_overrides(args: argparse.Namespace) -> dict:
    overrides = {}
    if args.config:
        with open(args.config) as fh:
            file_cfg = json.load(fh)
        unknown = set(file_cfg) - set(RunConfig.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config file fields: {sorted(unknown)}")
        file_cfg.pop("scenario", None)
        if "snapshot_times" in file_cfg:
            file_cfg["snapshot_times"] = tuple(file_cfg["snapshot_times"])
        overrides.update(file_cfg)
    flag_map = {
        "p": args.p, "n": args.n, "beta": args.beta, "t_final": args.t_final,
        "gamma": args.gamma, "kappa": args.kappa, "m_tvb": args.m_tvb,
        "snapshot_times": args.snapshots, "out_dir": args.out, "repeats": args.repeats,
    }
    if args.limiter is not None:
        flag_map["limiter_enabled"] = args.limiter == "on"
    if args.bc is not None:
        flag_map["bc_mode"] = args.bc
    if args.alpha is not None:
        flag_map["alpha_mode"] = "local_interface" if args.alpha == "local" else "global"
    if args.integrand is not None:
        flag_map["integrand_mode"] = "full_rho_hat" if args.integrand == "full" else "simplified"
    overrides.update({k: v for k, v in flag_map.items() if v is not None})
    return overrides


def _scenario_id(args: argparse.Namespace, fallback: str) -> str:
    if args.scenario is not None:
        return args.scenario
    if args.config:
        with open(args.config) as fh:
            from_file = json.load(fh).get("scenario")
        if from_file:
            return from_file
    return fallback


def _outdir(config_out: str) -> Path:
    out = Path(config_out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args: argparse.Namespace) -> int:
    from .timestepping import run_simulation

    scenario = _scenario_id(args, "rarefaction")
    config = config_from_scenario(scenario, **_collect_overrides(args))
    result = run_simulation(config)
    out = _outdir(config.out_dir)

    exported = set()
    for snap in result.snapshots:
        tag = f"{snap.time:.6f}"
        if tag not in exported:
            field_to_csv(snap, out / f"snapshot_t{tag}.csv")
            exported.add(tag)
    final_tag = f"{result.final.time:.6f}"
    if final_tag not in exported:
        field_to_csv(result.final, out / f"snapshot_t{final_tag}.csv")

    summary = {
        "config": config.to_dict(),
        "steps": result.steps,
        "dt": result.dt,
        "final_time": result.final.time,
        "mass_trace": [[t, m] for t, m in result.mass_trace],
        "rho_min": result.rho_min,
        "rho_max": result.rho_max,
        "timing": result.timing.to_dict(),
        "failed": result.failed,
        "failure_message": result.failure_message,
    }
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)
    if result.failed:
        print(f"numerical failure: {result.failure_message}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_convergence(args: argparse.Namespace) -> int:
    scenario = _scenario_id(args, "sine")
    overrides = _collect_overrides(args)
    overrides.pop("snapshot_times", None)
    out_dir = overrides.pop("out_dir", "out")
    overrides.pop("repeats", None)
    overrides.pop("p", None)
    overrides.pop("n", None)
    study = run_convergence_study(scenario, p_values=args.p_values,
                                  n_values=args.n_values, ref_p=args.ref_p,
                                  ref_n=args.ref_n, verbose=args.verbose,
                                  **overrides)
    out = _outdir(out_dir)
    convergence_rows_to_csv(study.rows, out / "convergence.csv")
    payload = {
        "scenario": scenario,
        "reference": {"p": args.ref_p, "n": args.ref_n},
        "rates": {str(p): r for p, r in study.rates.items()},
        "rows": study.rows,
    }
    with open(out / "convergence.json", "w") as fh:
        json.dump(payload, fh, indent=2)
    return EXIT_NUMERICAL if any(r["failed"] for r in study.rows) else EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    import csv

    scenario = _scenario_id(args, "sine")
    overrides = _collect_overrides(args)
    overrides.pop("snapshot_times", None)
    out_dir = overrides.pop("out_dir", "out")
    repeats = overrides.pop("repeats", None) or 20
    p = overrides.pop("p", None) or 3
    overrides.pop("n", None)
    bench = run_bench(scenario, p=p, n_values=args.n_values, repeats=repeats,
                      verbose=args.verbose, **overrides)
    out = _outdir(out_dir)
    with open(out / "bench.json", "w") as fh:
        json.dump(bench.to_dict(), fh, indent=2)
    with open(out / "bench_scaling.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["variant", "n", "total_seconds", "standard_seconds",
                         "diffusion_seconds", "nonlocal_seconds",
                         "standard_pct", "diffusion_pct", "nonlocal_pct"])
        for variant in BENCH_VARIANTS:
            for n in bench.n_values:
                if (variant, n) not in bench.reports:
                    continue
                rep = bench.reports[(variant, n)]
                writer.writerow([variant, n, rep.total_seconds, rep.standard_seconds,
                                 rep.diffusion_seconds, rep.nonlocal_seconds,
                                 rep.standard_pct, rep.diffusion_pct, rep.nonlocal_pct])
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "convergence":
            return cmd_convergence(args)
        if args.command == "bench":
            return cmd_bench(args)
        parser.error(f"unknown command {args.command!r}")
    except (ConfigError, UnknownScenarioError, FileNotFoundError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
