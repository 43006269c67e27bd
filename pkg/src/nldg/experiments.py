"""Experiment drivers: the grid convergence study against a self-generated
fine reference, and the repeated-run timing benchmark across model
variants.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field

import numpy as np

from .analysis import TimingReport, convergence_rate, fit_loglog_slope, l2_error
from .scenarios import config_from_scenario
from .timestepping import SimulationResult, run_simulation

__all__ = ["BenchResult", "ConvergenceStudy", "run_bench", "run_convergence_study"]

DEFAULT_P_VALUES = (1, 2, 3)
DEFAULT_N_VALUES = (20, 40, 80, 160, 320)


def _log(verbose: bool, msg: str) -> None:
    if verbose:
        print(msg, file=sys.stderr, flush=True)


@dataclass
class ConvergenceStudy:
    """Outcome of the grid study: one row per (p, n) plus a rate per p
    estimated from the two extreme resolutions."""

    rows: list
    rates: dict
    errors: dict
    times: dict
    reports: dict
    reference: SimulationResult

    def row_dicts(self) -> list:
        return self.rows


def run_convergence_study(scenario: str = "sine",
                          p_values=DEFAULT_P_VALUES,
                          n_values=DEFAULT_N_VALUES,
                          ref_p: int = 4,
                          ref_n: int = 640,
                          verbose: bool = False,
                          **overrides) -> ConvergenceStudy:
    """Run the reference once, then the whole (p, n) grid, and tabulate
    L2 errors, CPU seconds, and per-p convergence rates.

    A blown-up grid run is marked failed in its row (NaN error) and the
    table is still produced.
    """
    n_values = tuple(sorted(n_values))
    _log(verbose, f"reference run p={ref_p} n={ref_n}")
    ref_cfg = config_from_scenario(scenario, p=ref_p, n=ref_n,
                                   snapshot_times=(), **overrides)
    reference = run_simulation(ref_cfg)
    if reference.failed:
        raise RuntimeError(f"reference run failed: {reference.failure_message}")

    rows, rates, errors, times, reports = [], {}, {}, {}, {}
    for p in p_values:
        for n in n_values:
            cfg = config_from_scenario(scenario, p=p, n=n, snapshot_times=(), **overrides)
            result = run_simulation(cfg)
            if result.failed:
                err = float("nan")
            else:
                err = l2_error(result.final, reference.final)
            errors[(p, n)] = err
            times[(p, n)] = result.timing.total_seconds
            reports[(p, n)] = result.timing
            rows.append({
                "p": p, "n": n, "dof": (p + 1) * n,
                "l2_error": err,
                "cpu_seconds": result.timing.total_seconds,
                "failed": result.failed,
            })
            _log(verbose, f"p={p} n={n}: l2={err:.3e} cpu={result.timing.total_seconds:.3f}s")
        e_coarse = errors[(p, n_values[0])]
        e_fine = errors[(p, n_values[-1])]
        if np.isfinite(e_coarse) and np.isfinite(e_fine) and e_coarse > 0 and e_fine > 0:
            rates[p] = convergence_rate(e_coarse, e_fine, n_values[-1] / n_values[0])
        else:
            rates[p] = float("nan")
    for row in rows:
        row["rate"] = rates[row["p"]]
    return ConvergenceStudy(rows=rows, rates=rates, errors=errors,
                            times=times, reports=reports, reference=reference)


# Model variants benchmarked against each other: the configured model,
# the same without diffusion, and the purely local reduction.
BENCH_VARIANTS = ("full", "no_diffusion", "local")


@dataclass
class BenchResult:
    """Mean-of-repeats timings per variant and mesh size, plus the
    log-log slope of total time against n for each variant."""

    p: int
    repeats: int
    n_values: tuple
    seconds: dict = field(default_factory=dict)   # (variant, n) -> mean total
    reports: dict = field(default_factory=dict)   # (variant, n) -> mean TimingReport
    slopes: dict = field(default_factory=dict)    # variant -> slope

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "repeats": self.repeats,
            "n_values": list(self.n_values),
            "slopes": self.slopes,
            "variants": {
                variant: {
                    str(n): self.reports[(variant, n)].to_dict()
                    for n in self.n_values if (variant, n) in self.reports
                }
                for variant in BENCH_VARIANTS
                if any((variant, n) in self.reports for n in self.n_values)
            },
        }


def _variant_overrides(variant: str) -> dict:
    if variant == "full":
        return {}
    if variant == "no_diffusion":
        return {"kappa": 0.0}
    if variant == "local":
        return {"kappa": 0.0, "gamma": 0.0}
    raise ValueError(f"unknown bench variant {variant!r}")


def run_bench(scenario: str = "sine",
              p: int = 3,
              n_values=DEFAULT_N_VALUES,
              repeats: int = 20,
              variants=BENCH_VARIANTS,
              verbose: bool = False,
              **overrides) -> BenchResult:
    """Average wall-clock timings over ``repeats`` runs for each variant
    and mesh size; sequential execution for clean measurements."""
    n_values = tuple(sorted(n_values))
    out = BenchResult(p=p, repeats=repeats, n_values=n_values)
    for variant in variants:
        for n in n_values:
            merged = dict(overrides)
            merged.update(_variant_overrides(variant))
            cfg = config_from_scenario(scenario, p=p, n=n, snapshot_times=(), **merged)
            buckets = np.zeros(3)
            total = 0.0
            for _ in range(repeats):
                result = run_simulation(cfg)
                if result.failed:
                    raise RuntimeError(f"bench run failed: {result.failure_message}")
                rep = result.timing
                buckets += (rep.standard_seconds, rep.diffusion_seconds, rep.nonlocal_seconds)
                total += rep.total_seconds
            buckets /= repeats
            total /= repeats
            out.seconds[(variant, n)] = total
            out.reports[(variant, n)] = TimingReport(
                standard_seconds=buckets[0], diffusion_seconds=buckets[1],
                nonlocal_seconds=buckets[2], total_seconds=total)
            _log(verbose, f"{variant} p={p} n={n}: {total:.3f}s mean of {repeats}")
        out.slopes[variant] = fit_loglog_slope(
            n_values, [out.seconds[(variant, n)] for n in n_values])
    return out
