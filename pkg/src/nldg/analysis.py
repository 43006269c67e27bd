"""Error measurement, convergence-rate estimation, and the wall-clock
breakdown of a run into standard / diffusion / non-local buckets.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .basis import gauss_legendre
from .mesh import SolutionField, evaluate

__all__ = [
    "NonNestedMeshError",
    "TimingReport",
    "Timers",
    "UndefinedRateError",
    "build_timing_report",
    "convergence_rate",
    "convergence_rows_to_csv",
    "fit_loglog_slope",
    "l2_error",
    "nonlocal_share_increasing",
]


class NonNestedMeshError(ValueError):
    """L2 error requested between fields whose meshes are not nested."""


class UndefinedRateError(ValueError):
    """Convergence rate requested for non-positive errors."""


def l2_error(a: SolutionField, b: SolutionField) -> float:
    """L2 norm of the difference of two piecewise-polynomial fields.

    The coarse cell count must divide the fine one (nested meshes); the
    difference is then a polynomial of degree max(p_a, p_b) on every fine
    cell, so Gauss quadrature with max(p)+1 points per fine cell is exact.
    """
    fine, coarse = (a, b) if a.mesh.n >= b.mesh.n else (b, a)
    if abs(a.mesh.length - b.mesh.length) > 1e-14 * max(a.mesh.length, b.mesh.length):
        raise NonNestedMeshError("fields live on different domains")
    if fine.mesh.n % coarse.mesh.n != 0:
        raise NonNestedMeshError(
            f"meshes are not nested: {coarse.mesh.n} does not divide {fine.mesh.n}")
    rule = gauss_legendre(max(a.basis.degree, b.basis.degree) + 1)
    s = (rule.points + 1.0) / 2.0
    xs = fine.mesh.boundaries[:-1, None] * (1.0 - s) + fine.mesh.boundaries[1:, None] * s
    diff = evaluate(a, xs.ravel()) - evaluate(b, xs.ravel())
    sq = diff.reshape(xs.shape) ** 2
    return float(np.sqrt(0.5 * fine.mesh.dx * (sq @ rule.weights).sum()))


def convergence_rate(error_coarse: float, error_fine: float, refinement: float = 16.0) -> float:
    """Observed order from the two extreme resolutions:
    log(e_coarse / e_fine) / log(refinement)."""
    if error_coarse <= 0 or error_fine <= 0:
        raise UndefinedRateError("convergence rate needs strictly positive errors")
    return math.log(error_coarse / error_fine) / math.log(refinement)


def fit_loglog_slope(ns, values) -> float:
    """Least-squares slope of log(values) against log(ns)."""
    return float(np.polyfit(np.log(np.asarray(ns, float)),
                            np.log(np.asarray(values, float)), 1)[0])


class Timers:
    """Per-region wall-clock accumulator (monotonic clock). Regions must
    not overlap; untagged time is absorbed by the standard bucket when the
    report is built."""

    def __init__(self):
        self.seconds = {"diffusion": 0.0, "nonlocal": 0.0}

    def add(self, name: str, dt: float) -> None:
        self.seconds[name] = self.seconds.get(name, 0.0) + dt


@dataclass(frozen=True)
class TimingReport:
    """Three-way cost split of a run. The standard bucket is the residual
    total - diffusion - nonlocal, so the percentages always sum to 100."""

    standard_seconds: float
    diffusion_seconds: float
    nonlocal_seconds: float
    total_seconds: float

    @property
    def standard_pct(self) -> float:
        return 100.0 * self.standard_seconds / self.total_seconds if self.total_seconds else 100.0

    @property
    def diffusion_pct(self) -> float:
        return 100.0 * self.diffusion_seconds / self.total_seconds if self.total_seconds else 0.0

    @property
    def nonlocal_pct(self) -> float:
        return 100.0 * self.nonlocal_seconds / self.total_seconds if self.total_seconds else 0.0

    def to_dict(self) -> dict:
        return {
            "standard_seconds": self.standard_seconds,
            "diffusion_seconds": self.diffusion_seconds,
            "nonlocal_seconds": self.nonlocal_seconds,
            "total_seconds": self.total_seconds,
            "standard_pct": self.standard_pct,
            "diffusion_pct": self.diffusion_pct,
            "nonlocal_pct": self.nonlocal_pct,
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def build_timing_report(timers: Timers, total_seconds: float) -> TimingReport:
    diffusion = timers.seconds.get("diffusion", 0.0)
    nonlocal_ = timers.seconds.get("nonlocal", 0.0)
    standard = max(total_seconds - diffusion - nonlocal_, 0.0)
    return TimingReport(standard_seconds=standard, diffusion_seconds=diffusion,
                        nonlocal_seconds=nonlocal_, total_seconds=total_seconds)


def nonlocal_share_increasing(reports) -> bool:
    """True when the non-local share strictly increases across reports."""
    shares = [r.nonlocal_pct for r in reports]
    return all(b > a for a, b in zip(shares, shares[1:]))


def convergence_rows_to_csv(rows, path) -> None:
    """Write convergence-study rows (dicts with keys p, n, dof, l2_error,
    cpu_seconds, rate) as CSV."""
    fields = ["p", "n", "dof", "l2_error", "cpu_seconds", "rate"]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in fields})
