"""SSP-RK3 time advancement with CFL step control and the stage-wise
slope-limiter hook.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from time import perf_counter

import numpy as np

from .analysis import Timers, TimingReport, build_timing_report
from .basis import build_basis
from .config import RunConfig
from .limiter import LimiterConfig, limit_coefficients
from .mesh import BoundarySpec, Mesh, SolutionField, project_initial_condition, total_mass
from .model import ModelParams, cfl_dt, max_wave_speed
from .operator import LDGOperator
from .scenarios import get_scenario

__all__ = ["BlowUpError", "SimulationResult", "rk3_step", "run_simulation"]


class BlowUpError(RuntimeError):
    """Non-finite value produced by a Runge-Kutta stage."""

    def __init__(self, time: float, cell: int, value: float):
        super().__init__(f"non-finite value {value!r} in cell {cell} at t={time:.6g}")
        self.time = time
        self.cell = cell
        self.value = value


def _check_finite(u: np.ndarray, t: float) -> np.ndarray:
    if not np.isfinite(u).all():
        bad = np.argwhere(~np.isfinite(u))[0]
        raise BlowUpError(t, int(bad[0]), float(u[tuple(bad)]))
    return u


def rk3_step(u: np.ndarray, dt: float, rhs, limit=None, t: float = 0.0) -> np.ndarray:
    """One step of the three-stage strong-stability-preserving scheme:
    a convex combination of forward-Euler steps, third-order accurate.
    The limiter runs after every stage when supplied."""
    if limit is None:
        limit = lambda c: c
    u1 = limit(_check_finite(u + dt * rhs(u), t))
    u2 = limit(_check_finite(0.75 * u + 0.25 * (u1 + dt * rhs(u1)), t))
    return limit(_check_finite(u / 3.0 + (2.0 / 3.0) * (u2 + dt * rhs(u2)), t))


@dataclass
class SimulationResult:
    """Run output: final field, snapshots (fields tagged with their actual
    capture times), diagnostics, and the wall-clock breakdown."""

    config: RunConfig | None
    final: SolutionField
    snapshots: list
    mass_trace: list
    rho_min: float
    rho_max: float
    steps: int
    dt: float
    timing: TimingReport
    failed: bool = False
    failure_message: str | None = None


def plan_steps(t_final: float, dt: float):
    """Number of uniform steps covering [0, T], the last one clipped so
    the accumulated time hits T exactly."""
    if t_final <= 0.0:
        return 0, 0.0
    nsteps = max(1, math.ceil(t_final / dt - 1e-9))
    last = t_final - (nsteps - 1) * dt
    return nsteps, last


def run_simulation(config: RunConfig, ic=None) -> SimulationResult:
    """Advance the configured scenario to its final time.

    Snapshots are captured at the first step boundary at or past each
    requested time. A blow-up aborts the run and returns the partial
    trajectory with the failure recorded instead of raising.
    """
    if ic is None:
        ic = get_scenario(config.scenario).ic
    t_start = perf_counter()
    mesh = Mesh(config.n, length=config.length, bc_mode=config.bc_mode)
    basis = build_basis(config.p)
    params = ModelParams(gamma=config.gamma, kappa=config.kappa,
                         alpha_mode=config.alpha_mode)
    fld = project_initial_condition(ic, mesh, basis)
    bc = BoundarySpec.for_field(fld)
    timers = Timers()
    operator = LDGOperator(mesh, basis, params, bc,
                           integrand_mode=config.integrand_mode, timers=timers)
    limiter_cfg = LimiterConfig(enabled=config.limiter_enabled,
                                m_tvb=config.m_tvb, dx=mesh.dx)
    limit = lambda c: limit_coefficients(c, basis, limiter_cfg, bc)

    alpha = max_wave_speed(params)
    dt = cfl_dt(mesh.dx, config.p, config.beta, alpha)
    nsteps, last_dt = plan_steps(config.t_final, dt)

    u = fld.coeffs
    t = 0.0
    pending = sorted(config.snapshot_times)
    snapshots = []
    mass_trace = [(0.0, total_mass(fld))]
    rho_min = float(u.min())
    rho_max = float(u.max())

    def capture(time_now):
        snap = SolutionField(mesh=mesh, basis=basis, coeffs=u.copy(), time=time_now)
        snapshots.append(snap)
        mass_trace.append((time_now, total_mass(snap)))

    while pending and pending[0] <= 1e-12:
        pending.pop(0)
        capture(0.0)

    failed = False
    failure_message = None
    step = 0
    try:
        for step in range(1, nsteps + 1):
            h = dt if step < nsteps else last_dt
            u = rk3_step(u, h, operator, limit, t)
            t = config.t_final if step == nsteps else step * dt
            rho_min = min(rho_min, float(u.min()))
            rho_max = max(rho_max, float(u.max()))
            while pending and t >= pending[0] - 1e-12:
                pending.pop(0)
                capture(t)
    except BlowUpError as exc:
        failed = True
        failure_message = str(exc)

    final = SolutionField(mesh=mesh, basis=basis, coeffs=u.copy(), time=t)
    mass_trace.append((t, total_mass(final)))
    total_seconds = perf_counter() - t_start
    return SimulationResult(
        config=config,
        final=final,
        snapshots=snapshots,
        mass_trace=mass_trace,
        rho_min=rho_min,
        rho_max=rho_max,
        steps=step if not failed else step - 1,
        dt=dt,
        timing=build_timing_report(timers, total_seconds),
        failed=failed,
        failure_message=failure_message,
    )
