"""Scenario registry: named initial conditions and their default run
configurations.

Riemann scenarios default to the shock-capturing setup (frozen
boundaries, limiter on, p=1, n=320, beta=0.2, TVB constant 35); the
smooth sine scenario defaults to the convergence-study setup (periodic,
no limiter, beta=0.1, T=0.1). Snapshot times for the Riemann runs are a
project choice, t in {0.25, 0.5, 1.0}.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import RunConfig

__all__ = [
    "PiecewiseConstant",
    "Scenario",
    "UnknownScenarioError",
    "config_from_scenario",
    "get_scenario",
    "scenario_names",
    "sine_profile",
]


class UnknownScenarioError(ValueError):
    """Scenario id not in the registry."""


class PiecewiseConstant:
    """Riemann-type initial datum with exact one-sided limits at the jump,
    so projection onto a mesh whose boundary hits the jump samples the
    correct side in each adjacent cell."""

    def __init__(self, left: float, right: float, jump: float = 0.5):
        self.left = float(left)
        self.right = float(right)
        self.jump = float(jump)

    def __call__(self, x):
        return np.where(np.asarray(x, dtype=float) < self.jump, self.left, self.right)

    def right_limit(self, x):
        return self(x)

    def left_limit(self, x):
        return np.where(np.asarray(x, dtype=float) <= self.jump, self.left, self.right)


def sine_profile(x):
    """Smooth periodic profile 0.5 + 0.4 sin(2 pi (x + 0.5))."""
    return 0.5 + 0.4 * np.sin(2.0 * np.pi * (np.asarray(x, dtype=float) + 0.5))


@dataclass(frozen=True)
class Scenario:
    name: str
    ic: object
    defaults: dict


_RIEMANN_DEFAULTS = dict(
    p=1, n=320, beta=0.2, t_final=1.0,
    gamma=0.1, kappa=0.5, m_tvb=35.0,
    limiter_enabled=True, bc_mode="frozen",
    alpha_mode="local_interface", integrand_mode="full_rho_hat",
    snapshot_times=(0.25, 0.5, 1.0),
)

_SCENARIOS = {
    "rarefaction": Scenario(
        "rarefaction", PiecewiseConstant(0.45, 0.20), dict(_RIEMANN_DEFAULTS)),
    "shock_forward": Scenario(
        "shock_forward", PiecewiseConstant(0.15, 0.45), dict(_RIEMANN_DEFAULTS)),
    "shock_backward": Scenario(
        "shock_backward", PiecewiseConstant(0.35, 0.65), dict(_RIEMANN_DEFAULTS)),
    # Full jam downstream of a void; kappa = 1 reproduces the stationary
    # configuration that shows the model never drives traffic backwards.
    "jam_step": Scenario(
        "jam_step", PiecewiseConstant(0.0, 1.0), dict(_RIEMANN_DEFAULTS, kappa=1.0)),
    "sine": Scenario(
        "sine", sine_profile,
        dict(p=3, n=80, beta=0.1, t_final=0.1,
             gamma=0.1, kappa=0.5, m_tvb=35.0,
             limiter_enabled=False, bc_mode="periodic",
             alpha_mode="local_interface", integrand_mode="full_rho_hat",
             snapshot_times=(0.1,))),
}


def scenario_names() -> tuple:
    return tuple(sorted(_SCENARIOS))


def get_scenario(scenario_id: str) -> Scenario:
    try:
        return _SCENARIOS[scenario_id]
    except KeyError:
        raise UnknownScenarioError(
            f"unknown scenario {scenario_id!r}; available: {', '.join(scenario_names())}"
        ) from None


def config_from_scenario(scenario_id: str, **overrides) -> RunConfig:
    """Scenario defaults overridden by any non-None keyword arguments.

    When T is overridden without explicit snapshot times, the default
    snapshot list is clipped to the new horizon.
    """
    scenario = get_scenario(scenario_id)
    merged = dict(scenario.defaults)
    explicit = {k: v for k, v in overrides.items() if v is not None}
    merged.update(explicit)
    if "t_final" in explicit and "snapshot_times" not in explicit:
        t = merged["t_final"]
        merged["snapshot_times"] = tuple(
            s for s in scenario.defaults.get("snapshot_times", ()) if s <= t + 1e-12)
    return RunConfig(scenario=scenario_id, **merged)
