"""Pointwise model closures for the non-local diffusive traffic model:
demand, velocity, the saturating gradient response, perceived density,
the look-ahead kernel, physical and interface fluxes, wave speed, and the
CFL time step.

All functions accept scalars or numpy arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ALPHA_MODES",
    "INTEGRAND_MODES",
    "InvalidCFLError",
    "InvalidHorizonError",
    "ModelParams",
    "cfl_dt",
    "demand",
    "flux",
    "kernel_weight",
    "lax_friedrichs_flux",
    "local_interface_alpha",
    "max_demand_slope",
    "max_wave_speed",
    "perceived_density",
    "saturation",
    "velocity",
]

ALPHA_MODES = ("global", "local_interface")
INTEGRAND_MODES = ("full_rho_hat", "simplified")

# Saturation is clamped to +-1 beyond this argument magnitude.
_SATURATION_CUTOFF = 20.0


class InvalidHorizonError(ValueError):
    """Non-positive look-ahead horizon where a positive one is required."""


class InvalidCFLError(ValueError):
    """CFL number outside (0, 1]."""


@dataclass(frozen=True)
class ModelParams:
    """Model parameters: look-ahead horizon gamma, diffusion intensity
    kappa, the interface wave-speed mode, and the kernel choice.

    kappa = 1 sits on the boundary of the perceived-density bound's open
    interval; it is accepted for the stationary-jam configuration but the
    bound is only guaranteed on [0, 1).
    gamma = 0 selects the purely local model (the convolution degenerates
    to pointwise perceived density).
    """

    gamma: float = 0.1
    kappa: float = 0.5
    alpha_mode: str = "local_interface"
    kernel: str = "linear"

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if not 0.0 <= self.kappa <= 1.0:
            raise ValueError(f"kappa must be in [0, 1], got {self.kappa}")
        if self.alpha_mode not in ALPHA_MODES:
            raise ValueError(f"alpha_mode must be one of {ALPHA_MODES}, got {self.alpha_mode!r}")
        if self.kernel != "linear":
            raise ValueError(f"only the linear kernel is available, got {self.kernel!r}")


def demand(rho):
    """Demand D(rho) = rho * (1 - rho)."""
    return rho * (1.0 - rho)


def velocity(r):
    """Velocity U(r) = 1 - r for a congestion measure r in [0, 1]."""
    return 1.0 - r


def saturation(u):
    """Bounded, monotone response to the density gradient: tanh, with the
    argument clamped to +-1 beyond |u| > 20 so extreme gradients are exact
    saturations."""
    u = np.asarray(u, dtype=float)
    out = np.tanh(np.clip(u, -_SATURATION_CUTOFF, _SATURATION_CUTOFF))
    out = np.where(u > _SATURATION_CUTOFF, 1.0, out)
    out = np.where(u < -_SATURATION_CUTOFF, -1.0, out)
    if out.ndim == 0:
        return float(out)
    return out


def perceived_density(rho, grad, kappa):
    """Perceived density rho + kappa * rho(1-rho) * saturation(grad).

    For rho in [0, 1] and kappa in [0, 1) the result stays in [0, 1]
    regardless of the gradient.
    """
    out = rho + kappa * demand(rho) * saturation(grad)
    if np.ndim(out) == 0:
        return float(out)
    return out


def kernel_weight(offset, gamma: float):
    """Linear look-ahead kernel (2/gamma)(1 - offset/gamma) on [0, gamma],
    zero elsewhere. Integrates to 1 over its support."""
    if gamma <= 0:
        raise InvalidHorizonError(f"horizon must be positive, got {gamma}")
    offset = np.asarray(offset, dtype=float)
    inside = (offset >= 0.0) & (offset <= gamma)
    out = np.where(inside, (2.0 / gamma) * (1.0 - offset / gamma), 0.0)
    if out.ndim == 0:
        return float(out)
    return out


def flux(rho, r):
    """Physical flux: demand(rho) * velocity(r), where r is the
    kernel-weighted downstream average of the perceived density.
    Nonnegative whenever rho, r are in [0, 1]."""
    return demand(rho) * velocity(r)


def max_demand_slope() -> float:
    """max over rho in [0, 1] of |D'(rho)| = |1 - 2 rho|, which is 1."""
    return 1.0


def max_wave_speed(params: ModelParams | None = None) -> float:
    """Global wave-speed bound max over rho in [0,1] of
    |d/drho [D(rho) U(rho)]| = |(1 - rho)(1 - 3 rho)|.

    Independent of gamma and kappa because the perceived density reduces
    to rho wherever the gradient vanishes, so the extremum is attained by
    the local flux. The maximum sits at rho = 0 with value 1.
    """
    rho = np.linspace(0.0, 1.0, 20001)
    slope = np.abs((1.0 - rho) * (1.0 - 3.0 * rho))
    return float(slope.max())


def local_interface_alpha(r):
    """Interface dissipation for the vanishing-at-jam mode:
    U(r) * max|D'|. Zero when the downstream average saturates at 1, which
    keeps a full jam against a void stationary."""
    return velocity(r) * max_demand_slope()


def lax_friedrichs_flux(u_left, u_right, r, alpha):
    """Lax-Friedrichs interface flux
    0.5 * [(D(u_left) + D(u_right)) U(r) + alpha (u_left - u_right)].
    Consistent: equals D(u) U(r) when both traces agree."""
    return 0.5 * ((demand(u_left) + demand(u_right)) * velocity(r) + alpha * (u_left - u_right))


def cfl_dt(dx: float, p: int, beta: float, alpha: float) -> float:
    """Time step dt = beta * dx / ((2p + 1) * alpha) for CFL number
    beta in (0, 1]."""
    if not 0.0 < beta <= 1.0:
        raise InvalidCFLError(f"CFL number must be in (0, 1], got {beta}")
    return beta * dx / ((2 * p + 1) * alpha)
