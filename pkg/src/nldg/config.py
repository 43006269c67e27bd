"""Run configuration: the single record describing a simulation, shared
by the CLI, the experiment drivers, and the time integrator.
"""
from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, field, replace

from .mesh import BC_MODES
from .model import ALPHA_MODES, INTEGRAND_MODES

__all__ = ["ConfigError", "RunConfig"]


class ConfigError(ValueError):
    """Invalid run configuration."""


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs. Constructed from scenario defaults, an
    optional config file, and CLI flags (later sources win)."""

    scenario: str
    p: int = 1
    n: int = 320
    beta: float = 0.2
    t_final: float = 1.0
    gamma: float = 0.1
    kappa: float = 0.5
    m_tvb: float = 35.0
    limiter_enabled: bool = True
    bc_mode: str = "frozen"
    alpha_mode: str = "local_interface"
    integrand_mode: str = "full_rho_hat"
    snapshot_times: tuple = ()
    length: float = 1.0
    out_dir: str = "out"
    repeats: int = 20

    def __post_init__(self):
        object.__setattr__(self, "snapshot_times", tuple(float(t) for t in self.snapshot_times))
        self.validate()

    def validate(self) -> None:
        if self.p < 1:
            raise ConfigError(f"p must be >= 1, got {self.p}")
        if self.n < 2:
            raise ConfigError(f"n must be >= 2, got {self.n}")
        if not 0.0 < self.beta <= 1.0:
            raise ConfigError(f"beta must be in (0, 1], got {self.beta}")
        if self.t_final < 0:
            raise ConfigError(f"T must be >= 0, got {self.t_final}")
        if self.gamma < 0:
            raise ConfigError(f"gamma must be >= 0, got {self.gamma}")
        if not 0.0 <= self.kappa <= 1.0:
            raise ConfigError(f"kappa must be in [0, 1], got {self.kappa}")
        if self.kappa == 1.0:
            warnings.warn("kappa = 1 sits on the boundary of the perceived-density "
                          "bound; accepted for the stationary-jam configuration",
                          stacklevel=2)
        if self.m_tvb < 0:
            raise ConfigError(f"TVB constant must be >= 0, got {self.m_tvb}")
        if self.bc_mode not in BC_MODES:
            raise ConfigError(f"bc must be one of {BC_MODES}, got {self.bc_mode!r}")
        if self.alpha_mode not in ALPHA_MODES:
            raise ConfigError(f"alpha mode must be one of {ALPHA_MODES}, got {self.alpha_mode!r}")
        if self.integrand_mode not in INTEGRAND_MODES:
            raise ConfigError(
                f"integrand mode must be one of {INTEGRAND_MODES}, got {self.integrand_mode!r}")
        if self.length <= 0:
            raise ConfigError(f"domain length must be positive, got {self.length}")
        if self.repeats < 1:
            raise ConfigError(f"repeats must be >= 1, got {self.repeats}")
        for t in self.snapshot_times:
            if not 0.0 <= t <= self.t_final + 1e-12:
                raise ConfigError(f"snapshot time {t} outside [0, T={self.t_final}]")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["snapshot_times"] = list(self.snapshot_times)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        if "snapshot_times" in d:
            d["snapshot_times"] = tuple(d["snapshot_times"])
        return cls(**d)

    def with_overrides(self, **kwargs) -> "RunConfig":
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **kwargs)
