"""Non-local diffusive traffic flow solved with a local discontinuous
Galerkin scheme.

The model transports a density whose velocity responds to a
kernel-weighted downstream average of the perceived density (density
plus a bounded function of its gradient). The solver combines a nodal DG
discretisation, an element-local gradient solve, per-segment
Gauss-Legendre evaluation of the non-local averages, a TVB slope
limiter, and SSP-RK3 time stepping, plus experiment tooling for
convergence and cost studies.
"""

from .analysis import (
    NonNestedMeshError,
    Timers,
    TimingReport,
    UndefinedRateError,
    build_timing_report,
    convergence_rate,
    fit_loglog_slope,
    l2_error,
)
from .basis import (
    BasisSet,
    InvalidCountError,
    InvalidDegreeError,
    QuadratureRule,
    build_basis,
    chebyshev_lobatto_nodes,
    gauss_legendre,
)
from .config import ConfigError, RunConfig
from .convolution import SegmentPlan, SplitSegmentPlan, StencilPlan, build_plan, eval_R, solver_plan
from .limiter import LimiterConfig, apply_gsl, limit_coefficients, minmod1, minmod2
from .mesh import (
    BoundarySpec,
    Mesh,
    SolutionField,
    cell_average,
    cell_averages,
    evaluate,
    field_to_csv,
    node_coordinates,
    project_initial_condition,
    total_mass,
)
from .model import (
    InvalidCFLError,
    InvalidHorizonError,
    ModelParams,
    cfl_dt,
    demand,
    flux,
    kernel_weight,
    lax_friedrichs_flux,
    max_wave_speed,
    perceived_density,
    saturation,
    velocity,
)
from .operator import ElementMatrices, LDGOperator, assemble_reference_matrices
from .scenarios import PiecewiseConstant, UnknownScenarioError, config_from_scenario, get_scenario
from .timestepping import BlowUpError, SimulationResult, rk3_step, run_simulation

__version__ = "0.1.0"
