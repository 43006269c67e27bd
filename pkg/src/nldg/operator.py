"""Semi-discrete LDG spatial operator.

Per stage the operator (1) solves the element-local mass systems for the
auxiliary gradient field, (2) evaluates the non-local averages at all
interfaces and volume quadrature points, and (3) assembles the flux
divergence: du/dt = M^{-1} (K - S2) per cell, with the Lax-Friedrichs
interface flux and the downwind trace closing the gradient system.

All cells share one reference mass/convection pair on a uniform mesh, so
the element solves are dense (p+1)x(p+1) applications of a precomputed
inverse and the whole operator is a handful of array contractions.
"""
from __future__ import annotations

from dataclasses import dataclass
from time import perf_counter

import numpy as np

from .basis import BasisSet
from .convolution import _integrand, solver_plan
from .mesh import BoundarySpec, Mesh
from .model import (
    ModelParams,
    demand,
    lax_friedrichs_flux,
    local_interface_alpha,
    max_wave_speed,
    velocity,
)

__all__ = ["ElementMatrices", "LDGOperator", "assemble_reference_matrices"]


@dataclass(frozen=True)
class ElementMatrices:
    """Reference element matrices shared by every cell of a uniform mesh.

    mass is the physical mass matrix (scaled by dx/2); convection is the
    scale-free matrix C_ij = int dphi_i/dx phi_j dx; mass_inv is the
    precomputed inverse used for the repeated per-cell solves.
    """

    mass: np.ndarray
    convection: np.ndarray
    mass_inv: np.ndarray


def assemble_reference_matrices(basis: BasisSet, dx: float) -> ElementMatrices:
    """Assemble M and C by quadrature (exact: integrands have degree <= 2p)."""
    phi = basis.values_at_quadrature
    dphi = basis.derivatives_at_quadrature
    w = basis.rule.weights
    mass = 0.5 * dx * (phi * w) @ phi.T
    mass = 0.5 * (mass + mass.T)
    convection = (dphi * w) @ phi.T
    # Distinct interpolation nodes guarantee SPD; a failed factorization
    # here means corrupted basis data, not a recoverable state.
    np.linalg.cholesky(mass)
    mass_inv = np.linalg.inv(mass)
    mass_inv = 0.5 * (mass_inv + mass_inv.T)
    for a in (mass, convection, mass_inv):
        a.flags.writeable = False
    return ElementMatrices(mass=mass, convection=convection, mass_inv=mass_inv)


class LDGOperator:
    """The full semi-discrete right-hand side u -> du/dt.

    Evaluation order per call: gradient solve, non-local averages, flux
    assembly. The gradient solve runs only when kappa > 0; the convolution
    only when gamma > 0 (gamma = 0 degenerates to pointwise perceived
    density). When a ``timers`` object is supplied, the gradient solve is
    accumulated under "diffusion" and the convolution under "nonlocal".
    """

    def __init__(self, mesh: Mesh, basis: BasisSet, params: ModelParams,
                 bc: BoundarySpec, integrand_mode: str = "full_rho_hat",
                 timers=None):
        if bc.mode != mesh.bc_mode:
            raise ValueError("boundary spec mode disagrees with the mesh")
        self.mesh = mesh
        self.basis = basis
        self.params = params
        self.bc = bc
        self.integrand_mode = integrand_mode
        self.timers = timers
        self.matrices = assemble_reference_matrices(basis, mesh.dx)
        self.alpha_global = max_wave_speed(params)
        self.need_gradient = params.kappa > 0.0
        self.plan = None
        if params.gamma > 0.0:
            self.plan = solver_plan(mesh, basis, params, bc, integrand_mode)

        minv = self.matrices.mass_inv
        self._minv = minv
        self._minv_last = minv[:, -1].copy()
        self._phi = basis.values_at_quadrature
        # Quadrature weight x reference derivative is the scale-free volume
        # kernel; fold the weights in once.
        self._wdphi_t = (basis.derivatives_at_quadrature * basis.rule.weights).T.copy()
        # Gradient solve as one matrix: -(M^-1 C)^T plus the own-trace part
        # of S1 (which only reads the first coefficient).
        grad_matrix = -(minv @ self.matrices.convection).T
        grad_matrix[0, :] -= minv[:, 0]
        self._grad_matrix = grad_matrix

    def compute_gradient(self, u: np.ndarray) -> np.ndarray:
        """Element-local solve M g = -C u + S1 approximating du/dx, closed
        with the downwind trace (frozen mode extends the edge constant, so
        the boundary gradient is consistent with a constant extension)."""
        u0_next = np.empty(self.mesh.n)
        u0_next[:-1] = u[1:, 0]
        u0_next[-1] = u[0, 0] if self.bc.periodic else self.bc.right_value
        grad = u @ self._grad_matrix
        grad += np.outer(u0_next, self._minv_last)
        return grad

    def _interface_traces(self, u: np.ndarray):
        n = self.mesh.n
        u_left = np.empty(n + 1)
        u_left[1:] = u[:, -1]
        u_left[0] = u[-1, -1] if self.bc.periodic else self.bc.left_value
        u_right = np.empty(n + 1)
        u_right[:-1] = u[:, 0]
        u_right[-1] = u[0, 0] if self.bc.periodic else self.bc.right_value
        return u_left, u_right

    def _pointwise_averages(self, u: np.ndarray, grad: np.ndarray | None):
        """gamma = 0 limit: the non-local average collapses to the
        pointwise perceived density (right traces at interfaces)."""
        kappa, mode = self.params.kappa, self.integrand_mode
        u_vol = u @ self._phi
        n = self.mesh.n
        u_tr = np.empty(n + 1)
        u_tr[:-1] = u[:, 0]
        u_tr[-1] = u[0, 0] if self.bc.periodic else self.bc.right_value
        if kappa > 0.0:
            g_vol = grad @ self._phi
            g_tr = np.empty(n + 1)
            g_tr[:-1] = grad[:, 0]
            g_tr[-1] = grad[0, 0] if self.bc.periodic else 0.0
            return (_integrand(u_tr, g_tr, kappa, mode),
                    _integrand(u_vol, g_vol, kappa, mode))
        return u_tr, u_vol

    def compute_rhs(self, u: np.ndarray, r_ifc: np.ndarray, r_vol: np.ndarray) -> np.ndarray:
        """Assemble du/dt = M^{-1}(K - S2) from precomputed non-local
        averages at the interfaces (n+1 values) and volume points (n, N_G)."""
        # Physical weight x physical derivative is scale free, so the
        # volume term uses the reference tables directly.
        q = demand(u @ self._phi) * velocity(r_vol)
        rhs = q @ self._wdphi_t
        u_left, u_right = self._interface_traces(u)
        if self.params.alpha_mode == "local_interface":
            alpha = local_interface_alpha(r_ifc)
        else:
            alpha = self.alpha_global
        flux = lax_friedrichs_flux(u_left, u_right, r_ifc, alpha)
        rhs[:, 0] += flux[:-1]
        rhs[:, -1] -= flux[1:]
        return rhs @ self._minv

    def __call__(self, u: np.ndarray) -> np.ndarray:
        timers = self.timers
        grad = None
        if self.need_gradient:
            t0 = perf_counter() if timers is not None else 0.0
            grad = self.compute_gradient(u)
            if timers is not None:
                timers.add("diffusion", perf_counter() - t0)
        if self.plan is not None:
            t0 = perf_counter() if timers is not None else 0.0
            r_ifc, r_vol = self.plan.evaluate(u, grad)
            if timers is not None:
                timers.add("nonlocal", perf_counter() - t0)
        else:
            r_ifc, r_vol = self._pointwise_averages(u, grad)
        return self.compute_rhs(u, r_ifc, r_vol)
