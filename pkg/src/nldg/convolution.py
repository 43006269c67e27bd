"""Evaluation of the non-local term: the kernel-weighted average of the
perceived density over the look-ahead window [x, x + gamma], integrated
against the piecewise-polynomial fields.

Two evaluators share the same quadrature (per-segment Gauss-Legendre,
segments split at every cell boundary):

* ``SegmentPlan`` handles arbitrary query points, non-integer horizons
  and is the reference implementation of the plan contract.
* ``StencilPlan`` covers the solver's standard queries (every interface
  and every volume quadrature point) on a uniform mesh whose horizon is a
  whole number of cells. There the mapped quadrature points repeat from
  cell to cell, so the kernel weights collapse to fixed stencils and the
  whole evaluation becomes a few dense contractions. This is the hot path
  that makes the cost scaling measurable rather than prohibitive.

Per-query weights are renormalised so that they sum to exactly the
kernel's unit mass, which removes the systematic quadrature roundoff from
constant fields.
"""
from __future__ import annotations

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .basis import BasisSet, lagrange_values
from .mesh import BoundarySpec, Mesh
from .model import INTEGRAND_MODES, ModelParams, kernel_weight, saturation

__all__ = [
    "SegmentPlan",
    "SplitSegmentPlan",
    "StencilPlan",
    "build_plan",
    "eval_R",
    "integer_horizon_cells",
    "solver_plan",
    "volume_points",
]


def _integrand(u, grad, kappa: float, mode: str):
    """Pointwise integrand of the non-local average.

    full_rho_hat uses the perceived density u + kappa*u*(1-u)*sat(grad);
    simplified drops the u*(1-u) factor.
    """
    if kappa == 0.0 or grad is None:
        return u
    if mode == "full_rho_hat":
        return u + kappa * (u * (1.0 - u)) * saturation(grad)
    return u + kappa * saturation(grad)


def volume_points(mesh: Mesh, basis: BasisSet) -> np.ndarray:
    """Physical quadrature points of every cell, shape (n, N_G)."""
    s = (basis.rule.points + 1.0) / 2.0
    left = mesh.boundaries[:-1, None]
    right = mesh.boundaries[1:, None]
    return left * (1.0 - s) + right * s


def integer_horizon_cells(gamma: float, mesh: Mesh) -> int | None:
    """Number of whole cells spanned by the horizon, or None when the
    horizon is not an integer multiple of the cell width."""
    ratio = gamma / mesh.dx
    m = round(ratio)
    if m >= 1 and abs(ratio - m) <= 1e-9 * max(1.0, ratio):
        return m
    return None


class SegmentPlan:
    """General quadrature plan: one list of kernel-weighted points per
    query, segments tiling [x, x + gamma] and split at every cell
    boundary (partial cells included, so the horizon need not be a whole
    number of cells).

    The flattened point data (cell index, basis values, combined weight)
    is laid out query-by-query, left to right, and evaluation reduces each
    query's contributions in that order, so results are deterministic.
    """

    def __init__(self, mesh: Mesh, basis: BasisSet, gamma: float, kappa: float,
                 query_points, bc: BoundarySpec, integrand_mode: str = "full_rho_hat"):
        if gamma <= 0:
            raise ValueError(f"plan requires a positive horizon, got gamma={gamma}")
        if integrand_mode not in INTEGRAND_MODES:
            raise ValueError(f"integrand_mode must be one of {INTEGRAND_MODES}")
        if bc.mode != mesh.bc_mode:
            raise ValueError("boundary spec mode disagrees with the mesh")
        self.mesh = mesh
        self.basis = basis
        self.gamma = float(gamma)
        self.kappa = float(kappa)
        self.bc = bc
        self.integrand_mode = integrand_mode
        self.query_points = np.asarray(query_points, dtype=float).ravel().copy()
        if self.query_points.size == 0:
            raise ValueError("need at least one query point")
        lo, hi = self.query_points.min(), self.query_points.max()
        if lo < -1e-12 * mesh.length or hi > mesh.length * (1 + 1e-12):
            raise ValueError("query points must lie inside the domain")

        cells, vals, weights, counts = [], [], [], []
        for xq in self.query_points:
            c, v, w = self._build_query(float(xq))
            cells.append(c)
            vals.append(v)
            weights.append(w)
            counts.append(w.size)
        self.point_cells = np.concatenate(cells)
        self.point_values = np.vstack(vals)
        self.point_weights = np.concatenate(weights)
        self.offsets = np.concatenate([[0], np.cumsum(counts)])
        self.max_cell = int(self.point_cells.max())

    def _build_query(self, xq: float):
        mesh, basis = self.mesh, self.basis
        dx = mesh.dx
        end = xq + self.gamma
        eps = 1e-12 * dx

        # Cell boundaries strictly inside (xq, end); indexed on the uniform
        # grid extended past the domain for ghost cells.
        jlo = int(np.floor(xq / dx)) + 1
        while mesh.boundary_coordinate(jlo) <= xq + eps:
            jlo += 1
        while jlo >= 1 and mesh.boundary_coordinate(jlo - 1) > xq + eps:
            jlo -= 1
        jhi = int(np.ceil(end / dx)) - 1
        while jhi >= jlo and mesh.boundary_coordinate(jhi) >= end - eps:
            jhi -= 1
        while mesh.boundary_coordinate(jhi + 1) < end - eps:
            jhi += 1
        if jhi >= jlo:
            inner = mesh.length * np.arange(jlo, jhi + 1) / mesh.n
        else:
            inner = np.empty(0)
        knots = np.concatenate([[xq], inner, [end]])

        a, b = knots[:-1], knots[1:]
        mids = 0.5 * (a + b)
        cells = np.floor(mids / dx).astype(np.int64)
        s = (basis.rule.points + 1.0) / 2.0
        y = a[:, None] * (1.0 - s) + b[:, None] * s                     # (nseg, ng)
        w = 0.5 * (b - a)[:, None] * basis.rule.weights * kernel_weight(y - xq, self.gamma)
        cell_left = mesh.length * cells / mesh.n
        xi = np.clip(2.0 * (y - cell_left[:, None]) / dx - 1.0, -1.0, 1.0)
        if self.bc.periodic:
            cells = cells % mesh.n
        ng = basis.rule.npoints
        point_cells = np.repeat(cells, ng)
        point_vals = lagrange_values(basis.nodes, xi.ravel()).T          # (npts, p+1)
        point_w = w.ravel()
        point_w /= math.fsum(point_w.tolist())
        return point_cells, point_vals, point_w

    def _extended(self, coeffs: np.ndarray, ghost_value: float) -> np.ndarray:
        n = self.mesh.n
        if self.max_cell < n:
            return coeffs
        ghost = np.full((self.max_cell - n + 1, coeffs.shape[1]), ghost_value)
        return np.concatenate([coeffs, ghost])

    def evaluate(self, u_coeffs: np.ndarray, grad_coeffs: np.ndarray | None = None) -> np.ndarray:
        """Non-local averages at every query point, shape (n_queries,)."""
        u_ext = self._extended(u_coeffs, self.bc.right_value)
        uvals = (self.point_values * u_ext[self.point_cells]).sum(axis=1)
        if self.kappa > 0.0:
            if grad_coeffs is None:
                raise ValueError("gradient coefficients required when kappa > 0")
            g_ext = self._extended(grad_coeffs, 0.0)
            gvals = (self.point_values * g_ext[self.point_cells]).sum(axis=1)
        else:
            gvals = None
        f = _integrand(uvals, gvals, self.kappa, self.integrand_mode)
        return np.add.reduceat(self.point_weights * f, self.offsets[:-1])


class StencilPlan:
    """Structured evaluator for the solver's queries on a uniform mesh
    with an integer horizon m = gamma/dx.

    Interface queries decompose into m whole-cell segments whose quadrature
    points coincide with the standard volume points, and volume queries add
    two partial segments; all kernel weights depend only on the offset
    pattern, never on the cell, so they are precomputed once as stencils.

    ``evaluate`` returns the pair (interface values with shape (n+1,),
    volume values with shape (n, N_G)).
    """

    def __init__(self, mesh: Mesh, basis: BasisSet, gamma: float, kappa: float,
                 bc: BoundarySpec, integrand_mode: str = "full_rho_hat"):
        m = integer_horizon_cells(gamma, mesh)
        if m is None:
            raise ValueError("horizon is not an integer number of cells; use SegmentPlan")
        if integrand_mode not in INTEGRAND_MODES:
            raise ValueError(f"integrand_mode must be one of {INTEGRAND_MODES}")
        if bc.mode != mesh.bc_mode:
            raise ValueError("boundary spec mode disagrees with the mesh")
        self.mesh = mesh
        self.basis = basis
        self.gamma = float(gamma)
        self.kappa = float(kappa)
        self.bc = bc
        self.integrand_mode = integrand_mode
        self.cells_per_window = m

        dx = mesh.dx
        xi = basis.rule.points
        w = basis.rule.weights
        ng = basis.rule.npoints

        j = np.arange(m)[:, None]
        s_ifc = 0.5 * dx * w * kernel_weight(dx * (j + 0.5 * (xi + 1.0)), gamma)
        s_ifc /= math.fsum(s_ifc.ravel().tolist())
        self.s_ifc = s_ifc                                               # (m, ng)

        zeta_l = xi[:, None] + 0.5 * (xi[None, :] + 1.0) * (1.0 - xi[:, None])
        w_l = (0.5 * (1.0 - xi[:, None])) * (0.5 * dx) * w[None, :] \
            * kernel_weight(0.5 * dx * (zeta_l - xi[:, None]), gamma)
        zeta_r = -1.0 + 0.5 * (xi[None, :] + 1.0) * (xi[:, None] + 1.0)
        w_r = (0.5 * (xi[:, None] + 1.0)) * (0.5 * dx) * w[None, :] \
            * kernel_weight(dx * (m + 0.5 * (zeta_r - xi[:, None])), gamma)
        if m > 1:
            jj = np.arange(1, m)[None, :, None]
            dist = dx * (jj + 0.5 * (xi[None, None, :] - xi[:, None, None]))
            s_vol = 0.5 * dx * w[None, None, :] * kernel_weight(dist, gamma)  # (g0, m-1, g)
        else:
            s_vol = np.zeros((ng, 0, ng))
        for g0 in range(ng):
            tot = math.fsum(w_l[g0].tolist()) + math.fsum(w_r[g0].tolist()) \
                + math.fsum(s_vol[g0].ravel().tolist())
            w_l[g0] /= tot
            w_r[g0] /= tot
            if m > 1:
                s_vol[g0] /= tot
        self.w_l, self.w_r, self.s_vol = w_l, w_r, s_vol
        self.phi = basis.values_at_quadrature                            # (p+1, ng)
        self.phi_l = lagrange_values(basis.nodes, zeta_l.ravel())        # (p+1, ng*ng)
        self.phi_r = lagrange_values(basis.nodes, zeta_r.ravel())

        # One evaluation table for all point groups: volume points, then
        # the left/right partial-segment points, so a single matmul (and a
        # single integrand pass) serves the whole nonlinear path.
        self.phi_all = np.hstack([self.phi, self.phi_l, self.phi_r])     # (p+1, ng+2ng^2)
        # Weight matrices applying the partial stencils to the flattened
        # (g0, g) point blocks: column g0 holds w[g0, :] on its own rows.
        w_l_mat = np.zeros((ng * ng, ng))
        w_r_mat = np.zeros((ng * ng, ng))
        for g0 in range(ng):
            w_l_mat[g0 * ng:(g0 + 1) * ng, g0] = w_l[g0]
            w_r_mat[g0 * ng:(g0 + 1) * ng, g0] = w_r[g0]
        self.w_l_mat, self.w_r_mat = w_l_mat, w_r_mat

        # kappa = 0 collapses the whole evaluation to linear maps on the
        # coefficients: fold the basis tables into the kernel stencils once.
        self.s_ifc_coef = np.tensordot(s_ifc, self.phi, axes=([1], [1]))  # (m, p+1)
        t_vol = np.zeros((ng, m + 1, basis.degree + 1))
        phi_l_3d = self.phi_l.reshape(basis.degree + 1, ng, ng)          # (i, g0, g)
        phi_r_3d = self.phi_r.reshape(basis.degree + 1, ng, ng)
        t_vol[:, 0, :] = np.einsum("og,iog->oi", w_l, phi_l_3d)
        t_vol[:, m, :] = np.einsum("og,iog->oi", w_r, phi_r_3d)
        if m > 1:
            t_vol[:, 1:m, :] = np.tensordot(s_vol, self.phi, axes=([2], [1]))
        self.t_vol_coef = t_vol                                          # (g0, j, i)

    def _extended(self, coeffs: np.ndarray, ghost_value: float) -> np.ndarray:
        n, m = self.mesh.n, self.cells_per_window
        if self.bc.periodic:
            if m <= n:
                return np.concatenate([coeffs, coeffs[:m]])
            return coeffs[np.arange(n + m) % n]
        ghost = np.full((m, coeffs.shape[1]), ghost_value)
        return np.concatenate([coeffs, ghost])

    def evaluate(self, u_coeffs: np.ndarray, grad_coeffs: np.ndarray | None = None):
        n, m = self.mesh.n, self.cells_per_window
        ng = self.basis.rule.npoints
        kappa, mode = self.kappa, self.integrand_mode

        u_ext = self._extended(u_coeffs, self.bc.right_value)
        if kappa == 0.0:
            win = sliding_window_view(u_ext, m, axis=0)                  # (n+1, p+1, m)
            r_ifc = np.tensordot(win, self.s_ifc_coef, axes=([2, 1], [0, 1]))
            win_v = sliding_window_view(u_ext, m + 1, axis=0)            # (n, p+1, m+1)
            r_vol = np.tensordot(win_v, self.t_vol_coef, axes=([2, 1], [1, 2]))
            return r_ifc, r_vol

        if grad_coeffs is None:
            raise ValueError("gradient coefficients required when kappa > 0")
        g_ext = self._extended(grad_coeffs, 0.0)
        f_all = _integrand(u_ext @ self.phi_all, g_ext @ self.phi_all, kappa, mode)
        f_vol = f_all[:, :ng]
        win = sliding_window_view(f_vol, m, axis=0)                      # (n+1, ng, m)
        r_ifc = np.tensordot(win, self.s_ifc, axes=([2, 1], [0, 1]))
        r_vol = f_all[:n, ng:ng + ng * ng] @ self.w_l_mat
        r_vol += f_all[m:m + n, ng + ng * ng:] @ self.w_r_mat
        if m > 1:
            win_v = sliding_window_view(f_vol[1:], m - 1, axis=0)[:n]    # (n, ng, m-1)
            r_vol += np.tensordot(win_v, self.s_vol, axes=([1, 2], [2, 1]))
        return r_ifc, r_vol


class SplitSegmentPlan:
    """SegmentPlan over the solver's standard queries, reshaped to the
    (interface, volume) pair the operator consumes. Fallback for
    non-integer horizons."""

    def __init__(self, mesh: Mesh, basis: BasisSet, gamma: float, kappa: float,
                 bc: BoundarySpec, integrand_mode: str = "full_rho_hat"):
        queries = np.concatenate([mesh.boundaries, volume_points(mesh, basis).ravel()])
        self.mesh = mesh
        self.basis = basis
        self.segments = SegmentPlan(mesh, basis, gamma, kappa, queries, bc, integrand_mode)

    def evaluate(self, u_coeffs: np.ndarray, grad_coeffs: np.ndarray | None = None):
        flat = self.segments.evaluate(u_coeffs, grad_coeffs)
        cut = self.mesh.n + 1
        return flat[:cut], flat[cut:].reshape(self.mesh.n, self.basis.rule.npoints)


def solver_plan(mesh: Mesh, basis: BasisSet, params: ModelParams, bc: BoundarySpec,
                integrand_mode: str = "full_rho_hat"):
    """Pick the evaluator for a run: the stencil fast path when the
    horizon is a whole number of cells, the general plan otherwise."""
    if integer_horizon_cells(params.gamma, mesh) is not None:
        return StencilPlan(mesh, basis, params.gamma, params.kappa, bc, integrand_mode)
    return SplitSegmentPlan(mesh, basis, params.gamma, params.kappa, bc, integrand_mode)


def build_plan(mesh: Mesh, basis: BasisSet, params: ModelParams, query_points,
               bc: BoundarySpec | None = None,
               integrand_mode: str = "full_rho_hat") -> SegmentPlan:
    """Build the general quadrature plan for arbitrary query points."""
    if bc is None:
        bc = BoundarySpec(mesh.bc_mode)
    return SegmentPlan(mesh, basis, params.gamma, params.kappa, query_points, bc, integrand_mode)


def eval_R(plan, u_field, grad_field=None):
    """Evaluate a plan against solution fields (coefficient containers)."""
    grad = None if grad_field is None else grad_field.coeffs
    return plan.evaluate(u_field.coeffs, grad)
