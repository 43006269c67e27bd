"""Uniform 1D mesh, the piecewise-polynomial solution container, and the
field operations built on them: nodal projection of initial data, point
evaluation, cell averages, total mass, and CSV export.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .basis import BasisSet, lagrange_values

__all__ = [
    "BC_MODES",
    "BoundarySpec",
    "Mesh",
    "SolutionField",
    "cell_average",
    "cell_averages",
    "evaluate",
    "field_to_csv",
    "node_coordinates",
    "project_initial_condition",
    "total_mass",
]

BC_MODES = ("periodic", "frozen")


@dataclass(frozen=True)
class Mesh:
    """Uniform partition of [0, length] into n cells.

    Cell k (0-based) spans [boundaries[k], boundaries[k+1]]. Boundaries
    are computed as length*k/n so that representable fractions (e.g. the
    midpoint of an even grid) are hit exactly.
    """

    n: int
    length: float = 1.0
    bc_mode: str = "periodic"
    boundaries: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one cell, got n={self.n}")
        if self.length <= 0:
            raise ValueError(f"domain length must be positive, got {self.length}")
        if self.bc_mode not in BC_MODES:
            raise ValueError(f"bc_mode must be one of {BC_MODES}, got {self.bc_mode!r}")
        b = self.length * np.arange(self.n + 1) / self.n
        b.flags.writeable = False
        object.__setattr__(self, "boundaries", b)

    @property
    def dx(self) -> float:
        return self.length / self.n

    def boundary_coordinate(self, j: int) -> float:
        """Boundary j of the uniform grid, valid for any integer j (ghost
        boundaries included)."""
        return self.length * j / self.n


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary handling for a run: mode plus the pinned ghost values used
    in frozen mode (the initial condition's edge values; the ghost gradient
    is zero there)."""

    mode: str = "periodic"
    left_value: float = 0.0
    right_value: float = 0.0

    def __post_init__(self):
        if self.mode not in BC_MODES:
            raise ValueError(f"mode must be one of {BC_MODES}, got {self.mode!r}")

    @property
    def periodic(self) -> bool:
        return self.mode == "periodic"

    @classmethod
    def for_field(cls, fld: "SolutionField") -> "BoundarySpec":
        """Boundary spec for a run starting from ``fld``: frozen mode pins
        the ghosts to the field's current edge traces."""
        if fld.mesh.bc_mode == "periodic":
            return cls("periodic")
        return cls("frozen", float(fld.coeffs[0, 0]), float(fld.coeffs[-1, -1]))


@dataclass(eq=False)
class SolutionField:
    """Piecewise-polynomial field: nodal coefficients of shape (n, p+1).

    coeffs[k, i] is the value at node i of cell k; because the basis is
    cardinal on Lobatto points, coeffs[k, 0] / coeffs[k, -1] are the cell's
    left/right boundary traces. Value semantics: treat as read-only when
    shared, copy before mutating.
    """

    mesh: Mesh
    basis: BasisSet
    coeffs: np.ndarray
    time: float = 0.0

    def copy(self) -> "SolutionField":
        return replace(self, coeffs=self.coeffs.copy())


def node_coordinates(mesh: Mesh, basis: BasisSet) -> np.ndarray:
    """Physical node positions, shape (n, p+1). Computed as a convex
    combination of the cell endpoints so shared boundary nodes are bitwise
    identical between neighbours."""
    s = (basis.nodes + 1.0) / 2.0
    left = mesh.boundaries[:-1, None]
    right = mesh.boundaries[1:, None]
    return left * (1.0 - s) + right * s


def _call_ic(f, x: np.ndarray) -> np.ndarray:
    out = np.asarray(f(x), dtype=float)
    if out.shape != x.shape:
        out = np.broadcast_to(out, x.shape).copy()
    return out


def project_initial_condition(rho0, mesh: Mesh, basis: BasisSet) -> SolutionField:
    """Nodal interpolation of the initial data.

    ``rho0`` must accept numpy arrays. At shared boundary nodes the left
    cell samples the left one-sided limit and the right cell the right
    limit; limits are taken from ``rho0.left_limit`` / ``rho0.right_limit``
    when the callable provides them (jumps aligned with cell boundaries
    need this), otherwise the plain value is used.
    """
    xs = node_coordinates(mesh, basis)
    coeffs = _call_ic(rho0, xs)
    if hasattr(rho0, "left_limit"):
        coeffs[:, -1] = _call_ic(rho0.left_limit, xs[:, -1])
    if hasattr(rho0, "right_limit"):
        coeffs[:, 0] = _call_ic(rho0.right_limit, xs[:, 0])
    return SolutionField(mesh=mesh, basis=basis, coeffs=coeffs, time=0.0)


def evaluate(fld: SolutionField, x, side: str = "right"):
    """Evaluate the field at positions ``x``.

    At an interior cell boundary the trace of the ``side`` cell is
    returned (right by default). Outside the domain, frozen mode returns
    the edge value and periodic mode wraps.
    """
    mesh = fld.mesh
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if mesh.bc_mode == "periodic":
        xw = xs - mesh.length * np.floor(xs / mesh.length)
    else:
        xw = np.clip(xs, 0.0, mesh.length)
    sorter = "right" if side == "right" else "left"
    idx = np.searchsorted(mesh.boundaries, xw, side=sorter) - 1
    idx = np.clip(idx, 0, mesh.n - 1)
    xi = 2.0 * (xw - mesh.boundaries[idx]) / mesh.dx - 1.0
    xi = np.clip(xi, -1.0, 1.0)
    vals = lagrange_values(fld.basis.nodes, xi)  # (p+1, npts)
    out = np.einsum("ki,ik->k", fld.coeffs[idx], vals)
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out[0])
    return out.reshape(np.shape(x))


def cell_averages(fld: SolutionField) -> np.ndarray:
    """Exact cell averages of all cells (Gauss quadrature, degree p)."""
    return fld.coeffs @ fld.basis.node_integrals / 2.0


def cell_average(fld: SolutionField, k: int) -> float:
    """Exact average of u_h over cell k (0-based)."""
    return float(fld.coeffs[k] @ fld.basis.node_integrals / 2.0)


def total_mass(fld: SolutionField) -> float:
    """Integral of the field over the domain: sum_k dx * average_k."""
    return float(fld.mesh.dx * cell_averages(fld).sum())


def field_to_csv(fld: SolutionField, path) -> None:
    """Write the field's nodal samples as CSV with columns x,k,rho.

    Rows ascend in x; shared boundary nodes appear once per owning cell,
    disambiguated by the 0-based cell index column k.
    """
    xs = node_coordinates(fld.mesh, fld.basis)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "k", "rho"])
        for k in range(fld.mesh.n):
            for i in range(fld.basis.degree + 1):
                writer.writerow([f"{xs[k, i]:.17g}", k, f"{fld.coeffs[k, i]:.17g}"])
