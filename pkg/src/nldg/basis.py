"""Reference-element tools: Chebyshev-Lobatto nodes, the cardinal
(Lagrange) basis built on them, and Gauss-Legendre quadrature.

Everything here lives on the reference interval [-1, 1]; physical cells
are handled by affine maps in the mesh and operator layers. The basis is
nodal: phi_i(node_j) = delta_ij, and because the node set contains both
endpoints, the first/last coefficients of a cell double as its boundary
traces.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "InvalidCountError",
    "InvalidDegreeError",
    "BasisSet",
    "QuadratureRule",
    "build_basis",
    "chebyshev_lobatto_nodes",
    "gauss_legendre",
    "lagrange_derivatives",
    "lagrange_values",
]


class InvalidDegreeError(ValueError):
    """Polynomial degree below 1."""


class InvalidCountError(ValueError):
    """Quadrature point count below 1."""


def chebyshev_lobatto_nodes(p: int) -> np.ndarray:
    """Return the p+1 Chebyshev-Gauss-Lobatto points -cos(pi*i/p), ascending.

    Symmetry about 0 and the endpoint values +-1 are enforced exactly so
    that nodal coefficients can be used directly as cell-boundary traces.
    """
    if p < 1:
        raise InvalidDegreeError(f"degree must be >= 1, got {p}")
    nodes = -np.cos(np.pi * np.arange(p + 1) / p)
    nodes = 0.5 * (nodes - nodes[::-1])  # exact antisymmetry
    nodes[0] = -1.0
    nodes[p] = 1.0
    return nodes


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre rule on [-1, 1]: exact for degree <= 2*npoints - 1."""

    npoints: int
    points: np.ndarray
    weights: np.ndarray


def gauss_legendre(npoints: int) -> QuadratureRule:
    """Standard Gauss-Legendre rule on [-1, 1]."""
    if npoints < 1:
        raise InvalidCountError(f"need at least 1 quadrature point, got {npoints}")
    x, w = np.polynomial.legendre.leggauss(npoints)
    x.flags.writeable = False
    w.flags.writeable = False
    return QuadratureRule(npoints, x, w)


def lagrange_values(nodes: np.ndarray, x) -> np.ndarray:
    """Evaluate the cardinal polynomials on ``nodes`` at points ``x``.

    Returns an array of shape (len(nodes), len(x)) with entry [i, j] equal
    to phi_i(x_j), using the direct product formula
    phi_i(x) = prod_{k != i} (x - node_k) / (node_i - node_k).
    """
    nodes = np.asarray(nodes, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    nn = nodes.size
    vals = np.ones((nn, x.size))
    for i in range(nn):
        for k in range(nn):
            if k != i:
                vals[i] *= (x - nodes[k]) / (nodes[i] - nodes[k])
    return vals


def lagrange_derivatives(nodes: np.ndarray, x) -> np.ndarray:
    """First derivatives of the cardinal polynomials at points ``x``.

    Shape (len(nodes), len(x)); derivative taken in the reference
    coordinate.
    """
    nodes = np.asarray(nodes, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    nn = nodes.size
    der = np.zeros((nn, x.size))
    for i in range(nn):
        for m in range(nn):
            if m == i:
                continue
            term = np.full(x.size, 1.0 / (nodes[i] - nodes[m]))
            for k in range(nn):
                if k != i and k != m:
                    term *= (x - nodes[k]) / (nodes[i] - nodes[k])
            der[i] += term
    return der


@dataclass(frozen=True)
class BasisSet:
    """Nodal basis of degree p tabulated at a quadrature rule.

    Attributes
    ----------
    degree:
        Polynomial degree p (p+1 nodes).
    nodes:
        Chebyshev-Lobatto points in [-1, 1], ascending, endpoints exact.
    rule:
        The Gauss-Legendre rule the tables below are evaluated at.
    values_at_quadrature, derivatives_at_quadrature:
        Tables of shape (p+1, N_G): phi_i(x_g) and dphi_i/dx(x_g).
    values_at_left, values_at_right:
        phi_i(-1) and phi_i(+1); unit vectors e_0 and e_p by construction.
    node_integrals:
        int_{-1}^{1} phi_i dx, used for exact cell averages.
    first_moments:
        int_{-1}^{1} phi_i(x) x dx, used by the slope limiter's linear
        projection.

    Immutable after construction; safe to share across threads.
    """

    degree: int
    nodes: np.ndarray
    rule: QuadratureRule
    values_at_quadrature: np.ndarray
    derivatives_at_quadrature: np.ndarray
    values_at_left: np.ndarray
    values_at_right: np.ndarray
    node_integrals: np.ndarray
    first_moments: np.ndarray


def build_basis(p: int, rule: QuadratureRule | None = None) -> BasisSet:
    """Build the cardinal basis of degree p tabulated at ``rule``.

    The default rule uses p+1 points, which integrates the mass matrix
    (degree 2p) exactly and satisfies the N_G >= (p+1)/2 requirement with
    margin.
    """
    if p < 1:
        raise InvalidDegreeError(f"degree must be >= 1, got {p}")
    if rule is None:
        rule = gauss_legendre(p + 1)
    nodes = chebyshev_lobatto_nodes(p)
    vals = lagrange_values(nodes, rule.points)
    ders = lagrange_derivatives(nodes, rule.points)
    vleft = lagrange_values(nodes, np.array([-1.0]))[:, 0]
    vright = lagrange_values(nodes, np.array([1.0]))[:, 0]
    node_integrals = vals @ rule.weights
    first_moments = vals @ (rule.weights * rule.points)
    for a in (nodes, vals, ders, vleft, vright, node_integrals, first_moments):
        a.flags.writeable = False
    return BasisSet(
        degree=p,
        nodes=nodes,
        rule=rule,
        values_at_quadrature=vals,
        derivatives_at_quadrature=ders,
        values_at_left=vleft,
        values_at_right=vright,
        node_integrals=node_integrals,
        first_moments=first_moments,
    )
