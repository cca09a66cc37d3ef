"""P1 finite elements for the Dirichlet form A(u, v) = int grad u . grad v.

Mass and stiffness matrices use the exact element formulas; load vectors and
L2 errors use a fixed degree-5 Gauss rule per element.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import InvalidArgumentError, NumericalFailure
from .mesh import Mesh, element_measures


@dataclass(frozen=True, eq=False)
class SparsePencil:
    """Stiffness/mass pair restricted to the interior dofs (CSR, real symmetric)."""

    A: sp.csr_matrix
    M: sp.csr_matrix

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def bandwidth(self) -> int:
        coo = (self.A + self.M).tocoo()
        if coo.nnz == 0:
            return 0
        return int(np.max(np.abs(coo.row - coo.col)))


# --- quadrature -------------------------------------------------------------

def _gauss_1d():
    # 3-point Gauss-Legendre on [0, 1], exact to degree 5
    g, w = np.polynomial.legendre.leggauss(3)
    return (0.5 * (g + 1.0))[:, None], 0.5 * w


def _dunavant_5():
    # 7-point rule on the reference triangle, exact to degree 5; weights sum to 1
    r15 = np.sqrt(15.0)
    a1, a2 = (6.0 - r15) / 21.0, (6.0 + r15) / 21.0
    w1, w2 = (155.0 - r15) / 1200.0, (155.0 + r15) / 1200.0
    pts = [(1 / 3, 1 / 3),
           (a1, a1), (1 - 2 * a1, a1), (a1, 1 - 2 * a1),
           (a2, a2), (1 - 2 * a2, a2), (a2, 1 - 2 * a2)]
    wts = [9 / 40, w1, w1, w1, w2, w2, w2]
    return np.array(pts), np.array(wts)


def reference_rule(dim: int, subdivide: int = 1):
    """Composite degree-5 rule on the reference simplex.

    Returns ``(xi, w)`` with ``xi`` of shape (Q, dim) in reference coordinates
    and weights summing to one (multiply by the element measure).
    """
    s = int(subdivide)
    if s < 1:
        raise InvalidArgumentError("subdivide must be >= 1")
    if dim == 1:
        xi, w = _gauss_1d()
        pts = np.concatenate([(xi + i) / s for i in range(s)])
        return pts, np.tile(w, s) / s
    xi, w = _dunavant_5()
    pts, wts = [], []
    for i in range(s):
        for j in range(s - i):
            tris = [((i, j), (i + 1, j), (i, j + 1))]
            if i + j <= s - 2:
                tris.append(((i + 1, j), (i + 1, j + 1), (i, j + 1)))
            for v0, v1, v2 in tris:
                v0, v1, v2 = (np.array(v, float) / s for v in (v0, v1, v2))
                pts.append(v0 + xi[:, :1] * (v1 - v0) + xi[:, 1:] * (v2 - v0))
                wts.append(w / s**2)
    return np.concatenate(pts), np.concatenate(wts)


def _basis(dim, xi):
    return np.column_stack([1.0 - xi.sum(axis=1), xi])


def quadrature_points(mesh: Mesh, subdivide: int = 1):
    """Physical quadrature points, weights and P1 basis values.

    Returns ``(points, weights, phi)`` with points of shape (n_el, Q, dim),
    weights (n_el, Q) already scaled by element measure, and phi (Q, dim+1).
    """
    xi, w = reference_rule(mesh.dim, subdivide)
    p = mesh.nodes[mesh.elements]
    origin = p[:, :1, :]
    edges = p[:, 1:, :] - origin
    points = origin + np.einsum("qd,edk->eqk", xi, edges)
    weights = np.abs(element_measures(mesh))[:, None] * w[None, :]
    return points, weights, _basis(mesh.dim, xi)


def _evaluate(f, points):
    shape = points.shape[:-1]
    flat = points.reshape(-1, points.shape[-1])
    vals = np.asarray(f(*flat.T))
    if vals.ndim == 0:
        vals = np.full(flat.shape[0], vals)
    return vals.reshape(shape)


# --- assembly -----------------------------------------------------------------

def _element_matrices(mesh, coefficient):
    p = mesh.nodes[mesh.elements]
    meas = np.abs(element_measures(mesh))
    if mesh.dim == 1:
        loc_k = np.array([[1.0, -1.0], [-1.0, 1.0]])
        loc_m = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
        K = loc_k[None] / meas[:, None, None]
        Me = loc_m[None] * meas[:, None, None]
    else:
        # gradients of barycentric coordinates
        T = np.concatenate([np.ones(p.shape[:2] + (1,)), p], axis=2)
        G = np.linalg.inv(T)[:, 1:, :]
        K = meas[:, None, None] * np.einsum("eki,ekj->eij", G, G)
        loc_m = (np.ones((3, 3)) + np.eye(3)) / 12.0
        Me = loc_m[None] * meas[:, None, None]
    if coefficient is not None:
        if callable(coefficient):
            c = np.asarray(coefficient(*p.mean(axis=1).T), dtype=float)
        else:
            c = np.full(len(p), float(coefficient))
        if np.any(c <= 0):
            raise InvalidArgumentError("coefficient field must be positive")
        K = K * c[:, None, None]
    return K, Me


def assemble_full(mesh: Mesh, coefficient=None):
    """Stiffness and mass matrices over all nodes, before Dirichlet elimination."""
    K, Me = _element_matrices(mesh, coefficient)
    nloc = mesh.dim + 1
    rows = np.repeat(mesh.elements, nloc, axis=1).ravel()
    cols = np.tile(mesh.elements, (1, nloc)).ravel()
    n = mesh.n_nodes
    A = sp.coo_matrix((K.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    M = sp.coo_matrix((Me.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    A.sum_duplicates()
    M.sum_duplicates()
    # symmetrize exactly: element contributions are summed in different
    # orders for (i, j) and (j, i)
    A = ((A + A.T) * 0.5).tocsr()
    M = ((M + M.T) * 0.5).tocsr()
    return A, M


def assemble(mesh: Mesh, coefficient=None) -> SparsePencil:
    """P1 Galerkin pencil for -div(c grad u) with homogeneous Dirichlet data.

    ``coefficient`` is optional: a positive scalar or a callable evaluated at
    element centroids. Boundary rows and columns are eliminated.
    """
    if mesh.n_interior == 0:
        raise InvalidArgumentError("mesh has no interior dofs")
    A, M = assemble_full(mesh, coefficient)
    idx = mesh.interior_nodes
    return SparsePencil(A=A[idx][:, idx].tocsr(), M=M[idx][:, idx].tocsr())


# --- projections and norms ------------------------------------------------------

def load_vector(mesh: Mesh, f, subdivide: int = 1) -> np.ndarray:
    """b_i = int f phi_i over interior dofs, via per-element Gauss quadrature.

    ``f`` is vectorized: ``f(x)`` in 1D, ``f(x, y)`` in 2D. Use ``subdivide``
    when f jumps inside elements.
    """
    points, weights, phi = quadrature_points(mesh, subdivide)
    fv = _evaluate(f, points)
    local = np.einsum("eq,qa->ea", fv * weights, phi)
    full = np.zeros(mesh.n_nodes, dtype=local.dtype)
    np.add.at(full, mesh.elements.ravel(), local.ravel())
    return full[mesh.interior_nodes]


def l2_project(mesh: Mesh, f, pencil: SparsePencil | None = None, subdivide: int = 1) -> np.ndarray:
    """Coefficients of the L2 projection of f onto the P1 space."""
    if pencil is None:
        pencil = assemble(mesh)
    b = load_vector(mesh, f, subdivide)
    try:
        c = spla.spsolve(pencil.M.tocsc(), b)
    except RuntimeError as exc:  # pragma: no cover - M is SPD
        raise NumericalFailure(f"mass solve failed: {exc}") from exc
    if not np.all(np.isfinite(c)):
        raise NumericalFailure("mass solve returned non-finite values")
    return np.atleast_1d(c)


def interpolate(mesh: Mesh, f) -> np.ndarray:
    """Nodal interpolant at the interior nodes."""
    x = mesh.interior_coords
    return np.atleast_1d(np.asarray(f(*x.T), dtype=float)) * np.ones(len(x))


def l2_norm(mesh: Mesh, pencil: SparsePencil, c) -> float:
    c = np.asarray(c)
    if c.shape != (pencil.n,):
        raise InvalidArgumentError(f"coefficient vector has shape {c.shape}, expected ({pencil.n},)")
    val = np.vdot(c, pencil.M @ c).real
    return float(np.sqrt(max(val, 0.0)))


def l2_error(mesh: Mesh, c, f, subdivide: int = 1) -> float:
    """|| u_h - f ||_{L2} with u_h the P1 function with interior coefficients c."""
    c = np.asarray(c)
    if c.shape != (mesh.n_interior,):
        raise InvalidArgumentError(
            f"coefficient vector has shape {c.shape}, expected ({mesh.n_interior},)"
        )
    full = np.zeros(mesh.n_nodes, dtype=c.dtype)
    full[mesh.interior_nodes] = c
    points, weights, phi = quadrature_points(mesh, subdivide)
    uh = full[mesh.elements] @ phi.T
    diff = uh - _evaluate(f, points)
    return float(np.sqrt(np.sum(weights * np.abs(diff) ** 2)))
