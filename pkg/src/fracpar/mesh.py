"""Simplicial meshes of the unit interval and the unit square.

Meshes are immutable: every array is flagged read-only after construction so
a ``Mesh`` can be shared between threads freely.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError

BOUNDARY_TOL = 1e-12


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Mesh:
    """P1 mesh on a subset of [0, 1]^dim.

    Attributes
    ----------
    dim : 1 or 2
    nodes : (n_nodes, dim) float array
    elements : (n_elements, dim + 1) int array of node indices
    boundary_mask : (n_nodes,) bool array
    interior_index : (n_nodes,) int array, dof number or -1 on the boundary
    h_max : largest element diameter
    uniform_step : grid step when the mesh is a uniform structured grid
        (``None`` for imported meshes); fast paths key off this.
    """

    dim: int
    nodes: np.ndarray
    elements: np.ndarray
    boundary_mask: np.ndarray
    interior_index: np.ndarray
    h_max: float
    uniform_step: float | None = None

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def n_interior(self) -> int:
        return int(np.count_nonzero(~self.boundary_mask))

    @property
    def interior_nodes(self) -> np.ndarray:
        """Node indices of the dofs, ordered by dof number."""
        return np.flatnonzero(self.interior_index >= 0)

    @property
    def interior_coords(self) -> np.ndarray:
        return self.nodes[self.interior_nodes]


def _make(dim, nodes, elements, uniform_step=None):
    nodes = np.asarray(nodes, dtype=float).reshape(-1, dim)
    elements = np.asarray(elements, dtype=np.int64).reshape(-1, dim + 1)
    on_bdry = (np.abs(nodes) <= BOUNDARY_TOL) | (np.abs(nodes - 1.0) <= BOUNDARY_TOL)
    boundary_mask = on_bdry.any(axis=1)
    interior_index = np.full(len(nodes), -1, dtype=np.int64)
    interior = np.flatnonzero(~boundary_mask)
    interior_index[interior] = np.arange(len(interior))
    mesh = Mesh(
        dim=dim,
        nodes=_frozen(nodes),
        elements=_frozen(elements),
        boundary_mask=_frozen(boundary_mask),
        interior_index=_frozen(interior_index),
        h_max=0.0,
        uniform_step=uniform_step,
    )
    diam = element_diameters(mesh)
    if np.any(element_measures(mesh) <= 0):
        raise InvalidArgumentError("mesh contains degenerate or inverted elements")
    object.__setattr__(mesh, "h_max", float(diam.max()))
    return mesh


def build_interval_mesh(m_interior: int) -> Mesh:
    """Uniform mesh of (0, 1) with ``m_interior`` interior nodes, h = 1/(m+1)."""
    if int(m_interior) != m_interior or m_interior < 1:
        raise InvalidArgumentError(f"m_interior must be a positive integer, got {m_interior!r}")
    m = int(m_interior) + 1
    x = np.arange(m + 1) / m
    elements = np.column_stack([np.arange(m), np.arange(1, m + 1)])
    return _make(1, x, elements, uniform_step=1.0 / m)


def build_square_mesh(n_per_side: int) -> Mesh:
    """Structured triangulation of (0, 1)^2 with n x n squares.

    Every square is cut along its south-west to north-east diagonal, so all
    2 n^2 triangles are congruent and h_max = sqrt(2)/n.
    """
    if int(n_per_side) != n_per_side or n_per_side < 1:
        raise InvalidArgumentError(f"n_per_side must be a positive integer, got {n_per_side!r}")
    n = int(n_per_side)
    s = np.arange(n + 1) / n
    X, Y = np.meshgrid(s, s, indexing="ij")
    nodes = np.column_stack([X.ravel(), Y.ravel()])
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    i, j = i.ravel(), j.ravel()
    sw = i * (n + 1) + j
    se = (i + 1) * (n + 1) + j
    ne = se + 1
    nw = sw + 1
    lower = np.column_stack([sw, se, ne])
    upper = np.column_stack([sw, ne, nw])
    elements = np.stack([lower, upper], axis=1).reshape(-1, 3)
    return _make(2, nodes, elements, uniform_step=1.0 / n)


def element_measures(mesh: Mesh) -> np.ndarray:
    """Length (1D) or signed-then-absolute area (2D) of every element."""
    p = mesh.nodes[mesh.elements]
    if mesh.dim == 1:
        return p[:, 1, 0] - p[:, 0, 0]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def _edge_lengths(mesh):
    p = mesh.nodes[mesh.elements]
    return np.stack(
        [np.linalg.norm(p[:, 1] - p[:, 0], axis=1),
         np.linalg.norm(p[:, 2] - p[:, 1], axis=1),
         np.linalg.norm(p[:, 0] - p[:, 2], axis=1)],
        axis=1,
    )


def element_diameters(mesh: Mesh) -> np.ndarray:
    """R_tau: the diameter of each element."""
    if mesh.dim == 1:
        return np.abs(element_measures(mesh))
    return _edge_lengths(mesh).max(axis=1)


def element_inradii(mesh: Mesh) -> np.ndarray:
    """r_tau: radius of the largest inscribed ball."""
    if mesh.dim == 1:
        return 0.5 * np.abs(element_measures(mesh))
    return 2.0 * np.abs(element_measures(mesh)) / _edge_lengths(mesh).sum(axis=1)


def quality(mesh: Mesh) -> tuple[float, float]:
    """Return (max R/r, max R / min R): shape regularity and quasi-uniformity."""
    R = element_diameters(mesh)
    r = element_inradii(mesh)
    return float(np.max(R / r)), float(R.max() / R.min())


def read_mesh(path) -> Mesh:
    """Read the plain-text mesh format.

    Line 1 holds ``dim n_nodes n_elements``; then one coordinate line per
    node and one line of 0-based node indices per element. Boundary nodes
    are those within 1e-12 of the boundary of the unit interval/square.
    """
    lines = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines or len(lines[0]) != 3:
        raise InvalidArgumentError(f"{path}: header must be 'dim n_nodes n_elements'")
    dim, n_nodes, n_elements = (int(v) for v in lines[0])
    if dim not in (1, 2):
        raise InvalidArgumentError(f"{path}: dim must be 1 or 2, got {dim}")
    if len(lines) != 1 + n_nodes + n_elements:
        raise InvalidArgumentError(
            f"{path}: expected {1 + n_nodes + n_elements} non-empty lines, found {len(lines)}"
        )
    nodes = np.array(lines[1:1 + n_nodes], dtype=float)
    elements = np.array(lines[1 + n_nodes:], dtype=np.int64)
    if nodes.shape != (n_nodes, dim) or elements.shape != (n_elements, dim + 1):
        raise InvalidArgumentError(f"{path}: malformed coordinate or element lines")
    if elements.min() < 0 or elements.max() >= n_nodes:
        raise InvalidArgumentError(f"{path}: element references a missing node")
    if dim == 2:
        # orient counter-clockwise so measures come out positive
        p = nodes[elements]
        e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        flip = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0] < 0
        elements[flip] = elements[flip][:, [0, 2, 1]]
    else:
        flip = nodes[elements[:, 1], 0] < nodes[elements[:, 0], 0]
        elements[flip] = elements[flip][:, ::-1]
    return _make(dim, nodes, elements)


def write_mesh(mesh: Mesh, path) -> None:
    out = [f"{mesh.dim} {mesh.n_nodes} {mesh.n_elements}"]
    out += [" ".join(repr(float(c)) for c in row) for row in mesh.nodes]
    out += [" ".join(str(int(i)) for i in row) for row in mesh.elements]
    Path(path).write_text("\n".join(out) + "\n")
