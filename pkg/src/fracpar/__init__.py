"""Finite elements for u_t + L^beta u = f with sinc-quadrature propagators."""
from .errors import (
    FracparError,
    InconclusiveSearchError,
    InvalidArgumentError,
    NearSingularError,
    NumericalFailure,
    SizeLimitError,
)
from .fem import SparsePencil, assemble, l2_project, load_vector
from .mesh import Mesh, build_interval_mesh, build_square_mesh, read_mesh, write_mesh
from .sincprop import ContourSpec, SincRule, apply_duhamel, apply_propagator, default_contour, make_rule

__version__ = "0.1.0"

__all__ = [
    "ContourSpec",
    "FracparError",
    "InconclusiveSearchError",
    "InvalidArgumentError",
    "Mesh",
    "NearSingularError",
    "NumericalFailure",
    "SincRule",
    "SizeLimitError",
    "SparsePencil",
    "apply_duhamel",
    "apply_propagator",
    "assemble",
    "build_interval_mesh",
    "build_square_mesh",
    "default_contour",
    "l2_project",
    "load_vector",
    "make_rule",
    "read_mesh",
    "write_mesh",
]
