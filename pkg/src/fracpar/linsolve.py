"""Direct solvers for complex-shifted systems (z M - A) x = r.

Tridiagonal pencils (1D) go through LAPACK banded LU; anything wider uses
SuperLU with a COLAMD ordering. Both keep partial pivoting and refuse to
continue when the factor is numerically singular, instead of perturbing it.
Partial pivoting alone tends to hide singularity (the smallest pivot of an
exactly singular tridiagonal matrix can stay near 1e-10 * ||S||), so the
pivot test is backed by a 1-norm reciprocal condition estimate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import lapack

from .errors import InvalidArgumentError, NearSingularError
from .fem import SparsePencil

PIVOT_RTOL = 1e-14
RCOND_MIN = 1e-12
BANDED_MAX_BANDWIDTH = 2


@dataclass(frozen=True, eq=False)
class ShiftedFactor:
    z: complex
    n: int
    kind: str
    _solve: Callable[[np.ndarray], np.ndarray] = field(repr=False)

    def solve(self, rhs) -> np.ndarray:
        return solve(self, rhs)


def shifted_matrix(pencil: SparsePencil, z: complex) -> sp.csc_matrix:
    return (complex(z) * pencil.M - pencil.A).tocsc().astype(np.complex128)


def _check_pivots(z, diag, scale):
    pmin = float(np.min(np.abs(diag))) if diag.size else 0.0
    if not np.isfinite(pmin) or pmin < PIVOT_RTOL * scale:
        raise NearSingularError(z, f"min pivot {pmin:.3e} < {PIVOT_RTOL:g} * {scale:.3e}")


def _check_condition(z, S, solve_fn):
    n = S.shape[0]
    # S is complex symmetric, so S^-H y = conj(S^-1 conj(y))
    inv = spla.LinearOperator(
        (n, n), dtype=np.complex128,
        matvec=lambda b: solve_fn(np.ascontiguousarray(b, dtype=np.complex128).reshape(n, -1)).reshape(b.shape),
        rmatvec=lambda b: np.conj(solve_fn(np.ascontiguousarray(np.conj(b), dtype=np.complex128).reshape(n, -1))).reshape(b.shape),
    )
    inv_norm = spla.onenormest(inv) if n > 4 else np.linalg.norm(solve_fn(np.eye(n, dtype=np.complex128)), 1)
    s_norm = spla.norm(S, 1)
    rcond = 1.0 / (s_norm * inv_norm) if inv_norm > 0 and np.isfinite(inv_norm) else 0.0
    if rcond < RCOND_MIN:
        raise NearSingularError(z, f"reciprocal condition estimate {rcond:.3e} < {RCOND_MIN:g}")


def _banded_factor(S, z, bw):
    n = S.shape[0]
    kl = ku = bw
    ab = np.zeros((2 * kl + ku + 1, n), dtype=np.complex128)
    coo = S.tocoo()
    ab[kl + ku + coo.row - coo.col, coo.col] = coo.data
    lu, piv, info = lapack.zgbtrf(ab, kl, ku)
    if info < 0:  # pragma: no cover - argument error inside LAPACK
        raise RuntimeError(f"zgbtrf: illegal argument {-info}")
    return lu, piv, kl, ku


def factorize(pencil: SparsePencil, z: complex) -> ShiftedFactor:
    """Factor z M - A once so it can be applied to many right-hand sides."""
    z = complex(z)
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise InvalidArgumentError(f"shift must be finite, got {z!r}")
    S = shifted_matrix(pencil, z)
    scale = float(np.max(np.abs(S.data))) if S.nnz else 0.0
    n = pencil.n
    bw = pencil.bandwidth
    if bw <= BANDED_MAX_BANDWIDTH:
        lu, piv, kl, ku = _banded_factor(S, z, bw)
        _check_pivots(z, lu[kl + ku], scale)

        def _solve(b):
            x, info = lapack.zgbtrs(lu, kl, ku, b, piv)
            return x

        _check_condition(z, S, _solve)
        return ShiftedFactor(z, n, "banded", _solve)

    try:
        lu = spla.splu(S, permc_spec="COLAMD")
    except RuntimeError as exc:
        # SuperLU reports an exactly singular factor this way
        raise NearSingularError(z, "SuperLU found an exactly singular factor") from exc
    _check_pivots(z, lu.U.diagonal(), scale)
    _check_condition(z, S, lu.solve)
    return ShiftedFactor(z, n, "superlu", lu.solve)


def solve(factor: ShiftedFactor, rhs) -> np.ndarray:
    """Solve (z M - A) x = rhs with a precomputed factor."""
    b = np.asarray(rhs)
    if b.shape[0] != factor.n:
        raise InvalidArgumentError(f"rhs has length {b.shape[0]}, factor has dimension {factor.n}")
    b = np.ascontiguousarray(b, dtype=np.complex128)
    if not np.any(b):
        return np.zeros_like(b)
    return factor._solve(b)


def relative_residual(pencil: SparsePencil, z: complex, x, r) -> float:
    res = shifted_matrix(pencil, z) @ x - r
    return float(np.linalg.norm(res) / np.linalg.norm(r))
