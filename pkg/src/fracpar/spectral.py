"""Reference evaluations of the fractional semigroup.

Three independent routes live here:

* dense generalized eigendecomposition of the pencil (any mesh, small n),
* the closed-form discrete sine transform diagonalization of the uniform 1D
  pencil (any n),
* truncated Fourier series of the continuous solution on the unit interval
  and unit square.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft
import scipy.linalg

from .errors import InvalidArgumentError, NumericalFailure, SizeLimitError
from .fem import SparsePencil
from .mesh import Mesh

DENSE_EIG_LIMIT = 5000


def check_beta(beta):
    if not 0.0 < beta < 1.0:
        raise InvalidArgumentError(f"beta must lie in (0, 1), got {beta!r}")


def propagator_weight(lam, t, beta):
    """exp(-t lam^beta)."""
    return np.exp(-t * np.power(lam, beta))


def duhamel_weight(lam, t, beta):
    """int_0^t exp(-s lam^beta) ds = lam^-beta (1 - exp(-t lam^beta))."""
    lb = np.power(lam, beta)
    return -np.expm1(-t * lb) / lb


# --- discrete eigenbasis --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EigenBasis:
    """Generalized eigenpairs A psi = lam M psi with Psi^T M Psi = I."""

    lambdas: np.ndarray
    Psi: np.ndarray
    M: object

    @property
    def n(self) -> int:
        return len(self.lambdas)

    def coefficients(self, v) -> np.ndarray:
        """(v, psi_j) for a coefficient vector v."""
        return self.Psi.T @ (self.M @ v)


def eigendecompose(pencil: SparsePencil, lambda1_lower: float | None = None) -> EigenBasis:
    """Full dense generalized eigendecomposition of (A, M).

    Eigenvector signs are fixed so the first nonzero entry is positive.
    """
    n = pencil.n
    if n > DENSE_EIG_LIMIT:
        raise SizeLimitError(
            f"dense eigendecomposition limited to n <= {DENSE_EIG_LIMIT} (got n={n}); "
            "use the sinc quadrature propagator (fracpar.sincprop) instead"
        )
    lam, Psi = scipy.linalg.eigh(pencil.A.toarray(), pencil.M.toarray())
    tol = 1e-8 * np.max(np.abs(Psi), axis=0)
    first = np.argmax(np.abs(Psi) > tol, axis=0)
    signs = np.sign(Psi[first, np.arange(n)])
    Psi = Psi * signs
    if lam[0] <= 0:
        raise NumericalFailure(f"pencil is not positive definite (lambda_1 = {lam[0]:.3e})")
    if lambda1_lower is not None and lam[0] < lambda1_lower * (1 - 1e-12):
        raise NumericalFailure(
            f"discrete lambda_1 = {lam[0]:.6g} is below the supplied lower bound {lambda1_lower:.6g}"
        )
    return EigenBasis(lambdas=lam, Psi=Psi, M=pencil.M)


def _check_vec(basis, v):
    v = np.asarray(v)
    if v.shape != (basis.n,):
        raise InvalidArgumentError(f"vector has shape {v.shape}, basis dimension is {basis.n}")
    return v


def propagate_spectral(basis: EigenBasis, v, t: float, beta: float) -> np.ndarray:
    """exp(-t L_h^beta) v via the eigenbasis."""
    v = _check_vec(basis, v)
    check_beta(beta)
    if t < 0:
        raise InvalidArgumentError(f"t must be >= 0, got {t}")
    return basis.Psi @ (propagator_weight(basis.lambdas, t, beta) * basis.coefficients(v))


def duhamel_spectral(basis: EigenBasis, f, t: float, beta: float) -> np.ndarray:
    """int_0^t exp(-(t-s) L_h^beta) f ds for time-constant f."""
    f = _check_vec(basis, f)
    check_beta(beta)
    if t <= 0:
        raise InvalidArgumentError(f"t must be > 0, got {t}")
    return basis.Psi @ (duhamel_weight(basis.lambdas, t, beta) * basis.coefficients(f))


# --- 1D discrete sine transform ---------------------------------------------------

def _interval_size(mesh_or_m):
    if isinstance(mesh_or_m, Mesh):
        if mesh_or_m.dim != 1 or mesh_or_m.uniform_step is None:
            raise InvalidArgumentError("DST path needs a uniform 1D mesh")
        return mesh_or_m.n_interior
    m = int(mesh_or_m)
    if m != mesh_or_m or m < 1:
        raise InvalidArgumentError(f"m_interior must be a positive integer, got {mesh_or_m!r}")
    return m


def dst_matrix(m_interior: int) -> np.ndarray:
    """Dense S with S_jk = sqrt(2h) sin(j k pi h); S is symmetric and S^2 = I."""
    m = _interval_size(m_interior)
    h = 1.0 / (m + 1)
    j = np.arange(1, m + 1)
    return np.sqrt(2 * h) * np.sin(np.outer(j, j) * np.pi * h)


def dst_apply(v) -> np.ndarray:
    """S v in O(M log M), with S as in :func:`dst_matrix`."""
    v = np.asarray(v)
    h = 1.0 / (v.shape[0] + 1)
    return np.sqrt(h / 2) * scipy.fft.dst(v, type=1, axis=0)


def dst_eigenvalues(m_interior: int) -> np.ndarray:
    """Eigenvalues 6 h^-2 (1 - cos(j pi h)) / (2 + cos(j pi h)) of M^-1 A."""
    m = _interval_size(m_interior)
    h = 1.0 / (m + 1)
    c = np.cos(np.arange(1, m + 1) * np.pi * h)
    return 6.0 / h**2 * (1.0 - c) / (2.0 + c)


def _dst_diag_apply(mesh_or_m, load, weight):
    m = _interval_size(mesh_or_m)
    load = np.asarray(load)
    if load.shape[0] != m:
        raise InvalidArgumentError(f"load vector has length {load.shape[0]}, expected {m}")
    h = 1.0 / (m + 1)
    c = np.cos(np.arange(1, m + 1) * np.pi * h)
    # S^-1 D S with D_ii = 3 w(Lambda_ii) / (h (2 + cos(i pi h))), S^-1 = S
    D = 3.0 * weight(dst_eigenvalues(m)) / (h * (2.0 + c))
    return dst_apply(D * dst_apply(load))


def dst_propagate_1d(mesh_or_m, load, t: float, beta: float) -> np.ndarray:
    """Coefficients of exp(-t L_h^beta) pi_h v from the load vector (v, phi_j)."""
    check_beta(beta)
    if t < 0:
        raise InvalidArgumentError(f"t must be >= 0, got {t}")
    return _dst_diag_apply(mesh_or_m, load, lambda lam: propagator_weight(lam, t, beta))


def dst_duhamel_1d(mesh_or_m, load, t: float, beta: float) -> np.ndarray:
    """Coefficients of int_0^t exp(-(t-s) L_h^beta) pi_h f ds for constant f."""
    check_beta(beta)
    if t <= 0:
        raise InvalidArgumentError(f"t must be > 0, got {t}")
    return _dst_diag_apply(mesh_or_m, load, lambda lam: duhamel_weight(lam, t, beta))


# --- continuous solutions ------------------------------------------------------------

@dataclass(frozen=True)
class ContinuousSpectrum:
    """Dirichlet Laplacian on the unit interval or square, truncated per direction."""

    domain: str
    modes: int

    def __post_init__(self):
        if self.domain not in ("interval", "square"):
            raise InvalidArgumentError(f"unknown domain {self.domain!r}")
        if self.modes < 1:
            raise InvalidArgumentError("modes must be positive")

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(1, self.modes + 1)

    def eigenvalues(self) -> np.ndarray:
        """(j pi)^2 in 1D; matrix of (j^2 + k^2) pi^2 in 2D."""
        j2 = (self.frequencies * np.pi) ** 2
        if self.domain == "interval":
            return j2
        return j2[:, None] + j2[None, :]

    @property
    def lambda1(self) -> float:
        return np.pi**2 if self.domain == "interval" else 2 * np.pi**2


def _sin_quarter(j):
    """sin(j pi / 2) and cos(j pi / 2) without rounding noise."""
    r = np.mod(j, 4)
    s = np.select([r == 1, r == 3], [1.0, -1.0], 0.0)
    c = np.select([r == 0, r == 2], [1.0, -1.0], 0.0)
    return s, c


def hat_coefficients(modes: int) -> np.ndarray:
    """(v, sqrt2 sin(j pi x)) for the hat v = min(2x, 2 - 2x)."""
    j = np.arange(1, modes + 1)
    s, _ = _sin_quarter(j)
    return 4.0 * np.sqrt(2.0) * s / (j * np.pi) ** 2


def half_interval_coefficients(modes: int):
    """1D sine coefficients of the indicators of (0, 1/2) and (1/2, 1)."""
    j = np.arange(1, modes + 1)
    _, c = _sin_quarter(j)
    cpi = np.where(j % 2 == 0, 1.0, -1.0)
    lower = np.sqrt(2.0) * (1.0 - c) / (j * np.pi)
    upper = np.sqrt(2.0) * (c - cpi) / (j * np.pi)
    return lower, upper


def checkerboard_coefficients(modes: int) -> np.ndarray:
    """(v, psi_j psi_k) for v = 1 where (x - 1/2)(y - 1/2) > 0, else 0."""
    lo, up = half_interval_coefficients(modes)
    return np.outer(lo, lo) + np.outer(up, up)


def hat(x):
    return np.where(x < 0.5, 2 * x, 2 - 2 * x)


def checkerboard(x, y):
    return ((x - 0.5) * (y - 0.5) > 0).astype(float)


class SineSeries1D:
    """u(x) = sum_j w_j sqrt2 sin(j pi x)."""

    def __init__(self, weights):
        self.weights = np.asarray(weights, dtype=float)
        self._j = np.flatnonzero(self.weights) + 1
        self._w = self.weights[self._j - 1]

    def __call__(self, x, chunk=2048):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.empty(flat.shape)
        for s in range(0, len(flat), chunk):
            xs = flat[s:s + chunk]
            out[s:s + chunk] = np.sqrt(2.0) * np.sin(np.outer(xs, self._j * np.pi)) @ self._w
        return out.reshape(x.shape)

    def at_uniform_nodes(self, m_interior: int) -> np.ndarray:
        """Values at x_i = i h, h = 1/(m+1), exploiting sine aliasing on the grid."""
        m = m_interior + 1
        folded = np.zeros(2 * m)
        np.add.at(folded, self._j % (2 * m), self._w)
        # sin((2m - r) pi i / m) = -sin(r pi i / m)
        g = folded[1:m] - folded[2 * m - 1:m:-1]
        return np.sqrt(2.0) * np.sqrt(m / 2.0) * dst_apply(g)

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.weights))


class SineSeries2D:
    """u(x, y) = sum_jk W_jk 2 sin(j pi x) sin(k pi y)."""

    def __init__(self, weights):
        self.weights = np.asarray(weights, dtype=float)
        self._j = np.arange(1, self.weights.shape[0] + 1)

    def _modes(self, s):
        return np.sqrt(2.0) * np.sin(np.outer(s, self._j * np.pi))

    def __call__(self, x, y, chunk=4096):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        shape = x.shape
        x, y = x.ravel(), y.ravel()
        ux, ix = np.unique(x, return_inverse=True)
        uy, iy = np.unique(y, return_inverse=True)
        out = np.empty(x.shape)
        if len(ux) + len(uy) <= 0.5 * len(x):
            G = self._modes(ux) @ self.weights
            Py = self._modes(uy)
            for s in range(0, len(x), chunk):
                sl = slice(s, s + chunk)
                out[sl] = np.einsum("pk,pk->p", G[ix[sl]], Py[iy[sl]])
        else:
            for s in range(0, len(x), chunk):
                sl = slice(s, s + chunk)
                out[sl] = np.einsum("pk,pk->p", self._modes(x[sl]) @ self.weights, self._modes(y[sl]))
        return out.reshape(shape)

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.weights))


DATA_TAGS = ("hat-1d", "checkerboard-2d", "constant-f")


def continuous_solution(spec: ContinuousSpectrum, data: str, t: float, beta: float):
    """Truncated Fourier series of the exact solution.

    ``hat-1d``: initial value problem with the hat initial datum.
    ``checkerboard-2d``: initial value problem with checkerboard data.
    ``constant-f``: zero initial data, time-constant hat forcing (1D).
    """
    check_beta(beta)
    if data not in DATA_TAGS:
        raise InvalidArgumentError(f"unknown data tag {data!r}; expected one of {DATA_TAGS}")
    if t < 0 or (data == "constant-f" and t == 0):
        raise InvalidArgumentError(f"invalid time t={t}")
    lam = spec.eigenvalues()
    if data == "checkerboard-2d":
        if spec.domain != "square":
            raise InvalidArgumentError("checkerboard data lives on the unit square")
        return SineSeries2D(propagator_weight(lam, t, beta) * checkerboard_coefficients(spec.modes))
    if spec.domain != "interval":
        raise InvalidArgumentError(f"{data} lives on the unit interval")
    c = hat_coefficients(spec.modes)
    if data == "hat-1d":
        return SineSeries1D(propagator_weight(lam, t, beta) * c)
    return SineSeries1D(duhamel_weight(lam, t, beta) * c)
