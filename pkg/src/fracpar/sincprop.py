"""Sinc quadrature of the Dunford-Taylor integral for exp(-t L_h^beta).

The contour is the hyperbola gamma(y) = b (cosh y + i sinh y), traversed
with increasing y, which passes to the left of the spectrum of L_h. Each
quadrature node costs one complex-shifted solve; nodes y_j and y_-j give
complex-conjugate systems, so only j = 0..N are solved.

Orientation: with increasing y the curve winds clockwise around every
eigenvalue lam > b, hence

    int g_lam(y) dy = -2 pi i exp(-t lam^beta),
    g_lam(y) = exp(-t gamma^beta) gamma' / (gamma - lam).

The propagator therefore uses the resolvent of (L_h - z), i.e. the solves
(z M - A) x = M v enter with a minus sign.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import linsolve
from .errors import InvalidArgumentError
from .fem import SparsePencil
from .spectral import check_beta

POLICIES = ("log-n", "balanced")
DEFAULT_D = math.pi / 8


@dataclass(frozen=True)
class ContourSpec:
    b: float
    d: float = DEFAULT_D
    lambda1_lower: float = math.pi**2

    def __post_init__(self):
        if not self.lambda1_lower > 0:
            raise InvalidArgumentError("lambda1_lower must be positive")
        if not 0 < self.b < self.lambda1_lower / math.sqrt(2):
            raise InvalidArgumentError(
                f"contour scale b={self.b} must lie in (0, lambda1_lower/sqrt(2)) "
                f"= (0, {self.lambda1_lower / math.sqrt(2):.6g})"
            )
        if not 0 < self.d < math.pi / 4:
            raise InvalidArgumentError(f"strip half-width d={self.d} must lie in (0, pi/4)")


def default_contour(lambda1_lower: float, d: float = DEFAULT_D) -> ContourSpec:
    """b = min(1, lambda1_lower / (2 sqrt 2)): well inside the admissible range."""
    return ContourSpec(b=min(1.0, 0.5 * lambda1_lower / math.sqrt(2)), d=d, lambda1_lower=lambda1_lower)


@dataclass(frozen=True)
class SincRule:
    N: int
    k: float
    policy: str = "log-n"

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 0:
            raise InvalidArgumentError(f"N must be a non-negative integer, got {self.N!r}")
        if not self.k > 0:
            raise InvalidArgumentError(f"spacing k must be positive, got {self.k!r}")

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1) * self.k


def gamma(spec: ContourSpec, y):
    return spec.b * (np.cosh(y) + 1j * np.sinh(y))


def gamma_prime(spec: ContourSpec, y):
    return spec.b * (np.sinh(y) + 1j * np.cosh(y))


def complex_power(z, beta):
    """Principal branch z^beta = exp(beta log z)."""
    return np.exp(beta * np.log(z))


def kappa(spec: ContourSpec, beta: float) -> float:
    """cos(beta (pi/4 + d)) (sqrt2 b sin(pi/4 - d))^beta."""
    return math.cos(beta * (math.pi / 4 + spec.d)) * (
        math.sqrt(2) * spec.b * math.sin(math.pi / 4 - spec.d)
    ) ** beta


def balanced_rhs(spec: ContourSpec, beta: float, t: float) -> float:
    return 2 ** (1 + beta) * math.pi * spec.d / (kappa(spec, beta) * t)


def choose_k(N: int, beta: float, policy: str = "log-n", spec: ContourSpec | None = None,
             t: float | None = None) -> float:
    """Quadrature spacing for a given N.

    ``log-n``: k = ln N / (beta N), suited to moderate and large t.
    ``balanced``: the root of k exp(beta N k) = 2^(1+beta) pi d / (kappa t),
    which balances discretization and truncation errors for small t.
    """
    check_beta(beta)
    if N < 2:
        raise InvalidArgumentError(f"N must be >= 2, got {N}")
    if policy == "log-n":
        return math.log(N) / (beta * N)
    if policy != "balanced":
        raise InvalidArgumentError(f"unknown k policy {policy!r}; expected one of {POLICIES}")
    if t is None or not t > 0:
        raise InvalidArgumentError("the balanced policy needs a positive time t")
    if spec is None:
        raise InvalidArgumentError("the balanced policy needs a contour spec")
    rhs = balanced_rhs(spec, beta, t)
    # work with log(k) + beta N k - log(rhs): monotone, no overflow
    lr = math.log(rhs)
    return brentq(lambda k: math.log(k) + beta * N * k - lr, 1e-12, 1e2, xtol=1e-300, rtol=1e-15, maxiter=500)


def make_rule(N: int, beta: float, policy: str = "log-n", spec: ContourSpec | None = None,
              t: float | None = None) -> SincRule:
    return SincRule(N=N, k=choose_k(N, beta, policy, spec, t), policy=policy)


def _weights(rule, spec, t, beta, kind):
    y = np.arange(0, rule.N + 1) * rule.k
    z = gamma(spec, y)
    zb = complex_power(z, beta)
    if kind == "propagator":
        w = np.exp(-t * zb)
    else:
        # int_0^t exp(-s z^beta) ds
        w = -np.expm1(-t * zb) / zb
    return z, w * gamma_prime(spec, y)


def _sinc_apply(pencil, v, t, beta, rule, spec, kind, workers, exploit_symmetry):
    check_beta(beta)
    if not t > 0:
        raise InvalidArgumentError(f"t must be > 0, got {t}")
    v = np.asarray(v)
    if v.shape != (pencil.n,):
        raise InvalidArgumentError(f"vector has shape {v.shape}, pencil dimension is {pencil.n}")
    if np.iscomplexobj(v) and np.any(v.imag):
        raise InvalidArgumentError("the sinc propagator expects real data")
    v = np.real(v).astype(float)
    rhs = pencil.M @ v
    if not np.any(rhs):
        return np.zeros(pencil.n), 0.0

    z, w = _weights(rule, spec, t, beta, kind)
    if exploit_symmetry:
        shifts = list(z)
    else:
        shifts = list(np.conj(z[:0:-1])) + list(z)
        w = np.concatenate([-np.conj(w[:0:-1]), w])

    def one(zj):
        return linsolve.factorize(pencil, zj).solve(rhs)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            xs = list(ex.map(one, shifts))
    else:
        xs = [one(zj) for zj in shifts]

    # fixed ascending-j accumulation, independent of completion order
    acc = np.zeros(pencil.n, dtype=np.complex128)
    if exploit_symmetry:
        acc += w[0] * xs[0]
        pair = np.zeros(pencil.n, dtype=np.complex128)
        for j in range(1, len(xs)):
            pair += w[j] * xs[j]
        # T_{-j} = -conj(T_j): the pair contributes 2i Im(T_j)
        acc += 2j * pair.imag
    else:
        for wj, xj in zip(w, xs):
            acc += wj * xj
    # minus sign: resolvent of (L_h - z) for the clockwise contour
    result = -rule.k / (2j * np.pi) * acc
    residue = float(np.max(np.abs(result.imag)))
    return result.real.copy(), residue


def apply_propagator(pencil: SparsePencil, v, t: float, beta: float, rule: SincRule,
                     spec: ContourSpec, *, workers: int = 1, exploit_symmetry: bool = True,
                     return_residue: bool = False):
    """Sinc approximation Q^{N,k}(t) v of exp(-t L_h^beta) v.

    Solves (gamma_j M - A) x_j = M v for j = 0..N (or -N..N when
    ``exploit_symmetry`` is off) and returns the real part of the weighted
    sum. With ``return_residue`` the largest imaginary magnitude of the sum
    is returned as well; it should sit at round-off level.
    """
    out, residue = _sinc_apply(pencil, v, t, beta, rule, spec, "propagator", workers, exploit_symmetry)
    return (out, residue) if return_residue else out


def fractional_inverse_rule(beta: float, tol: float = 1e-13):
    """Spacing and truncation for the real-axis sinc rule of L^-beta.

    Discretization error behaves like exp(-pi^2 / k); the two tails decay like
    exp(-beta N+ k) and exp(-(1 - beta) N- k) and are balanced against it.
    """
    check_beta(beta)
    if not 0 < tol < 1:
        raise InvalidArgumentError(f"tol must lie in (0, 1), got {tol}")
    k = math.pi**2 / math.log(1.0 / tol)
    n_plus = math.ceil(math.pi**2 / (beta * k * k))
    n_minus = math.ceil(math.pi**2 / ((1.0 - beta) * k * k))
    return k, n_minus, n_plus


def apply_fractional_inverse(pencil: SparsePencil, v, beta: float, *, tol: float = 1e-13,
                             workers: int = 1):
    """L_h^-beta v from sin(pi beta)/pi int e^((1-beta) y) (e^y M + A)^-1 M v dy.

    The shifts e^y are real and positive, so every solve is SPD.
    """
    k, n_minus, n_plus = fractional_inverse_rule(beta, tol)
    v = np.asarray(v, dtype=float)
    if v.shape != (pencil.n,):
        raise InvalidArgumentError(f"vector has shape {v.shape}, pencil dimension is {pencil.n}")
    rhs = pencil.M @ v
    ys = np.arange(-n_minus, n_plus + 1) * k

    def one(y):
        # (e^y M + A) = -(z M - A) with z = -e^y
        return -linsolve.factorize(pencil, -math.exp(y)).solve(rhs).real

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            xs = list(ex.map(one, ys))
    else:
        xs = [one(y) for y in ys]
    acc = np.zeros(pencil.n)
    for y, x in zip(ys, xs):
        acc += math.exp((1.0 - beta) * y) * x
    return math.sin(math.pi * beta) / math.pi * k * acc


def apply_duhamel(pencil: SparsePencil, f, t: float, beta: float, rule: SincRule,
                  spec: ContourSpec, *, workers: int = 1, exploit_symmetry: bool = True,
                  return_residue: bool = False, method: str = "split"):
    """Sinc approximation of int_0^t exp(-(t-s) L_h^beta) f ds for constant f.

    The time integral equals L_h^-beta (f - exp(-t L_h^beta) f). Its weight
    (1 - exp(-t z^beta)) z^-beta only decays like |z|^-beta along the
    hyperbola, so a single contour rule truncates at O(1/N). The default
    ``method="split"`` therefore applies the contour rule to the exponential
    and a real-axis sinc rule to L_h^-beta. ``method="contour"`` keeps the
    single-contour weight.
    """
    if method == "contour":
        out, residue = _sinc_apply(pencil, f, t, beta, rule, spec, "duhamel", workers, exploit_symmetry)
    elif method == "split":
        decayed, residue = _sinc_apply(pencil, f, t, beta, rule, spec, "propagator", workers,
                                       exploit_symmetry)
        out = apply_fractional_inverse(pencil, np.real(np.asarray(f)) - decayed, beta, workers=workers)
    else:
        raise InvalidArgumentError(f"unknown Duhamel method {method!r}; expected 'split' or 'contour'")
    return (out, residue) if return_residue else out
