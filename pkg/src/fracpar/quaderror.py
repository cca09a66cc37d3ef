"""Scalar quadrature error E(lam, t) of the sinc rule and its diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import InconclusiveSearchError, InvalidArgumentError, NumericalFailure
from .sincprop import ContourSpec, complex_power, gamma, gamma_prime, kappa

LAMBDA_FLOOR = 10.0
# |E| is a difference of O(1) quantities; changes below this are round-off
TAIL_ATOL = 1e-14


@dataclass(frozen=True)
class SupSearchConfig:
    mu: float = 1.5
    script_n: int = 40
    lambda_floor: float = LAMBDA_FLOOR
    tail: int = 3

    def __post_init__(self):
        if not self.mu > 1:
            raise InvalidArgumentError(f"mu must exceed 1, got {self.mu}")
        if self.script_n < 2:
            raise InvalidArgumentError(f"script_n must be >= 2, got {self.script_n}")

    def probes(self) -> np.ndarray:
        return self.lambda_floor * self.mu ** np.arange(self.script_n + 1)


def g_lambda(y, t, lam, beta, spec: ContourSpec):
    """exp(-t gamma(y)^beta) gamma'(y) / (gamma(y) - lam); y may be complex."""
    z = gamma(spec, y)
    gap = z - lam
    if np.any(np.abs(gap) < 1e-14):
        raise NumericalFailure(f"lambda={lam} lies on the contour")
    return np.exp(-t * complex_power(z, beta)) * gamma_prime(spec, y) / gap


def contour_integral(lam, t, beta):
    """Exact value of int g_lam dy: -2 pi i exp(-t lam^beta) (clockwise around lam)."""
    return -2j * np.pi * np.exp(-t * np.power(lam, beta))


def sinc_sum(lam, t, beta, spec: ContourSpec, N: int, k: float):
    """k sum_{j=-N..N} g_lam(jk, t); vectorized over lam."""
    lam = np.asarray(lam, dtype=float)
    y = np.arange(-N, N + 1) * k
    z = gamma(spec, y)
    w = np.exp(-t * complex_power(z, beta)) * gamma_prime(spec, y)
    out = k * np.sum(w[None, :] / (z[None, :] - lam.reshape(-1, 1)), axis=1)
    return out.reshape(lam.shape) if lam.ndim else complex(out[0])


def quad_error(lam, t, beta, spec: ContourSpec, N: int, k: float):
    """|E(lam, t)| = |int g_lam dy - k sum g_lam(jk)|, reference from the residue."""
    return np.abs(contour_integral(lam, t, beta) - sinc_sum(lam, t, beta, spec, N, k))


def sup_search(t, beta, spec: ContourSpec, N: int, k: float, cfg: SupSearchConfig | None = None):
    """Approximate sup_{lam >= 10} |E(lam, t)|.

    Probe lam_j = 10 mu^j for j = 0..script_n, locate the largest probe and
    refine with script_n equispaced points between its two neighbours.
    Returns ``(lambda_star, sup_value)``.
    """
    cfg = cfg or SupSearchConfig()
    lams = cfg.probes()
    vals = quad_error(lams, t, beta, spec, N, k)
    top = int(np.argmax(vals))  # ties go to the smaller lambda
    tail = vals[-(cfg.tail + 1):]
    if top >= len(lams) - cfg.tail or np.any(np.diff(tail) > TAIL_ATOL):
        raise InconclusiveSearchError(
            f"|E| is not decreasing over the last probes (max at j={top} of {cfg.script_n}); "
            "increase script_n or mu"
        )
    lo = lams[max(top - 1, 0)]
    hi = lams[top + 1]
    rho = lo + (hi - lo) / cfg.script_n * np.arange(1, cfg.script_n + 1)
    rvals = quad_error(rho, t, beta, spec, N, k)
    cand_l = np.concatenate([[lams[top]], rho])
    cand_v = np.concatenate([[vals[top]], rvals])
    best = int(np.argmax(cand_v))
    return float(cand_l[best]), float(cand_v[best])


def script_l(x):
    """1 + |ln(1 - e^-x)|."""
    return 1.0 + abs(math.log(-math.expm1(-x)))


def m_factor(t, beta, spec: ContourSpec):
    """M(t) = 1 + script_l(kappa t)."""
    return 1.0 + script_l(kappa(spec, beta) * t)


def strip_integral(lam, t, beta, spec: ContourSpec):
    """int |g_lam(y + id)| + |g_lam(y - id)| dy over the real line."""
    kap = kappa(spec, beta)
    # beyond Y the integrand is below exp(-40) relative to its envelope
    Y = math.acosh(max((40.0 / (kap * t)) ** (1.0 / beta), 1.0)) + 2.0

    def f(y):
        return abs(g_lambda(y + 1j * spec.d, t, lam, beta, spec)) + abs(
            g_lambda(y - 1j * spec.d, t, lam, beta, spec))

    total = 0.0
    for a, b in ((-Y, 0.0), (0.0, Y)):
        val, _ = quad(f, a, b, limit=400, epsabs=0.0, epsrel=1e-8)
        total += val
    return total


def n_factor(t, beta, spec: ContourSpec, cfg: SupSearchConfig | None = None):
    """N(d, t) approximated by maximizing over the probe grid lam_j = 10 mu^j."""
    cfg = cfg or SupSearchConfig()
    return max(strip_integral(lam, t, beta, spec) for lam in cfg.probes())


def theoretical_bound(t, beta, spec: ContourSpec, N: int, k: float, cfg: SupSearchConfig | None = None,
                      n_value: float | None = None):
    """Bracketed error bound with constant C = 1 and grid-approximated N(d, t)."""
    if n_value is None:
        n_value = n_factor(t, beta, spec, cfg)
    kap = kappa(spec, beta)
    first = n_value / math.expm1(2 * math.pi * spec.d / k)
    kn = k * N
    expo = -kap * 2 ** (-beta) * t * math.exp(min(kn * beta, 700.0))
    second = m_factor(t, beta, spec) / math.tanh(kn) * math.exp(expo) if kn > 0 else math.inf
    return first + second
