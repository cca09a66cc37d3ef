"""Experiment driver: convergence tables and quadrature-error studies.

Level conventions per experiment:

- ``table-init-1d``, ``table-duhamel-1d``: level l means h = 2^-l on (0, 1).
- ``table-init-2d``: level l means the structured square mesh with n = 2^l
  cells per side, reported as h = 1/n.
- ``table-total-2d``: level l means max triangle area h^2 = 0.02 * 4^-l,
  realised by the structured mesh with n = 5 * 2^l cells per side.
- figures have no mesh; their resolutions are N or t.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import fem, quaderror, sincprop, spectral
from .errors import InconclusiveSearchError, InvalidArgumentError
from .mesh import build_interval_mesh, build_square_mesh
from .report import ExperimentReport, oroc  # noqa: F401  (oroc re-exported)
from .sincprop import ContourSpec, default_contour, make_rule

EXPERIMENTS = (
    "table-init-1d",
    "table-duhamel-1d",
    "table-init-2d",
    "table-total-2d",
    "fig-quaderr-vs-n",
    "fig-quaderr-vs-t",
)

DEFAULT_LEVELS = {
    "table-init-1d": (3, 4, 5, 6, 7),
    "table-init-2d": (2, 3, 4, 5, 6),
    "table-total-2d": (0, 1, 2, 3, 4),
}
DEFAULT_N = {
    "table-init-1d": (100,),
    "table-duhamel-1d": (100,),
    "table-init-2d": (100,),
    "table-total-2d": (40,),
    "fig-quaderr-vs-n": (4, 8, 16, 32, 64, 128),
    "fig-quaderr-vs-t": (32,),
}
DEFAULT_TIMES = (1e-4, 1e-3, 1e-2, 1e-1, 0.5, 1.0)
# finest 1D level on which the sinc path is run as a cross-check
SINC_CHECK_MAX_LEVEL = 7


def duhamel_default_levels(beta):
    """Small beta needs finer meshes before the rate settles."""
    return (12, 13) if beta < 0.25 else (9, 10)


def _lambda1_lower(experiment):
    return 2 * math.pi**2 if experiment in ("table-init-2d", "table-total-2d") else math.pi**2


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    betas: tuple = (0.25, 0.5, 0.75)
    t: float = 0.5
    levels: tuple | None = None
    N: tuple | None = None
    policies: tuple = ("log-n",)
    b: float | None = None
    d: float = sincprop.DEFAULT_D
    modes: int | None = None
    times: tuple | None = None
    cross_check: bool = True
    bound: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise InvalidArgumentError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        if not self.betas:
            raise InvalidArgumentError("at least one beta is required")
        for beta in self.betas:
            spectral.check_beta(beta)
        if self.levels is not None:
            lv = list(self.levels)
            if not lv or any(b <= a for a, b in zip(lv, lv[1:])):
                raise InvalidArgumentError(f"levels must be non-empty and strictly ascending, got {lv}")
            if min(lv) < 0:
                raise InvalidArgumentError("levels must be non-negative")
        if self.N is not None and (not self.N or any(int(n) != n or n < 2 for n in self.N)):
            raise InvalidArgumentError(f"N values must be integers >= 2, got {self.N}")
        for p in self.policies:
            if p not in sincprop.POLICIES:
                raise InvalidArgumentError(f"unknown policy {p!r}; expected one of {sincprop.POLICIES}")
        if not self.t > 0:
            raise InvalidArgumentError(f"t must be positive, got {self.t}")
        if self.times is not None and (not self.times or min(self.times) <= 0):
            raise InvalidArgumentError("times must be positive")
        if self.modes is not None and self.modes < 1:
            raise InvalidArgumentError("modes must be positive")
        if self.workers < 1:
            raise InvalidArgumentError("workers must be >= 1")
        # validates b and d against the admissible ranges
        self.contour()

    def contour(self) -> ContourSpec:
        lam1 = _lambda1_lower(self.experiment)
        if self.b is None:
            return default_contour(lam1, self.d)
        return ContourSpec(b=self.b, d=self.d, lambda1_lower=lam1)

    def resolved(self) -> "ExperimentConfig":
        """Copy with every default filled in, as echoed into the report header."""
        tag = self.experiment
        updates = {}
        if self.N is None:
            updates["N"] = DEFAULT_N[tag]
        if self.modes is None and tag.startswith("table-"):
            updates["modes"] = 500 if tag in ("table-init-2d", "table-total-2d") else 50000
        if self.b is None:
            updates["b"] = self.contour().b
        if self.levels is None and tag in DEFAULT_LEVELS:
            updates["levels"] = DEFAULT_LEVELS[tag]
        if self.times is None and tag == "fig-quaderr-vs-t":
            updates["times"] = DEFAULT_TIMES
        return replace(self, **updates)


def _metadata(cfg: ExperimentConfig):
    skip = {"experiment", "workers"}
    if cfg.experiment.startswith("fig-"):
        skip |= {"modes", "cross_check", "levels"}
    else:
        skip |= {"bound", "times"}
    meta = {k: v for k, v in asdict(cfg).items() if k not in skip}
    meta["lambda1_lower"] = cfg.contour().lambda1_lower
    return {k: v for k, v in meta.items() if v is not None}


def _fmt(x):
    return f"{x:.6e}"


# --- 1D tables ---------------------------------------------------------------------

def _interval_level(level):
    mesh = build_interval_mesh(2**level - 1)
    return mesh, fem.assemble(mesh)


def _table_init_1d(cfg, report):
    spec = cfg.contour()
    N = cfg.N[0]
    cont = spectral.ContinuousSpectrum("interval", cfg.modes)
    for beta in cfg.betas:
        rule = make_rule(N, beta, cfg.policies[0], spec, cfg.t)
        u = spectral.continuous_solution(cont, "hat-1d", cfg.t, beta)
        hs, errs = [], []
        for level in cfg.levels:
            mesh, pencil = _interval_level(level)
            Iu = u.at_uniform_nodes(mesh.n_interior)
            load = fem.load_vector(mesh, spectral.hat)
            uh = spectral.dst_propagate_1d(mesh, load, cfg.t, beta)
            err = fem.l2_norm(mesh, pencil, Iu - uh)
            hs.append(2.0**-level)
            errs.append(err)
            if cfg.cross_check and level <= SINC_CHECK_MAX_LEVEL:
                vh = fem.l2_project(mesh, spectral.hat, pencil)
                us = sincprop.apply_propagator(pencil, vh, cfg.t, beta, rule, spec, workers=cfg.workers)
                err_s = fem.l2_norm(mesh, pencil, Iu - us)
                report.checks.append(
                    f"beta={beta} level={level} dst_error={_fmt(err)} sinc_error={_fmt(err_s)} N={N}")
        report.add_series(f"beta={beta}", hs, errs, beta=beta, t=cfg.t, N=N, k=rule.k,
                          policy=rule.policy, b=spec.b, d=spec.d)


def _table_duhamel_1d(cfg, report):
    spec = cfg.contour()
    N = cfg.N[0]
    cont = spectral.ContinuousSpectrum("interval", cfg.modes)
    for beta in cfg.betas:
        levels = cfg.levels or duhamel_default_levels(beta)
        rule = make_rule(N, beta, cfg.policies[0], spec, cfg.t)
        u = spectral.continuous_solution(cont, "constant-f", cfg.t, beta)
        hs, errs = [], []
        for level in levels:
            mesh, pencil = _interval_level(level)
            Iu = u.at_uniform_nodes(mesh.n_interior)
            load = fem.load_vector(mesh, spectral.hat)
            uh = spectral.dst_duhamel_1d(mesh, load, cfg.t, beta)
            hs.append(2.0**-level)
            errs.append(fem.l2_norm(mesh, pencil, Iu - uh))
        if cfg.cross_check:
            level = min(min(levels), SINC_CHECK_MAX_LEVEL)
            mesh, pencil = _interval_level(level)
            fh = fem.l2_project(mesh, spectral.hat, pencil)
            us = sincprop.apply_duhamel(pencil, fh, cfg.t, beta, rule, spec, workers=cfg.workers)
            ud = spectral.dst_duhamel_1d(mesh, fem.load_vector(mesh, spectral.hat), cfg.t, beta)
            diff = fem.l2_norm(mesh, pencil, us - ud) / fem.l2_norm(mesh, pencil, ud)
            report.checks.append(f"beta={beta} level={level} sinc_vs_dst_relative={_fmt(diff)} N={N}")
        report.add_series(f"beta={beta}", hs, errs, beta=beta, t=cfg.t, N=N, k=rule.k,
                          policy=rule.policy, b=spec.b, d=spec.d, levels=tuple(levels))


# --- 2D tables ---------------------------------------------------------------------

def _square_run(cfg, report, cells, resolutions):
    spec = cfg.contour()
    N = cfg.N[0]
    cont = spectral.ContinuousSpectrum("square", cfg.modes)
    for beta in cfg.betas:
        rule = make_rule(N, beta, cfg.policies[0], spec, cfg.t)
        u = spectral.continuous_solution(cont, "checkerboard-2d", cfg.t, beta)
        errs = []
        for n in cells:
            mesh = build_square_mesh(n)
            pencil = fem.assemble(mesh)
            # odd n: split elements so quadrature cells align with the jump at 1/2
            sub = 1 if n % 2 == 0 else 2
            vh = fem.l2_project(mesh, spectral.checkerboard, pencil, subdivide=sub)
            uh = sincprop.apply_propagator(pencil, vh, cfg.t, beta, rule, spec, workers=cfg.workers)
            errs.append(fem.l2_error(mesh, uh, u))
        report.add_series(f"beta={beta}", resolutions, errs, beta=beta, t=cfg.t, N=N, k=rule.k,
                          policy=rule.policy, b=spec.b, d=spec.d)


def _table_init_2d(cfg, report):
    cells = [2**lv for lv in cfg.levels]
    _square_run(cfg, report, cells, [1.0 / n for n in cells])


def _table_total_2d(cfg, report):
    cells = [5 * 2**lv for lv in cfg.levels]
    # max triangle area of the structured mesh is 1 / (2 n^2)
    _square_run(cfg, report, cells, [0.5 / n**2 for n in cells])


# --- quadrature-error figures -------------------------------------------------------

def robust_sup_search(t, beta, spec, N, k, cfg=None, retries=4):
    """sup_search, doubling the probe count while the search is inconclusive."""
    cfg = cfg or quaderror.SupSearchConfig()
    for _ in range(retries):
        try:
            lam, val = quaderror.sup_search(t, beta, spec, N, k, cfg)
            return lam, val, cfg
        except InconclusiveSearchError:
            cfg = replace(cfg, script_n=2 * cfg.script_n)
    lam, val = quaderror.sup_search(t, beta, spec, N, k, cfg)
    return lam, val, cfg


def _fig_quaderr(cfg, report, vs):
    spec = cfg.contour()
    for beta in cfg.betas:
        for policy in cfg.policies:
            if vs == "N":
                pairs = [(N, cfg.t) for N in cfg.N]
            else:
                pairs = [(cfg.N[0], t) for t in cfg.times]
            xs, sups, bounds, ks = [], [], [], []
            n_cache = {}
            for N, t in pairs:
                k = sincprop.choose_k(N, beta, policy, spec, t)
                lam, val, used = robust_sup_search(t, beta, spec, N, k)
                if used.script_n != quaderror.SupSearchConfig().script_n:
                    report.checks.append(f"beta={beta} policy={policy} N={N} t={t} script_n={used.script_n}")
                xs.append(N if vs == "N" else t)
                sups.append(val)
                ks.append(k)
                if cfg.bound:
                    if t not in n_cache:
                        n_cache[t] = quaderror.n_factor(t, beta, spec)
                    bounds.append(quaderror.theoretical_bound(t, beta, spec, N, k, n_value=n_cache[t]))
            params = dict(beta=beta, policy=policy, b=spec.b, d=spec.d)
            params.update({"t": cfg.t} if vs == "N" else {"N": cfg.N[0]})
            params["k"] = tuple(ks)
            report.add_series(f"beta={beta} policy={policy}", xs, sups, **params)
            if cfg.bound:
                report.add_series(f"beta={beta} policy={policy} bound", xs, bounds, **params)


# --- entry point --------------------------------------------------------------------

_RESOLUTION_KIND = {
    "table-init-1d": "h",
    "table-duhamel-1d": "h",
    "table-init-2d": "h",
    "table-total-2d": "h2",
    "fig-quaderr-vs-n": "N",
    "fig-quaderr-vs-t": "t",
}

_RUNNERS = {
    "table-init-1d": _table_init_1d,
    "table-duhamel-1d": _table_duhamel_1d,
    "table-init-2d": _table_init_2d,
    "table-total-2d": _table_total_2d,
    "fig-quaderr-vs-n": lambda cfg, rep: _fig_quaderr(cfg, rep, "N"),
    "fig-quaderr-vs-t": lambda cfg, rep: _fig_quaderr(cfg, rep, "t"),
}


def run(config: ExperimentConfig) -> ExperimentReport:
    """Run one experiment; every default is resolved and echoed in the metadata."""
    cfg = config.resolved()
    kind = _RESOLUTION_KIND[cfg.experiment]
    report = ExperimentReport(cfg.experiment, kind, _metadata(cfg))
    with np.errstate(over="ignore", under="ignore"):
        _RUNNERS[cfg.experiment](cfg, report)
    return report
