"""Command line entry point: ``fracpar run`` and ``fracpar quaderr``.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys

from . import harness
from .errors import InvalidArgumentError, NumericalFailure, SizeLimitError
from .report import emit, format_table

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

log = logging.getLogger("fracpar")


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse already exits with 2; raise instead so main() owns the exit path
    def error(self, message):
        raise ConfigError(message)


def _floats(text):
    try:
        return tuple(float(x) for x in str(text).split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _ints(text):
    vals = _floats(text)
    if any(v != int(v) for v in vals):
        raise ConfigError(f"expected integers, got {text!r}")
    return tuple(int(v) for v in vals)


def _levels(text):
    text = str(text).strip()
    if ":" in text:
        lo, _, hi = text.partition(":")
        try:
            lo, hi = int(lo), int(hi)
        except ValueError:
            raise ConfigError(f"bad level range {text!r}") from None
        if hi < lo:
            raise ConfigError(f"empty level range {text!r}")
        return tuple(range(lo, hi + 1))
    return _ints(text)


def _policies(text):
    names = {"logn": "log-n", "log-n": "log-n", "balanced": "balanced"}
    text = str(text).strip()
    if text == "both":
        return ("log-n", "balanced")
    out = []
    for p in text.split(","):
        if p.strip() not in names:
            raise ConfigError(f"unknown policy {p!r}; use logn, balanced or both")
        out.append(names[p.strip()])
    return tuple(out)


def _bool(text):
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _single_float(text):
    vals = _floats(text)
    if len(vals) != 1:
        raise ConfigError(f"expected a single number, got {text!r}")
    return vals[0]


# key -> converter; keys double as config-file keys
CONVERTERS = {
    "experiment": str,
    "beta": _floats,
    "t": _floats,
    "levels": _levels,
    "N": _ints,
    "policy": _policies,
    "b": _single_float,
    "d": _single_float,
    "modes": lambda s: _ints(s)[0],
    "out": str,
    "gnuplot": _bool,
    "bound": _bool,
    "cross_check": _bool,
    "workers": lambda s: _ints(s)[0],
}


def read_config(path):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for no, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or not value.strip():
            raise ConfigError(f"{path}:{no}: expected 'key = value'")
        if key not in CONVERTERS:
            raise ConfigError(f"{path}:{no}: unknown key {key!r}")
        values[key] = value.strip()
    return values


def build_parser():
    p = _Parser(prog="fracpar", description="Fractional parabolic FEM experiments with sinc quadrature.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="file of 'key = value' lines; flags override it")
        sp.add_argument("--beta")
        sp.add_argument("--t")
        sp.add_argument("--N")
        sp.add_argument("--policy", help="logn, balanced or both")
        sp.add_argument("--b")
        sp.add_argument("--d")
        sp.add_argument("--out")
        sp.add_argument("--gnuplot", action="store_const", const="true")
        sp.add_argument("--workers")

    r = sub.add_parser("run", help="run a convergence table or figure experiment")
    common(r)
    r.add_argument("--experiment", help=", ".join(harness.EXPERIMENTS))
    r.add_argument("--levels", help="range a:b or list")
    r.add_argument("--modes", help="Fourier modes per direction for the exact solution")
    r.add_argument("--bound", action="store_const", const="true", help="add theoretical bound series (figures)")
    r.add_argument("--no-cross-check", dest="cross_check", action="store_const", const="false")

    q = sub.add_parser("quaderr", help="scalar sinc quadrature error, sup over lambda >= 10")
    common(q)
    q.add_argument("--bound", action="store_const", const="true")
    return p


def _merge(args):
    values = {}
    if args.config:
        values.update(read_config(args.config))
    for key in CONVERTERS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    return {k: CONVERTERS[k](v) for k, v in values.items()}


def config_from_values(command, values):
    kw = {}
    if "beta" in values:
        kw["betas"] = values["beta"]
    for key, target in (("N", "N"), ("b", "b"), ("d", "d"), ("modes", "modes"),
                        ("levels", "levels"), ("bound", "bound"), ("cross_check", "cross_check"),
                        ("workers", "workers")):
        if key in values:
            kw[target] = values[key]
    if "policy" in values:
        kw["policies"] = values["policy"]
    times = values.get("t")

    if command == "quaderr":
        kw.setdefault("policies", ("log-n", "balanced"))
        Ns = values.get("N")
        if times is not None and len(times) > 1:
            if Ns is not None and len(Ns) > 1:
                raise ConfigError("give either several N or several t, not both")
            experiment = "fig-quaderr-vs-t"
            kw["times"] = times
        else:
            experiment = "fig-quaderr-vs-n"
            if times:
                kw["t"] = times[0]
    else:
        experiment = values.get("experiment")
        if experiment is None:
            raise ConfigError("--experiment is required")
        if experiment == "fig-quaderr-vs-t" and times is not None and len(times) > 1:
            kw["times"] = times
        elif times is not None:
            if len(times) != 1:
                raise ConfigError("--t takes a single value for this experiment")
            kw["t"] = times[0]
    if "d" not in kw:
        kw["d"] = math.pi / 8
    return harness.ExperimentConfig(experiment=experiment, **kw)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s")
        values = _merge(args)
        cfg = config_from_values(args.command, values)
        out = values.get("out")
        report = harness.run(cfg)
        print(format_table(report))
        for line in report.checks:
            print(f"check: {line}")
        if out:
            written = emit(report, out, "gnuplot" if values.get("gnuplot") else "csv")
            for path in written:
                print(f"wrote {path}")
        return EXIT_OK
    except (ConfigError, InvalidArgumentError, SizeLimitError) as exc:
        print(f"fracpar: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"fracpar: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
