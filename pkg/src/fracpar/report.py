"""Experiment reports: observed rates, CSV and gnuplot emission, CSV parsing.

CSV layout::

    # fracpar experiment=<tag>
    # generated=<iso timestamp>          (ignored when comparing runs)
    # key=value                          (one line per parameter)
    # check: <free text>                 (cross-module consistency checks)
    resolution,error,oroc
    # series <label> | key=value ...
    <rows>
    <two blank lines between series, so gnuplot can address them by index>
"""
from __future__ import annotations

import datetime as _dt
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InvalidArgumentError

HEADER = "resolution,error,oroc"


def oroc(errors, resolutions):
    """Observed rates ln(e_i / e_{i+1}) / ln(h_i / h_{i+1})."""
    errors = [float(e) for e in errors]
    resolutions = [float(h) for h in resolutions]
    if len(errors) != len(resolutions) or len(errors) < 2:
        raise InvalidArgumentError("oroc needs two equally long lists with at least two entries")
    if min(errors) <= 0 or min(resolutions) <= 0:
        raise InvalidArgumentError("errors and resolutions must be positive")
    return [
        math.log(errors[i] / errors[i + 1]) / math.log(resolutions[i] / resolutions[i + 1])
        for i in range(len(errors) - 1)
    ]


@dataclass
class Row:
    resolution: float
    error: float
    oroc: float | None = None


@dataclass
class Series:
    label: str
    params: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)

    @property
    def errors(self):
        return [r.error for r in self.rows]

    @property
    def resolutions(self):
        return [r.resolution for r in self.rows]

    @property
    def rates(self):
        return [r.oroc for r in self.rows[1:]]


# how the printed resolution maps to the mesh size h used for rates
_TO_H = {"h": lambda r: r, "h2": math.sqrt}


@dataclass
class ExperimentReport:
    experiment: str
    resolution_kind: str
    metadata: dict = field(default_factory=dict)
    series: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    def add_series(self, label, resolutions, errors, **params):
        rows = [Row(float(r), float(e)) for r, e in zip(resolutions, errors)]
        to_h = _TO_H.get(self.resolution_kind)
        if to_h is not None and len(rows) >= 2 and all(e > 0 for e in errors):
            for row, rate in zip(rows[1:], oroc(errors, [to_h(r) for r in resolutions])):
                row.oroc = rate
        s = Series(label, dict(params), rows)
        self.series.append(s)
        return s

    def get(self, label) -> Series:
        for s in self.series:
            if s.label == label:
                return s
        raise KeyError(label)


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        # a trailing comma keeps one-element tuples distinguishable from scalars
        return ",".join(_fmt(x) for x in v) + ("," if len(v) == 1 else "")
    return str(v)


def _parse_value(text):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if "," in text:
        return tuple(_parse_value(p) for p in text.split(",") if p)
    if text in ("True", "False"):
        return text == "True"
    if text == "None":
        return None
    return text


def to_csv(report: ExperimentReport, timestamp: bool = True) -> str:
    lines = [f"# fracpar experiment={report.experiment}"]
    if timestamp:
        lines.append(f"# generated={_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')}")
    lines.append(f"# resolution_kind={report.resolution_kind}")
    lines += [f"# {k}={_fmt(v)}" for k, v in report.metadata.items()]
    lines += [f"# check: {c}" for c in report.checks]
    lines.append(HEADER)
    for i, s in enumerate(report.series):
        if i:
            lines += ["", ""]
        params = " ".join(f"{k}={_fmt(v)}" for k, v in s.params.items())
        lines.append(f"# series {s.label} | {params}".rstrip(" |"))
        for r in s.rows:
            lines.append(f"{r.resolution!r},{r.error!r},{'' if r.oroc is None else repr(r.oroc)}")
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> ExperimentReport:
    report = None
    kind = None
    meta, checks, series = {}, [], []
    current = None
    for line in text.splitlines():
        if not line.strip() or line.strip() == HEADER:
            continue
        if line.startswith("# series "):
            body = line[len("# series "):]
            label, _, params = body.partition(" | ")
            current = Series(label.strip(), {})
            for tok in params.split():
                k, _, v = tok.partition("=")
                current.params[k] = _parse_value(v)
            series.append(current)
        elif line.startswith("# check: "):
            checks.append(line[len("# check: "):])
        elif line.startswith("# fracpar experiment="):
            report = line.split("=", 1)[1]
        elif line.startswith("# "):
            k, _, v = line[2:].partition("=")
            if k == "generated":
                continue
            if k == "resolution_kind":
                kind = v
            else:
                meta[k] = _parse_value(v)
        else:
            if current is None:
                raise InvalidArgumentError("data row before any series header")
            res, err, rate = line.split(",")
            current.rows.append(Row(float(res), float(err), float(rate) if rate else None))
    if report is None or kind is None:
        raise InvalidArgumentError("not a fracpar report")
    return ExperimentReport(report, kind, meta, series, checks)


def gnuplot_script(report: ExperimentReport, csv_name: str) -> str:
    log_x = report.resolution_kind in ("h", "h2", "t")
    xlabel = {"h": "h", "h2": "h^2", "N": "N", "t": "t"}[report.resolution_kind]
    plots = [
        f"'{csv_name}' index {i} using 1:2 with linespoints title '{s.label}'"
        for i, s in enumerate(report.series)
    ]
    return "\n".join([
        f"# gnuplot script for {report.experiment}",
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set logscale y",
        "set logscale x" if log_x else "unset logscale x",
        "set format y '%.0e'",
        f"set xlabel '{xlabel}'",
        "set ylabel 'error'",
        "set key outside",
        "plot " + ", \\\n     ".join(plots),
        "",
    ])


def emit(report: ExperimentReport, path, fmt: str = "csv", timestamp: bool = True):
    """Write the report as CSV, and for ``fmt='gnuplot'`` also a .gp script next to it."""
    if not report.series or not any(s.rows for s in report.series):
        raise InvalidArgumentError("refusing to emit an empty report")
    if fmt not in ("csv", "gnuplot"):
        raise InvalidArgumentError(f"unknown format {fmt!r}")
    path = Path(path)
    try:
        path.write_text(to_csv(report, timestamp=timestamp))
        written = [path]
        if fmt == "gnuplot":
            gp = path.with_suffix(".gp")
            gp.write_text(gnuplot_script(report, path.name))
            written.append(gp)
    except OSError as exc:
        raise InvalidArgumentError(f"cannot write {path}: {exc}") from exc
    return written


def format_table(report: ExperimentReport) -> str:
    """Human-readable summary for the terminal."""
    out = [f"{report.experiment}"]
    for s in report.series:
        out.append(f"  {s.label}")
        for r in s.rows:
            rate = "" if r.oroc is None else f"  oroc {r.oroc:5.2f}"
            out.append(f"    {r.resolution:<14.6g} {r.error:.3e}{rate}")
    return "\n".join(out)
