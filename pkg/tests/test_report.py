import math

import pytest
from hypothesis import given, strategies as st

from fracpar.errors import InvalidArgumentError
from fracpar.report import ExperimentReport, emit, gnuplot_script, oroc, parse_csv, to_csv


def test_oroc_exact_two():
    assert oroc([4, 1], [1 / 2, 1 / 4]) == [2.0]


def test_oroc_constant_errors():
    assert oroc([3.0, 3.0, 3.0], [0.1, 0.05, 0.025]) == [0.0, 0.0]


@pytest.mark.parametrize("errors,res", [([1.0], [0.5]), ([1.0, 2.0], [0.5]), ([0.0, 1.0], [0.5, 0.25]),
                                       ([1.0, 2.0], [-0.5, 0.25])])
def test_oroc_rejects(errors, res):
    with pytest.raises(InvalidArgumentError):
        oroc(errors, res)


def _report(kind="h"):
    r = ExperimentReport("table-init-1d", kind, {"t": 0.5, "b": 1.0, "d": math.pi / 8, "betas": (0.25, 0.5)})
    r.add_series("beta=0.25", [1 / 8, 1 / 16, 1 / 32], [2.3e-3, 6.4e-4, 1.6e-4], beta=0.25, N=100, k=0.18,
                 policy="log-n")
    r.add_series("beta=0.5", [1 / 8, 1 / 16, 1 / 32], [3.3e-4, 8.5e-5, 2.1e-5], beta=0.5, N=100, k=0.09,
                 policy="log-n")
    r.checks.append("beta=0.5 level=3 dst_error=1 sinc_error=1")
    return r


def test_csv_round_trip():
    r = _report()
    assert parse_csv(to_csv(r)) == r


def test_csv_schema():
    text = to_csv(_report())
    lines = text.splitlines()
    assert all(line.startswith("#") for line in lines[:lines.index("resolution,error,oroc")])
    first_rows = [ln for ln in lines if ln and not ln.startswith("#")][1:]
    assert first_rows[0].endswith(",")  # oroc empty on the first row
    for key in ("b=", "d=", "t="):
        assert any(ln.startswith(f"# {key}") for ln in lines)
    series = [ln for ln in lines if ln.startswith("# series")]
    for key in ("beta=", "N=", "k=", "policy="):
        assert all(key in ln for ln in series)


def test_timestamp_excluded_from_parse():
    r = _report()
    assert parse_csv(to_csv(r, timestamp=True)) == parse_csv(to_csv(r, timestamp=False))


@given(st.lists(st.floats(1e-12, 1e3), min_size=2, max_size=6))
def test_stored_rates_recomputable(errors):
    r = ExperimentReport("x", "h")
    hs = [2.0**-i for i in range(len(errors))]
    s = r.add_series("s", hs, errors)
    for i in range(1, len(errors)):
        expect = math.log(errors[i - 1] / errors[i]) / math.log(hs[i - 1] / hs[i])
        assert s.rows[i].oroc == pytest.approx(expect, abs=1e-12)
    assert s.rows[0].oroc is None


def test_h2_rates_are_in_h():
    r = ExperimentReport("table-total-2d", "h2")
    s = r.add_series("s", [0.02, 0.005], [1.0, 0.25])
    assert s.rows[1].oroc == pytest.approx(2.0)


def test_figures_have_no_rates():
    r = ExperimentReport("fig-quaderr-vs-n", "N")
    s = r.add_series("s", [4, 8], [1e-1, 1e-3])
    assert s.rows[1].oroc is None


def test_emit_csv_and_gnuplot(tmp_path):
    r = _report()
    files = emit(r, tmp_path / "out.csv", "gnuplot")
    assert [f.name for f in files] == ["out.csv", "out.gp"]
    gp = files[1].read_text()
    assert "'out.csv' index 1" in gp and "separator ','" in gp
    assert parse_csv(files[0].read_text()) == r
    assert "index 0" in gnuplot_script(r, "x.csv")


def test_emit_errors(tmp_path):
    with pytest.raises(InvalidArgumentError):
        emit(ExperimentReport("x", "h"), tmp_path / "e.csv")
    with pytest.raises(InvalidArgumentError):
        emit(_report(), tmp_path / "missing" / "dir" / "e.csv")
    with pytest.raises(InvalidArgumentError):
        emit(_report(), tmp_path / "e.csv", "json")


def test_parse_rejects_garbage():
    with pytest.raises(InvalidArgumentError):
        parse_csv("1,2,3\n")


def test_round_trip_of_real_run():
    from fracpar.harness import ExperimentConfig, run
    r = run(ExperimentConfig("table-duhamel-1d", betas=(0.5,), levels=(3, 4)))
    assert parse_csv(to_csv(r)) == r
