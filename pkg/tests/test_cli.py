import csv
import io
import json
import math
import subprocess
import sys

import jsonschema
import pytest

from objbayes.cli import main, _number
from objbayes.intrinsic_test import LOG100
from objbayes.schemas import SCHEMAS


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def run_json(*argv):
    code, out, err = run(*argv)
    assert code == 0, err
    report = json.loads(out)
    jsonschema.validate(report, SCHEMAS[argv[0]])
    return report


def assert_error(code, err, expected):
    assert code == expected
    body = json.loads(err)
    jsonschema.validate(body, SCHEMAS["error"])
    assert body["error"]["exit_code"] == expected
    return body["error"]


def test_prior_poisson_inverse_sqrt():
    rep = run_json("prior", "--family", "poisson", "--grid", "0.5,1,2")
    assert rep["label"] == "jeffreys"
    assert rep["grid"] == [[0.5], [1.0], [2.0]]
    expected = [-0.5 * math.log(x / 0.5) for x in (0.5, 1, 2)]
    assert rep["log_density"] == pytest.approx(expected, abs=1e-11)
    assert rep["log_density"][0] == 0.0
    assert rep["fisher"] == [[[2.0]], [[1.0]], [[0.5]]]


def test_prior_normal_known_sigma_constant():
    rep = run_json("prior", "--family", "normal_known_sigma", "--sigma", "1", "--grid", "-1,0,1")
    assert rep["log_density"] == [0.0, 0.0, 0.0]


def test_prior_location_scale_grid():
    rep = run_json("prior", "--family", "normal", "--grid", "0:1,3:2")
    assert rep["log_density"][1] == pytest.approx(-2 * math.log(2), abs=1e-11)
    assert rep["fisher"][0] == [[1.0, 0.0], [0.0, 2.0]]


def test_prior_csv():
    code, out, _ = run("prior", "--family", "poisson", "--grid", "1,4", "--out", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["alpha", "log_density", "fisher_00"]
    assert float(rows[2][1]) == pytest.approx(-math.log(2), abs=1e-11)


@pytest.mark.parametrize("argv", [
    ["prior", "--grid", "1"],
    ["prior", "--family", "poisson"],
    ["prior", "--family", "poisson", "--grid", "-1"],
    ["prior", "--family", "normal_known_sigma", "--grid", "0"],
    ["prior", "--family", "poisson", "--grid", "1:2"],
    ["prior", "--family", "weibull", "--grid", "1"],
    ["bogus"],
    [],
    ["coverage", "--family", "poisson", "--true", "3", "--n", "5", "--reps", "3", "--seed", "-1"],
    ["coverage", "--family", "poisson", "--true", "3", "--n", "5", "--reps", "3", "--seed", str(2**64)],
    ["coverage", "--family", "poisson", "--true", "3", "--n", "5", "--reps", "3"],
    ["test-intrinsic", "--family", "poisson", "--null", "1"],
    ["test-intrinsic", "--family", "poisson", "--n", "3", "--mean", "1"],
    ["test-intrinsic", "--family", "normal", "--n", "3", "--mean", "1", "--null", "0"],
    ["test-mixed", "--family", "normal_known_sigma", "--sigma", "1", "--n", "1", "--mean", "0",
     "--null", "0", "--spread", "uniform"],
    ["test-mixed", "--family", "normal_known_sigma", "--sigma", "1", "--n", "1", "--mean", "0",
     "--null", "0", "--p", "1"],
    ["lindley", "--z", "2", "--n-list", "100,10"],
    ["lindley", "--z", "2"],
])
def test_config_errors_exit_2(argv):
    code, out, err = run(*argv)
    assert_error(code, err, 2)
    assert out == ""


def test_intrinsic_reject():
    rep = run_json("test-intrinsic", "--family", "normal_known_sigma", "--sigma", "1",
                   "--n", "25", "--mean", "0.6", "--null", "0")
    assert rep["d"] == 5.0 and rep["z"] == 3.0 and rep["decision"] == "reject"
    assert rep["threshold"] == pytest.approx(LOG100, rel=1e-11)
    assert rep["method"] == "closed_form" and rep["quadrature_error"] is None


def test_intrinsic_accept():
    rep = run_json("test-intrinsic", "--family", "normal_known_sigma", "--sigma", "1",
                   "--n", "25", "--mean", "0.0", "--null", "0")
    assert rep["d"] == 0.5 and rep["decision"] == "accept"


def test_intrinsic_quadrature_flag():
    rep = run_json("test-intrinsic", "--family", "normal_known_sigma", "--sigma", "1",
                   "--n", "25", "--mean", "0.6", "--null", "0", "--method", "quadrature")
    assert rep["d"] == pytest.approx(5.0, abs=1e-6) and rep["method"] == "quadrature"


def test_intrinsic_improper_exit_3():
    code, out, err = run("test-intrinsic", "--family", "poisson", "--n", "3", "--sum", "0",
                         "--null", "1", "--prior", "scale_invariant")
    body = assert_error(code, err, 3)
    assert body["type"] == "ImproperPosteriorError"
    assert "lower" in body["diagnostic"]
    assert out == ""


def test_mixed_defaults():
    rep = run_json("test-mixed", "--family", "normal_known_sigma", "--sigma", "1",
                   "--n", "1", "--mean", "0", "--null", "0")
    assert rep["posterior_null_prob"] > 0.5
    b = rep["bayes_factor_01"]
    assert rep["posterior_null_prob"] == pytest.approx(b / (1 + b), rel=1e-11)
    assert rep["spread_prior"] == {"label": "cauchy_proper", "location": 0.0, "scale": 1.0}


def test_mixed_spread_flags():
    rep = run_json("test-mixed", "--family", "normal_known_sigma", "--sigma", "2", "--n", "4",
                   "--mean", "1", "--null", "0.5", "--spread-scale", "3", "--p", "0.25")
    assert rep["spread_prior"] == {"label": "cauchy_proper", "location": 0.5, "scale": 3.0}
    assert rep["prior_null_mass"] == 0.25


def _lindley(*extra):
    code, out, err = run("lindley", *extra)
    assert code == 0, err
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["n", "bayes_factor_01", "posterior_null_prob", "intrinsic_d", "z_fixed"]
    return [[float(x) for x in r] for r in rows[1:]]


def test_lindley_z2():
    rows = _lindley("--z", "2", "--n-list", "10,100,1000,10000,100000,1000000")
    probs = [r[2] for r in rows]
    assert [r[0] for r in rows] == [10, 100, 1000, 10000, 100000, 1000000]
    assert all(b > a for a, b in zip(probs, probs[1:]))
    assert len({r[3] for r in rows}) == 1 and rows[0][3] == 2.5


def test_lindley_z4_decisions_disagree():
    rows = _lindley("--z", "4", "--n-list", "10,1000,100000,10000000,100000000")
    mixed_accepts = [r[2] > 0.5 for r in rows]
    intrinsic_rejects = [r[3] > LOG100 for r in rows]
    assert all(intrinsic_rejects)
    assert not mixed_accepts[0] and mixed_accepts[-1]


def test_lindley_json():
    rep = run_json("lindley", "--z", "1", "--n-list", "10,100", "--out", "json")
    assert [r["n"] for r in rep["rows"]] == [10, 100]


def test_coverage_report():
    rep = run_json("coverage", "--family", "poisson", "--true", "3", "--n", "20", "--reps", "30",
                   "--mass", "0.9", "--seed", "42")
    assert rep["reps"] == 30 and rep["seed"] == 42 and rep["prng"] == "PCG64"
    assert rep["coverage"] == rep["hits"] / 30


def test_coverage_single_replicate():
    rep = run_json("coverage", "--family", "normal_known_sigma", "--sigma", "1", "--true", "0",
                   "--n", "10", "--reps", "1", "--seed", "0")
    assert rep["coverage"] in (0, 1)


def test_data_file_with_header_and_crlf(tmp_path):
    path = tmp_path / "counts.csv"
    path.write_bytes(b"count\r\n1\r\n1\r\n1\r\n1\r\n")
    rep = run_json("test-intrinsic", "--family", "poisson", "--data", str(path), "--null", "1")
    assert rep["data"] == {"source": "file", "n": 4, "mean": 1.0}
    assert rep["d"] == pytest.approx(0.437209, abs=1e-5)


def test_data_file_without_header(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("0.5\n")
    rep = run_json("test-mixed", "--family", "normal_known_sigma", "--sigma", "1", "--data", str(path), "--null", "0")
    assert rep["data"]["n"] == 1


@pytest.mark.parametrize("content", ["a,b\n1,2\n", "x\n1\noops\n", "header\n", "1\n-2\n"])
def test_bad_data_files(tmp_path, content):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    code, _, err = run("test-intrinsic", "--family", "poisson", "--data", str(path), "--null", "1")
    assert_error(code, err, 2)


def test_missing_data_file(tmp_path):
    code, _, err = run("test-intrinsic", "--family", "poisson", "--data", str(tmp_path / "nope.csv"), "--null", "1")
    assert_error(code, err, 2)


def test_two_data_sources(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("1\n")
    code, _, err = run("test-intrinsic", "--family", "poisson", "--data", str(path), "--n", "1",
                       "--mean", "1", "--null", "1")
    assert_error(code, err, 2)


def test_number_formatting():
    assert _number(math.inf) == "inf"
    assert _number(-math.inf) == "-inf"
    assert _number(math.nan) == "nan"
    assert _number(1 / 3) == 0.333333333333
    assert _number(7) == 7


def _subprocess(*argv):
    proc = subprocess.run([sys.executable, "-m", "objbayes", *argv], capture_output=True)
    return proc.returncode, proc.stdout, proc.stderr


def test_entry_point_exit_codes():
    assert _subprocess("prior", "--grid", "1")[0] == 2
    assert _subprocess("test-intrinsic", "--family", "poisson", "--n", "3", "--sum", "0", "--null", "1",
                       "--prior", "scale_invariant")[0] == 3
    code, out, _ = _subprocess("prior", "--family", "poisson", "--grid", "1")
    assert code == 0 and json.loads(out)["schema_version"] == "1.0"
