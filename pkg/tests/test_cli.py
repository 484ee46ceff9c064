import io
import json
import math
import os
import pathlib
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from gaussnorm.cli import EXIT_CHECK, EXIT_OK, EXIT_USAGE, SEED_ENV, fmt_float, parse_matrix, run

SCHEMA = json.loads((pathlib.Path(__file__).parents[1] / "docs" / "output_schema.json").read_text())

# one cheap invocation per subcommand
SMOKE = {
    "expectation": ["--u", "0.6,0.8", "--p", "inf"],
    "ek-table": ["--n", "5"],
    "ekq-table": ["--n", "4", "--q", "1.5"],
    "median": ["--n", "1,10:12"],
    "critical-residual": ["--u", "0.3,0.5,0.8", "--i", "0", "--j", "2"],
    "r-rho": ["--n", "3", "--rho", "0,0.25,0.5"],
    "optimize": ["--n", "3", "--starts", "1"],
    "landscape": ["--q", "1.7", "--grid-size", "64"],
    "phase": ["--n2p2"],
    "explore-qgt2": ["--n", "3", "--q-grid", "2.5", "--no-optimize"],
    "mc-norm": ["--cov", "0.5,0;0,0.5", "--samples", "20000"],
    "sidak": ["--cov", "0.5,0.2;0.2,0.5", "--samples", "20000"],
    "theorem2": ["--random", "2,3", "--count", "2", "--samples", "20000"],
    "v1": ["--axes", "1,1,1"],
    "bound": ["--radii", "3,2,1"],
    "c-table": ["--n-list", "2:8"],
    "lemma1": ["--x", "0,0.5,1,2", "--q", "1,2"],
    "lemma2": ["--c", "0,1,2"],
}


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def doc_of(*argv):
    code, out, err = invoke(*argv)
    assert code == EXIT_OK, err
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    return doc


class TestSubcommands:
    def test_set_is_complete(self):
        from gaussnorm.cli import build_parser
        sub = next(a for a in build_parser()._actions if a.dest == "command")
        assert set(sub.choices) == set(SMOKE)
        assert set(SCHEMA["properties"]["command"]["enum"]) == set(SMOKE)

    @pytest.mark.parametrize("name", sorted(SMOKE))
    def test_smoke_json(self, name):
        doc = doc_of(name, *SMOKE[name])
        assert doc["command"] == name
        assert doc["status"] == "ok"
        assert doc["seed"] == 0

    @pytest.mark.parametrize("name", ["expectation", "median", "lemma2", "c-table"])
    def test_smoke_csv(self, name):
        code, out, _ = invoke(name, *SMOKE[name], "--format", "csv")
        assert code == EXIT_OK
        lines = out.splitlines()
        assert len(lines) >= 2
        assert "," in lines[0] and not any(ch.isdigit() for ch in lines[0].split(",")[0])


class TestExamples:
    def test_expectation_n2(self):
        res = doc_of("expectation", "--u", "0.6,0.8", "--p", "inf")["results"]
        np.testing.assert_allclose(res["value"], math.sqrt(2 / math.pi), atol=1e-9)
        assert res["method"] == "quadrature"

    def test_ek_table_50(self):
        res = doc_of("ek-table", "--n", "50")["results"]
        assert len(res["rows"]) == 50
        assert res["monotone"] is True
        assert [r["k"] for r in res["rows"]] == list(range(1, 51))

    def test_phase(self):
        res = doc_of("phase", "--n2p2")["results"]
        assert abs(res["q_L"] - 1.5) <= 1e-2
        assert abs(res["q_M"] - 1.5349) <= 1e-4
        assert abs(res["q_U"] - 2.0) <= 1e-2
        assert res["q_M_identity_residual"] <= 1e-6

    def test_phase_needs_flag(self):
        code, _, err = invoke("phase")
        assert code == EXIT_USAGE and "n2p2" in err


class TestReproducibility:
    def test_byte_identical(self):
        argv = ["mc-norm", "--cov", "0.4,0.1;0.1,0.6", "--samples", "70000", "--seed", "3"]
        assert invoke(*argv)[1] == invoke(*argv)[1]

    def test_threads_do_not_change_results(self):
        base = ["theorem2", "--random", "3", "--count", "2", "--samples", "70000"]
        one = doc_of(*base, "--threads", "1")
        four = doc_of(*base, "--threads", "4")
        assert one["results"] == four["results"]
        assert four["inputs"]["threads"] == 4

    def test_seed_changes_results(self):
        a = doc_of("mc-norm", "--cov", "1", "--samples", "1000", "--seed", "1")
        b = doc_of("mc-norm", "--cov", "1", "--samples", "1000", "--seed", "2")
        assert a["results"]["mean"] != b["results"]["mean"]

    def test_seed_env(self, monkeypatch):
        monkeypatch.setenv(SEED_ENV, "17")
        doc = doc_of("median", "--n", "3")
        assert doc["seed"] == 17 and doc["inputs"]["seed"] == 17
        assert doc_of("median", "--n", "3", "--seed", "5")["seed"] == 5

    def test_bad_seed_env(self, monkeypatch):
        monkeypatch.setenv(SEED_ENV, "zero")
        with pytest.raises(SystemExit):
            invoke("median", "--n", "3")

    def test_float_roundtrip(self):
        for x in (0.1, 1 / 3, math.pi * 1e-300, 2.0**-1074, 1e308):
            assert float(fmt_float(x)) == x

    def test_inputs_recorded(self):
        doc = doc_of("expectation", "--u", "0.6,0.8", "--rel-tol", "1e-9")
        assert doc["inputs"]["u"] == [0.6, 0.8]
        assert doc["inputs"]["rel_tol"] == 1e-9
        assert doc["inputs"]["p"] == "Infinity"


class TestExitCodes:
    @pytest.mark.parametrize("argv", [
        ["nope"],
        ["expectation"],
        ["expectation", "--u", "0.6,abc"],
        ["expectation", "--u", "0.6,0.8", "--bogus"],
        ["mc-norm", "--cov", "1,0;0"],
        ["mc-norm", "--cov", "0.6,0;0,0.6"],
        ["v1", "--axes", "1,-1"],
        ["bound", "--radii", "1,2"],
        ["expectation", "--u", "nan,1"],
        ["median", "--n", "1", "--threads", "0"],
    ])
    def test_usage(self, argv):
        code, out, err = invoke(*argv)
        assert code == EXIT_USAGE
        assert out == ""
        assert err

    def test_check_failure(self):
        code, out, _ = invoke("optimize", "--n", "4", "--q", "1.5", "--no-candidates",
                              "--starts", "1", "--max-iter", "1")
        assert code == EXIT_CHECK
        doc = json.loads(out)
        jsonschema.validate(doc, SCHEMA)
        assert doc["status"] == "check-failed"
        assert doc["results"]["converged"] is False

    def test_unsorted_grid_not_asserted(self):
        doc = doc_of("r-rho", "--n", "2", "--rho", "0.5,0")
        assert doc["results"]["nonincreasing_on_grid"] is None
        doc = doc_of("lemma1", "--x", "2,1", "--q", "1")
        assert doc["results"]["all_ok"] is True

    def test_help_exits_zero(self, capsys):
        assert run(["--help"]) == EXIT_OK


class TestFiles:
    def test_output_file(self, tmp_path):
        dest = tmp_path / "out.json"
        code, out, _ = invoke("v1", "--axes", "2", "--output", str(dest))
        assert code == EXIT_OK and out == ""
        np.testing.assert_allclose(json.loads(dest.read_text())["results"]["v1"], 4.0, rtol=1e-12)

    def test_landscape_data_out(self, tmp_path):
        dest = tmp_path / "land.dat"
        doc_of("landscape", "--q", "1.7", "--grid-size", "64", "--data-out", str(dest))
        lines = dest.read_text().splitlines()
        assert lines[0] == "theta value_minus_axis"
        data = np.loadtxt(dest, skiprows=1)
        assert data.shape == (64, 2)
        assert np.all(np.diff(data[:, 0]) > 0)
        # value is measured from the axis, which sits at theta -> 0
        assert abs(data[0, 1]) < 1e-6

    def test_c_table_data_out(self, tmp_path):
        dest = tmp_path / "c.dat"
        doc = doc_of("c-table", "--n-list", "2:6", "--data-out", str(dest))
        data = np.loadtxt(dest, skiprows=1)
        np.testing.assert_array_equal(data[:, 0], [2, 3, 4, 5, 6])
        np.testing.assert_allclose(data[:, 1], [r["c_n"] for r in doc["results"]["rows"]], rtol=1e-16)


class TestParsing:
    def test_matrix(self):
        assert parse_matrix("1,2;3,4") == [[1.0, 2.0], [3.0, 4.0]]

    def test_inf_values(self):
        doc = doc_of("expectation", "--u", "1", "--p", "Infinity")
        assert doc["inputs"]["p"] == "Infinity"


def test_entry_point():
    env = dict(os.environ, GAUSSNORM_SEED="4")
    proc = subprocess.run([sys.executable, "-m", "gaussnorm.cli", "median", "--n", "2"],
                          capture_output=True, text=True, env=env, check=False)
    assert proc.returncode == EXIT_OK
    assert json.loads(proc.stdout)["seed"] == 4
    proc = subprocess.run([sys.executable, "-m", "gaussnorm.cli", "median"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == EXIT_USAGE and proc.stderr

