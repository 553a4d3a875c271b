"""
End-to-end tests of the scert command line
"""
import json
import math
import os

import pytest

from certificates.certmath import eps_n_beta
from main import main, run
from test.helpers import print_test_header, print_test_result, write_csv

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DESK_UNITS = os.path.join(ROOT, "ucp", "desk_config.json")
CASE_STUDY_UNITS = os.path.join(ROOT, "ucp", "config.json")


class TestCertifyCommand:
    """Test suite for 'scert certify'"""

    def test_example_file(self, tmp_path, capsys):
        print_test_header("certify - 3x2 example")
        path = tmp_path / "s.csv"
        write_csv(path, [[1.0, 5.0], [2.0, 0.0], [3.0, 3.0]], header=["b1", "b2"])
        out_csv = tmp_path / "report.csv"
        result = run(["certify", str(path), "--beta", "0.05", "--csv", str(out_csv)])
        assert result["sigma"] == 2
        assert result["dominant_indices"] == "1 2"
        assert result["epsilon"] == eps_n_beta(3, 0.05, 2)
        assert result["apriori_epsilon"] is not None
        assert "Dominant scenarios: 1 2" in capsys.readouterr().out
        assert out_csv.read_text().splitlines()[0].startswith("n,q,beta,sigma,epsilon")
        print_test_result(True)

    def test_single_row(self, tmp_path):
        print_test_header("certify - one scenario, two constraints")
        path = tmp_path / "one.csv"
        write_csv(path, [[2.5, 1.0]])
        result = run(["certify", str(path), "--beta", "0.1"])
        assert result["epsilon"] == 1.0
        assert result["apriori_epsilon"] is None
        print_test_result(True)

    def test_malformed_row(self, tmp_path, capsys):
        print_test_header("certify - parse error exit status")
        path = tmp_path / "bad.csv"
        path.write_text("b1,b2\n1,2\n3,x\n")
        assert main(["certify", str(path), "--beta", "0.05"]) == 2
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert ":3:" in err
        print_test_result(True, err.strip())

    def test_invalid_utf8(self, tmp_path, capsys):
        print_test_header("certify - undecodable bytes")
        path = tmp_path / "bad.csv"
        path.write_bytes(b"1.0,2.0\n\xff\xfe,3.0\n")
        assert main(["certify", str(path), "--beta", "0.05"]) == 2
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert ":2: invalid UTF-8" in err
        print_test_result(True, err.strip())


class TestSizeCommand:
    """Test suite for 'scert size'"""

    def test_oneshot_and_epsbased(self):
        print_test_header("size - one-shot and eps-based")
        result = run(["size", "--q", "24", "--eps-bar", "0.1", "--beta", "1e-6"])
        assert result["oneshot_n"] == 533
        eps = run(["size", "--q", "2", "--eps-bar", "0.3", "--beta", "0.05", "--mode", "epsbased"])
        assert eps["delta_n"] == eps["epsbased_n"] - eps["oneshot_n"]
        assert eps["delta_n"] >= 0
        print_test_result(True)

    def test_schedule_csv(self, capsys):
        print_test_header("size - incremental schedule on stdout")
        capsys.readouterr()  # drop the test header so only command output is inspected
        result = run(["size", "--q", "1", "--eps-bar", "0.1", "--beta", "1e-6",
                      "--mode", "incremental-schedule"])
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "j,m_bar,beta_j,n_j"
        assert len(lines) == 3
        assert lines[1].startswith("0,132,")
        assert len(result["schedule"]) == 2
        print_test_result(True)

    def test_invalid_parameter(self, capsys):
        print_test_header("size - beta out of range")
        assert main(["size", "--q", "2", "--eps-bar", "0.1", "--beta", "1.5"]) == 2
        assert "beta" in capsys.readouterr().err
        print_test_result(True)


class TestGenDemandCommand:
    """Test suite for 'scert gen-demand'"""

    def test_deterministic_output(self, tmp_path):
        print_test_header("gen-demand - same seed, same file")
        a, b = tmp_path / "a.csv", tmp_path / "sub" / "b.csv"
        run(["gen-demand", "--seed", "4", "--n-days", "20", "--out", str(a)])
        result = run(["gen-demand", "--seed", "4", "--n-days", "20", "--out", str(b)])
        assert a.read_text() == b.read_text()
        assert result["n_days"] == 20
        assert len(a.read_text().splitlines()) == 21
        print_test_result(True)

    def test_zero_days(self, tmp_path, capsys):
        print_test_header("gen-demand - header only")
        path = tmp_path / "empty.csv"
        run(["gen-demand", "--seed", "1", "--n-days", "0", "--t", "6", "--out", str(path)])
        assert path.read_text().strip() == "h0,h1,h2,h3,h4,h5"
        assert "header-only" in capsys.readouterr().out
        print_test_result(True)


class TestRunIncrementalCommand:
    """Test suite for 'scert run-incremental' and 'scert risk'"""

    def test_desk_instance_then_risk(self, tmp_path):
        print_test_header("run-incremental - desk instance with the internal solver")
        solution = tmp_path / "solution.json"
        runs_csv = tmp_path / "runs.csv"
        result = run(["run-incremental", "--units", DESK_UNITS, "--eps-bar", "0.2", "--beta", "0.05",
                      "--seed", "11", "--solution-out", str(solution), "--csv", str(runs_csv)])
        record = result["runs"][0]
        assert 0 <= record["j_stop"] <= 6
        assert record["n_used"] <= result["schedule"][-1][3]
        assert record["sigma"] <= record["j_stop"]
        assert result["metrics"]["solve_calls_by_kind"]["bb"] == 1
        assert len(runs_csv.read_text().splitlines()) == 2

        doc = json.loads(solution.read_text())
        assert doc["scenario_kind"] == "demand"
        assert len(doc["g_values"]) == 6
        assert all(g <= x for g, x in zip(doc["g_values"], doc["xi"]))

        validation = tmp_path / "validation.csv"
        run(["gen-demand", "--seed", "5", "--n-days", "200", "--t", "6", "--out", str(validation)])
        risk = run(["risk", str(solution), "--validation", str(validation)])
        assert risk["n_validation"] == 200
        assert risk["dominance_exceptions"] == 0
        assert risk["empirical_risk"] <= risk["reduction_risk"]
        print_test_result(True, f"N used = {record['n_used']}, risk = {risk['empirical_risk']:.3f}")

    def test_export_mode(self, tmp_path, capsys):
        print_test_header("run-incremental - LP export")
        lp_path = tmp_path / "reduced.lp"
        result = run(["run-incremental", "--units", CASE_STUDY_UNITS, "--eps-bar", "0.1",
                      "--beta", "1e-6", "--seed", "3", "--export-lp", str(lp_path)])
        text = lp_path.read_text()
        assert text.startswith("\\* Problem: reduced *\\\n")
        assert "\\* Variables: 480 (96 continuous, 384 binary) *\\" in text
        assert math.isnan(result["runs"][0]["objective"])
        assert "no solve attempted" in capsys.readouterr().out
        print_test_result(True)

    def test_solver_cap(self, capsys):
        print_test_header("run-incremental - case study is beyond the internal solver")
        code = main(["run-incremental", "--units", CASE_STUDY_UNITS, "--eps-bar", "0.1",
                     "--beta", "1e-6", "--seed", "3"])
        assert code == 2
        err = capsys.readouterr().err
        assert "384 binaries" in err
        assert "--export-lp" in err
        print_test_result(True)

    def test_conflicting_flags(self, tmp_path):
        print_test_header("run-incremental - export with several runs")
        code = main(["run-incremental", "--units", DESK_UNITS, "--eps-bar", "0.2", "--beta", "0.05",
                     "--seed", "1", "--runs", "2", "--export-lp", str(tmp_path / "x.lp")])
        assert code == 2
        print_test_result(True)

    def test_risk_of_hand_written_decision(self, tmp_path):
        print_test_header("risk - b-value decision without xi")
        solution = tmp_path / "d.json"
        solution.write_text(json.dumps({"g_values": [1.5, 0.0]}))
        validation = tmp_path / "v.csv"
        write_csv(validation, [[1.0, 5.0], [2.0, 0.0], [3.0, 3.0]])
        result = run(["risk", str(solution), "--validation", str(validation)])
        assert result["empirical_risk"] == pytest.approx(1.0 / 3.0)
        assert result["reduction_risk"] is None
        print_test_result(True)


class TestSupportCommand:
    """Test suite for 'scert support'"""

    def test_convex_only(self, tmp_path):
        print_test_header("support - convex reduction oracle")
        demand = tmp_path / "demand.csv"
        run(["gen-demand", "--seed", "2", "--n-days", "40", "--t", "4", "--out", str(demand)])
        result = run(["support", "--convex-only", "--demand", str(demand), "--beta", "0.05"])
        assert result["gap"] == 0
        assert result["support_list"] == result["dominant_indices"]
        assert result["solve_count"] == 40
        assert result["apriori_epsilon"] is not None
        print_test_result(True)

    def test_single_day(self, tmp_path):
        print_test_header("support - N = 1")
        demand = tmp_path / "one.csv"
        write_csv(demand, [[20.0, 25.0, 30.0]], header=["h0", "h1", "h2"])
        result = run(["support", "--convex-only", "--demand", str(demand)])
        assert result["s_star"] == 1 and result["sigma"] == 1
        assert result["apriori_epsilon"] is None
        print_test_result(True)

    def test_units_required(self, tmp_path):
        print_test_header("support - missing --units")
        demand = tmp_path / "d.csv"
        write_csv(demand, [[20.0, 25.0]])
        assert main(["support", "--demand", str(demand)]) == 2
        print_test_result(True)
