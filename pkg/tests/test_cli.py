"""Command-line dispatch, formats, exit codes, determinism."""

import json
import subprocess
import sys

import pytest

from iet_lab.cli import run

SEVEN_SPEC = {"pair": {"d": 7, "pi0": [1, 2, 3, 4, 5, 6, 7],
                       "pi1": [6, 7, 4, 5, 3, 1, 2]},
              "loop": [1, 0, 1, 1, 1, 1, 1, 1, 0, 1, 1, 0, 1, 1, 1,
                       0, 0, 1, 1, 1, 1, 0, 1, 0, 0, 0, 0, 1, 1, 1]}
FOUR_SPEC = {"pair": {"d": 4, "pi0": [1, 2, 3, 4], "pi1": [4, 3, 2, 1]},
             "periodic_matrix": [["10", "24", "18", "7"],
                                 ["4", "11", "8", "2"],
                                 ["1", "2", "2", "0"],
                                 ["3", "7", "5", "3"]]}
FIVE_SPEC = {"pair": {"d": 5, "pi0": [1, 2, 3, 4, 5], "pi1": [5, 4, 3, 2, 1]},
             "periodic_matrix": [["18", "28", "31", "38", "18"],
                                 ["10", "16", "8", "9", "6"],
                                 ["13", "20", "36", "46", "18"],
                                 ["2", "3", "16", "22", "6"],
                                 ["39", "61", "63", "77", "37"]]}
STEP_SPEC = {"kind": "step", "dim": 1,
             "values": [["1.0"], ["-1.0"], ["2.0"], ["-0.5"]],
             "extra_discontinuities": [{"gamma": "0.21", "jump": ["1.5"]}]}


@pytest.fixture()
def specs(tmp_path):
    paths = {}
    for name, doc in (("seven", SEVEN_SPEC), ("four", FOUR_SPEC),
                      ("five", FIVE_SPEC), ("step", STEP_SPEC)):
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(doc))
        paths[name] = str(p)
    return paths


def capture(capsys, argv):
    code = run(argv)
    out = capsys.readouterr().out
    return code, out


class TestDispatch:
    def test_repro_seven_letter(self, capsys):
        code, out = capture(capsys, ["repro", "--case", "example-7-2"])
        assert code == 0
        doc = json.loads(out)
        assert doc["result"]["ok"] is True

    def test_spectrum_from_iet(self, capsys, specs):
        code, out = capture(capsys, ["spectrum", "--iet", specs["five"]])
        assert code == 0
        doc = json.loads(out)
        assert doc["result"]["splitting"]["dims"] == [2, 1, 2]
        assert doc["result"]["singularities"]["kappa"] == 2

    def test_rauzy_steps(self, capsys, specs):
        code, out = capture(capsys, ["rauzy", "--iet", specs["seven"],
                                     "--steps", "30"])
        assert code == 0
        doc = json.loads(out)
        assert doc["result"]["theta"][0] == ["9", "8", "20", "20", "15", "5", "5"]

    def test_build(self, capsys, specs):
        code, out = capture(capsys, ["build", "--iet", specs["four"]])
        assert code == 0
        doc = json.loads(out)
        assert doc["result"]["loop_verified"] is False
        assert doc["result"]["positive_power"] == 2

    def test_classify(self, capsys, specs):
        code, out = capture(capsys, ["classify", "--iet", specs["five"],
                                     "--vector=-1,-2,0,-1,1"])
        assert code == 0
        assert json.loads(out)["result"]["verdict"] == "CentralUndetermined"

    def test_correct(self, capsys, specs):
        code, out = capture(capsys, ["correct", "--iet", specs["four"],
                                     "--cocycle", specs["step"],
                                     "--zero-mean",
                                     "--depth", "8", "--k-max", "6"])
        assert code == 0
        doc = json.loads(out)
        assert len(doc["result"]["h"][0]) == 4
        assert len(doc["result"]["growth_corrected"]) == 7

    def test_deviation_csv(self, capsys, specs):
        code, out = capture(capsys, ["deviation", "--iet", specs["four"],
                                     "--cocycle", specs["step"],
                                     "--n-max", "2000", "--samples", "3",
                                     "--format", "csv"])
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[1] == "n,sup_norm"
        assert lines[2].startswith("1,")

    def test_essential_values_fixed_space(self, capsys, specs):
        code, out = capture(capsys, ["essential-values", "--iet",
                                     specs["five"], "--fixed-space",
                                     "--n-max", "4"])
        assert code == 0
        doc = json.loads(out)
        values = {tuple(c["value"]) for c in doc["result"]["candidates"]}
        assert len(values) >= 4

    def test_simulate(self, capsys, specs):
        code, out = capture(capsys, ["simulate", "--iet", specs["four"],
                                     "--cocycle", specs["step"],
                                     "--n", "2000", "--samples", "4"])
        assert code == 0
        doc = json.loads(out)
        assert doc["result"]["n_steps"] == 2000

    def test_simulate_csv_histogram(self, capsys, specs):
        code, out = capture(capsys, ["simulate", "--iet", specs["four"],
                                     "--cocycle", specs["step"],
                                     "--n", "500", "--samples", "3",
                                     "--format", "csv"])
        assert code == 0
        assert "bin,count" in out

    def test_rotations_dk(self, capsys):
        code, out = capture(capsys, ["rotations", "--mode", "dk",
                                     "--n", "10000", "--depth", "15",
                                     "--samples", "10"])
        assert code == 0
        assert json.loads(out)["result"]["violations"] == 0

    def test_rotations_product(self, capsys):
        code, out = capture(capsys, ["rotations", "--mode", "product",
                                     "--n", "50000"])
        assert code == 0
        assert json.loads(out)["result"]["zero_returns"] > 0

    def test_spectrum_from_matrix_file(self, capsys, tmp_path):
        m = tmp_path / "m.json"
        m.write_text(json.dumps(FIVE_SPEC["periodic_matrix"]))
        code, out = capture(capsys, ["spectrum", "--matrix", str(m)])
        assert code == 0
        doc = json.loads(out)
        assert doc["result"]["spectrum"]["zero_multiplicity"] == 1

    def test_deviation_with_workers(self, capsys, specs):
        code, out = capture(capsys, ["deviation", "--iet", specs["four"],
                                     "--cocycle", specs["step"],
                                     "--n-max", "2000", "--samples", "4",
                                     "--threads", "2"])
        assert code == 0

    def test_birkhoff_csv(self, capsys, specs):
        code, out = capture(capsys, ["birkhoff", "--iet", specs["four"],
                                     "--cocycle", specs["step"],
                                     "--n", "200", "--format", "csv"])
        assert code == 0
        assert "n,sup_norm" in out


class TestErrors:
    def test_unknown_subcommand_usage_exit(self):
        with pytest.raises(SystemExit) as info:
            run(["frobnicate"])
        assert info.value.code == 2

    def test_missing_file_is_domain_error(self, capsys):
        code = run(["build", "--iet", "/nonexistent/x.json"])
        assert code == 1

    def test_non_periodic_input_rejected(self, capsys, tmp_path):
        p = tmp_path / "plain.json"
        p.write_text(json.dumps({"pair": FOUR_SPEC["pair"],
                                 "lambda": ["0.4", "0.3", "0.2", "0.1"]}))
        code = run(["build", "--iet", str(p)])
        assert code == 1


class TestDeterminism:
    def test_byte_identical_outputs(self, specs):
        argv = [sys.executable, "-m", "iet_lab.cli", "deviation",
                "--iet", specs["four"], "--cocycle", specs["step"],
                "--n-max", "3000", "--samples", "4", "--seed", "7"]
        runs = [subprocess.run(argv, capture_output=True).stdout
                for _ in range(2)]
        assert runs[0] == runs[1]
        argv_json = [sys.executable, "-m", "iet_lab.cli", "spectrum",
                     "--iet", specs["five"]]
        runs = [subprocess.run(argv_json, capture_output=True).stdout
                for _ in range(2)]
        assert runs[0] == runs[1]
