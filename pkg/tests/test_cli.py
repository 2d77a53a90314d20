import glob
import importlib.util
import json
import os

import pytest
from click.testing import CliRunner

from conftest import ROOT
from WitnessForgeTool import WitnessForgeTool
from operations.ReproduceOperation import CASES

OPERATIONS = {"EVAL", "SEV", "OPTIMIZE", "SWEEP", "SIMULATE", "BASELINE", "REPRODUCE"}


def load_cli():
    spec = importlib.util.spec_from_file_location("main_witness", os.path.join(ROOT, "witness-tool", "main-witness.py"))
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module.cli


@pytest.fixture
def invoke(repo_root):
    cli = load_cli()
    runner = CliRunner()

    def run(*args):
        return runner.invoke(cli, list(args))
    return run


def test_eval_bell(invoke, tmp_path):
    out = str(tmp_path / "report.json")
    result = invoke("eval", "bell_witness", "bell", "--out", out)
    assert result.exit_code == 0
    with open(out) as f:
        report = json.load(f)
    assert report["entangled"] is True
    assert report["g_min"] == pytest.approx(0.291824, abs=1e-5)
    assert report["expectation"] == pytest.approx(0.275426, abs=1e-4)


def test_eval_mode_mismatch_is_invalid_input(invoke):
    result = invoke("eval", "fourmode_tripartition", "bell")
    assert result.exit_code == 2


def test_malformed_witness_is_invalid_input(invoke, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text(json.dumps({"modes": 2, "partition": [[1], [2]], "displacements": [[0, 1]]}))
    result = invoke("eval", str(path), "bell")
    assert result.exit_code == 2


def test_witness_row_that_is_not_a_list_is_invalid_input(invoke, tmp_path):
    path = tmp_path / "flat.json"
    path.write_text(json.dumps({"modes": 2, "partition": [[1], [2]], "lambda": [0.5, 0.5], "displacements": [1, 2]}))
    assert invoke("eval", str(path), "bell").exit_code == 2


def test_state_term_that_is_not_an_object_is_invalid_input(invoke, tmp_path):
    path = tmp_path / "terms.json"
    path.write_text(json.dumps({"type": "coherent_superposition", "modes": 2, "terms": [3]}))
    assert invoke("eval", "bell_witness", str(path)).exit_code == 2


def test_missing_file_fails(invoke):
    assert invoke("eval", "no_such_witness", "bell").exit_code == 1


def test_quintic_on_non_collinear_witness_fails(invoke):
    assert invoke("sev", "bell_witness", "--method", "quintic").exit_code == 1


def test_sev_with_rescaling(invoke, tmp_path):
    out = str(tmp_path / "sev.json")
    result = invoke("sev", "bell_witness", "--mu", "2", "--nu", "1", "--out", out)
    assert result.exit_code == 0
    with open(out) as f:
        solution = json.load(f)
    assert solution["rescaled_g_min"] == pytest.approx(2 * solution["g_min"] + 1)
    assert solution["method"] == "multistart_alternating"


def test_baseline_tmsv(invoke, tmp_path):
    out = str(tmp_path / "baseline.json")
    result = invoke("baseline", "tmsv", "--out", out)
    assert result.exit_code == 0
    with open(out) as f:
        rows = json.load(f)
    assert [row["criterion"] for row in rows] == ["simon", "duan"]
    assert all(row["entangled"] for row in rows)


def test_reproduce_tmsv(invoke, tmp_path):
    out = str(tmp_path / "reproduce.json")
    result = invoke("reproduce", "tmsv", "--format", "json", "--out", out)
    assert result.exit_code == 0
    with open(out) as f:
        rows = json.load(f)
    assert rows and all(row["passed"] for row in rows)


def test_reproduce_covariance_baselines(invoke, tmp_path):
    out = str(tmp_path / "baselines.json")
    result = invoke("reproduce", "fig2_point", "--format", "json", "--out", out)
    assert result.exit_code == 0
    with open(out) as f:
        rows = json.load(f)
    assert len(rows) == 4 and all(row["passed"] for row in rows)


def test_reproduce_case_names():
    assert set(CASES) == {"bell", "tmsv", "tmsv_radius", "subtracted_global", "subtracted_local", "fourmode_appc",
                          "table1", "fig2_point", "loss_invariance"}


def test_loss_invariance_case_passes():
    rows = CASES["loss_invariance"](0, 1)
    assert rows and all(row.passed for row in rows)


def test_tool_keeps_last_result(repo_root):
    tool = WitnessForgeTool(out=os.devnull)
    tool.execute_operation("SEV", witness_file="library/bell_witness.json")
    assert tool.state['last_result']["g_min"] == pytest.approx(0.291824, abs=1e-5)
    with pytest.raises(ValueError):
        tool.execute_operation("PLOT")


def test_use_cases_are_well_formed():
    paths = glob.glob(os.path.join(ROOT, "witness-tool", "use-cases", "*.json"))
    assert paths
    for path in paths:
        with open(path) as f:
            use_case = json.load(f)
        assert use_case["name"] and use_case["operations"]
        for operation in use_case["operations"]:
            assert operation["operation_command"] in OPERATIONS
            assert isinstance(operation["operation_arguments"], dict)
