import json

import pytest
from click.testing import CliRunner
from prefect.testing.utilities import prefect_test_harness

from flows.__main__ import cli

PLAN = [
    {
        "name": "tiny",
        "check": "refinement",
        "cfg_a": "chaos.cfg",
        "cfg_b": "ignore.cfg",
        "max_states": 1,
    }
]


@pytest.fixture
def runner():
    return CliRunner()


def test_ls_lists_public_flows(runner):
    result = runner.invoke(cli, ["ls"])

    assert result.exit_code == 0
    assert "variability-checks" in result.output
    assert "flows/langvar/__init__.py" in result.output
    assert "- plan_json: Path to a JSON list of check requests" in result.output
    assert "[default:" in result.output


def test_run_unknown_flow(runner):
    result = runner.invoke(cli, ["run", "no-such-flow"])

    assert result.exit_code == 2
    assert "Unknown flow 'no-such-flow'" in result.output


def test_run_rejects_malformed_parameters(runner):
    result = runner.invoke(cli, ["run", "variability-checks", "-p", "plan_json"])

    assert result.exit_code == 2
    assert "Expected key=value" in result.output


def test_run_flow_prints_reports(runner, tmp_path):
    plan = tmp_path / "plan.json"
    plan.write_text(json.dumps(PLAN))

    with prefect_test_harness():
        result = runner.invoke(
            cli, ["run", "variability-checks", "-p", f"plan_json={plan}"]
        )

    assert result.exit_code == 0, result.output
    reports = json.loads(result.output[result.output.index("[\n") :])
    assert [r["label"] for r in reports] == ["tiny"]
    assert reports[0]["verdict"] == "holds"
