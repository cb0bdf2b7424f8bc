import json

import numpy as np
import pytest

from acceptanceJudge import check_boundary_identity, check_vandermonde, check_verdict, run_acceptance_suite
from merge_Report import generate_report
from utils.verif_rules import ACCEPTANCE_TOLERANCES, ENHANCEMENT_SUGGESTIONS_MAP, assess_verdict


def test_assess_verdict():
    assert assess_verdict({"boundary_identity": 1e-10}) == ("pass", [])
    verdict, weak = assess_verdict({"boundary_identity": 1e-3, "contraction": 0.5})
    assert verdict == "fail" and weak == ["boundary_identity"]
    assert assess_verdict({"contraction": np.nan})[1] == ["contraction"]
    assert assess_verdict({"unknown_metric": 1e9}) == ("pass", [])


def test_every_tolerance_has_suggestions():
    assert set(ACCEPTANCE_TOLERANCES) == set(ENHANCEMENT_SUGGESTIONS_MAP)


def test_cheap_checks_pass():
    scores, _ = check_vandermonde(configurations=20)
    assert scores["vandermonde_identities"] < ACCEPTANCE_TOLERANCES["vandermonde_identities"]
    scores, _ = check_boundary_identity()
    assert scores["boundary_identity"] < ACCEPTANCE_TOLERANCES["boundary_identity"]


def test_suite_writes_verdict_and_summary(tmp_path):
    (tmp_path / "analytic.json").write_text(json.dumps({"d": 0.25}))
    output = run_acceptance_suite(out_dir=str(tmp_path), checks=[check_vandermonde])
    assert output["verdict"] == "Pass"
    assert check_verdict(str(tmp_path)) == "Pass"
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["verdict"] == "Pass"
    assert summary["artifacts"] == {"analytic": {"d": 0.25}}
    assert summary["criteria"][0]["criterion"] == "vandermonde_identities"
    assert summary["criteria"][0]["status"] == "Pass"


def test_failing_check_is_reported(tmp_path):
    def check_contraction():
        raise RuntimeError("no contraction")

    output = run_acceptance_suite(out_dir=str(tmp_path), checks=[check_contraction])
    assert output["verdict"] == "Fail"
    assert output["weak_areas"] == ["contraction"]
    assert output["suggestions"]["contraction"]
    assert "RuntimeError" in output["details"]["contraction"]["error"]
    summary = generate_report(str(tmp_path / "verdict.json"), str(tmp_path / "summary.json"))
    assert summary["criteria"][0]["status"] == "Fail"


def test_missing_verdict(tmp_path):
    assert check_verdict(str(tmp_path)) == "Fail"


@pytest.mark.slow
def test_full_acceptance_suite(tmp_path):
    output = run_acceptance_suite(out_dir=str(tmp_path))
    assert output["verdict"] == "Pass", output["weak_areas"]
