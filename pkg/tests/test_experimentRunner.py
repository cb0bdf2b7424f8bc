import json

import numpy as np
import pandas as pd
import pytest
import yaml
from pydantic import ValidationError

from experimentRunner import (Command, ExperimentRunner, OutputFormat, RunConfig, appendix_e_harness, main,
                              parity_errors)
from processModel import ProcessSpec
from utils.errors import DomainError


def test_run_config_defaults():
    config = RunConfig(command="predict")
    assert config.command == Command.PREDICT
    assert config.format == OutputFormat.CSV
    assert config.spec.d == 0.25


def test_run_config_validation():
    with pytest.raises(ValidationError):
        RunConfig(command="predict", n_grid=[512, 256])
    with pytest.raises(ValidationError):
        RunConfig(command="predict", precision="quad")
    with pytest.raises(ValidationError):
        RunConfig(command="predict", n_max=0)
    with pytest.raises(ValidationError):
        RunConfig(command="forecast")
    with pytest.raises(ValidationError):
        RunConfig(command="predict", spec={"d": 0.7})


def test_predict_command(tmp_path):
    code = main(["predict", "--d", "0.25", "--n-max", "64", "--out", str(tmp_path)])
    assert code == 0
    table = pd.read_csv(tmp_path / "predict.csv")
    assert list(table["n"])[-1] == 64
    assert table["alpha"][0] == pytest.approx(np.sqrt(2.0) - 1.0)
    assert "n_delta_over_sigma2" in table.columns


def test_yaml_config_with_flag_override(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump({"spec": {"d": -0.25, "theta": [1.0, 0.5]}, "n_max": 32, "format": "json"}))
    code = main(["predict", "--config", str(path), "--n-max", "16", "--out", str(tmp_path)])
    assert code == 0
    records = json.loads((tmp_path / "predict.json").read_text())
    assert len(records) == 16
    assert records[0]["n"] == 1


def test_usage_errors(tmp_path):
    assert main(["forecast"]) == 2
    assert main(["predict", "--d", "0.7", "--out", str(tmp_path)]) == 2
    assert main(["predict", "--n-grid", "8", "4", "--out", str(tmp_path)]) == 2
    assert main(["appendix_e", "--d", "0.25", "--n-max", "16", "--out", str(tmp_path)]) == 2
    assert main(["predict", "--config", str(tmp_path / "missing.yaml")]) == 2


def test_spectral_command(tmp_path):
    assert main(["spectral", "--d", "-0.25", "--out", str(tmp_path)]) == 0
    constants = json.loads((tmp_path / "spectral_constants.json").read_text())
    assert constants["sigma_sq"] == pytest.approx(constants["sigma0_sq"])
    assert (tmp_path / "density.csv").exists()


def test_inteq_command(tmp_path):
    config = RunConfig(command="inteq", spec=ProcessSpec(d=0.25), out=str(tmp_path))
    assert ExperimentRunner(config).run() == 0
    report = json.loads((tmp_path / "inteq.json").read_text())
    assert report["rel_err"] < 1e-4
    assert (tmp_path / "q1.csv").exists() and (tmp_path / "p1.csv").exists()


def test_appendix_e_command(tmp_path):
    code = main(["appendix_e", "--d", "-0.25", "--n-max", "64", "--out", str(tmp_path)])
    assert code == 0
    table = pd.read_csv(tmp_path / "appendix_e.csv")
    assert set(table["parity"]) == {"even", "odd"}
    meta = json.loads((tmp_path / "appendix_e_meta.json").read_text())
    assert meta["jensen_gap"] < 1e-5


def test_unit_circle_harness_parity_law():
    d = -0.25
    result = appendix_e_harness(d, n_max=1025)
    table = result["table"]
    assert table["n_alpha"][1023] == pytest.approx(d - 1.0, abs=0.05)
    assert table["n_alpha"][1024] == pytest.approx(d + 1.0, abs=0.05)
    errors = parity_errors(result, (256, 1024))
    assert set(errors) == {256, 257, 1024, 1025}
    assert max(errors.values()) < 8.0
    assert result["jensen_gap"] < 1e-5


def test_unit_circle_harness_needs_negative_d():
    with pytest.raises(DomainError):
        appendix_e_harness(0.25, n_max=16)


@pytest.mark.slow
def test_unit_circle_harness_relative_error():
    d = -0.25
    result = appendix_e_harness(d, n_max=2 ** 12)
    assert result["table"]["n_delta_over_sigma2"][-1] == pytest.approx(d * d + 1.0, rel=0.05)


@pytest.mark.parametrize("exc", [ValueError("bad value"), np.linalg.LinAlgError("singular")])
def test_numerical_failures_exit_with_one(tmp_path, monkeypatch, exc):
    def failing(self):
        raise exc

    monkeypatch.setattr(ExperimentRunner, "_run_predict", failing)
    config = RunConfig(command="predict", out=str(tmp_path))
    assert ExperimentRunner(config).run() == 1


def test_workers_must_be_positive():
    with pytest.raises(ValidationError):
        RunConfig(command="asympt", workers=0)


def test_asympt_threads_match_sequential(tmp_path, monkeypatch, spec_neg, ctx_neg):
    import experimentRunner

    monkeypatch.setattr(experimentRunner, "build_context", lambda spec: ctx_neg)
    outputs = {}
    for workers in (1, 3):
        out = tmp_path / f"w{workers}"
        config = RunConfig(command="asympt", spec=spec_neg, n_grid=[256, 512, 1024], workers=workers, out=str(out))
        assert ExperimentRunner(config).run() == 0
        outputs[workers] = json.loads((out / "asympt.json").read_text())
    assert [r["n"] for r in outputs[3]] == [256, 512, 1024]
    assert outputs[1] == outputs[3]
