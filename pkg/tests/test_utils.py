import json

import numpy as np
import pytest
from scipy.special import zeta

from utils.exporters import write_json, write_table
from utils.quadrature import extrapolate_to_zero, gauss_legendre_panels, log_graded_rule, series_with_tail


def test_gauss_legendre_panels():
    x, w = gauss_legendre_panels(0.0, 2.0, 4, 5)
    assert np.sum(w) == pytest.approx(2.0)
    assert np.sum(w * x ** 7) == pytest.approx(2.0 ** 8 / 8, rel=1e-13)


def test_log_graded_rule_handles_endpoint_singularity():
    t, w = log_graded_rule(1e-24, 1.0, 64, 8)
    assert np.sum(w * t ** -0.5) == pytest.approx(2.0 * (1.0 - 1e-12), rel=1e-12)


def test_extrapolate_to_zero_is_exact_on_polynomials():
    h = np.array([0.1, 0.2, 0.4])
    assert extrapolate_to_zero(h, 3.0 + 2.0 * h - h ** 2) == pytest.approx(3.0, rel=1e-12)
    assert extrapolate_to_zero(h, (1.0 + 1j) * (1.0 + h)) == pytest.approx(1.0 + 1j, rel=1e-12)


def test_series_tail_on_alternating_zeta():
    coeffs = 1.0 / np.arange(1, 2049) ** 1.5
    value, err = series_with_tail(coeffs, -1.0)
    expected = (1.0 - 2.0 ** -0.5) * zeta(1.5)
    assert value[0].real == pytest.approx(expected, rel=1e-10)
    assert err[0] < 1e-10


def test_series_tail_needs_coefficients():
    with pytest.raises(ValueError):
        series_with_tail([1.0, 0.5], 0.5)


def test_write_json_handles_numpy_and_complex(tmp_path):
    path = write_json({"a": np.arange(3), "z": 1 + 2j, "flag": np.bool_(True)}, str(tmp_path / "out" / "r.json"))
    data = json.loads(open(path, encoding="utf-8").read())
    assert data == {"a": [0, 1, 2], "z": {"re": 1.0, "im": 2.0}, "flag": True}


def test_write_table_json_records(tmp_path):
    path = write_table({"n": [1, 2], "x": [0.5, 0.25]}, str(tmp_path / "t.json"), fmt="json")
    assert json.loads(open(path, encoding="utf-8").read()) == [{"n": 1, "x": 0.5}, {"n": 2, "x": 0.25}]
