import numpy as np
import pytest

from levinsonPredictor import levinson, normal_equation_residual, prediction_error_and_corr, toeplitz_solve_direct
from processModel import CovarianceSource, CovarianceTable, ProcessSpec, fgn_covariance, process_covariance
from utils.errors import BreakdownError, DomainError, InsufficientLagError


def white_noise(n_max):
    gamma = np.zeros(n_max + 1)
    gamma[0] = 1.0
    return CovarianceTable(gamma=gamma, n_max=n_max, source=CovarianceSource.FGN_EXACT, d=0.25)


def test_white_noise_has_no_memory():
    trace = levinson(white_noise(16), 16)
    np.testing.assert_array_equal(trace.alphas, 0.0)
    np.testing.assert_array_equal(trace.sigma2, 1.0)
    np.testing.assert_array_equal(toeplitz_solve_direct(white_noise(16), 16), 0.0)
    assert prediction_error_and_corr(white_noise(8), np.zeros(7), 8) == (1.0, 0.0)


def test_first_partial_correlation():
    trace = levinson(fgn_covariance(0.25, 4), 4)
    assert trace.alpha(1) == pytest.approx(np.sqrt(2.0) - 1.0, rel=1e-14)
    assert trace.sigma2_at(1) == pytest.approx(1.0)


def test_second_order_error():
    cov = fgn_covariance(0.25, 4)
    trace = levinson(cov, 4)
    g = cov.gamma
    assert trace.sigma2_at(2) == pytest.approx(g[0] - g[1] ** 2 / g[0], rel=1e-14)
    np.testing.assert_allclose(toeplitz_solve_direct(cov, 2), [g[1] / g[0]])


def test_partial_correlation_law_at_4096():
    n = 4096
    trace = levinson(fgn_covariance(0.25, n), n)
    assert abs(n * trace.alpha(n) - 0.25) < 0.02


def test_negative_d_partial_correlation_law():
    n = 1000
    trace = levinson(fgn_covariance(-0.25, n), n)
    assert abs(n * trace.alpha(n) + 0.25) < 0.01


def test_durbin_matches_dense_solve():
    cov = fgn_covariance(-0.25, 64)
    trace = levinson(cov, 64)
    direct = toeplitz_solve_direct(cov, 64)
    np.testing.assert_allclose(trace.weights_final, direct, rtol=0, atol=1e-10 * np.max(np.abs(direct)))
    assert normal_equation_residual(cov, trace.weights_final) < 1e-12


def test_error_and_correlation_from_weights():
    n = 512
    cov = fgn_covariance(0.25, n)
    trace = levinson(cov, n)
    sigma2, alpha = prediction_error_and_corr(cov, trace.weights_final, n)
    assert alpha == pytest.approx(trace.alpha(n), abs=1e-9)
    assert sigma2 == pytest.approx(trace.sigma2_at(n), rel=1e-12)


def test_extended_precision_agrees_with_double():
    cov = fgn_covariance(0.25, 256)
    double = levinson(cov, 256)
    extended = levinson(cov, 256, precision="dd")
    assert extended.precision == "dd"
    np.testing.assert_allclose(extended.alphas, double.alphas, rtol=1e-10)


def test_sigma2_decreases():
    trace = levinson(fgn_covariance(0.25, 128), 128)
    assert np.all(np.diff(trace.sigma2) <= 0.0)
    assert np.all(trace.sigma2 > 0.0)


def test_breakdown_on_singular_covariance():
    gamma = np.array([1.0, 1.0, 1.0])
    cov = CovarianceTable(gamma=gamma, n_max=2, source=CovarianceSource.FGN_EXACT, d=0.25)
    with pytest.raises(BreakdownError):
        levinson(cov, 2)


def test_argument_checks():
    cov = fgn_covariance(0.25, 8)
    with pytest.raises(InsufficientLagError):
        levinson(cov, 9)
    with pytest.raises(DomainError):
        levinson(cov, 4, precision="quad")
    with pytest.raises(DomainError):
        toeplitz_solve_direct(fgn_covariance(0.25, 4096), 4000)
    with pytest.raises(DomainError):
        prediction_error_and_corr(cov, np.zeros(3), 8)


def test_trace_table(tmp_path):
    trace = levinson(fgn_covariance(0.25, 16), 16)
    table = trace.table(sigma_sq=0.9)
    assert set(table) == {"n", "alpha", "sigma2", "n_alpha", "n_delta_over_sigma2"}
    path = trace.to_csv(str(tmp_path / "trace.csv"))
    assert (tmp_path / "trace.csv").exists()
    assert path.endswith("trace.csv")


@pytest.mark.parametrize("spec", [
    ProcessSpec(d=0.25),
    ProcessSpec(d=-0.25),
    ProcessSpec(d=0.25, theta=[1.0, 0.5], phi=[1.0, -0.4]),
    ProcessSpec(d=-0.25, theta=[1.0, -2.0]),
])
def test_sigma2_is_product_of_partial_correlations(spec):
    n = 256
    cov = process_covariance(spec, n)
    trace = levinson(cov, n)
    shrink = np.concatenate([[1.0], np.cumprod(1.0 - trace.alphas[:-1] ** 2)])
    np.testing.assert_allclose(trace.sigma2, cov.gamma[0] * shrink, rtol=1e-12)
    assert trace.sigma2_at(n) == pytest.approx(cov.gamma[0] * np.prod(1.0 - trace.alphas[:-1] ** 2), rel=1e-12)


def test_extended_precision_warns_without_longdouble(monkeypatch, caplog):
    import levinsonPredictor

    monkeypatch.setitem(levinsonPredictor.PRECISIONS, "dd", np.float64)
    cov = fgn_covariance(0.25, 16)
    with caplog.at_level("WARNING", logger="LevinsonPredictor"):
        trace = levinson(cov, 16, precision="dd")
    assert "no extra precision" in caplog.text
    assert trace.precision == "dd"
    np.testing.assert_allclose(trace.alphas, levinson(cov, 16).alphas, rtol=0.0, atol=0.0)
