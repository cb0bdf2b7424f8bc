import numpy as np
import pytest

from integralEquations import (ContractionOperator, SolutionKind, closed_form_constants, constants_report,
                               contraction_bound, contraction_norm, estimate_n0, kernel_scale, lambda_mu_constants,
                               q1_closed_form, q1_tail_limit, sd_derivative_expansion, sd_evaluators, solve_q1_p1,
                               solve_qn, solve_uw, solve_uw_all)
from processModel import ProcessSpec
from utils.errors import BranchCutError, DomainError


@pytest.fixture(scope="module")
def q1p1_pos():
    return solve_q1_p1(0.25)


def test_closed_form_constants():
    lam, mu = closed_form_constants(0.25)
    assert lam == pytest.approx(1.38840, abs=1e-5)
    assert mu == pytest.approx(0.83304, abs=1e-5)


def test_constants_from_integral_equations(q1p1_pos):
    q1, p1 = q1p1_pos
    lam, mu = lambda_mu_constants(0.25, q1, p1)
    assert lam == pytest.approx(closed_form_constants(0.25)[0], rel=1e-4)
    assert mu == pytest.approx(closed_form_constants(0.25)[1], rel=1e-4)


@pytest.mark.parametrize("d", [-0.4, -0.1, 0.1, 0.4])
def test_constants_across_d(d):
    lam, mu = lambda_mu_constants(d)
    lam_cf, mu_cf = closed_form_constants(d)
    assert lam == pytest.approx(lam_cf, rel=1e-4)
    assert mu == pytest.approx(mu_cf, rel=1e-4)


def test_small_d_limit():
    lam, _ = lambda_mu_constants(0.01)
    assert lam == pytest.approx(1.01, abs=1e-3)
    q1, _ = solve_q1_p1(0.01)
    assert abs(q1.evaluate(1.0)[0] - 1.0) < 0.02


def test_tail_limit_recovers_lambda(q1p1_pos):
    q1, _ = q1p1_pos
    tail = q1_tail_limit(q1)
    assert tail / kernel_scale(0.25) == pytest.approx(closed_form_constants(0.25)[0], rel=1e-3)


def test_q1_matches_closed_form(q1p1_pos):
    q1, _ = q1p1_pos
    t = np.array([0.01, 0.1, 0.5, 1.0, 3.0])
    np.testing.assert_allclose(q1.evaluate(t), q1_closed_form(t, 0.25), rtol=1e-4)


@pytest.mark.parametrize("d", [0.1, 0.4, -0.25])
def test_closed_form_rebuilds_q1_and_p1(d):
    q1, p1 = solve_q1_p1(d)
    solution = q1 if d > 0 else p1
    t = np.array([0.05, 0.5, 2.0])
    np.testing.assert_allclose(solution.evaluate(t), q1_closed_form(t, d), rtol=1e-4)


def test_p1_with_negative_d_is_q1_with_positive_d(q1p1_pos):
    q1, _ = q1p1_pos
    _, p1 = solve_q1_p1(-0.25)
    t = np.array([0.01, 1.0, 10.0])
    np.testing.assert_allclose(p1.evaluate(t), q1.evaluate(t), rtol=1e-9)


def test_observed_contraction(q1p1_pos):
    q1, p1 = q1p1_pos
    assert 0.0 < q1.contraction <= contraction_bound(0.25)
    assert 0.0 < p1.contraction <= contraction_bound(0.25)
    assert q1.residual < 1e-10


@pytest.mark.parametrize("n", [16, 64, pytest.param(256, marks=pytest.mark.slow)])
def test_qn_scaling(q1p1_pos, n):
    q1, p1 = q1p1_pos
    t = np.array([0.5, 2.0, 8.0])
    np.testing.assert_allclose(solve_qn(0.25, n).evaluate(t / n), q1.evaluate(t), rtol=1e-10)
    pn = solve_qn(0.25, n, SolutionKind.P1)
    assert pn.sign == -1.0
    np.testing.assert_allclose(pn.evaluate(t / n), p1.evaluate(t), rtol=1e-10)


def test_neumann_matches_dense(spec_pos, ctx_pos):
    u, w = solve_uw(0, 64, spec_pos, ctx_pos)
    u_dense, w_dense = solve_uw(0, 64, spec_pos, ctx_pos, method="dense")
    np.testing.assert_allclose(u.values, u_dense.values, rtol=0, atol=1e-9)
    np.testing.assert_allclose(w.values, w_dense.values, rtol=0, atol=1e-9)
    assert u.iterations > 0 and u_dense.iterations == 0


def test_solutions_approach_exponentials(spec_neg, ctx_neg):
    x = np.array([0.5, 1.0, 2.0])
    gaps = []
    for n in (64, 256):
        (u, _), = solve_uw_all(n, spec_neg, ctx_neg)
        gaps.append(np.max(np.abs(u.evaluate(x) - 1.0)))
    assert gaps[1] < gaps[0]
    assert gaps[1] * 256 == pytest.approx(gaps[0] * 64, rel=0.3)


def test_j_range(spec_pos, ctx_pos):
    spec = ProcessSpec(d=0.25, theta=[1.0, -0.5])
    assert len(solve_uw_all(64, spec, ctx_pos)) == 3
    with pytest.raises(DomainError):
        solve_uw(2, 64, spec_pos, ctx_pos)


def test_sd_first_order_at_minus_one(spec_pos, ctx_pos):
    target = -0.25 * 1.25 / 2.0
    values = {}
    for n in (128, 512):
        S, D = sd_evaluators(-1.0, n, spec_pos, ctx_pos, solve_uw_all(n, spec_pos, ctx_pos))
        values[n] = n * (S[0].real - 1.0)
        assert abs(S[0].imag) < 1e-12
    assert values[512] == pytest.approx(target, abs=1e-2)
    assert abs(values[512] - target) < abs(values[128] - target) + 1e-3


def test_sd_derivative_expansion(spec_pos, ctx_pos):
    n = 512
    solutions = solve_uw_all(n, spec_pos, ctx_pos)
    step = 1e-4
    plus, _ = sd_evaluators(-1.0 + step, n, spec_pos, ctx_pos, solutions)
    minus, _ = sd_evaluators(-1.0 - step, n, spec_pos, ctx_pos, solutions)
    derivative = (plus[0] - minus[0]) / (2 * step)
    expected = sd_derivative_expansion(-1.0, 0, 1, n, 0.25, "S")
    assert n * derivative.real == pytest.approx(n * expected.real, abs=1e-2)


def test_sd_expansion_leading_term():
    assert sd_derivative_expansion(2.0, 2, 1, 10 ** 12, 0.25) == pytest.approx(4.0, abs=1e-9)
    with pytest.raises(DomainError):
        sd_derivative_expansion(2.0, 0, 0, 10, 0.25, kind="X")


def test_sd_refuses_cut(spec_pos, ctx_pos):
    solutions = solve_uw_all(64, spec_pos, ctx_pos)
    with pytest.raises(BranchCutError):
        sd_evaluators(0.5, 64, spec_pos, ctx_pos, solutions)
    with pytest.raises(DomainError):
        sd_evaluators(-1.0, 128, spec_pos, ctx_pos, solutions)


def test_operator_arguments(spec_pos, ctx_pos):
    with pytest.raises(DomainError):
        ContractionOperator(0.6)
    with pytest.raises(DomainError):
        ContractionOperator(0.25, 64)
    with pytest.raises(DomainError):
        ContractionOperator(0.25, 0, spec_pos, ctx_pos)


def test_operator_norm_below_bound(spec_pos, ctx_pos):
    op = ContractionOperator(0.25, 256, spec_pos, ctx_pos)
    assert contraction_norm(op) < contraction_bound(0.25)
    assert op.sup_weighted_kernel() < 1.0 + (1 - np.sin(np.pi / 4)) / (2 * np.sin(np.pi / 4))


def test_constants_report(tmp_path):
    report = constants_report(-0.25, str(tmp_path / "inteq.json"))
    assert (tmp_path / "inteq.json").exists()
    assert report["rel_err"] < 1e-4
    assert report["lambda0_from_tail"] == pytest.approx(report["lambda0_closed"], rel=1e-3)


def test_solution_csv(tmp_path, q1p1_pos):
    q1, _ = q1p1_pos
    q1.to_csv(str(tmp_path / "q1.csv"))
    assert (tmp_path / "q1.csv").read_text().startswith("t,value")


@pytest.mark.slow
@pytest.mark.parametrize("d", [-0.25, 0.25])
def test_estimate_n0(d, contexts):
    spec = ProcessSpec(d=d)
    n0 = estimate_n0(spec, contexts[d])
    op = ContractionOperator(d, 4 * n0, spec, contexts[d])
    assert contraction_norm(op) <= contraction_bound(d)
