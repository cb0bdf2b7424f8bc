import numpy as np
import pytest

from analyticContext import with_spec
from asymptoticSystems import (IMAG_TOL, SystemKind, _solve_system, ab_report, asymptotic_decomposition,
                               build_ab_systems, origin_value, predicted_asymptotics, recombine, reflect_zeros,
                               solve_ab_systems, vandermonde_dense, vandermonde_identities)
from levinsonPredictor import levinson
from processModel import ProcessSpec, process_covariance
from spectralDensity import szego_constants
from utils.errors import (BranchCutError, CoincidentNodeError, DomainError, IllConditionedError, ToleranceError,
                          UnitCircleZeroError)


def test_reflect_zeros():
    np.testing.assert_allclose(reflect_zeros(ProcessSpec(d=-0.25, theta=[1.0, -0.5])), [0.5])
    np.testing.assert_allclose(reflect_zeros(ProcessSpec(d=-0.25, theta=[1.0, -2.0])), [0.5])
    np.testing.assert_allclose(reflect_zeros(ProcessSpec(d=0.25), s0=-0.3), [-0.3])
    assert reflect_zeros(ProcessSpec(d=-0.25)).size == 0


def test_reflect_zeros_refusals():
    with pytest.raises(DomainError):
        reflect_zeros(ProcessSpec(d=0.25))
    with pytest.raises(DomainError):
        reflect_zeros(ProcessSpec(d=-0.25), s0=-0.3)
    with pytest.raises(UnitCircleZeroError):
        reflect_zeros(ProcessSpec(d=-0.25, theta=[1.0, 1.0]))


def test_origin_value():
    assert origin_value(ProcessSpec(d=-0.25), 0.8, None) == pytest.approx(0.4)
    assert origin_value(ProcessSpec(d=0.25), 0.8, -0.5) == pytest.approx(0.2)
    assert origin_value(ProcessSpec(d=-0.25, theta=[1.0, -0.5]), 0.8, None) == pytest.approx(-0.2)


def test_vandermonde_single_node():
    eVe, oneVe, eVu = vandermonde_identities([0.5])
    assert eVe == pytest.approx(-2.0)
    assert oneVe == pytest.approx(-1.0)
    assert eVu == pytest.approx(-2.0)
    np.testing.assert_allclose(vandermonde_dense([0.5]), [-2.0, -1.0, -2.0], atol=1e-14)


def test_vandermonde_two_nodes():
    zeta = [0.5, -0.25]
    closed = np.array(vandermonde_identities(zeta))
    np.testing.assert_allclose(closed, vandermonde_dense(zeta), rtol=1e-12)


def test_vandermonde_complex_nodes():
    zeta = 0.7 * np.exp(1j * np.array([0.4, -0.4, 2.0]))
    np.testing.assert_allclose(np.array(vandermonde_identities(zeta)), vandermonde_dense(zeta), rtol=1e-11)


def test_vandermonde_refusals():
    with pytest.raises(CoincidentNodeError):
        vandermonde_identities([0.5, 0.5])
    with pytest.raises(CoincidentNodeError):
        vandermonde_identities([0.0])
    with pytest.raises(DomainError):
        vandermonde_identities([1.0])


def test_predicted_asymptotics():
    spec = ProcessSpec(d=0.25)
    constants = szego_constants(spec)
    sigma2, alpha, delta = predicted_asymptotics(spec, 100, constants)
    assert alpha == pytest.approx(0.0025)
    assert delta == pytest.approx(constants.sigma0_sq * 0.0625 / 100)

    inside = ProcessSpec(d=0.25, theta=[1.0, -2.0])
    _, _, delta_inside = predicted_asymptotics(inside, 100, szego_constants(inside))
    assert delta_inside == pytest.approx(4.0 * delta, rel=1e-12)

    with pytest.raises(DomainError):
        predicted_asymptotics(spec, 0, constants)


def test_recombine():
    sigma2, alpha = recombine(np.array([0.6]), np.array([0.4]))
    assert sigma2 == pytest.approx(1.0)
    assert alpha == pytest.approx(0.2)
    with pytest.raises(ToleranceError):
        recombine(np.array([0.6]), np.array([-0.7]))


def test_ill_conditioned_system():
    with pytest.raises(IllConditionedError) as info:
        _solve_system(np.ones((2, 2)), np.ones(2), SystemKind.A, 8)
    assert info.value.condition > 1e8


@pytest.mark.parametrize("d", [-0.25, 0.25])
def test_bridge_to_levinson(d, contexts):
    n = 256
    spec = ProcessSpec(d=d)
    trace = levinson(process_covariance(spec, n), n)
    a, b = solve_ab_systems(spec, n, contexts[d])
    sigma2, alpha = recombine(a, b)
    assert sigma2 == pytest.approx(trace.sigma2_at(n), rel=5e-3)
    assert alpha == pytest.approx(trace.alpha(n), rel=5e-2)


def test_system_layout(spec_pos, ctx_pos):
    a_sys, b_sys = build_ab_systems(spec_pos, 256, ctx_pos)
    assert a_sys.kind == SystemKind.A and b_sys.kind == SystemKind.B
    assert a_sys.matrix.shape == (2, 2)
    np.testing.assert_allclose(a_sys.zeta, [ctx_pos.s0])
    assert a_sys.rho == pytest.approx(abs(ctx_pos.s0))
    assert a_sys.condition < 1e8
    report = asymptotic_decomposition(a_sys, 0.25, ctx_pos.sigma0_sq)
    assert report["eVe"] == pytest.approx(-1.0 / ctx_pos.s0)
    assert report["last_first_order"] == pytest.approx(a_sys.last, rel=1e-2)


def test_ab_report(tmp_path, spec_neg, ctx_neg):
    trace = levinson(process_covariance(spec_neg, 256), 256)
    report = ab_report(spec_neg, 256, ctx_neg, trace, str(tmp_path / "asympt.json"))
    assert (tmp_path / "asympt.json").exists()
    assert report["alpha_predicted"] == pytest.approx(-0.25 / 256)
    assert report["sigma2_recombined"] == pytest.approx(report["sigma2_exact"], rel=5e-3)


def test_context_must_match(spec_neg, ctx_pos):
    with pytest.raises(DomainError):
        build_ab_systems(spec_neg, 64, ctx_pos)


@pytest.mark.slow
@pytest.mark.parametrize("d", [-0.25, 0.25])
def test_second_order_coefficients(d, contexts):
    spec = ProcessSpec(d=d)
    ctx = contexts[d]
    n = 1024
    a_sys, b_sys = build_ab_systems(spec, n, ctx)
    half = ctx.sigma0_sq / 2.0
    assert n * (a_sys.last / half - 1.0) == pytest.approx(d * (1.0 + d), rel=0.1)
    assert n * (1.0 - b_sys.last / half) == pytest.approx(d * (1.0 - d), rel=0.1)


@pytest.mark.parametrize("d", [-0.25, 0.25])
def test_solutions_are_real(d, contexts):
    a_sys, b_sys = build_ab_systems(ProcessSpec(d=d), 256, contexts[d])
    assert a_sys.imag_residue < IMAG_TOL
    assert b_sys.imag_residue < IMAG_TOL


def test_zero_reflected_onto_cut_is_refused(ctx_neg):
    spec = ProcessSpec(d=-0.25, theta=[1.0, -2.0])
    with pytest.raises(BranchCutError):
        build_ab_systems(spec, 64, with_spec(ctx_neg, spec))
    with pytest.raises(BranchCutError):
        solve_ab_systems(spec, 64, with_spec(ctx_neg, spec))


@pytest.mark.parametrize("d, theta, phi", [
    (-0.25, [1.0, 0.5], [1.0]),
    (0.25, [1.0], [1.0, -0.4]),
])
def test_bridge_to_levinson_with_filter(d, theta, phi, contexts):
    n = 256
    spec = ProcessSpec(d=d, theta=theta, phi=phi)
    ctx = with_spec(contexts[d], spec)
    trace = levinson(process_covariance(spec, n), n)
    report = ab_report(spec, n, ctx, trace)
    assert report["sigma2_recombined"] == pytest.approx(trace.sigma2_at(n), rel=5e-3)
    assert report["alpha_recombined"] == pytest.approx(trace.alpha(n), rel=5e-2)
    assert report["imag_residue"] < IMAG_TOL
