"""
Reconstructs the generating functions of an exact finite predictor and checks that
they solve the Hilbert boundary value problem: the boundary condition on (0, 1), the
algebraic condition on Z, the scaling condition at the origin, together with
continuity across the unit circle and the Fourier-domain identity.

Verification only: nothing here produces predictions.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from analyticContext import AnalyticContext, q_extension, q_plus
from levinsonPredictor import PredictorTrace, levinson
from processModel import CovarianceTable, ProcessSpec
from spectralDensity import composed_density
from utils.errors import BranchCutError, DomainError, InsufficientLagError, ToleranceError
from utils.exporters import write_json
from utils.loggers import setup_logger
from utils.quadrature import extrapolate_to_zero, series_with_tail

logger = setup_logger("HilbertVerify")

DEFAULT_TAIL = 2048
BOUNDARY_TOL = 1e-4
CONTINUITY_TOL = 1e-5
SCALING_TOL = 0.05
ALGEBRAIC_TOL = 1e-6
IDENTITY_TOL = 1e-9
SAG_TOL = 1e-6


@dataclass(frozen=True)
class GeneratingBundle:
    """
    gL[m] = g^L(-m) and gR[m] = g^R(n+m) for m = 0..J, where
    g^{L,R}(j) = gamma(j) - sum_k g(k) gamma(j-k) outside 1..n-1.
    """
    n: int
    g_weights: np.ndarray
    gL: np.ndarray
    gR: np.ndarray
    spec: ProcessSpec
    sigma2: float
    alpha: float

    @property
    def J(self) -> int:
        return self.gL.size - 1

    def predictor_poly(self, z):
        """G(z) = sum_{k=1}^{n-1} g(k) z^k."""
        return P.polyval(z, np.concatenate([[0.0], self.g_weights]))


def build_bundle(trace: PredictorTrace, cov: CovarianceTable, n: int, spec: ProcessSpec,
                 J: int = DEFAULT_TAIL) -> GeneratingBundle:
    if n < 2:
        raise DomainError("the generating functions need n >= 2")
    if n > trace.n_max:
        raise DomainError(f"trace covers orders up to {trace.n_max}, asked for {n}")
    if cov.n_max < n + J:
        raise InsufficientLagError(f"bundle needs lags up to {n + J}, table has {cov.n_max}")
    g = trace.weights_final if n == trace.n_max else levinson(cov, n).weights_final
    gam = cov.gamma[: n + J + 1]
    gL = gam[: J + 1] - np.correlate(gam[1: J + n], g, mode="valid")
    gR = gam[n: n + J + 1] - np.correlate(gam[1: J + n], g[::-1], mode="valid")
    sigma2, alpha = trace.sigma2_at(n), trace.alpha(n)
    if abs(gL[0] - sigma2) > 1e-9 * sigma2 or abs(gR[0] - alpha * sigma2) > 1e-9 * sigma2:
        raise ToleranceError(f"g^L(0)={gL[0]}, g^R(n)={gR[0]} disagree with the predictor trace")
    logger.info(f"Generating bundle at n={n} with {J} tail terms")
    return GeneratingBundle(n=n, g_weights=np.asarray(g, dtype=float), gL=gL, gR=gR, spec=spec,
                            sigma2=sigma2, alpha=alpha)


def form_residual(bundle: GeneratingBundle, cov: CovarianceTable, js) -> float:
    """max |gamma(j) - sum_k g(k) gamma(j-k) - rhs(j)|, rhs = g^L, 0 or g^R by range of j."""
    worst = 0.0
    k = np.arange(1, bundle.n)
    for j in js:
        value = cov.lag(j) - np.dot(bundle.g_weights, cov.lag(j - k))
        if j <= 0:
            expected = bundle.gL[-j]
        elif j >= bundle.n:
            expected = bundle.gR[j - bundle.n]
        else:
            expected = 0.0
        worst = max(worst, abs(value - expected))
    return worst / cov.gamma[0]


def _series(coeffs, w):
    value, _ = series_with_tail(coeffs, w)
    return value


def _outside(bundle, z):
    w = 1.0 / z
    return _series(bundle.gL, w), _series(bundle.gR, w)


def _filter_ratio(spec, z):
    return spec.theta_at(z) * spec.theta_at(1.0 / z) / (spec.phi_at(z) * spec.phi_at(1.0 / z))


def _g0_inside(bundle, z, q):
    _, g1_out = _outside(bundle, 1.0 / z)
    return 2.0 * np.pi * (1.0 - bundle.predictor_poly(z)) * _filter_ratio(bundle.spec, z) * q - z ** bundle.n * g1_out


def _g1_inside(bundle, z, q):
    g0_out, _ = _outside(bundle, 1.0 / z)
    return z ** bundle.n * (2.0 * np.pi * (1.0 - bundle.predictor_poly(1.0 / z)) * _filter_ratio(bundle.spec, z) * q - g0_out)


def g_functions(bundle: GeneratingBundle, z):
    """
    (G0(z), G1(z)): power series in 1/z for |z| > 1, continuation through
    G0 = 2 pi (1 - G) F - z^n G1(1/z) and G1 = z^n (2 pi (1 - G(1/z)) F - G0(1/z)) inside,
    with F = theta theta~/(phi phi~) Q.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    radius = np.abs(z)
    if np.any(radius == 1.0):
        raise DomainError("use continuity_gap for points on the unit circle")
    g0 = np.empty_like(z)
    g1 = np.empty_like(z)
    out = radius > 1.0
    if np.any(out):
        g0[out], g1[out] = _outside(bundle, z[out])
    if np.any(~out):
        zi = z[~out]
        if np.any((zi.imag == 0.0) & (zi.real >= 0.0)):
            raise BranchCutError("the continuation inside the disk is taken off [0, 1)")
        q = q_extension(zi, bundle.spec.d)
        g0[~out] = _g0_inside(bundle, zi, q)
        g1[~out] = _g1_inside(bundle, zi, q)
    return g0, g1


def phi_functions(bundle: GeneratingBundle, z):
    """Phi_k(z) = z^q phi(1/z) G_k(z)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    g0, g1 = g_functions(bundle, z)
    factor = z ** bundle.spec.q * bundle.spec.phi_at(1.0 / z)
    return factor * g0, factor * g1


def _boundary_q(t, d):
    """(Q^+(t), Q^-(t)) on (0, 1)."""
    lower = q_plus(1.0 / t, d)
    return np.conj(lower), lower


def _phi_boundary(bundle, t, q):
    factor = t ** bundle.spec.q * bundle.spec.phi_at(1.0 / t)
    tc = np.asarray(t, dtype=complex)
    return factor * _g0_inside(bundle, tc, q), factor * _g1_inside(bundle, tc, q)


def _relative(lhs, rhs):
    return np.abs(lhs - rhs) / (np.abs(lhs) + np.abs(rhs) + 1e-300)


def boundary_residuals(bundle: GeneratingBundle, t_points) -> np.ndarray:
    """Relative residuals of both boundary equations at t in (0, 1); shape (2, len(t))."""
    t = np.atleast_1d(np.asarray(t_points, dtype=float))
    spec = bundle.spec
    q_up, q_down = _boundary_q(t, spec.d)
    ratio = q_up / q_down
    phi0_up, phi1_up = _phi_boundary(bundle, t, q_up)
    phi0_down, phi1_down = _phi_boundary(bundle, t, q_down)
    phi0_out, phi1_out = phi_functions(bundle, 1.0 / t)
    scale = t ** (bundle.n + 2 * spec.q) * spec.phi_at(1.0 / t) / spec.phi_at(t) * (ratio - 1.0)
    first = _relative(phi0_up - ratio * phi0_down, scale * phi1_out)
    second = _relative(phi1_up - ratio * phi1_down, scale * phi0_out)
    return np.vstack([first, second])


def algebraic_points(spec: ProcessSpec, ctx: AnalyticContext) -> np.ndarray:
    """Z: MA zeros, their reciprocals and the zeros s0, 1/s0 of Q when d > 0."""
    zeros = spec.ma_zeros
    points = list(zeros) + list(1.0 / zeros)
    if ctx.s0 is not None:
        points += [ctx.s0, 1.0 / ctx.s0]
    return np.asarray(points, dtype=complex)


def algebraic_residuals(bundle: GeneratingBundle, points) -> np.ndarray:
    """|Phi0(z) phi(z) + z^{n+2q} Phi1(1/z) phi(1/z)| over the size of its two terms."""
    z = np.atleast_1d(np.asarray(points, dtype=complex))
    if z.size == 0:
        return np.zeros(0)
    spec = bundle.spec
    phi0, _ = phi_functions(bundle, z)
    _, phi1_ref = phi_functions(bundle, 1.0 / z)
    left = phi0 * spec.phi_at(z)
    right = z ** (bundle.n + 2 * spec.q) * phi1_ref * spec.phi_at(1.0 / z)
    return np.abs(left + right) / (np.abs(left) + np.abs(right) + 1e-300)


def scaling_ratios(bundle: GeneratingBundle, points=(-1e-3, -1e-4)):
    """Phi0/Q and Phi1/Q near the origin together with the limit 2 pi prod(-1/z_j)."""
    z = np.asarray(points, dtype=complex)
    phi0, phi1 = phi_functions(bundle, z)
    q = q_extension(z, bundle.spec.d)
    zeros = bundle.spec.ma_zeros
    target = 2.0 * np.pi * (np.prod(-1.0 / zeros) if zeros.size else 1.0)
    return phi0 / q, phi1 / q, complex(target)


def continuity_gap(bundle: GeneratingBundle, lam_points, eps: float = 1e-3) -> float:
    """
    Largest gap between the unit-circle values of G0, G1 reached from outside (series)
    and inside (continuation), each extrapolated linearly from radii 1 +/- eps, 1 +/- 2 eps.
    """
    worst = 0.0
    for lam in lam_points:
        e = np.exp(1j * lam)
        outer = np.array([(1.0 + eps) * e, (1.0 + 2.0 * eps) * e])
        inner = np.array([(1.0 - eps) * e, (1.0 - 2.0 * eps) * e])
        go0, go1 = g_functions(bundle, outer)
        gi0, gi1 = g_functions(bundle, inner)
        for gout, gin in ((go0, gi0), (go1, gi1)):
            a = 2.0 * gout[0] - gout[1]
            b = 2.0 * gin[0] - gin[1]
            worst = max(worst, float(abs(a - b) / max(abs(a), abs(b), 1e-300)))
    return worst


def sag_limits(bundle: GeneratingBundle, points=(1e3, 2e3, 4e3)):
    """lim G0(z) = sigma^2(n) and lim G1/G0 = alpha(n) as z -> inf, extrapolated in 1/z."""
    z = np.asarray(points, dtype=complex)
    g0, g1 = g_functions(bundle, z)
    h = 1.0 / np.asarray(points, dtype=float)
    sigma2 = extrapolate_to_zero(h, g0.real)
    alpha = extrapolate_to_zero(h, (g1 / g0).real)
    return sigma2, alpha


def fourier_identity_residual(bundle: GeneratingBundle, lam_points) -> np.ndarray:
    """
    |gL^ + gR^ - (1 - G(e^{i lambda})) f(lambda)| / f(lambda), with
    gL^ = (1/2pi) sum_m gL(-m) e^{-im lambda}, gR^ = (1/2pi) e^{in lambda} sum_m gR(n+m) e^{im lambda}.
    """
    lam = np.atleast_1d(np.asarray(lam_points, dtype=float))
    if np.any(np.mod(lam, 2.0 * np.pi) == 0.0):
        raise DomainError("the identity is checked away from lambda = 0")
    e = np.exp(1j * lam)
    hat_l = _series(bundle.gL, 1.0 / e) / (2.0 * np.pi)
    hat_r = e ** bundle.n * _series(bundle.gR, e) / (2.0 * np.pi)
    f = composed_density(bundle.spec, lam)
    return np.abs(hat_l + hat_r - (1.0 - bundle.predictor_poly(e)) * f) / f


def removability_check(bundle: GeneratingBundle, t_points, tau_points) -> float:
    """
    Upper and lower limits of (Phi0 phi + z^{n+2q} Phi1(1/z) phi(1/z))/Q on (0,1) and (1,inf)
    must agree with each other and with the entire function 2 pi (1 - G) theta(z) z^q theta(1/z).
    """
    spec = bundle.spec
    n2q = bundle.n + 2 * spec.q

    def entire(z):
        return 2.0 * np.pi * (1.0 - bundle.predictor_poly(z)) * spec.theta_at(z) * z ** spec.q * spec.theta_at(1.0 / z)

    worst = 0.0
    t = np.atleast_1d(np.asarray(t_points, dtype=float))
    q_up, q_down = _boundary_q(t, spec.d)
    _, phi1_out = phi_functions(bundle, 1.0 / t)
    tail = t ** n2q * phi1_out * spec.phi_at(1.0 / t)
    upper = (_phi_boundary(bundle, t, q_up)[0] * spec.phi_at(t) + tail) / q_up
    lower = (_phi_boundary(bundle, t, q_down)[0] * spec.phi_at(t) + tail) / q_down
    worst = max(worst, float(np.max(_relative(upper, lower))), float(np.max(_relative(upper, entire(t)))))

    tau = np.atleast_1d(np.asarray(tau_points, dtype=float))
    qt_up = q_plus(tau, spec.d)
    qt_down = np.conj(qt_up)
    phi0_out, _ = phi_functions(bundle, tau)
    head = phi0_out * spec.phi_at(tau)
    inv = 1.0 / tau
    factor = tau ** n2q * spec.phi_at(inv)
    # z -> tau from above sends 1/z to 1/tau from below, where Q takes the value Q^+(tau)
    from_above = (head + factor * _phi_boundary(bundle, inv, qt_up)[1]) / qt_up
    from_below = (head + factor * _phi_boundary(bundle, inv, qt_down)[1]) / qt_down
    worst = max(worst, float(np.max(_relative(from_above, from_below))),
                float(np.max(_relative(from_above, entire(tau)))))
    return worst


def growth_envelope(bundle: GeneratingBundle, exponents=range(2, 9)) -> np.ndarray:
    """|Phi0(z) z (log 1/|z|)^{1+2d}| along z = -10^{-j}; bounded ratios support the growth estimate."""
    r = 10.0 ** -np.asarray(list(exponents), dtype=float)
    phi0, _ = phi_functions(bundle, -r + 0j)
    return np.abs(phi0 * r * np.log(1.0 / r) ** (1.0 + 2.0 * bundle.spec.d))


def check_hilbert_conditions(bundle: GeneratingBundle, ctx: AnalyticContext, t_points=(0.3, 0.5, 0.7),
                             lam_points=(1.0, 2.0, 3.0), path: str | None = None) -> dict:
    """Runs every check and returns a report with residuals and pass flags per condition."""
    spec = bundle.spec
    if spec.d != ctx.d:
        raise DomainError("context and spec have different memory parameters")
    boundary = boundary_residuals(bundle, t_points)
    alg = algebraic_residuals(bundle, algebraic_points(spec, ctx))
    ratio0, ratio1, target = scaling_ratios(bundle)
    continuity = continuity_gap(bundle, lam_points)
    identity = fourier_identity_residual(bundle, (0.5, 1.5, 2.5))
    sigma2, alpha = sag_limits(bundle)
    envelope = growth_envelope(bundle)
    removable = removability_check(bundle, t_points, (1.5, 2.0, 3.0))
    scaling_err = abs(ratio0[0] / target - 1.0)
    sag_err = max(abs(sigma2 - bundle.sigma2) / bundle.sigma2, abs(alpha - bundle.alpha))
    report = {
        "n": bundle.n,
        "d": spec.d,
        "boundary": {"residuals": boundary, "pass": bool(np.max(boundary) < BOUNDARY_TOL)},
        "algebraic": {"residuals": alg, "pass": bool(alg.size == 0 or np.max(alg) < ALGEBRAIC_TOL)},
        "scaling": {"ratio": ratio0, "target": target, "rel_err": scaling_err,
                    "second_limit": np.abs(ratio1),
                    "pass": bool(scaling_err < SCALING_TOL and abs(ratio1[-1]) < abs(ratio1[0]))},
        "continuity": {"gap": continuity, "pass": bool(continuity < CONTINUITY_TOL)},
        "fourier_identity": {"residuals": identity, "pass": bool(np.max(identity) < IDENTITY_TOL)},
        "sag_limits": {"sigma2": sigma2, "alpha": alpha, "sigma2_trace": bundle.sigma2, "alpha_trace": bundle.alpha,
                       "err": sag_err, "pass": bool(sag_err < SAG_TOL)},
        "growth_envelope": {"values": envelope, "spread": float(np.max(envelope) / np.min(envelope))},
        "removability": {"gap": removable, "pass": bool(removable < BOUNDARY_TOL)},
    }
    passed = [v["pass"] for v in report.values() if isinstance(v, dict) and "pass" in v]
    report["all_pass"] = all(passed)
    logger.info(f"Hilbert conditions at n={bundle.n}, d={spec.d}: {sum(passed)}/{len(passed)} pass")
    if path:
        write_json(report, path)
    return report
