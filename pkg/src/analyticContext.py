"""
Complex-analytic toolkit for the fGn prediction problem.

mu(z) = sum_k k^{2d+1} z^k is continued to C \\ [1, inf) through its Lindelof-Wirtinger
representation, Q(z) = (z^{-1} - 2 + z)(mu(z) + mu(1/z)) / (4 pi) extends the fGn density
off the unit circle, and eta = arg Q^+ on (0,1) feeds the canonical factor X_0, the outer
function psi, the zero s_0 and the kernel h of the integral equations.

Everything that depends on d only is computed once and kept in an AnalyticContext.
"""

import os
from dataclasses import dataclass, replace

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import gamma as gamma_fn

from processModel import ProcessSpec
from spectralDensity import fgn_constant, fgn_density, fgn_innovation_variance
from utils.errors import BracketError, BranchCutError, DomainError, NonConvergenceError, QuadratureError
from utils.loggers import setup_logger
from utils.quadrature import extrapolate_to_zero, gauss_legendre_panels
from utils.settings import cache_dir

logger = setup_logger("AnalyticContext")

LW_TERMS = 32
SERIES_RADIUS = 0.5
ETA_PANEL_ORDER = 16
ETA_GRID_NODES = 2048
ETA_S_RANGE = (1e-14, 60.0)
OUTER_FFT_SIZE = 2 ** 15
CUT_RESOLUTION = 1e-10
H_FLOOR = 1e-11
S0_SCAN_POINTS = 1000


def _check_d(d):
    if not -0.5 < d < 0.5 or d == 0.0:
        raise DomainError(f"memory parameter d={d} must lie in (-1/2, 1/2) without 0")


# ---------------------------------------------------------------------------
# mu and Q
# ---------------------------------------------------------------------------

def _lw_tail(w, a, K, direction):
    # midpoint Euler-Maclaurin for sum_{k>K} (w + direction*2 pi i k)^{-a}
    c = direction * 2j * np.pi
    base = w + c * (K + 0.5)
    integral = base ** (1.0 - a) / ((a - 1.0) * c)
    d1 = -a * c * base ** (-a - 1.0)
    d3 = -a * (a + 1.0) * (a + 2.0) * c ** 3 * base ** (-a - 3.0)
    return integral + d1 / 24.0 - 7.0 * d3 / 5760.0


def _lw_sum(w, d, k0_arg=None):
    """
    Gamma(2+2d) sum_k (w + 2 pi i k)^{-2-2d}, principal powers.
    k0_arg fixes the argument of the k = 0 term when w sits on the negative real axis.
    """
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    a = 2.0 + 2.0 * d
    k = np.concatenate([np.arange(-LW_TERMS, 0), np.arange(1, LW_TERMS + 1)])
    total = np.sum((w[:, None] + 2j * np.pi * k[None, :]) ** (-a), axis=1)
    total += _lw_tail(w, a, LW_TERMS, 1.0) + _lw_tail(w, a, LW_TERMS, -1.0)
    arg0 = np.angle(w) if k0_arg is None else np.broadcast_to(k0_arg, w.shape)
    total += np.abs(w) ** (-a) * np.exp(-1j * a * arg0)
    return gamma_fn(a) * total


def polylog_mu_series(z, d, terms: int | None = None):
    """Partial sum of sum_{k>=1} k^{2d+1} z^k."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if terms is None:
        radius = float(np.max(np.abs(z))) if z.size else 0.0
        terms = 60 if radius <= 0.0 else int(np.clip(np.log(1e-18) / np.log(radius), 1, 5000)) + 60
    k = np.arange(1, terms + 1, dtype=float)
    return (z[:, None] ** k[None, :]) @ (k ** (2.0 * d + 1.0))


def polylog_mu(z, d):
    """
    mu(z) = Li_{-2d-1}(z) on C \\ [1, inf).
    Power series inside |z| < 1/2, Lindelof-Wirtinger sum elsewhere.
    """
    _check_d(d)
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any((z.imag == 0.0) & (z.real >= 1.0)):
        raise BranchCutError("mu is evaluated on its cut [1, inf)")
    out = np.empty_like(z)
    small = np.abs(z) < SERIES_RADIUS
    if np.any(small):
        out[small] = polylog_mu_series(z[small], d)
    if np.any(~small):
        out[~small] = _lw_sum(-np.log(z[~small]), d)
    return out[0] if scalar else out


def _mu_on_cut(s, d, side):
    """mu(e^s + side*i0) for s > 0: upper side (+1) takes arg(w_0) = -pi."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    return _lw_sum(-s + 0j, d, k0_arg=-side * np.pi)


def _mu_real_inside(s, d):
    """mu(e^{-s}) for s > 0."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    t = np.exp(-s)
    out = np.empty(s.shape, dtype=complex)
    small = t < SERIES_RADIUS
    if np.any(small):
        out[small] = polylog_mu_series(t[small], d)
    if np.any(~small):
        out[~small] = _lw_sum(s[~small] + 0j, d)
    return out.real


def mu_boundary(x, d, side: int = 1):
    """One-sided limits mu(x + side*i0) on the cut x > 1."""
    _check_d(d)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x <= 1.0):
        raise DomainError("boundary values of mu are taken on x > 1")
    return _mu_on_cut(np.log(x), d, side)


def q_extension(z, d):
    """Q(z) = (z^{-1} - 2 + z)(mu(z) + mu(1/z)) / (4 pi) off the positive real axis."""
    _check_d(d)
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any((z.imag == 0.0) & (z.real >= 0.0)):
        raise BranchCutError("Q is sectionally holomorphic off the positive real axis")
    value = (1.0 / z - 2.0 + z) * (polylog_mu(z, d) + polylog_mu(1.0 / z, d)) / (4.0 * np.pi)
    return value[0] if scalar else value


def _q_plus_s(s, d):
    """Q^+(e^s) for s > 0 through the Lindelof-Wirtinger boundary sum."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    prefactor = 4.0 * np.sinh(0.5 * s) ** 2 / (4.0 * np.pi)
    return prefactor * (_mu_on_cut(s, d, 1) + _mu_real_inside(s, d))


def _q_plus_lemma(t, d):
    L = np.log(t)
    g = gamma_fn(1.0 - 2.0 * d)
    a_plus = 4.0 * d * (2.0 * d + 1.0) / g * L ** (-2.0 * d - 2.0) / t

    def integrand(v, part):
        base = (1.0 + (v + 1j * np.pi) / L) ** (-2.0 * d - 1.0)
        value = base / (4.0 * np.cosh(0.5 * v) ** 2)
        return value.real if part == 0 else value.imag

    pieces = []
    for part in (0, 1):
        value, err = quad(integrand, -np.inf, np.inf, args=(part,), epsabs=1e-14, epsrel=1e-12, limit=400)
        if not np.isfinite(value):
            raise QuadratureError(f"B(t) integral failed at t={t}")
        pieces.append(value)
    integral = complex(pieces[0], pieces[1])
    b = -2.0 * d / g * L ** (-2.0 * d - 1.0) / t * integral
    rot = np.exp(1j * np.pi * d)
    bracket = np.pi * a_plus * rot + 2.0 * (1j * rot * b).real
    return (1.0 - t) ** 2 / (8.0 * np.pi * np.sin(np.pi * d)) * bracket


def q_plus(t, d, method: str = "series"):
    """
    Upper boundary value Q^+(t) on t > 1.

    method="lemma" uses the closed residue/integral formula (one quadrature per point),
    method="series" the Lindelof-Wirtinger sum with one-sided arguments.
    """
    _check_d(d)
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t <= 1.0):
        raise DomainError("q_plus is defined on t > 1")
    if method == "series":
        out = _q_plus_s(np.log(t), d)
    elif method == "lemma":
        out = np.array([_q_plus_lemma(float(x), d) for x in t], dtype=complex)
    else:
        raise DomainError(f"unknown method '{method}'")
    return out[0] if scalar else out


def q_plus_extrapolated(t: float, d: float, eps=(1e-3, 1e-4, 1e-5)) -> complex:
    """Q^+(t) as the limit of Q(t + i eps), eps -> 0."""
    values = [complex(q_extension(complex(t, e), d)) for e in eps]
    return extrapolate_to_zero(eps, values)


def eta_s(s, d):
    """eta(e^{-s}) = -arg Q^+(e^s)."""
    return -np.angle(_q_plus_s(s, d))


def eta(t, d, method: str = "series"):
    """
    eta(t) = arg Q^+(t) on (0,1), taken as -arg Q^+(1/t) in (-pi, pi].
    Limits: -d pi at t -> 1, pi 1{d<0} at t -> 0.
    """
    _check_d(d)
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any((t <= 0.0) | (t >= 1.0)):
        raise DomainError("eta is defined on (0, 1)")
    out = -np.angle(q_plus(1.0 / t, d, method))
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# The context
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AnalyticContext:
    """
    eta on a grid tau = e^{-s} of (0,1) with quadrature weights for d tau, the zero s0
    (d > 0 only), psi(0) = 2 pi / sigma_0^2 and the cepstral coefficients of the
    regularized log-density used by psi.
    """
    d: float
    s_nodes: np.ndarray
    tau: np.ndarray
    tau_weights: np.ndarray
    eta_values: np.ndarray
    s0: float | None
    psi0: float
    sigma0_sq: float
    q_of_d: int
    cepstrum: np.ndarray

    @property
    def eta_grid(self):
        return self.tau, self.eta_values

    @property
    def eta_at_zero(self) -> float:
        return np.pi if self.d < 0 else 0.0

    @property
    def eta_at_one(self) -> float:
        return -self.d * np.pi

    def save(self, path: str):
        np.savez(
            path, d=self.d, s_nodes=self.s_nodes, tau_weights=self.tau_weights, eta_values=self.eta_values,
            s0=np.nan if self.s0 is None else self.s0, psi0=self.psi0, sigma0_sq=self.sigma0_sq,
            cepstrum=self.cepstrum,
        )
        return path

    @classmethod
    def load(cls, path: str, q_of_d: int) -> "AnalyticContext":
        data = np.load(path)
        s0 = float(data["s0"])
        s_nodes = data["s_nodes"]
        return cls(
            d=float(data["d"]), s_nodes=s_nodes, tau=np.exp(-s_nodes), tau_weights=data["tau_weights"],
            eta_values=data["eta_values"], s0=None if np.isnan(s0) else s0, psi0=float(data["psi0"]),
            sigma0_sq=float(data["sigma0_sq"]), q_of_d=q_of_d, cepstrum=data["cepstrum"],
        )


def _cache_path(d, grid_nodes, fft_size):
    folder = cache_dir()
    if folder is None:
        return None
    return os.path.join(folder, f"analytic_d{d:+.10f}_g{grid_nodes}_m{fft_size}.npz")


def outer_cepstrum(d: float, fft_size: int = OUTER_FFT_SIZE) -> np.ndarray:
    """
    Fourier coefficients r_k (k = 0..M/2) of r = log f_0 + 2d log|1 - e^{i lambda}|,
    the log-density with its logarithmic singularity at lambda = 0 removed.
    """
    half = fft_size // 2
    lam = 2.0 * np.pi * np.arange(1, half + 1) / fft_size
    r_half = np.log(fgn_density(d, lam)) + 2.0 * d * np.log(2.0 * np.sin(0.5 * lam))
    r = np.empty(fft_size)
    r[0] = np.log(fgn_constant(d))
    r[1:half + 1] = r_half
    r[half + 1:] = r_half[-2::-1]
    return np.fft.rfft(r).real / fft_size


def find_s0(d: float) -> float:
    """
    The zero of r(s) = mu(s) + mu(1/s) in (-1, 0), present for d > 0.
    Located by a sign-change scan on 10^3 points followed by Brent's method.
    """
    _check_d(d)
    if d < 0:
        raise DomainError("Q has no zero in (-1, 0) when d < 0")

    def r(s):
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        return (polylog_mu(s, d) + polylog_mu(1.0 / s, d)).real

    grid = -1.0 + np.arange(1, S0_SCAN_POINTS) / S0_SCAN_POINTS
    values = r(grid)
    changes = np.nonzero(np.sign(values[:-1]) != np.sign(values[1:]))[0]
    if changes.size != 1:
        raise BracketError(f"expected one sign change of r on (-1, 0), found {changes.size}")
    lo, hi = grid[changes[0]], grid[changes[0] + 1]
    s0 = brentq(lambda s: float(r(s)[0]), lo, hi, xtol=1e-16, rtol=1e-15, maxiter=200)
    scale = abs(float(r(-0.5)[0]))
    if abs(float(r(s0)[0])) > 1e-10 * scale:
        raise NonConvergenceError(f"s0={s0} leaves residual {float(r(s0)[0])}")
    return float(s0)


def build_context(spec: ProcessSpec, grid_nodes: int = ETA_GRID_NODES, fft_size: int = OUTER_FFT_SIZE,
                  use_cache: bool = True) -> AnalyticContext:
    d = spec.d
    path = _cache_path(d, grid_nodes, fft_size) if use_cache else None
    if path and os.path.exists(path):
        logger.info(f"Loading analytic context from {path}")
        return AnalyticContext.load(path, spec.q_of_d)

    logger.info(f"Building analytic context for d={d} ({grid_nodes} eta nodes, FFT size {fft_size})")
    sigma, weights = gauss_legendre_panels(np.log(ETA_S_RANGE[0]), np.log(ETA_S_RANGE[1]),
                                           grid_nodes // ETA_PANEL_ORDER, ETA_PANEL_ORDER)
    s_nodes = np.exp(sigma)
    tau = np.exp(-s_nodes)
    tau_weights = weights * s_nodes * tau
    eta_values = eta_s(s_nodes, d)
    sigma0_sq = fgn_innovation_variance(d)
    cepstrum = outer_cepstrum(d, fft_size)
    psi0 = float(np.exp(-cepstrum[0]))
    if abs(psi0 * sigma0_sq / (2.0 * np.pi) - 1.0) > 1e-6:
        logger.warning(f"psi(0) sigma0^2 / 2pi = {psi0 * sigma0_sq / (2.0 * np.pi)} deviates from 1")
    s0 = find_s0(d) if d > 0 else None
    ctx = AnalyticContext(
        d=d, s_nodes=s_nodes, tau=tau, tau_weights=tau_weights, eta_values=eta_values, s0=s0,
        psi0=psi0, sigma0_sq=sigma0_sq, q_of_d=spec.q_of_d, cepstrum=cepstrum,
    )
    if path:
        ctx.save(path)
        logger.info(f"Analytic context cached at {path}")
    return ctx


def eta_zero_constant(ctx: AnalyticContext, s_min: float = 20.0) -> float:
    """
    Fitted c in eta(t) = pi 1{d<0} + c/log(1/t) + ... as t -> 0. Diagnostic only.
    """
    tail = ctx.s_nodes > s_min
    if not np.any(tail):
        raise DomainError(f"eta grid does not reach s > {s_min}")
    return float(np.median((ctx.eta_values[tail] - ctx.eta_at_zero) * ctx.s_nodes[tail]))


def with_spec(ctx: AnalyticContext, spec: ProcessSpec) -> AnalyticContext:
    """Reuse a context built for the same d with another MA/AR structure."""
    if spec.d != ctx.d:
        raise DomainError("context and spec have different memory parameters")
    return replace(ctx, q_of_d=spec.q_of_d)


# ---------------------------------------------------------------------------
# Canonical factor and outer function
# ---------------------------------------------------------------------------

def _eta_reference(x, ctx):
    # eta at the projection of z onto [0, 1]
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    out = np.where(x >= 1.0, ctx.eta_at_one, ctx.eta_at_zero).astype(float)
    inner = (x > 0.0) & (x < 1.0)
    if np.any(inner):
        out[inner] = eta_s(-np.log(x[inner]), ctx.d)
    return out


def x0(z, ctx: AnalyticContext):
    """
    X_0(z) = exp((1/pi) int_0^1 eta(tau) / (tau - z) d tau) for z off [0, 1].
    The value of eta at the projection of z is subtracted and integrated in closed form.
    """
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any((z.imag == 0.0) & (z.real >= 0.0) & (z.real <= 1.0)):
        raise BranchCutError("X_0 is evaluated on its cut [0, 1]")
    dist = np.where((z.real >= 0.0) & (z.real <= 1.0), np.abs(z.imag),
                    np.minimum(np.abs(z), np.abs(z - 1.0)))
    if np.any(dist < CUT_RESOLUTION):
        logger.warning(f"X_0 evaluated {float(np.min(dist)):.3g} away from the cut; accuracy degrades")
    ref = _eta_reference(z.real, ctx)
    diff = ctx.eta_values[None, :] - ref[:, None]
    integral = (diff / (ctx.tau[None, :] - z[:, None])) @ ctx.tau_weights
    integral += ref * np.log1p(-1.0 / z)
    out = np.exp(integral / np.pi)
    return out[0] if scalar else out


def _x0_boundary_s(s, ctx, side):
    s = np.atleast_1d(np.asarray(s, dtype=float))
    t = np.exp(-s)
    eta_t = eta_s(s, ctx.d)
    gap = t[:, None] * np.expm1(s[:, None] - ctx.s_nodes[None, :])
    diff = ctx.eta_values[None, :] - eta_t[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(gap == 0.0, 0.0, diff / gap)
    principal = ratio @ ctx.tau_weights + eta_t * (np.log1p(-t) - np.log(t))
    return np.exp(principal / np.pi + side * 1j * eta_t), principal, eta_t


def x0_boundary(t, ctx: AnalyticContext, side: int = 1):
    """Plemelj limits X_0^{+/-}(t) = exp(PV/pi +/- i eta(t)) on (0, 1)."""
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any((t <= 0.0) | (t >= 1.0)):
        raise DomainError("boundary values of X_0 are taken on (0, 1)")
    out = _x0_boundary_s(-np.log(t), ctx, side)[0]
    return out[0] if scalar else out


def x_factor(z, ctx: AnalyticContext):
    """X(z) = X_0(z)/z for d > 0 and X_0(z) for d < 0."""
    z_arr = np.asarray(z, dtype=complex)
    if np.any(z_arr == 0):
        raise DomainError("X is not defined at z = 0")
    value = x0(z, ctx)
    return value / z_arr if ctx.d > 0 else value


def psi_outer(z, ctx: AnalyticContext):
    """
    psi(z) = exp(-(1/2 pi i) contour integral of log Q(zeta)/(zeta - z)) off the unit circle,
    evaluated from the cepstral coefficients of the regularized log-density.
    """
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    radius = np.abs(z)
    if np.any(radius == 1.0):
        raise DomainError("psi is sectionally holomorphic off the unit circle")
    if np.any(np.abs(radius - 1.0) < 1e-3):
        logger.warning("psi evaluated within 1e-3 of the unit circle; cepstral series converges slowly")
    coeffs = ctx.cepstrum.copy()
    coeffs[0] = 0.0
    out = np.empty_like(z)
    inside = radius < 1.0
    if np.any(inside):
        zi = z[inside]
        out[inside] = ctx.psi0 * (1.0 - zi) ** ctx.d * np.exp(-P.polyval(zi, coeffs))
    if np.any(~inside):
        zo = 1.0 / z[~inside]
        out[~inside] = (1.0 - zo) ** (-ctx.d) * np.exp(P.polyval(zo, coeffs))
    return out[0] if scalar else out


def factorization_residual(z, ctx: AnalyticContext):
    """
    Relative gap between X_0(z) and psi(z) Q(z) z/(z - s0) (d > 0) or psi(z) Q(z) (d < 0)
    at interior points of the unit disk.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    rhs = psi_outer(z, ctx) * q_extension(z, ctx.d)
    if ctx.d > 0:
        rhs = rhs * z / (z - ctx.s0)
    lhs = x0(z, ctx)
    return np.abs(lhs - rhs) / np.abs(lhs)


def x0q_limit(ctx: AnalyticContext, points=(-1e-3, -1e-4)):
    """
    Extrapolated lim_{z->0} z^{-1} X_0(z)/Q(z) (d > 0) or X_0(z)/Q(z) (d < 0),
    returned with its expected value -(2 pi/sigma_0^2)/s0 or 2 pi/sigma_0^2.
    """
    z = np.asarray(points, dtype=complex)
    ratio = x0(z, ctx) / q_extension(z, ctx.d)
    if ctx.d > 0:
        ratio = ratio / z
        expected = -(2.0 * np.pi / ctx.sigma0_sq) / ctx.s0
    else:
        expected = 2.0 * np.pi / ctx.sigma0_sq
    estimate = extrapolate_to_zero(np.abs(np.asarray(points)), ratio)
    return estimate, expected


def q_growth_ratios(d: float, exponents=range(2, 8)):
    """
    |Q| against its envelopes near the cut endpoints: |Q^+(1+eps)| eps^{2d} and
    |Q^+(eps)| eps (log 1/eps)^{1+2d}, for eps = 10^{-j}.
    """
    eps = 10.0 ** -np.asarray(list(exponents), dtype=float)
    near_one = np.abs(q_plus(1.0 + eps, d)) * eps ** (2.0 * d)
    near_zero = np.abs(q_plus(1.0 / eps, d)) * eps * np.log(1.0 / eps) ** (1.0 + 2.0 * d)
    return near_one, near_zero


# ---------------------------------------------------------------------------
# Kernel h
# ---------------------------------------------------------------------------

def _phi_ratio(spec, t):
    return spec.phi_at(1.0 / t) / spec.phi_at(t)


def h_kernel_complex(s, spec: ProcessSpec, ctx: AnalyticContext):
    """
    -(t^{2q}/(2i sin pi d)) (phi(1/t)/phi(t)) (X(1/t)/X^+(t)) (X^+(t)/X^-(t) - 1) at t = e^{-s},
    the complex expression whose real part is the kernel h.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    t = np.exp(-s)
    x_plus, _, eta_t = _x0_boundary_s(s, ctx, 1)
    x_out = x0(1.0 / t + 0j, ctx)
    if ctx.d > 0:
        x_plus = x_plus / t
        x_out = x_out * t
    jump = np.exp(2j * eta_t) - 1.0
    prefactor = -(t ** (2 * spec.q)) / (2j * np.sin(np.pi * ctx.d)) * _phi_ratio(spec, t)
    return prefactor * x_out / x_plus * jump


def h_kernel(s, spec: ProcessSpec, ctx: AnalyticContext, with_residue: bool = False):
    """
    h(s) = h~(e^{-s}) in real form:
    -(t^{2q + 2 1{d>0}}/sin pi d)(phi(1/t)/phi(t)) sin eta(t) exp(E(t)),
    E(t) = (1/pi)[int (eta(tau) - eta(t))(1/(tau - 1/t) - 1/(tau - t)) d tau + eta(t) log t].
    Set to 1 below s = 1e-11 where h = 1 + o(s).
    """
    if spec.d != ctx.d:
        raise DomainError("context and spec have different memory parameters")
    scalar = np.ndim(s) == 0
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s <= 0.0):
        raise DomainError("h is defined for s > 0")
    out = np.ones_like(s)
    residue = np.zeros_like(s)
    live = s >= H_FLOOR
    if np.any(live):
        sl = s[live]
        t = np.exp(-sl)
        eta_t = eta_s(sl, ctx.d)
        near = t[:, None] * np.expm1(sl[:, None] - ctx.s_nodes[None, :])
        far = np.exp(sl)[:, None] * np.expm1(-(sl[:, None] + ctx.s_nodes[None, :]))
        diff = ctx.eta_values[None, :] - eta_t[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            kernel = np.where(near == 0.0, 0.0, diff * (1.0 / far - 1.0 / near))
        exponent = (kernel @ ctx.tau_weights - eta_t * sl) / np.pi
        power = 2 * spec.q + (2 if ctx.d > 0 else 0)
        value = -(t ** power) / np.sin(np.pi * ctx.d) * _phi_ratio(spec, t) * np.sin(eta_t) * np.exp(exponent)
        out[live] = value.real
        if with_residue:
            residue[live] = np.abs(h_kernel_complex(sl, spec, ctx).imag)
    if with_residue:
        return (float(out[0]), float(residue[0])) if scalar else (out, residue)
    return float(out[0]) if scalar else out
