"""
Spectral densities of fGn and of the filtered process, and the Szego-Kolmogorov
prediction-error constants.

Normalization: gamma(k) = integral over (-pi, pi] of f(lambda) exp(-i k lambda).
"""

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.integrate import quad
from scipy.special import gamma as gamma_fn

from processModel import ProcessSpec, UNIT_CIRCLE_TOL
from utils.errors import DomainError, QuadratureError
from utils.exporters import write_csv
from utils.loggers import setup_logger

logger = setup_logger("SpectralDensity")

SERIES_TERMS = 64


class SpectralConstants(BaseModel):
    model_config = ConfigDict(frozen=True)

    sigma0_sq: float
    sigma_sq: float
    c_d: float


def fgn_constant(d: float) -> float:
    """c(d) = Gamma(2d+2) cos(pi d) / (2 pi)."""
    return float(gamma_fn(2.0 * d + 2.0) * np.cos(np.pi * d) / (2.0 * np.pi))


def _tail(lam, a, K, sign):
    # Euler-Maclaurin (midpoint form) for sum_{k>K} (2 pi k + sign*lam)^{-a}
    x = 2.0 * np.pi * (K + 0.5) + sign * lam
    integral = x ** (1.0 - a) / (2.0 * np.pi * (a - 1.0))
    d1 = -2.0 * np.pi * a * x ** (-a - 1.0)
    d3 = -(2.0 * np.pi) ** 3 * a * (a + 1.0) * (a + 2.0) * x ** (-a - 3.0)
    return integral + d1 / 24.0 - 7.0 * d3 / 5760.0


def fgn_density(d: float, lam, k_terms: int = SERIES_TERMS):
    """
    f_0(lambda) = c(d) |1 - e^{i lambda}|^2 sum_k |lambda + 2 pi k|^{-2d-2}.
    The sum runs over |k| <= k_terms with an Euler-Maclaurin tail.
    """
    if not -0.5 < d < 0.5 or d == 0.0:
        raise DomainError(f"memory parameter d={d} must lie in (-1/2, 1/2) without 0")
    if k_terms < 1:
        raise DomainError("k_terms must be positive")
    scalar = np.ndim(lam) == 0
    lam = np.abs(np.atleast_1d(np.asarray(lam, dtype=float)))
    if np.any(lam == 0.0):
        raise DomainError("the fGn density is singular at lambda = 0")
    a = 2.0 * d + 2.0
    k = np.arange(-k_terms, k_terms + 1, dtype=float)
    total = np.sum(np.abs(lam[:, None] + 2.0 * np.pi * k[None, :]) ** (-a), axis=1)
    total += _tail(lam, a, k_terms, 1.0) + _tail(lam, a, k_terms, -1.0)
    out = fgn_constant(d) * 4.0 * np.sin(0.5 * lam) ** 2 * total
    return float(out[0]) if scalar else out


def filter_gain(spec: ProcessSpec, lam):
    """|theta(e^{i lambda}) / phi(e^{i lambda})|^2."""
    z = np.exp(1j * np.asarray(lam, dtype=float))
    return np.abs(spec.theta_at(z) / spec.phi_at(z)) ** 2


def composed_density(spec: ProcessSpec, lam):
    """f(lambda) = |theta/phi|^2 f_0(lambda); vanishes at angles of unit-circle MA zeros."""
    return filter_gain(spec, lam) * fgn_density(spec.d, lam)


def kolmogorov_variance(log_density, singular_exponent: float = 0.0) -> float:
    """
    2 pi exp((1/2pi) int_{-pi}^{pi} log f) for an even density.

    A singularity log f ~ singular_exponent * log|lambda| at the origin is removed
    before integrating and added back in closed form (int_0^pi log = pi log pi - pi).
    """
    def smooth(x):
        return log_density(x) - singular_exponent * np.log(x)

    value, err = quad(smooth, 0.0, np.pi, epsabs=0.0, epsrel=1e-13, limit=400)
    if not np.isfinite(value):
        raise QuadratureError("log-density integral did not converge")
    total = value + singular_exponent * (np.pi * np.log(np.pi) - np.pi)
    return float(2.0 * np.pi * np.exp(total / np.pi))


def fgn_innovation_variance(d: float) -> float:
    """sigma_0^2 for fGn with memory parameter d."""
    return kolmogorov_variance(lambda x: np.log(fgn_density(d, x)), singular_exponent=-2.0 * d)


def inside_zero_factor(spec: ProcessSpec) -> float:
    """prod over MA zeros strictly inside the unit disk of |z_j|^{-2}."""
    zeros = spec.ma_zeros
    inside = zeros[np.abs(zeros) < 1.0 - UNIT_CIRCLE_TOL]
    return float(np.prod(np.abs(inside) ** -2.0)) if inside.size else 1.0


def szego_constants(spec: ProcessSpec) -> SpectralConstants:
    sigma0_sq = fgn_innovation_variance(spec.d)
    sigma_sq = sigma0_sq * inside_zero_factor(spec)
    logger.info(f"Szego constants for d={spec.d}: sigma0^2={sigma0_sq:.12g}, sigma^2={sigma_sq:.12g}")
    return SpectralConstants(sigma0_sq=sigma0_sq, sigma_sq=sigma_sq, c_d=fgn_constant(spec.d))


def composed_innovation_variance(spec: ProcessSpec) -> float:
    """
    sigma^2 of the filtered process straight from the geometric-mean integral.
    Unit-circle MA zeros contribute integrable log singularities, passed to quad as breakpoints.
    """
    zeros = spec.ma_zeros
    angles = [abs(float(np.angle(z))) for z in zeros if abs(abs(z) - 1.0) < UNIT_CIRCLE_TOL]
    breaks = sorted({a for a in angles if 0.0 < a < np.pi})

    def smooth(x):
        return np.log(composed_density(spec, x)) + 2.0 * spec.d * np.log(x)

    value, _ = quad(smooth, 0.0, np.pi, epsabs=0.0, epsrel=1e-12, limit=400, points=breaks or None)
    total = value - 2.0 * spec.d * (np.pi * np.log(np.pi) - np.pi)
    return float(2.0 * np.pi * np.exp(total / np.pi))


def covariance_by_quadrature(spec: ProcessSpec, k: int) -> float:
    """Oracle for the lag-domain covariances: 2 int_0^pi f(lambda) cos(k lambda) d lambda."""
    def regular(x):
        return composed_density(spec, x) * x ** (2.0 * spec.d) * np.cos(k * x)

    value, _ = quad(regular, 0.0, np.pi, weight="alg", wvar=(-2.0 * spec.d, 0.0), epsabs=1e-14, limit=400)
    return float(2.0 * value)


def density_table(spec: ProcessSpec, points: int, path: str):
    lam = np.linspace(np.pi / points, np.pi, points)
    return write_csv({"lambda": lam, "f0": fgn_density(spec.d, lam), "f": composed_density(spec, lam)}, path)
