"""
Process specifications and exact covariance sequences.

A process is fractional Gaussian noise with memory parameter d, optionally passed
through the rational filter theta(z)/phi(z). Covariances are produced in the lag
domain: the fGn autocovariance has a closed form and the filter is applied by a
double convolution with its impulse response.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.polynomial import polynomial as P
from pydantic import BaseModel, ConfigDict, field_validator, model_validator
from scipy.special import binom

from utils.errors import DomainError, InsufficientLagError, NonConvergenceError, TruncationBudgetError, UnitCircleZeroError
from utils.exporters import write_csv
from utils.loggers import setup_logger

logger = setup_logger("ProcessModel")

UNIT_CIRCLE_TOL = 1e-10
ROOT_MARGIN = 1e-12
SERIES_SWITCH = 64
MAX_IMPULSE_TERMS = 200_000


def _strip(coeffs):
    c = [float(x) for x in coeffs]
    while len(c) > 1 and c[-1] == 0.0:
        c.pop()
    return c


def _roots(coeffs):
    if len(coeffs) < 2:
        return np.zeros(0, dtype=complex)
    return np.roots(np.asarray(coeffs, dtype=float)[::-1]).astype(complex)


class ProcessSpec(BaseModel):
    """
    Memory parameter d together with the MA polynomial theta and the AR polynomial phi,
    both stored as coefficient lists in increasing powers with theta[0] = phi[0] = 1.
    """
    model_config = ConfigDict(frozen=True)

    d: float
    theta: list[float] = [1.0]
    phi: list[float] = [1.0]

    @field_validator("d")
    @classmethod
    def _check_d(cls, d):
        if not -0.5 < d < 0.5 or d == 0.0:
            raise ValueError(f"memory parameter d={d} must lie in (-1/2, 1/2) without 0")
        return d

    @field_validator("theta", "phi")
    @classmethod
    def _check_normalized(cls, coeffs):
        coeffs = _strip(coeffs)
        if not coeffs or coeffs[0] != 1.0:
            raise ValueError("polynomials must satisfy p(0) = 1")
        if not all(np.isfinite(coeffs)):
            raise ValueError("polynomial coefficients must be finite")
        return coeffs

    @model_validator(mode="after")
    def _check_zeros(self):
        ar = _roots(self.phi)
        if ar.size and np.min(np.abs(ar)) <= 1.0 + ROOT_MARGIN:
            raise ValueError("phi cannot have zeros inside or on the unit circle")
        ma = _roots(self.theta)
        for z in ma:
            if ar.size and np.min(np.abs(ar - z)) < 1e-9 * max(1.0, abs(z)):
                raise ValueError("theta and phi share a zero")
        return self

    @property
    def q(self) -> int:
        return len(self.theta) - 1

    @property
    def p(self) -> int:
        return len(self.phi) - 1

    @property
    def ma_zeros(self) -> np.ndarray:
        return _roots(self.theta)

    @property
    def ar_zeros(self) -> np.ndarray:
        return _roots(self.phi)

    @property
    def has_unit_circle_zero(self) -> bool:
        z = self.ma_zeros
        return bool(z.size and np.any(np.abs(np.abs(z) - 1.0) < UNIT_CIRCLE_TOL))

    @property
    def q_of_d(self) -> int:
        """Effective count q(d): q + 1 for d > 0, q for d < 0."""
        return self.q + (1 if self.d > 0 else 0)

    def require_regular_zeros(self):
        if self.has_unit_circle_zero:
            raise UnitCircleZeroError("theta has a zero on the unit circle; use the unit-circle harness")

    def theta_at(self, z):
        return P.polyval(z, np.asarray(self.theta))

    def phi_at(self, z):
        return P.polyval(z, np.asarray(self.phi))

    def is_fgn(self) -> bool:
        return self.q == 0 and self.p == 0

    def to_json(self) -> str:
        return self.model_dump_json()

    @classmethod
    def from_json(cls, text: str) -> "ProcessSpec":
        return cls.model_validate_json(text)


class CovarianceSource(str, Enum):
    FGN_EXACT = "fgn_exact"
    ARIMA_FILTERED = "arima_filtered"


@dataclass(frozen=True)
class CovarianceTable:
    """gamma(0..n_max) of the composed process; negative lags follow by symmetry."""
    gamma: np.ndarray
    n_max: int
    source: CovarianceSource
    d: float

    def lag(self, k):
        k = np.abs(np.asarray(k))
        if np.any(k > self.n_max):
            raise InsufficientLagError(f"lag {int(np.max(k))} exceeds table size {self.n_max}")
        return self.gamma[k]

    def to_csv(self, path: str):
        return write_csv({"k": np.arange(self.n_max + 1), "gamma": self.gamma}, path)


def _check_d(d):
    if not -0.5 < d < 0.5 or d == 0.0:
        raise DomainError(f"memory parameter d={d} must lie in (-1/2, 1/2) without 0")


def fgn_autocovariance(lags, d: float) -> np.ndarray:
    """
    gamma_0(k) = (|k+1|^{2d+1} - 2|k|^{2d+1} + |k-1|^{2d+1}) / 2 at arbitrary integer lags.

    For |k| >= SERIES_SWITCH the second difference is expanded in 1/k, which removes
    the cancellation between the three large powers.
    """
    _check_d(d)
    k = np.abs(np.asarray(lags, dtype=float))
    a = 2.0 * d + 1.0
    out = np.empty_like(k)
    near = k < SERIES_SWITCH
    kn = k[near]
    out[near] = 0.5 * (np.abs(kn + 1.0) ** a - 2.0 * kn ** a + np.abs(kn - 1.0) ** a)
    kf = k[~near]
    if kf.size:
        x2 = (1.0 / kf) ** 2
        bracket = np.zeros_like(kf)
        power = np.ones_like(kf)
        for m in range(1, 7):
            power = power * x2
            bracket += 2.0 * binom(a, 2 * m) * power
        out[~near] = 0.5 * kf ** a * bracket
    return out


def fgn_covariance(d: float, n_max: int) -> CovarianceTable:
    _check_d(d)
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    gamma = fgn_autocovariance(np.arange(n_max + 1), d)
    return CovarianceTable(gamma=gamma, n_max=n_max, source=CovarianceSource.FGN_EXACT, d=d)


def impulse_response(spec: ProcessSpec, tol: float = 1e-14) -> np.ndarray:
    """
    Power-series coefficients psi_0..psi_J of theta(z)/phi(z).

    J is the first index past deg(theta) at which the geometric tail bound, driven by
    the largest inverse-root modulus r of phi, drops below tol times the partial l1 sum.
    """
    theta = np.asarray(spec.theta)
    phi = np.asarray(spec.phi)
    if spec.p == 0:
        return theta.copy()
    roots = spec.ar_zeros
    if np.min(np.abs(roots)) <= 1.0 + ROOT_MARGIN:
        raise NonConvergenceError("phi has a root with modulus <= 1")
    r = float(np.max(1.0 / np.abs(roots)))
    p = spec.p
    psi = []
    total = 0.0
    for j in range(MAX_IMPULSE_TERMS):
        value = theta[j] if j < theta.size else 0.0
        for i in range(1, min(j, p) + 1):
            value -= phi[i] * psi[j - i]
        psi.append(value)
        total += abs(value)
        if j >= max(spec.q, p):
            window = max(abs(v) for v in psi[-p:])
            bound = window * p * r / (1.0 - r) ** p
            if bound < tol * total:
                return np.asarray(psi)
    raise TruncationBudgetError(f"impulse response did not reach tol={tol} in {MAX_IMPULSE_TERMS} terms")


def arima_covariance(spec: ProcessSpec, n_max: int, tol: float = 1e-14) -> CovarianceTable:
    """gamma(k) = sum_{i,j} psi_i psi_j gamma_0(k+i-j)."""
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    psi = impulse_response(spec, tol)
    J = psi.size - 1
    pair = np.convolve(psi, psi[::-1])
    base = fgn_autocovariance(np.arange(-J, n_max + J + 1), spec.d)
    gamma = np.correlate(base, pair, mode="valid")
    logger.info(f"Filtered covariance for d={spec.d}: {psi.size} impulse terms, {n_max + 1} lags")
    return CovarianceTable(gamma=gamma, n_max=n_max, source=CovarianceSource.ARIMA_FILTERED, d=spec.d)


def process_covariance(spec: ProcessSpec, n_max: int) -> CovarianceTable:
    """Closed form for pure fGn, filtered covariance otherwise."""
    if spec.is_fgn():
        return fgn_covariance(spec.d, n_max)
    return arima_covariance(spec, n_max)
