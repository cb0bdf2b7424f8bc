"""
Exact finite one-step predictors from a covariance table.

The weights g_n(1..n-1) predict X_0 from X_1..X_{n-1}. The Durbin recursion produces
them order by order together with the partial correlations alpha(n) and the innovation
variances sigma^2(n); a dense LU solve is kept as an independent check.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve, matmul_toeplitz, toeplitz
import warnings

from processModel import CovarianceTable
from utils.errors import BreakdownError, DomainError, InsufficientLagError, SingularMatrixError
from utils.exporters import write_table
from utils.loggers import setup_logger

logger = setup_logger("LevinsonPredictor")

BREAKDOWN_THRESHOLD = 1e-300
DIRECT_SOLVE_LIMIT = 2048
PRECISIONS = {"double": np.float64, "dd": np.longdouble}


@dataclass(frozen=True)
class PredictorTrace:
    """alphas[i] = alpha(i+1) and sigma2[i] = sigma^2(i+1) for i = 0..n_max-1."""
    alphas: np.ndarray
    sigma2: np.ndarray
    weights_final: np.ndarray
    n_max: int
    precision: str = "double"

    def alpha(self, n: int) -> float:
        return float(self.alphas[n - 1])

    def sigma2_at(self, n: int) -> float:
        return float(self.sigma2[n - 1])

    def orders(self) -> np.ndarray:
        return np.arange(1, self.n_max + 1)

    def table(self, sigma_sq: float | None = None) -> dict:
        n = self.orders()
        columns = {"n": n, "alpha": self.alphas, "sigma2": self.sigma2, "n_alpha": n * self.alphas}
        if sigma_sq is not None:
            columns["n_delta_over_sigma2"] = n * (self.sigma2 - sigma_sq) / sigma_sq
        return columns

    def to_csv(self, path: str, sigma_sq: float | None = None, fmt: str = "csv"):
        return write_table(self.table(sigma_sq), path, fmt)


def levinson(cov: CovarianceTable, n_max: int, precision: str = "double") -> PredictorTrace:
    """
    Durbin recursion up to order n_max with O(n_max) memory.
    alpha(1) = gamma(1)/gamma(0) and sigma^2(n+1) = sigma^2(n)(1 - alpha(n)^2).

    precision="dd" runs the recursion in numpy.longdouble. The covariances themselves stay
    float64, and on platforms where longdouble is float64 the two precisions coincide.
    """
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    if n_max > cov.n_max:
        raise InsufficientLagError(f"order {n_max} needs lags up to {n_max}, table has {cov.n_max}")
    dtype = PRECISIONS.get(precision)
    if dtype is None:
        raise DomainError(f"unknown precision '{precision}'")
    if precision == "dd" and np.finfo(dtype).eps >= np.finfo(np.float64).eps:
        logger.warning("longdouble has no extra precision on this platform; 'dd' runs in double")
    gamma = cov.gamma[: n_max + 1].astype(dtype)
    if gamma[0] <= 0:
        raise BreakdownError("gamma(0) must be positive")

    logger.info(f"Levinson recursion to n={n_max} ({precision})")
    alphas = np.empty(n_max, dtype=dtype)
    sigma2 = np.empty(n_max, dtype=dtype)
    g = np.zeros(n_max, dtype=dtype)
    v = gamma[0]
    for n in range(1, n_max + 1):
        if not v > BREAKDOWN_THRESHOLD:
            raise BreakdownError(f"innovation variance {float(v)} at order {n}: covariance not positive definite")
        sigma2[n - 1] = v
        m = n - 1
        alpha = (gamma[n] - np.dot(g[:m], gamma[m:0:-1])) / v
        if not abs(alpha) < 1:
            raise BreakdownError(f"partial correlation {float(alpha)} at order {n}")
        alphas[n - 1] = alpha
        if n < n_max:
            if m:
                g[:m] = g[:m] - alpha * g[m - 1::-1]
            g[m] = alpha
            v = v * (1 - alpha * alpha)

    return PredictorTrace(
        alphas=alphas.astype(np.float64),
        sigma2=sigma2.astype(np.float64),
        weights_final=g[: n_max - 1].astype(np.float64),
        n_max=n_max,
        precision=precision,
    )


def toeplitz_solve_direct(cov: CovarianceTable, n: int) -> np.ndarray:
    """Dense LU solve of sum_k g(k) gamma(j-k) = gamma(j), j = 1..n-1."""
    if n > DIRECT_SOLVE_LIMIT:
        raise DomainError(f"dense solve limited to n <= {DIRECT_SOLVE_LIMIT}")
    if n - 1 > cov.n_max:
        raise InsufficientLagError(f"order {n} exceeds table size {cov.n_max}")
    if n < 2:
        return np.zeros(0)
    matrix = toeplitz(cov.gamma[: n - 1])
    with warnings.catch_warnings():
        warnings.simplefilter("error", LinAlgWarning)
        try:
            lu, piv = lu_factor(matrix)
        except (LinAlgWarning, ValueError) as exc:
            raise SingularMatrixError(f"Toeplitz matrix of order {n - 1} is singular") from exc
    if np.any(np.diag(lu) == 0.0):
        raise SingularMatrixError(f"Toeplitz matrix of order {n - 1} is singular")
    return lu_solve((lu, piv), cov.gamma[1:n])


def prediction_error_and_corr(cov: CovarianceTable, weights, n: int):
    """
    sigma^2(n) = gamma(0) - sum_j g(j) gamma(j),
    alpha(n) = (gamma(n) - sum_j g(j) gamma(n-j)) / sigma^2(n).
    """
    g = np.asarray(weights, dtype=float)
    if g.size != n - 1:
        raise DomainError(f"expected {n - 1} weights for order {n}, got {g.size}")
    gamma = cov.lag(np.arange(n + 1))
    sigma2 = gamma[0] - np.dot(g, gamma[1:n])
    alpha = (gamma[n] - np.dot(g, gamma[n - 1:0:-1])) / sigma2
    return float(sigma2), float(alpha)


def normal_equation_residual(cov: CovarianceTable, weights) -> float:
    """max_j |sum_k g(k) gamma(j-k) - gamma(j)| / gamma(0) over j = 1..n-1."""
    g = np.asarray(weights, dtype=float)
    if g.size == 0:
        return 0.0
    column = cov.lag(np.arange(g.size))
    lhs = matmul_toeplitz(column, g)
    return float(np.max(np.abs(lhs - cov.lag(np.arange(1, g.size + 1)))) / cov.gamma[0])
