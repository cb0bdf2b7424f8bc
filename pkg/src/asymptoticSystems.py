"""
Algebraic systems for the coefficients a_j, b_j (j = 0..q(d)) whose last entries give
the finite-predictor quantities: sigma^2(n) = a + b and alpha(n) = (a - b)/(a + b).

Rows k < q(d) impose the vanishing of the combined function at the reflected zeros
zeta_k; the last row fixes the value at the origin. The systems are solved exactly;
the Vandermonde split of the large-n analysis is kept as a diagnostic.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from analyticContext import AnalyticContext, x_factor
from integralEquations import kernel_scale, closed_form_constants, sd_evaluators, solve_uw_all
from levinsonPredictor import PredictorTrace
from processModel import ProcessSpec
from spectralDensity import SpectralConstants, inside_zero_factor
from utils.errors import BranchCutError, CoincidentNodeError, DomainError, IllConditionedError, ToleranceError
from utils.exporters import write_json
from utils.loggers import setup_logger

logger = setup_logger("AsymptoticSystems")

CONDITION_LIMIT = 1e8
IMAG_TOL = 1e-8
NODE_TOL = 1e-12


class SystemKind(str, Enum):
    A = "a_system"
    B = "b_system"


@dataclass(frozen=True)
class AlgebraicSystem:
    zeta: np.ndarray
    matrix: np.ndarray
    rhs: np.ndarray
    beta: complex
    kind: SystemKind
    n: int
    solution: np.ndarray
    condition: float

    @property
    def rho(self) -> float:
        return float(np.max(np.abs(self.zeta))) if self.zeta.size else 0.0

    @property
    def last(self) -> float:
        return float(self.solution[-1].real)

    @property
    def imag_residue(self) -> float:
        """|Im x| / |x| for the last entry; the exact solution is real."""
        last = self.solution[-1]
        return float(abs(last.imag) / max(abs(last), 1e-300))


def reflect_zeros(spec: ProcessSpec, s0: float | None = None) -> np.ndarray:
    """zeta_k = z_k or 1/z_k, whichever lies in the unit disk; s0 appended when d > 0."""
    spec.require_regular_zeros()
    zeros = spec.ma_zeros
    zeta = np.where(np.abs(zeros) < 1.0, zeros, 1.0 / zeros) if zeros.size else np.zeros(0, dtype=complex)
    if spec.d > 0:
        if s0 is None:
            raise DomainError("s0 is required when d > 0")
        zeta = np.append(zeta, complex(s0))
    elif s0 is not None:
        raise DomainError("s0 exists only for d > 0")
    return np.asarray(zeta, dtype=complex)


def origin_value(spec: ProcessSpec, sigma0_sq: float, s0: float | None) -> complex:
    """
    Right-hand side of the last row, shared by both systems:
    -sigma0^2 s0 prod(-1/z_j)/2 for d > 0, sigma0^2 prod(-1/z_j)/2 for d < 0.
    """
    prod = complex(np.prod(-1.0 / spec.ma_zeros)) if spec.q else 1.0 + 0j
    if spec.d > 0:
        return -0.5 * sigma0_sq * s0 * prod
    return 0.5 * sigma0_sq * prod


def _refuse_cut(zeta):
    for z in zeta:
        if z.imag == 0.0 and 0.0 < z.real < 1.0:
            raise BranchCutError(f"reflected zero {z.real} lies on the cut (0, 1)")


def _system_rows(zeta, spec, ctx, n, values_at, sign):
    q = spec.q
    rows = []
    for z in zeta:
        inner = complex(x_factor(z, ctx)) * complex(spec.phi_at(z)) * values_at(z)
        outer = z ** (n + 2 * q) * complex(x_factor(1.0 / z, ctx)) * complex(spec.phi_at(1.0 / z)) * values_at(1.0 / z)
        rows.append(inner + sign * outer)
    return rows


def _solve_system(matrix, rhs, kind, n):
    cond = float(np.linalg.cond(matrix))
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise IllConditionedError(f"{kind.value} at n={n} has condition {cond:.3g}", cond)
    solution = lu_solve(lu_factor(matrix), rhs)
    return solution, cond


def build_ab_systems(spec: ProcessSpec, n: int, ctx: AnalyticContext, solutions=None):
    """Assemble and solve the a- and b-systems at order n. Returns (AlgebraicSystem, AlgebraicSystem)."""
    if spec.d != ctx.d:
        raise DomainError("context and spec have different memory parameters")
    zeta = reflect_zeros(spec, ctx.s0)
    _refuse_cut(zeta)
    if solutions is None:
        solutions = solve_uw_all(n, spec, ctx)
    rhs_value = origin_value(spec, ctx.sigma0_sq, ctx.s0)
    size = spec.q_of_d + 1
    rhs = np.zeros(size, dtype=complex)
    rhs[-1] = rhs_value
    beta = -ctx.sigma0_sq * ctx.s0 * (complex(np.prod(-1.0 / spec.ma_zeros)) if spec.q else 1.0) if spec.d > 0 else 0j

    cache = {}

    def evaluate(z):
        key = complex(z)
        if key not in cache:
            cache[key] = sd_evaluators(key, n, spec, ctx, solutions)
        return cache[key]

    systems = []
    for kind, pick, sign in ((SystemKind.A, 0, 1.0), (SystemKind.B, 1, -1.0)):
        rows = _system_rows(zeta, spec, ctx, n, lambda z: evaluate(z)[pick], sign)
        rows.append(evaluate(0.0)[pick])
        matrix = np.asarray(rows, dtype=complex).reshape(size, size)
        solution, cond = _solve_system(matrix, rhs, kind, n)
        systems.append(AlgebraicSystem(zeta=zeta, matrix=matrix, rhs=rhs, beta=beta, kind=kind, n=n,
                                       solution=solution, condition=cond))
    for system in systems:
        if system.imag_residue > IMAG_TOL:
            logger.warning(f"{system.kind.value} at n={n}: imaginary residue {system.imag_residue:.3g}")
    logger.info(f"a/b systems at n={n}: a={systems[0].last:.12g}, b={systems[1].last:.12g}, "
                f"cond={max(s.condition for s in systems):.3g}")
    return systems[0], systems[1]


def solve_ab_systems(spec: ProcessSpec, n: int, ctx: AnalyticContext, solutions=None):
    a_sys, b_sys = build_ab_systems(spec, n, ctx, solutions)
    return a_sys.solution, b_sys.solution


def recombine(a, b):
    """(sigma^2(n), alpha(n)) from the last entries of a and b."""
    a_last, b_last = float(np.real(a[-1])), float(np.real(b[-1]))
    total = a_last + b_last
    if not total > 0 or not abs(a_last - b_last) < total:
        raise ToleranceError(f"a={a_last}, b={b_last} do not define a partial correlation")
    return total, (a_last - b_last) / total


def vandermonde_identities(zeta, verify: bool = True):
    """
    For V = V(zeta_1..zeta_m, 0) with rows (1, x, .., x^m):
    e'V^{-1}e = prod 1/(-zeta_k), 1'V^{-1}e = prod (zeta_k - 1)/zeta_k,
    e'V^{-1}u = -prod 1/(1 - zeta_k) with u = (1/(zeta_k - 1), .., -1).
    """
    zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
    nodes = np.append(zeta, 0.0)
    gaps = np.abs(nodes[:, None] - nodes[None, :]) + np.eye(nodes.size)
    if np.min(gaps) < NODE_TOL:
        raise CoincidentNodeError("Vandermonde nodes must be distinct and non-zero")
    if np.any(np.abs(zeta - 1.0) < NODE_TOL):
        raise DomainError("a node at 1 makes u undefined")
    eVe = np.prod(-1.0 / zeta)
    oneVe = np.prod((zeta - 1.0) / zeta)
    eVu = -np.prod(1.0 / (1.0 - zeta))
    if verify:
        dense = vandermonde_dense(zeta)
        closed = np.array([eVe, oneVe, eVu])
        err = np.max(np.abs(dense - closed) / np.maximum(np.abs(closed), 1.0))
        if err > 1e-10:
            raise ToleranceError(f"Vandermonde closed forms off by {err:.3g}")
    return complex(eVe), complex(oneVe), complex(eVu)


def vandermonde_dense(zeta) -> np.ndarray:
    """The three Vandermonde quantities from a dense solve."""
    zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
    V = np.vander(np.append(zeta, 0.0), increasing=True)
    e = np.zeros(zeta.size + 1, dtype=complex)
    e[-1] = 1.0
    u = np.append(1.0 / (zeta - 1.0), -1.0)
    col = np.linalg.solve(V, e)
    row = np.linalg.solve(V.T, e)
    return np.array([col[-1], np.sum(col), row @ u])


def predicted_asymptotics(spec: ProcessSpec, n: int, constants: SpectralConstants):
    """sigma^2 + delta, alpha = d/n, delta = sigma^2 d^2/n."""
    if n < 1:
        raise DomainError("n must be positive")
    sigma_sq = constants.sigma0_sq * inside_zero_factor(spec)
    delta = sigma_sq * spec.d ** 2 / n
    return sigma_sq + delta, spec.d / n, delta


def asymptotic_decomposition(system: AlgebraicSystem, d: float, sigma_sq: float) -> dict:
    """Vandermonde ingredients of the large-n analysis next to the first-order prediction."""
    lam, mu = closed_form_constants(d)
    c = kernel_scale(d)
    if system.kind == SystemKind.A:
        first_order = 0.5 * sigma_sq * (1.0 + c * lam / system.n)
    else:
        first_order = 0.5 * sigma_sq * (1.0 - c * mu / system.n)
    report = {"kind": system.kind.value, "n": system.n, "rho": system.rho, "beta": system.beta,
              "condition": system.condition, "last_exact": system.last, "last_first_order": first_order}
    if system.zeta.size:
        eVe, oneVe, eVu = vandermonde_identities(system.zeta, verify=False)
        report.update({"eVe": eVe, "oneVe": oneVe, "eVu": eVu})
    return report


def ab_report(spec: ProcessSpec, n: int, ctx: AnalyticContext, trace: PredictorTrace | None = None,
              path: str | None = None) -> dict:
    a_sys, b_sys = build_ab_systems(spec, n, ctx)
    a, b = a_sys.solution, b_sys.solution
    sigma2, alpha = recombine(a, b)
    report = {
        "n": n,
        "a_last": float(a[-1].real),
        "b_last": float(b[-1].real),
        "sigma2_recombined": sigma2,
        "alpha_recombined": alpha,
        "alpha_predicted": spec.d / n,
        "imag_residue": max(a_sys.imag_residue, b_sys.imag_residue),
        "sigma2_exact": trace.sigma2_at(n) if trace is not None else None,
        "alpha_exact": trace.alpha(n) if trace is not None else None,
    }
    if path:
        write_json(report, path)
    return report
