"""
Contraction integral equations on (0, inf).

    u(s) = +c int h(r) e^{-nr} / (e^{s+r} - 1) u(r) dr + e^{js}
    w(s) = -c int h(r) e^{-nr} / (e^{s+r} - 1) w(r) dr + e^{js}
    q1(t) = +c int e^{-r} / (r + t) q1(r) dr + 1,   p1 with -c,

with c = sin(pi d)/pi. The e^{-nr} factor is resolved by r = tau/n on a fixed log-graded
tau grid, so the node count does not grow with n. Every solve goes through Neumann
iteration; the dense Nystrom solve is kept alongside as its check.
"""

from dataclasses import dataclass, field
from enum import Enum
from math import factorial

import numpy as np
from scipy.integrate import quad
from scipy.special import beta as beta_fn, gamma as gamma_fn, hyp1f1

from analyticContext import AnalyticContext, h_kernel
from processModel import ProcessSpec
from utils.errors import (BranchCutError, ContractionError, DomainError, PoleProximityError,
                          QuadratureError, ToleranceError)
from utils.exporters import write_csv, write_json
from utils.loggers import setup_logger
from utils.quadrature import extrapolate_to_zero, log_graded_rule

logger = setup_logger("IntegralEquations")

TAU_RANGE = (1e-24, 60.0)
TAU_PANELS = 64
TAU_ORDER = 8
NEUMANN_TOL = 1e-12
NEUMANN_MAX_ITER = 5000
RESIDUAL_TOL = 1e-10
POLE_TOL = 1e-12
CONDITION_LIMIT = 1e8


class SolutionKind(str, Enum):
    U = "u"
    W = "w"
    Q1 = "q1"
    P1 = "p1"


def kernel_scale(d: float) -> float:
    return float(np.sin(np.pi * d) / np.pi)


def contraction_bound(d: float) -> float:
    """1 - eps with eps = 1/2 - |sin pi d|/2."""
    return 0.5 + 0.5 * abs(np.sin(np.pi * d))


def tau_rule():
    return log_graded_rule(TAU_RANGE[0], TAU_RANGE[1], TAU_PANELS, TAU_ORDER)


@dataclass(frozen=True)
class InteqSolution:
    """
    Nodes and weights in the variable the equation is posed in (s for u/w, t for q1/p1),
    the solution at the nodes, and what is needed to evaluate it elsewhere.
    """
    nodes: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    kind: SolutionKind
    j: int = 0
    n: int | None = None
    d: float = 0.0
    density: np.ndarray = field(default=None, repr=False)
    contraction: float = 0.0
    iterations: int = 0
    residual: float = 0.0

    @property
    def sign(self) -> float:
        return 1.0 if self.kind in (SolutionKind.U, SolutionKind.Q1) else -1.0

    def evaluate(self, x):
        """Nystrom interpolation of the solution at arbitrary points x > 0."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        mass = self.sign * kernel_scale(self.d) * self.density * self.weights * self.values
        if self.kind in (SolutionKind.Q1, SolutionKind.P1):
            return 1.0 + (1.0 / (x[:, None] + self.nodes[None, :])) @ mass
        return np.exp(self.j * x) + (1.0 / np.expm1(x[:, None] + self.nodes[None, :])) @ mass

    def to_csv(self, path: str):
        return write_csv({"t": self.nodes, "value": self.values}, path)


class ContractionOperator:
    """
    Discretized A_n f(s) = c int h(r) e^{-nr} f(r) / (e^{s+r} - 1) dr, or its n-free limit
    B f(t) = c int e^{-r} f(r) / (r + t) dr when n is None.
    """

    def __init__(self, d: float, n: int | None = None, spec: ProcessSpec | None = None,
                 ctx: AnalyticContext | None = None):
        self.logger = setup_logger("ContractionOperator")
        if not -0.5 < d < 0.5 or d == 0.0:
            raise DomainError(f"memory parameter d={d} must lie in (-1/2, 1/2) without 0")
        if n is not None and n < 1:
            raise DomainError("n must be positive")
        self.d = d
        self.n = n
        self.c = kernel_scale(d)
        tau, omega = tau_rule()
        self.tau = tau
        if n is None:
            self.nodes = tau
            self.weights = omega
            self.density = np.exp(-tau)
            self.matrix = self.c * (self.density * omega)[None, :] / (tau[:, None] + tau[None, :])
        else:
            if spec is None or ctx is None:
                raise DomainError("A_n needs the process spec and its analytic context")
            self.nodes = tau / n
            self.weights = omega / n
            self.h = h_kernel(self.nodes, spec, ctx)
            self.density = self.h * np.exp(-tau)
            gap = np.expm1(self.nodes[:, None] + self.nodes[None, :])
            self.matrix = self.c * (self.density * self.weights)[None, :] / gap

    @property
    def size(self) -> int:
        return self.nodes.size

    def apply(self, f):
        return self.matrix @ f

    def norm_ratio(self, f) -> float:
        """||A f|| / ||f|| in the discrete L2 norm of the quadrature weights."""
        af = self.apply(f)
        return float(np.sqrt(np.sum(self.weights * af ** 2) / np.sum(self.weights * f ** 2)))

    def sup_weighted_kernel(self) -> float:
        """max over nodes of |h(r) e^{-nr}|."""
        return float(np.max(np.abs(self.density)))

    def condition(self, sign: float) -> float:
        return float(np.linalg.cond(np.eye(self.size) - sign * self.matrix))

    def neumann(self, rhs, sign: float):
        """
        x <- sign*A x + rhs until successive iterates differ by less than NEUMANN_TOL
        relative to max|x|. Returns (x, observed contraction factor, iterations).
        """
        x = rhs.copy()
        prev_step = None
        ratio = 0.0
        growth = 0
        for it in range(1, NEUMANN_MAX_ITER + 1):
            x_new = sign * self.apply(x) + rhs
            step = float(np.max(np.abs(x_new - x)))
            if prev_step:
                ratio = step / prev_step
                growth = growth + 1 if ratio >= 1.0 else 0
                if growth >= 5 or not np.isfinite(step):
                    raise ContractionError(f"Neumann iteration diverges (ratio {ratio:.4f}); n={self.n} may be too small")
            x = x_new
            if step <= NEUMANN_TOL * max(1.0, float(np.max(np.abs(x)))):
                return x, ratio, it
            prev_step = step
        raise ContractionError(f"Neumann iteration did not reach {NEUMANN_TOL} in {NEUMANN_MAX_ITER} steps")

    def dense(self, rhs, sign: float):
        """Direct Nystrom solve of (I - sign*A) x = rhs."""
        return np.linalg.solve(np.eye(self.size) - sign * self.matrix, rhs)

    def residual(self, x, rhs, sign: float) -> float:
        r = x - sign * self.apply(x) - rhs
        return float(np.max(np.abs(r)) / max(1.0, float(np.max(np.abs(x)))))


def _solve(op: ContractionOperator, rhs, kind: SolutionKind, j: int, method: str) -> InteqSolution:
    sign = 1.0 if kind in (SolutionKind.U, SolutionKind.Q1) else -1.0
    if method == "neumann":
        values, ratio, iterations = op.neumann(rhs, sign)
        bound = contraction_bound(op.d)
        if ratio > bound:
            op.logger.warning(f"{kind.value}: observed contraction {ratio:.4f} exceeds bound {bound:.4f}")
    elif method == "dense":
        values, ratio, iterations = op.dense(rhs, sign), 0.0, 0
    else:
        raise DomainError(f"unknown method '{method}'")
    residual = op.residual(values, rhs, sign)
    if residual > RESIDUAL_TOL:
        op.logger.warning(f"{kind.value}: residual {residual:.3g} above {RESIDUAL_TOL}")
    return InteqSolution(
        nodes=op.nodes, weights=op.weights, values=values, kind=kind, j=j, n=op.n, d=op.d,
        density=op.density, contraction=ratio, iterations=iterations, residual=residual,
    )


def _j_range(spec: ProcessSpec):
    return range(spec.q_of_d + 1)


def solve_uw(j: int, n: int, spec: ProcessSpec, ctx: AnalyticContext, method: str = "neumann",
             operator: ContractionOperator | None = None):
    """u_{j,n} and w_{j,n} for 0 <= j <= q(d)."""
    if j not in _j_range(spec):
        raise DomainError(f"j={j} outside 0..{spec.q_of_d}")
    op = operator or ContractionOperator(spec.d, n, spec, ctx)
    rhs = np.exp(j * op.nodes)
    u = _solve(op, rhs, SolutionKind.U, j, method)
    w = _solve(op, rhs, SolutionKind.W, j, method)
    logger.info(f"u/w solved for j={j}, n={n}: {u.iterations}/{w.iterations} iterations, "
                f"contraction {max(u.contraction, w.contraction):.4f}")
    return u, w


def solve_uw_all(n: int, spec: ProcessSpec, ctx: AnalyticContext, method: str = "neumann"):
    """[(u_j, w_j) for j = 0..q(d)] sharing one discretized operator."""
    op = ContractionOperator(spec.d, n, spec, ctx)
    return [solve_uw(j, n, spec, ctx, method, op) for j in _j_range(spec)]


def solve_q1_p1(d: float, method: str = "neumann"):
    op = ContractionOperator(d)
    rhs = np.ones(op.size)
    q1 = _solve(op, rhs, SolutionKind.Q1, 0, method)
    p1 = _solve(op, rhs, SolutionKind.P1, 0, method)
    logger.info(f"q1/p1 solved for d={d}: {q1.iterations}/{p1.iterations} iterations")
    return q1, p1


def solve_qn(d: float, n: int, kind: SolutionKind = SolutionKind.Q1) -> InteqSolution:
    """
    q_n (or p_n): x(s) = +/-c int e^{-nr} x(r)/(r + s) dr + 1, posed in s = tau/n.
    Satisfies q_n(t/n) = q1(t).
    """
    tau, omega = tau_rule()
    s, weights = tau / n, omega / n
    c = kernel_scale(d)
    sign = 1.0 if kind == SolutionKind.Q1 else -1.0
    density = np.exp(-tau)
    matrix = c * (density * weights)[None, :] / (s[:, None] + s[None, :])
    values = np.linalg.solve(np.eye(s.size) - sign * matrix, np.ones(s.size))
    return InteqSolution(nodes=s, weights=weights, values=values, kind=kind, n=n, d=d,
                         density=density)


def closed_form_constants(d: float):
    """lambda_0 = pi d (1+d)/sin(pi d), mu_0 = pi d (1-d)/sin(pi d)."""
    s = np.sin(np.pi * d)
    return float(np.pi * d * (1.0 + d) / s), float(np.pi * d * (1.0 - d) / s)


def lambda_mu_constants(d: float, q1: InteqSolution | None = None, p1: InteqSolution | None = None,
                        rtol: float = 1e-4):
    """lambda_0 = int q1 e^{-tau}, mu_0 = int p1 e^{-tau}, checked against the closed forms."""
    if q1 is None or p1 is None:
        q1, p1 = solve_q1_p1(d)
    lam = float(np.sum(q1.weights * q1.values * np.exp(-q1.nodes)))
    mu = float(np.sum(p1.weights * p1.values * np.exp(-p1.nodes)))
    lam_cf, mu_cf = closed_form_constants(d)
    err = max(abs(lam / lam_cf - 1.0), abs(mu / mu_cf - 1.0))
    if err > rtol:
        raise ToleranceError(f"lambda0/mu0 for d={d} miss closed forms by {err:.3g}")
    return lam, mu


def constants_report(d: float, path: str | None = None) -> dict:
    q1, p1 = solve_q1_p1(d)
    lam, mu = lambda_mu_constants(d, q1, p1, rtol=np.inf)
    lam_cf, mu_cf = closed_form_constants(d)
    tail = q1_tail_limit(q1)
    report = {
        "d": d,
        "lambda0_numeric": lam,
        "lambda0_closed": lam_cf,
        "mu0_numeric": mu,
        "mu0_closed": mu_cf,
        "rel_err": max(abs(lam / lam_cf - 1.0), abs(mu / mu_cf - 1.0)),
        "lambda0_from_tail": tail / kernel_scale(d),
        "contraction": max(q1.contraction, p1.contraction),
    }
    if path:
        write_json(report, path)
    return report


def q1_tail_limit(q1: InteqSolution, points=(1e2, 1e3)) -> float:
    """lim t(q1(t) - 1), extrapolated linearly in 1/t."""
    t = np.asarray(points, dtype=float)
    values = t * (q1.evaluate(t) - 1.0)
    return extrapolate_to_zero(1.0 / t, values)


def _c_alpha(alpha: float) -> float:
    h = 2.0 * np.sin((1.0 - alpha) * np.pi / 2.0) * gamma_fn(1.0 - alpha)
    return float(beta_fn(alpha / 2.0 + 1.0, alpha / 2.0) / (h * gamma_fn(alpha / 2.0) ** 2))


def q1_closed_form(t, d: float):
    """
    q1(t) rebuilt from the Laplace transform U of the antisymmetric solution on (0,1):
    U(tau) = c(alpha) B(a,a) [1F1(a;2a;-tau) - 1F1(a+1;2a+1;-tau)] with alpha = 2a,
    Psi(-t) = -Gamma(alpha) - t int tau^{alpha-1} U(tau)/(tau+t) dtau and q1 = t^{-a} Psi(-t)/b.
    For d < 0 the result is p1(t; d) = q1(t; |d|).
    """
    if not -0.5 < d < 0.5 or d == 0.0:
        raise DomainError(f"memory parameter d={d} must lie in (-1/2, 1/2) without 0")
    a = abs(d)
    alpha = 2.0 * a
    ca = _c_alpha(alpha)
    bab = beta_fn(a, a)
    b = -ca * gamma_fn(a) * beta_fn(a, 1.0 - a)

    def u_transform(tau):
        return ca * bab * (hyp1f1(a, 2.0 * a, -tau) - hyp1f1(a + 1.0, 2.0 * a + 1.0, -tau))

    out = []
    for x in np.atleast_1d(np.asarray(t, dtype=float)):
        if x <= 0:
            raise DomainError("q1 is evaluated at t > 0")
        head, _ = quad(lambda r: u_transform(r) / (r + x), 0.0, 1.0, weight="alg", wvar=(alpha - 1.0, 0.0),
                       epsabs=1e-14, epsrel=1e-12, limit=400)
        tail, _ = quad(lambda r: r ** (alpha - 1.0) * u_transform(r) / (r + x), 1.0, np.inf,
                       epsabs=1e-14, epsrel=1e-12, limit=400)
        if not np.isfinite(head + tail):
            raise QuadratureError(f"Cauchy transform of U failed at t={x}")
        psi = -gamma_fn(alpha) - x * (head + tail)
        out.append(x ** (-a) * psi / b)
    return np.asarray(out) if np.ndim(t) else float(out[0])


def sd_evaluators(z, n: int, spec: ProcessSpec, ctx: AnalyticContext, solutions):
    """
    S_{j,n}(z) = z^j + c int h(s) e^{-ns} u_{j,n}(s)/(z e^s - 1) ds and D_{j,n} with -c and w,
    for every (u, w) pair in `solutions`. Returns two arrays indexed by j.
    """
    z = complex(z)
    if z.imag == 0.0 and 0.0 < z.real <= 1.0:
        raise BranchCutError("S/D have their poles on (0, 1]")
    c = kernel_scale(spec.d)
    S, D = [], []
    for u, w in solutions:
        if u.n != n or w.n != n:
            raise DomainError(f"solutions were computed at n={u.n}, asked for n={n}")
        gap = z * np.exp(u.nodes) - 1.0
        if np.min(np.abs(gap)) < POLE_TOL:
            raise PoleProximityError(f"z={z} sits on a kernel pole")
        mass = u.density * u.weights / gap
        S.append(z ** u.j + c * np.sum(mass * u.values))
        D.append(z ** w.j - c * np.sum(mass * w.values))
    return np.asarray(S), np.asarray(D)


def sd_derivative_expansion(z, j: int, ell: int, n: int, d: float, kind: str = "S"):
    """
    First-order expansion of the ell-th z-derivative:
    j!/(j-ell)! z^{j-ell} + sign c (-1)^ell ell! K / ((z-1)^{ell+1} n),
    K = lambda_0 (sign +) for S and mu_0 (sign -) for D.
    """
    lam, mu = closed_form_constants(d)
    if kind == "S":
        sign, K = 1.0, lam
    elif kind == "D":
        sign, K = -1.0, mu
    else:
        raise DomainError(f"unknown kind '{kind}'")
    z = complex(z)
    lead = factorial(j) / factorial(j - ell) * z ** (j - ell) if j >= ell else 0.0
    return lead + sign * kernel_scale(d) * (-1) ** ell * factorial(ell) * K / ((z - 1.0) ** (ell + 1) * n)


def contraction_norm(op: ContractionOperator, samples: int = 20, seed: int = 0) -> float:
    """Largest observed ||A f|| / ||f|| over random vectors."""
    rng = np.random.default_rng(seed)
    return max(op.norm_ratio(rng.standard_normal(op.size)) for _ in range(samples))


def estimate_n0(spec: ProcessSpec, ctx: AnalyticContext, grid=(8, 16, 32, 64, 128, 256, 512, 1024)) -> int:
    """
    Smallest n on the grid with sup|h e^{-nr}| < 1 + delta, observed contraction within
    the bound and both Nystrom matrices conditioned below 1e8.
    """
    s = abs(np.sin(np.pi * spec.d))
    delta = (1.0 - s) / (2.0 * s)
    bound = contraction_bound(spec.d)
    for n in grid:
        op = ContractionOperator(spec.d, n, spec, ctx)
        sup = op.sup_weighted_kernel()
        norm = contraction_norm(op)
        cond = max(op.condition(1.0), op.condition(-1.0))
        logger.info(f"n={n}: sup|h e^(-nr)|={sup:.4f}, contraction={norm:.4f}, cond={cond:.3g}")
        if sup < 1.0 + delta and norm <= bound and cond < CONDITION_LIMIT:
            return n
    raise ContractionError(f"no n in {list(grid)} passes the contraction checks for d={spec.d}")
