import json
import os
import time

import numpy as np

from analyticContext import build_context, factorization_residual, q_extension
from asymptoticSystems import build_ab_systems, recombine, vandermonde_dense, vandermonde_identities
from experimentRunner import appendix_e_harness, parity_errors
from hilbertVerify import DEFAULT_TAIL, boundary_residuals, build_bundle, continuity_gap, scaling_ratios
from integralEquations import (ContractionOperator, closed_form_constants, contraction_bound, contraction_norm,
                               estimate_n0, lambda_mu_constants, sd_evaluators, solve_q1_p1, solve_uw,
                               solve_uw_all)
from levinsonPredictor import levinson
from merge_Report import generate_report
from processModel import ProcessSpec, process_covariance
from spectralDensity import fgn_density, szego_constants
from utils.exporters import write_json
from utils.loggers import setup_logger
from utils.settings import OUTPUT_DIR
from utils.verif_rules import ACCEPTANCE_TOLERANCES, ENHANCEMENT_SUGGESTIONS_MAP, assess_verdict

logger = setup_logger("AcceptanceJudge")

TEST_D = (-0.25, 0.25)
CONSTANT_D = (-0.4, -0.25, -0.1, 0.1, 0.25, 0.4)

_contexts = {}


def _context(spec: ProcessSpec):
    if spec.d not in _contexts:
        _contexts[spec.d] = build_context(spec)
    return _contexts[spec.d]


def check_partial_correlation_laws():
    """n |n alpha(n) - d| and n |n delta(n)/sigma0^2 - d^2| at n = 2^10, 2^12, 2^14."""
    checkpoints = (2 ** 10, 2 ** 12, 2 ** 14)
    alpha_score, delta_score, details = 0.0, 0.0, {}
    for d in TEST_D:
        spec = ProcessSpec(d=d)
        trace = levinson(process_covariance(spec, checkpoints[-1]), checkpoints[-1])
        sigma0_sq = szego_constants(spec).sigma0_sq
        alpha_err = [abs(n * trace.alpha(n) - d) for n in checkpoints]
        delta_err = [abs(n * (trace.sigma2_at(n) - sigma0_sq) / sigma0_sq - d * d) for n in checkpoints]
        shrink = [a / b if b > 0 else np.inf for a, b in zip(alpha_err, alpha_err[1:])]
        alpha_score = max(alpha_score, max(n * e for n, e in zip(checkpoints, alpha_err)))
        delta_score = max(delta_score, max(n * e for n, e in zip(checkpoints, delta_err)))
        if min(shrink) < 3.0:
            alpha_score = np.inf
        details[str(d)] = {"alpha_err": alpha_err, "delta_err": delta_err, "shrink": shrink}
    return {"partial_correlation_law": alpha_score, "relative_error_law": delta_score}, details


def check_arima_invariance():
    n = 2 ** 13
    spec = ProcessSpec(d=0.25, theta=[1.0, 0.5], phi=[1.0, -0.4])
    trace = levinson(process_covariance(spec, n), n)
    alpha_err = abs(n * trace.alpha(n) - 0.25)

    inside = ProcessSpec(d=0.25, theta=[1.0, -2.0])
    trace_in = levinson(process_covariance(inside, n), n)
    const = szego_constants(inside)
    ratio = n * (trace_in.sigma2_at(n) - const.sigma_sq) / (const.sigma0_sq * 4.0 * 0.25 ** 2)
    details = {"n_alpha": n * trace.alpha(n), "sigma_sq_over_sigma0_sq": const.sigma_sq / const.sigma0_sq,
               "delta_ratio": ratio}
    return {"arima_invariance": alpha_err, "zero_inside_factor": abs(ratio - 1.0)}, details


def check_boundary_identity():
    lam = np.linspace(0.05, np.pi - 0.05, 50)
    worst = 0.0
    for d in (-0.4, -0.25, 0.25, 0.4):
        q = q_extension(np.exp(1j * lam), d)
        worst = max(worst, float(np.max(np.abs(q / fgn_density(d, lam) - 1.0))))
    return {"boundary_identity": worst}, {}


def check_closed_form_constants():
    worst, details = 0.0, {}
    for d in CONSTANT_D:
        q1, p1 = solve_q1_p1(d)
        lam, mu = lambda_mu_constants(d, q1, p1, rtol=np.inf)
        lam_cf, mu_cf = closed_form_constants(d)
        err = max(abs(lam / lam_cf - 1.0), abs(mu / mu_cf - 1.0))
        details[str(d)] = {"lambda0": lam, "mu0": mu, "rel_err": err}
        worst = max(worst, err)
    return {"closed_form_constants": worst}, details


def check_factorization():
    z = 0.6 * np.exp(1j * np.linspace(0.3, 2.9, 10))
    fact, psi = 0.0, 0.0
    for d in TEST_D:
        ctx = _context(ProcessSpec(d=d))
        fact = max(fact, float(np.max(factorization_residual(z, ctx))))
        psi = max(psi, abs(ctx.psi0 * ctx.sigma0_sq / (2.0 * np.pi) - 1.0))
    return {"factorization_identity": fact, "psi_origin": psi}, {}


def check_sd_expansion():
    d = 0.25
    spec = ProcessSpec(d=d)
    ctx = _context(spec)
    target = -d * (1.0 + d) / 2.0
    sequence = {}
    for n in (128, 256, 512, 1024):
        u, w = solve_uw(0, n, spec, ctx)
        S, _ = sd_evaluators(-1.0, n, spec, ctx, [(u, w)])
        sequence[n] = float(n * (S[0].real - 1.0))
    return {"sd_expansion": abs(sequence[1024] - target)}, {"n_S_minus_1": sequence, "target": target}


def check_bridge_and_second_order():
    sigma_err, alpha_err, second, details = 0.0, 0.0, 0.0, {}
    for d in TEST_D:
        spec = ProcessSpec(d=d)
        ctx = _context(spec)
        trace = levinson(process_covariance(spec, 256), 256)
        a_sys, b_sys = build_ab_systems(spec, 256, ctx)
        sigma2, alpha = recombine(a_sys.solution, b_sys.solution)
        sigma_err = max(sigma_err, abs(sigma2 / trace.sigma2_at(256) - 1.0))
        alpha_err = max(alpha_err, abs(alpha / trace.alpha(256) - 1.0))

        half = ctx.sigma0_sq / 2.0
        errors = []
        for n in (1024, 2048):
            a_sys, b_sys = build_ab_systems(spec, n, ctx, solve_uw_all(n, spec, ctx))
            ea = abs(n * (a_sys.last / half - 1.0) / (d * (1.0 + d)) - 1.0)
            eb = abs(n * (1.0 - b_sys.last / half) / (d * (1.0 - d)) - 1.0)
            errors.append(max(ea, eb))
        score = errors[0] if errors[1] <= errors[0] else np.inf
        second = max(second, score)
        details[str(d)] = {"sigma2": sigma2, "alpha": alpha, "second_order_err": errors}
    return {"bridge_sigma2": sigma_err, "bridge_alpha": alpha_err, "second_order_coefficients": second}, details


def check_vandermonde(configurations: int = 100, seed: int = 7):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(configurations):
        size = 1 + i % 6
        zeta = 0.9 * np.sqrt(rng.uniform(0.05, 1.0, size)) * np.exp(2j * np.pi * rng.uniform(size=size))
        closed = np.array(vandermonde_identities(zeta, verify=False))
        dense = vandermonde_dense(zeta)
        worst = max(worst, float(np.max(np.abs(closed - dense) / np.maximum(np.abs(closed), 1.0))))
    return {"vandermonde_identities": worst}, {}


def check_hilbert(n: int = 32):
    cont, bnd, scal = 0.0, 0.0, 0.0
    for d in TEST_D:
        spec = ProcessSpec(d=d)
        cov = process_covariance(spec, n + DEFAULT_TAIL)
        bundle = build_bundle(levinson(cov, n), cov, n, spec)
        cont = max(cont, continuity_gap(bundle, (1.0, 2.0, 3.0)))
        bnd = max(bnd, float(np.max(boundary_residuals(bundle, (0.3, 0.5, 0.7)))))
        ratio0, _, target = scaling_ratios(bundle)
        scal = max(scal, abs(ratio0[0] / target - 1.0))
    return {"hilbert_continuity": cont, "hilbert_boundary": bnd, "hilbert_scaling": scal}, {}


def check_appendix_e():
    d = -0.25
    result = appendix_e_harness(d, n_max=2 ** 12 + 1)
    parity = parity_errors(result, (2 ** 10, 2 ** 12))
    table = result["table"]
    i = 2 ** 12 - 1
    delta = abs(table["n_delta_over_sigma2"][i] / (d * d + 1.0) - 1.0)
    return {"appendix_e_parity": max(parity.values()), "appendix_e_delta": delta}, \
        {"parity": parity, "jensen_gap": result["jensen_gap"]}


def check_contraction():
    worst, details = 0.0, {}
    for d in CONSTANT_D:
        spec = ProcessSpec(d=d)
        ctx = _context(spec)
        n0 = estimate_n0(spec, ctx)
        ratio = max(contraction_norm(ContractionOperator(d, n, spec, ctx)) for n in (n0, 4 * n0))
        score = ratio / contraction_bound(d)
        details[str(d)] = {"n0": n0, "norm": ratio, "bound": contraction_bound(d)}
        worst = max(worst, score)
    return {"contraction": worst}, details


CHECKS = [
    check_partial_correlation_laws,
    check_arima_invariance,
    check_boundary_identity,
    check_closed_form_constants,
    check_factorization,
    check_sd_expansion,
    check_bridge_and_second_order,
    check_vandermonde,
    check_hilbert,
    check_appendix_e,
    check_contraction,
]


def run_acceptance_suite(out_dir: str = OUTPUT_DIR, checks=None) -> dict:
    """Runs the checks in dependency order, writes verdict.json and the merged summary."""
    scores, details, timings = {}, {}, {}
    for check in checks or CHECKS:
        name = check.__name__.removeprefix("check_")
        logger.info(f"Acceptance check '{name}'")
        start = time.perf_counter()
        try:
            measured, info = check()
        except Exception as exc:
            logger.error(f"Check '{name}' raised {type(exc).__name__}: {exc}")
            measured = {key: np.inf for key in _keys_of(name)}
            info = {"error": f"{type(exc).__name__}: {exc}"}
        timings[name] = time.perf_counter() - start
        scores.update(measured)
        details[name] = info

    verdict, weak_areas = assess_verdict(scores)
    output = {
        "verdict": "Pass" if verdict == "pass" else "Fail",
        "scores": scores,
        "tolerances": {k: ACCEPTANCE_TOLERANCES[k] for k in scores if k in ACCEPTANCE_TOLERANCES},
        "weak_areas": weak_areas,
        "suggestions": {area: ENHANCEMENT_SUGGESTIONS_MAP.get(area, []) for area in weak_areas},
        "details": details,
        "timings_s": timings,
    }
    verdict_path = os.path.join(out_dir, "verdict.json")
    write_json(output, verdict_path)
    logger.info(f"Verdict {output['verdict']} written to {verdict_path}")
    generate_report(verdict_path, os.path.join(out_dir, "summary.json"))
    return output


_CHECK_KEYS = {
    "partial_correlation_laws": ("partial_correlation_law", "relative_error_law"),
    "arima_invariance": ("arima_invariance", "zero_inside_factor"),
    "boundary_identity": ("boundary_identity",),
    "closed_form_constants": ("closed_form_constants",),
    "factorization": ("factorization_identity", "psi_origin"),
    "sd_expansion": ("sd_expansion",),
    "bridge_and_second_order": ("bridge_sigma2", "bridge_alpha", "second_order_coefficients"),
    "vandermonde": ("vandermonde_identities",),
    "hilbert": ("hilbert_continuity", "hilbert_boundary", "hilbert_scaling"),
    "appendix_e": ("appendix_e_parity", "appendix_e_delta"),
    "contraction": ("contraction",),
}


def _keys_of(name: str):
    return _CHECK_KEYS.get(name, (name,))


def check_verdict(out_dir: str = OUTPUT_DIR) -> str:
    path = os.path.join(out_dir, "verdict.json")
    if not os.path.exists(path):
        logger.warning("verdict.json not found.")
        return "Fail"
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f).get("verdict", "Fail")
