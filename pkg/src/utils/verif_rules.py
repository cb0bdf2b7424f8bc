ACCEPTANCE_TOLERANCES = {
    "partial_correlation_law": 8.0,
    "relative_error_law": 8.0,
    "arima_invariance": 0.02,
    "zero_inside_factor": 0.10,
    "boundary_identity": 1e-8,
    "closed_form_constants": 1e-4,
    "factorization_identity": 1e-6,
    "psi_origin": 1e-6,
    "sd_expansion": 2e-3,
    "bridge_sigma2": 5e-3,
    "bridge_alpha": 5e-2,
    "second_order_coefficients": 0.10,
    "vandermonde_identities": 1e-10,
    "hilbert_continuity": 1e-5,
    "hilbert_boundary": 1e-4,
    "hilbert_scaling": 0.05,
    "appendix_e_parity": 8.0,
    "appendix_e_delta": 0.05,
    "contraction": 1.0,
}

ENHANCEMENT_SUGGESTIONS_MAP = {
    "partial_correlation_law": [
        "Run the Levinson recursion with precision='dd'",
        "Check the large-lag branch of the fGn autocovariance",
    ],
    "relative_error_law": [
        "Tighten the Szego quadrature (epsrel) for sigma0^2",
    ],
    "arima_invariance": [
        "Lower the impulse-response tolerance or check the AR roots",
    ],
    "zero_inside_factor": [
        "Check that the MA zero inside the disk is counted in sigma^2",
    ],
    "boundary_identity": [
        "Raise the Lindelof-Wirtinger truncation or the Euler-Maclaurin order",
    ],
    "closed_form_constants": [
        "Refine the tau grid of the integral equations (more panels near 0)",
    ],
    "factorization_identity": [
        "Increase the eta grid size or the outer-function FFT size",
    ],
    "psi_origin": [
        "Increase the outer-function FFT size",
    ],
    "sd_expansion": [
        "Use larger n or refine the h kernel grid",
    ],
    "bridge_sigma2": [
        "Check the condition estimate of the a/b systems",
        "Verify h against its complex form",
    ],
    "bridge_alpha": [
        "Check the condition estimate of the a/b systems",
    ],
    "second_order_coefficients": [
        "Compare a/b at n and 2n to isolate the O(n^-2) remainder",
    ],
    "vandermonde_identities": [
        "Keep nodes well separated; dense inversion loses digits for clustered zeta",
    ],
    "hilbert_continuity": [
        "Increase the tail length J of the generating bundle",
    ],
    "hilbert_boundary": [
        "Check Q boundary values against the extrapolated oracle",
    ],
    "hilbert_scaling": [
        "Evaluate closer to the origin",
    ],
    "appendix_e_parity": [
        "Run to larger n; the parity split converges at rate 1/n",
    ],
    "appendix_e_delta": [
        "Run to larger n",
    ],
    "contraction": [
        "Raise n above the estimated N0",
    ],
}


def assess_verdict(scores: dict, thresholds: dict = ACCEPTANCE_TOLERANCES):
    """
    scores maps a criterion to its measured error; a criterion is weak when the error
    exceeds its tolerance (or is not finite).
    """
    weak_areas = []
    for k, v in scores.items():
        limit = thresholds.get(k)
        if limit is None:
            continue
        if not (v <= limit):
            weak_areas.append(k)
    return ("fail" if weak_areas else "pass"), weak_areas
