"""
Quadrature and extrapolation helpers shared by the analytic and integral-equation modules.
"""

import numpy as np
from scipy.interpolate import BarycentricInterpolator


def gauss_legendre_panels(lo: float, hi: float, panels: int, order: int):
    """
    Composite Gauss-Legendre rule on [lo, hi] with equal-width panels.
    Returns (nodes, weights).
    """
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def log_graded_rule(lo: float, hi: float, panels: int, order: int):
    """
    Gauss-Legendre panels uniform in log(t) on [lo, hi], lo > 0.
    Nodes cluster geometrically toward lo; weights include the Jacobian t.
    """
    x, w = gauss_legendre_panels(np.log(lo), np.log(hi), panels, order)
    t = np.exp(x)
    return t, w * t


def extrapolate_to_zero(steps, values):
    """
    Polynomial extrapolation of values(h) to h = 0 (Richardson in its Neville form).
    Works for complex values.
    """
    steps = np.asarray(steps, dtype=float)
    values = np.asarray(values)
    real = BarycentricInterpolator(steps, values.real)(0.0)
    if np.iscomplexobj(values):
        return complex(real, BarycentricInterpolator(steps, values.imag)(0.0))
    return float(real)


def series_with_tail(coeffs, w, order: int = 6):
    """
    Sum of coeffs[m] * w**m over m >= 0 for |w| <= 1, w != 1.

    The terms beyond the available coefficients are accounted for by repeated
    summation by parts on the last `order` coefficients, which requires the
    sequence to be smooth in m there. Returns (value, tail_error_estimate).
    """
    a = np.asarray(coeffs)
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    J = a.size - 1
    M = J - order + 1
    if M < 1:
        raise ValueError("not enough coefficients for the requested tail order")
    m = np.arange(M)
    head = (w[:, None] ** m[None, :]) @ a[:M]
    tail = np.zeros_like(w)
    one_minus = 1.0 - w
    last = None
    for r in range(order):
        b = np.diff(a[M:M + r + 1], n=r)[0] if r > 0 else a[M]
        last = b * w ** (M + r) / one_minus ** (r + 1)
        tail = tail + last
    return head + tail, np.abs(last) / np.abs(one_minus)
