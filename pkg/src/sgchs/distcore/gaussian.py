"""Gram-Charlier expansion of the Gaussian law and its independent sums."""

import math

import numpy as np

from .._validation import scalar_or_array
from ..exceptions import InputError
from .coeffs import b_coeffs
from .numeric import neumaier_sum
from .specs import Family, check_beta, as_sum_spec

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _double_factorial_odd(i):
    # (2i - 1)!!, with (-1)!! = 1
    return math.prod(range(1, 2 * i, 2))


def hermite_coeffs(k):
    """Integer coefficients of the probabilists' Hermite polynomial He_k, highest power first."""
    coeffs = np.zeros(k + 1)
    for i in range(k // 2 + 1):
        coeffs[2 * i] = (-1) ** i * _double_factorial_odd(i) * math.comb(k, 2 * i)
    return coeffs


def hermite_p4j(z, j):
    """Hermite polynomial of degree ``4j``: ``sum_i (-1)^i (2i-1)!! C(4j, 2i) z^(4j-2i)``."""
    if int(j) != j or j < 0:
        raise InputError(f"j must be a non-negative integer, got {j!r}")
    return scalar_or_array(np.polyval(hermite_coeffs(4 * int(j)), np.asarray(z, dtype=float)))


def normal_pdf(x, var=1.0):
    x = np.asarray(x, dtype=float)
    return np.exp(-x * x / (2.0 * var) - _LOG_SQRT_2PI - 0.5 * math.log(var))


def gcn_factor(x, beta):
    return 1.0 + beta / 24.0 * hermite_p4j(x, 1)


def gcn_pdf(x, beta, validate=True):
    """GC expansion of the standard normal: ``(1 + beta/24 (x^4 - 6x^2 + 3)) phi(x)``."""
    if validate:
        beta = check_beta(Family.GAUSSIAN, beta)
    return scalar_or_array(gcn_factor(x, beta) * normal_pdf(x))


def gcn_cf(omega, beta):
    beta = check_beta(Family.GAUSSIAN, beta)
    w = np.asarray(omega, dtype=float)
    return scalar_or_array(np.exp(-w * w / 2.0) * (1.0 + beta / 24.0 * w**4))


def sgcn_pdf(y, spec):
    """Density of a sum of ``n`` independent GCN margins, on the raw scale of the sum (variance n).

    ``f(y) = sum_j b_j n^(-2j) He_4j(y / sqrt(n)) phi(y / sqrt(n)) / sqrt(n)``,
    with ``b_j`` the elementary symmetric sums of ``beta_k / 24``.
    """
    spec = as_sum_spec(spec)
    if any(f is not Family.GAUSSIAN for f in spec.families):
        raise InputError("SGCN density needs Gaussian margins only")
    if not spec.independent:
        raise InputError("closed-form SGCN density assumes independent margins (no gammas)")
    n = spec.n
    b = b_coeffs(spec.betas).values
    y = np.asarray(y, dtype=float)
    z = y / math.sqrt(n)
    base = normal_pdf(y, var=float(n))
    terms = [b[j] * n ** (-2.0 * j) * hermite_p4j(z, j) * base for j in range(n + 1) if b[j] != 0]
    return scalar_or_array(neumaier_sum(np.array(terms)))
