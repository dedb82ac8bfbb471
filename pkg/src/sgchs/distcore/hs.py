"""Hyperbolic-secant law, its fourth-order GC-like expansion, and the
closed-form density of sums of independent HS variables.

The HS law used throughout is the standardized one, ``f(x) = sech(pi x / 2) / 2``,
with unit variance and kurtosis 5.
"""

import math

import numpy as np

from .._validation import check_probability, scalar_or_array
from .specs import Family, check_beta

LOG_HALF = math.log(0.5)
LOG_INV_PI = -math.log(math.pi)
LOG4 = math.log(4.0)
# squared norm of p4 under the HS law
P4_NORM = 576.0


def log_cosh(a):
    a = np.abs(a)
    return a + np.log1p(np.exp(-2.0 * a)) - math.log(2.0)


def log_x_over_sinh(a):
    """log(a / sinh(a)) for a >= 0, continuous through a = 0."""
    a = np.abs(np.asarray(a, dtype=float))
    small = a < 1e-3
    safe = np.where(small, 1.0, a)
    big = np.log(safe) - (safe + np.log(-np.expm1(-2.0 * safe)) - math.log(2.0))
    a2 = a * a
    series = -a2 / 6.0 + a2 * a2 / 180.0
    return np.where(small, series, big)


def hs_logpdf(x):
    x = np.asarray(x, dtype=float)
    return LOG_HALF - log_cosh(np.pi * x / 2.0)


def hs_pdf(x):
    """Standardized hyperbolic-secant density ``sech(pi x / 2) / 2``."""
    return scalar_or_array(np.exp(hs_logpdf(x)))


def hs_cdf(x):
    x = np.asarray(x, dtype=float)
    # arctan(e^t) = pi/2 - arctan(e^-t); use the form that keeps the small tail accurate
    t = np.pi * x / 2.0
    lower = (2.0 / np.pi) * np.arctan(np.exp(np.minimum(t, 0.0)))
    upper = 1.0 - (2.0 / np.pi) * np.arctan(np.exp(-np.maximum(t, 0.0)))
    return scalar_or_array(np.where(x <= 0, lower, upper))


def hs_sf(x):
    return scalar_or_array(hs_cdf(-np.asarray(x, dtype=float)))


def hs_quantile(u):
    """Inverse of :func:`hs_cdf`, ``(2/pi) log tan(pi u / 2)``."""
    u = check_probability(u)
    return scalar_or_array((2.0 / np.pi) * np.log(np.tan(np.pi * u / 2.0)))


def p4_hs(x):
    """Fourth monic orthogonal polynomial of the HS law."""
    x = np.asarray(x, dtype=float)
    x2 = x * x
    return scalar_or_array(x2 * x2 - 14.0 * x2 + 9.0)


def gchs_factor(x, beta):
    return 1.0 + (beta / P4_NORM) * p4_hs(x)


def gchs_pdf(x, beta, validate=True):
    """GC-like expansion of the HS law with excess kurtosis ``beta``.

    ``validate=False`` skips the ``0 <= beta <= 14.4`` check, which is only
    useful for probing the behaviour just past the feasibility boundary.
    """
    if validate:
        beta = check_beta(Family.HS, beta)
    return scalar_or_array(gchs_factor(x, beta) * hs_pdf(x))


def gchs_cf(omega, beta):
    """Characteristic function ``sech(w) (1 + beta/24 tanh(w)^4)``; real since the law is even."""
    beta = check_beta(Family.HS, beta)
    w = np.asarray(omega, dtype=float)
    return scalar_or_array(np.exp(-log_cosh(w)) * (1.0 + beta / 24.0 * np.tanh(w) ** 4))


def log_hs_sum_kernels(y, orders):
    """Log-densities of sums of ``N`` independent HS variables for each ``N`` in ``orders``.

    Returns an array of shape ``(len(orders),) + y.shape``. Odd ``N = 2M+1``::

        sech(pi y/2)/2 * 4^M/(2M)! * prod_{r=1..M} (y^2/4 + ((2r-1)/2)^2)

    and even ``N = 2M``::

        (y/2) csch(pi y/2) * 4^(M-1)/(2M-1)! * prod_{r=1..M-1} (y^2/4 + r^2)

    The products are accumulated as sums of logs and the factorials come
    from ``lgamma``; the even kernel at ``y = 0`` takes its limit ``1/pi``.
    """
    y = np.asarray(y, dtype=float)
    orders = [int(N) for N in orders]
    if any(N < 1 for N in orders):
        raise ValueError("kernel orders must be >= 1")
    q = y * y / 4.0
    max_m = max(N // 2 for N in orders)
    odd_cum = [np.zeros_like(q)]
    even_cum = [np.zeros_like(q)]
    for r in range(1, max_m + 1):
        odd_cum.append(odd_cum[-1] + np.log(q + ((2 * r - 1) / 2.0) ** 2))
        even_cum.append(even_cum[-1] + np.log(q + float(r * r)))
    a = np.pi * np.abs(y) / 2.0
    odd_base = LOG_HALF - log_cosh(a)
    even_base = LOG_INV_PI + log_x_over_sinh(a)
    out = np.empty((len(orders),) + y.shape)
    for k, N in enumerate(orders):
        if N % 2:
            M = (N - 1) // 2
            out[k] = odd_base + M * LOG4 - math.lgamma(2 * M + 1) + odd_cum[M]
        else:
            M = N // 2
            out[k] = even_base + (M - 1) * LOG4 - math.lgamma(2 * M) + even_cum[M - 1]
    return out


def sum_hs_pdf(y, n):
    """Density of the sum of ``n`` independent standardized HS variables."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    return scalar_or_array(np.exp(log_hs_sum_kernels(y, [int(n)])[0]))


def clh_pdf(y):
    """Convoluted linear hyperbolic density ``(y/2) csch(pi y / 2)``."""
    y = np.asarray(y, dtype=float)
    return scalar_or_array(np.exp(LOG_INV_PI + log_x_over_sinh(np.pi * np.abs(y) / 2.0)))
