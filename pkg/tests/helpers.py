import numpy as np


def series_with_kurtosis(K, T=1000, m=400, k=10, seed=0):
    """Symmetric series whose moment kurtosis equals ``K`` up to rounding.

    Values are ``0`` (T - 2m - 2k times), ``+-1`` (m times each) and
    ``+-c`` (k times each), with ``c^2`` solving the quadratic that makes
    the fourth-to-squared-second moment ratio equal ``K``.
    """
    a = 2 * K * k * k - T * k
    b = 4 * K * m * k
    c0 = 2 * K * m * m - T * m
    s = (-b + np.sqrt(b * b - 4 * a * c0)) / (2 * a)
    if not s > 0:
        s = (-b - np.sqrt(b * b - 4 * a * c0)) / (2 * a)
    c = np.sqrt(s)
    x = np.concatenate([np.zeros(T - 2 * m - 2 * k), np.ones(m), -np.ones(m), np.full(k, c), np.full(k, -c)])
    return np.random.default_rng(seed).permutation(x)
