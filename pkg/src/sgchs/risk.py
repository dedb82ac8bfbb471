"""Distribution functions, Value-at-Risk and Expected Shortfall.

Convention: ``X`` is a portfolio return and both measures refer to its lower
tail. ``VaR_alpha`` is the lower ``alpha``-quantile and ``ES_alpha`` the mean
of ``X`` below it; both are signed, so losses come out negative and
``ES_alpha <= VaR_alpha``.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import integrate, optimize

from ._validation import as_1d, check_alpha, check_probability, check_rng, scalar_or_array
from .distcore.hs import hs_cdf, hs_quantile, hs_sf
from .distcore.numeric import CDFTable, LogTailInterpolant
from .distcore.specs import Family, MarginSpec, as_sum_spec
from .distcore.sums import density, radius
from .exceptions import ConvergenceError, InputError

DEFAULT_ALPHAS = (0.005, 0.01, 0.025, 0.05)
_QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-12, limit=400)


def _canonical(spec):
    if isinstance(spec, MarginSpec):
        return spec
    spec = as_sum_spec(spec)
    if spec.n == 1 and spec.gammas is None:
        return spec.margins[0]
    return spec


def _is_plain_hs(spec):
    return isinstance(spec, MarginSpec) and spec.family is Family.HS and spec.beta == 0.0


class Law:
    """Vectorized pdf/cdf/sf/ppf for any supported law.

    The plain HS margin uses its closed forms. Everything else goes through a
    cached :class:`~sgchs.distcore.numeric.CDFTable` built on the truncated
    support ``[-L, L]`` where the density falls below 1e-17.
    """

    def __init__(self, spec):
        self.spec = _canonical(spec)

    def __repr__(self):
        return f"Law({self.spec!r})"

    def pdf(self, x):
        return density(x, self.spec)

    @property
    def radius(self):
        return radius(self.spec)

    @property
    def table(self):
        return _table(self.spec)

    @property
    def approx(self):
        """Interpolated cdf/sf/ppf (relative error about 1e-7), cheap enough
        for the millions of evaluations of simulation-based p-values."""
        if _is_plain_hs(self.spec):
            return self
        return _interpolant(self.spec)

    def cdf(self, x):
        if _is_plain_hs(self.spec):
            return hs_cdf(x)
        return scalar_or_array(self.table.cdf(x))

    def sf(self, x):
        if _is_plain_hs(self.spec):
            return hs_sf(x)
        return scalar_or_array(self.table.sf(x))

    def ppf(self, u):
        u = check_probability(u)
        if _is_plain_hs(self.spec):
            return hs_quantile(u)
        return scalar_or_array(self.table.ppf(u))


@lru_cache(maxsize=64)
def _table(spec):
    lim = radius(spec)
    return CDFTable(lambda x: density(x, spec), -lim, lim)


@lru_cache(maxsize=64)
def _interpolant(spec):
    return LogTailInterpolant(_table(spec))


def model_cdf(spec, x):
    """``P(X <= x)`` by adaptive quadrature of the density.

    Left of the origin the density is integrated from the left truncation
    point; right of it the complementary integral to the right truncation
    point is subtracted, which keeps both tails accurate.
    """
    spec = _canonical(spec)
    lim = radius(spec)
    out = []
    for xi in np.atleast_1d(np.asarray(x, dtype=float)).ravel():
        if xi <= -lim:
            out.append(0.0)
        elif xi >= lim:
            out.append(1.0)
        elif xi <= 0.0:
            out.append(_integrate(spec, -lim, xi))
        else:
            out.append(1.0 - _integrate(spec, xi, lim))
    return scalar_or_array(np.reshape(out, np.shape(x)))


def _integrate(spec, a, b, moment=0):
    def f(t):
        return float(t**moment * density(t, spec))

    val, _ = integrate.quad(f, a, b, **_QUAD_OPTS)
    return val


def model_quantile(spec, u, tol=1e-10):
    """Inverse of :func:`model_cdf` by Brent's method on an expanding bracket.

    The bracket is centred on the tabulated quantile ``x0``; the residual
    ``F(x) - u`` is evaluated as ``F(x0) + int_{x0}^{x} f - u`` so that each
    step only integrates a short stretch. Upper-half probabilities are
    solved on the survival function. ``tol`` is in probability.
    """
    spec = _canonical(spec)
    u = float(check_probability(u))
    x0 = float(Law(spec).ppf(u))
    if u <= 0.5:
        target = u
        base = float(model_cdf(spec, x0))
        sign = 1.0
    else:
        # work with the survival function so the upper tail keeps relative accuracy
        target = 1.0 - u
        base = 1.0 - float(model_cdf(spec, x0)) if x0 <= 0.0 else _integrate(spec, x0, radius(spec))
        sign = -1.0

    def resid(x):
        return sign * (base - target) + _integrate(spec, x0, x)

    if abs(resid(x0)) <= 1e-15:
        return x0
    step = 1e-6 * max(1.0, abs(x0))
    a, b = x0 - step, x0 + step
    fa, fb = resid(a), resid(b)
    for _ in range(60):
        if fa <= 0.0 <= fb:
            break
        step *= 4.0
        if fa > 0.0:
            b, fb = a, fa
            a = x0 - step
            fa = resid(a)
        else:
            a, fa = b, fb
            b = x0 + step
            fb = resid(b)
    else:
        raise ConvergenceError(f"could not bracket the {u} quantile")
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    x = optimize.brentq(resid, a, b, xtol=1e-15, rtol=1e-15, maxiter=200)
    if abs(resid(x)) > tol:
        raise ConvergenceError(f"quantile residual {resid(x):.2e} above tolerance")
    return float(x)


def model_var(spec, alpha):
    """Lower-tail Value-at-Risk: the ``alpha``-quantile of the return law."""
    return model_quantile(spec, check_alpha(alpha))


def model_es(spec, alpha):
    """Lower-tail Expected Shortfall ``(1/alpha) int_{-inf}^{VaR} x dF(x)``."""
    alpha = check_alpha(alpha)
    spec = _canonical(spec)
    var = model_var(spec, alpha)
    lim = radius(spec)
    return _integrate(spec, -lim, var, moment=1) / alpha


def _order_index(T, alpha):
    # ceil(alpha T) as an exact count; the rounding guards products like 0.05 * 100
    return max(1, math.ceil(round(alpha * T, 9)))


def empirical_var(sample, alpha):
    """Lower empirical quantile ``x_(ceil(alpha T))`` (inverse empirical CDF)."""
    alpha = check_alpha(alpha)
    x = np.sort(as_1d(sample, "sample"))
    if x.size * alpha < 1.0 - 1e-12:
        raise InputError(f"sample of size {x.size} is too small for alpha={alpha}; need at least {math.ceil(1 / alpha)}")
    return float(x[_order_index(x.size, alpha) - 1])


def empirical_es(sample, alpha):
    """Mean of the observations at or below the empirical VaR."""
    x = as_1d(sample, "sample")
    var = empirical_var(x, alpha)
    # shortfall measured from VaR, so a tail of equal values gives ES == VaR exactly
    return float(var + np.mean(x[x <= var] - var))


@dataclass(frozen=True)
class BootstrapResult:
    lower: float
    upper: float
    replicates: np.ndarray


def default_block_length(T):
    return max(1, math.ceil(T ** (1.0 / 3.0)))


def block_indices(T, block_len, R, rng):
    """``(R, T)`` indices of circular moving-block resamples."""
    n_blocks = math.ceil(T / block_len)
    starts = rng.integers(0, T, size=(R, n_blocks))
    idx = (starts[..., None] + np.arange(block_len)) % T
    return idx.reshape(R, -1)[:, :T]


def block_bootstrap(sample, statistic, R=1000, block_len=None, confidence=0.99, seed=None):
    """Circular moving-block bootstrap with a percentile interval.

    Parameters
    ----------
    sample : array_like, shape (T,)
    statistic : callable
        Maps a resampled series to a float.
    R : int
        Number of replicates (at least 100).
    block_len : int, optional
        Defaults to ``ceil(T ** (1/3))``.
    confidence : float
        Two-sided coverage of the percentile interval.
    seed : int or Generator, optional

    Returns
    -------
    BootstrapResult
    """
    x = as_1d(sample, "sample")
    T = x.size
    if int(R) != R or R < 100:
        raise InputError(f"R must be an integer >= 100, got {R!r}")
    if block_len is None:
        block_len = default_block_length(T)
    if int(block_len) != block_len or block_len < 1:
        raise InputError(f"block_len must be a positive integer, got {block_len!r}")
    if not 0.0 < confidence < 1.0:
        raise InputError(f"confidence must lie in (0, 1), got {confidence!r}")
    rng = check_rng(seed)
    idx = block_indices(T, min(int(block_len), T), int(R), rng)
    reps = np.array([statistic(x[row]) for row in idx], dtype=float)
    tail = (1.0 - confidence) / 2.0
    lo, hi = np.quantile(reps, [tail, 1.0 - tail])
    return BootstrapResult(float(lo), float(hi), reps)


@dataclass
class RiskReport:
    """Per-alpha VaR/ES for each model plus empirical values and bootstrap bounds.

    ``model_var[name]`` and ``model_es[name]`` are arrays aligned with
    ``alphas``; ``bounds`` maps ``"var"``/``"es"`` to ``(lower, upper)`` arrays.
    """

    alphas: Tuple[float, ...]
    model_var: Dict[str, np.ndarray]
    model_es: Dict[str, np.ndarray]
    empirical_var: np.ndarray
    empirical_es: np.ndarray
    bounds: Dict[str, Tuple[np.ndarray, np.ndarray]]
    confidence: float
    R: int
    block_len: int
    seed: Optional[int] = None


def risk_report(returns, specs, alphas=DEFAULT_ALPHAS, R=1000, block_len=None,
                confidence=0.99, seed=None):
    """Model and empirical VaR/ES on an alpha grid.

    ``specs`` maps model names to laws of the (standardized) portfolio sum.
    Bootstrap intervals for the empirical measures share one set of block
    resamples across alphas.
    """
    x = as_1d(returns, "returns")
    alphas = tuple(check_alpha(a) for a in alphas)
    block_len = default_block_length(x.size) if block_len is None else int(block_len)
    mv = {name: np.array([model_var(s, a) for a in alphas]) for name, s in specs.items()}
    me = {name: np.array([model_es(s, a) for a in alphas]) for name, s in specs.items()}
    ev = np.array([empirical_var(x, a) for a in alphas])
    ee = np.array([empirical_es(x, a) for a in alphas])

    def stat(sample):
        return np.concatenate([[empirical_var(sample, a) for a in alphas],
                               [empirical_es(sample, a) for a in alphas]])

    if int(R) != R or R < 100:
        raise InputError(f"R must be an integer >= 100, got {R!r}")
    rng = check_rng(seed)
    idx = block_indices(x.size, min(block_len, x.size), int(R), rng)
    reps = np.array([stat(x[row]) for row in idx])
    tail = (1.0 - confidence) / 2.0
    lo, hi = np.quantile(reps, [tail, 1.0 - tail], axis=0)
    k = len(alphas)
    bounds = {"var": (lo[:k], hi[:k]), "es": (lo[k:], hi[k:])}
    return RiskReport(alphas, mv, me, ev, ee, bounds, float(confidence), int(R), block_len,
                      seed if isinstance(seed, int) else None)
