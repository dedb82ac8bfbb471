"""Goodness of fit and VaR/ES backtests.

All tail quantities follow the lower-tail signed convention of
:mod:`sgchs.risk`: an exceedance is a return at or below the VaR threshold,
and VaR and ES are negative numbers for the usual small ``alpha``.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import stats
from scipy.special import xlogy

from ._validation import as_1d, check_alpha, check_rng
from .exceptions import InputError, NoExceedanceError
from .risk import Law, block_indices, default_block_length, empirical_var, model_es, model_var

MIN_REPLICATES = 100


def _check_B(B):
    if int(B) != B or B < MIN_REPLICATES:
        raise InputError(f"number of replicates must be an integer >= {MIN_REPLICATES}, got {B!r}")
    return int(B)


# ---------------------------------------------------------------------------
# goodness of fit


def ks_statistic(sample, law):
    x = np.sort(as_1d(sample, "sample"))
    T = x.size
    F = law.cdf(x)
    i = np.arange(1, T + 1)
    return float(max(np.max(i / T - F), np.max(F - (i - 1) / T)))


def ad_statistic(sample, law):
    """Anderson-Darling ``A^2`` with the upper tail taken from the survival function."""
    x = np.sort(as_1d(sample, "sample"))
    T = x.size
    tiny = np.finfo(float).tiny
    logF = np.log(np.maximum(law.cdf(x), tiny))
    logS = np.log(np.maximum(law.sf(x), tiny))
    i = np.arange(1, T + 1)
    return float(-T - np.sum((2 * i - 1) * (logF + logS[::-1])) / T)


@dataclass(frozen=True)
class GofResult:
    statistic: float
    pvalue: float


def simulate(spec, size, rng):
    """Draws from the law of ``spec`` by inverse CDF (interpolated quantile)."""
    return np.asarray(Law(spec).approx.ppf(rng.random(size)), dtype=float)


def _gof_test(stat_fn, sample, spec, B, seed, refit, draws=None):
    law = Law(spec)
    x = as_1d(sample, "sample")
    observed = stat_fn(x, law)
    B = _check_B(B)
    if draws is None:
        draws = simulate(spec, (B, x.size), check_rng(seed))
    sims = np.empty(B)
    for b, draw in enumerate(draws[:B]):
        ref = Law(refit(draw)) if refit is not None else law
        sims[b] = stat_fn(draw, ref.approx)
    return GofResult(observed, float(np.mean(sims >= observed)))


def ks_test(sample, spec, B=1000, seed=None, refit=None, draws=None):
    """Kolmogorov-Smirnov test against the model CDF.

    The p-value is the share of ``B`` samples simulated from ``spec`` whose
    statistic is at least the observed one. Pass ``refit`` (a callable
    mapping a sample to a spec) to re-estimate on each simulated sample, or
    ``draws`` (a ``(B, T)`` array) to reuse simulated samples.
    """
    return _gof_test(ks_statistic, sample, spec, B, seed, refit, draws)


def ad_test(sample, spec, B=1000, seed=None, refit=None, draws=None):
    """Anderson-Darling test with a parametric-simulation p-value (see :func:`ks_test`)."""
    return _gof_test(ad_statistic, sample, spec, B, seed, refit, draws)


# ---------------------------------------------------------------------------
# coverage and loss functions


def kupiec(N, T, alpha):
    """Unconditional-coverage likelihood ratio and its chi-square(1) p-value.

    ``0 log 0`` is taken as 0, so ``N = 0`` and ``N = T`` are covered.
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise InputError(f"alpha must lie in (0, 1), got {alpha!r}")
    if int(N) != N or int(T) != T or not 0 <= N <= T or T < 1:
        raise InputError(f"need integers 0 <= N <= T with T >= 1, got N={N!r}, T={T!r}")
    N, T = int(N), int(T)
    pi = N / T
    null = xlogy(T - N, 1.0 - alpha) + xlogy(N, alpha)
    alt = xlogy(T - N, 1.0 - pi) + xlogy(N, pi)
    lr = max(0.0, float(-2.0 * (null - alt)))
    return lr, float(stats.chi2.sf(lr, 1))


def exceedances(returns, var_threshold):
    x = as_1d(returns, "returns")
    return x <= var_threshold


def loss_functions(returns, var_threshold):
    """Average binary and quadratic loss: ``mean(I)`` and ``mean(I (1 + (x - VaR)^2))``."""
    x = as_1d(returns, "returns")
    hit = x <= var_threshold
    return float(np.mean(hit)), float(np.mean(hit * (1.0 + (x - var_threshold) ** 2)))


def z1_statistic(returns, var_emp, es_model):
    """``Z1 = 1 - mean(x_t | x_t <= VaR) / ES``; about zero when ES is right.

    Negative values mean exceedances are deeper than the model ES.
    """
    x = as_1d(returns, "returns")
    hit = x <= var_emp
    if not hit.any():
        raise NoExceedanceError("Z1 is undefined without exceedances")
    return float(1.0 - np.mean(x[hit]) / es_model)


def z2_statistic(returns, var_emp, es_model, alpha):
    """``Z2 = 1 - sum(x_t I_t) / (T alpha ES)``; equals 1 with no exceedances."""
    alpha = check_alpha(alpha)
    x = as_1d(returns, "returns")
    hit = x <= var_emp
    return float(1.0 - np.sum(x * hit) / (x.size * alpha * es_model))


def _z_batch(draws, kind, var_emp, es_model, alpha):
    """Z statistics for each row of ``draws``; NaN where Z1 has no exceedance."""
    hit = draws <= var_emp
    s = np.sum(draws * hit, axis=1)
    if kind == "z2":
        return 1.0 - s / (draws.shape[1] * alpha * es_model)
    n = hit.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(n > 0, 1.0 - s / n / es_model, np.nan)


def bootstrap_pvalue(z_observed, spec, kind, B=1000, seed=None, *, var_emp, es_model, alpha,
                     T, sample=None, block_len=None, draws=None):
    """``p = mean(Z*_b < Z_observed)`` over ``B`` replicate statistics.

    By default each replicate is a length-``T`` sample simulated from
    ``spec``, so under the null the p-value is uniform on (0, 1). Passing
    ``sample`` instead resamples that series by circular moving blocks;
    ``draws`` supplies a ready ``(B, T)`` replicate matrix.
    For Z1, replicates without exceedances are discarded (the statistic
    is conditional on at least one exceedance).
    """
    if kind not in ("z1", "z2"):
        raise InputError(f"kind must be 'z1' or 'z2', got {kind!r}")
    B = _check_B(B)
    alpha = check_alpha(alpha)
    rng = check_rng(seed)
    if draws is not None:
        draws = np.asarray(draws, dtype=float)[:B]
    elif sample is None:
        draws = simulate(spec, (B, int(T)), rng)
    else:
        x = as_1d(sample, "sample")
        bl = default_block_length(x.size) if block_len is None else int(block_len)
        draws = x[block_indices(x.size, min(bl, x.size), B, rng)]
    z = _z_batch(np.atleast_2d(draws), kind, var_emp, es_model, alpha)
    z = z[np.isfinite(z)]
    if z.size == 0:
        raise NoExceedanceError("no replicate produced an exceedance")
    return float(np.mean(z < z_observed))


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class BacktestRow:
    model: str
    alpha: float
    var_model: float
    es_model: float
    var_emp: float
    N: int
    T: int
    kupiec_lr: float
    kupiec_p: float
    ablf: float
    aqlf: float
    z1: Optional[float]
    z1_p: Optional[float]
    z2: float
    z2_p: float


@dataclass
class BacktestReport:
    """Per-model, per-alpha out-of-sample results plus in-sample GoF tests."""

    rows: List[BacktestRow]
    gof: Dict[str, Dict[str, GofResult]] = field(default_factory=dict)
    B: int = 1000
    seed: Optional[int] = None

    def row(self, model, alpha):
        for r in self.rows:
            if r.model == model and r.alpha == alpha:
                return r
        raise KeyError((model, alpha))


def backtest(period1, period2, specs, alphas, B=1000, seed=None, gof_B=None, refit=None):
    """Backtest fitted laws of the standardized portfolio sum.

    ``period1`` is the in-sample series used for fitting, ``period2`` the
    out-of-sample series (same standardization). Kupiec and the loss
    functions use the model VaR; Z1 and Z2 use the period-one empirical VaR
    as exceedance threshold with the model ES. ``gof_B`` replications
    (default ``B``) give the in-sample KS and AD p-values.
    """
    x1 = as_1d(period1, "period1")
    x2 = as_1d(period2, "period2")
    B = _check_B(B)
    gof_B = B if gof_B is None else _check_B(gof_B)
    rng = check_rng(seed)
    rows, gof = [], {}
    for name, spec in specs.items():
        # one set of simulated samples per model serves every alpha and statistic
        sims1 = simulate(spec, (gof_B, x1.size), rng)
        sims2 = simulate(spec, (B, x2.size), rng)
        gof[name] = {
            "KS": ks_test(x1, spec, gof_B, refit=refit, draws=sims1),
            "AD": ad_test(x1, spec, gof_B, refit=refit, draws=sims1),
        }
        for a in alphas:
            a = check_alpha(a)
            vm, em = model_var(spec, a), model_es(spec, a)
            ve = empirical_var(x1, a)
            N = int(np.sum(x2 <= vm))
            lr, lr_p = kupiec(N, x2.size, a)
            ablf, aqlf = loss_functions(x2, vm)
            common = dict(var_emp=ve, es_model=em, alpha=a, T=x2.size, draws=sims2)
            try:
                z1 = z1_statistic(x2, ve, em)
                z1_p = bootstrap_pvalue(z1, spec, "z1", B, **common)
            except NoExceedanceError:
                z1 = z1_p = None
            z2 = z2_statistic(x2, ve, em, a)
            z2_p = bootstrap_pvalue(z2, spec, "z2", B, **common)
            rows.append(BacktestRow(name, a, vm, em, ve, N, x2.size, lr, lr_p, ablf, aqlf,
                                    z1, z1_p, z2, z2_p))
    return BacktestReport(rows, gof, B, seed if isinstance(seed, int) else None)
