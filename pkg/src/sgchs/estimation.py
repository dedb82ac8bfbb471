"""Fitting portfolio-sum models to standardized return panels.

Two estimators are provided. The method of moments reads each ``beta``
off the sample kurtosis and each ``gamma`` off the mean product of squares.
The two-step inference-functions-for-margins (IFM) estimator first maximizes
each marginal likelihood over its ``beta`` and then each pairwise copula
likelihood over its ``gamma`` with the margins held at their step-one values.

Every step-one and step-two objective has the form ``sum_t log(1 + theta a_t)``,
which is concave in ``theta``; the maximizer is the root of the gradient
(or an end point of the feasible interval). Leave-one-out refits reuse the
same structure and are solved for all left-out indices at once by a
projected Newton iteration.
"""

import hashlib
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, stats
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .copula import RPolynomial, _R_SHAPE, gamma_bounds
from .distcore.gaussian import normal_pdf
from .distcore.hs import P4_NORM, hs_logpdf
from .distcore.specs import Family, MarginSpec, SumSpec
from .exceptions import ConvergenceError, InputError

MIN_LENGTH = 30


# ---------------------------------------------------------------------------
# panels and sample statistics


def sample_stats(x):
    """Mean, standard deviation, skewness and kurtosis (moment estimators).

    The kurtosis is the standardized fourth moment, not the excess.
    """
    x = np.asarray(x, dtype=float)
    m = x.mean()
    d = x - m
    var = np.mean(d * d)
    sd = math.sqrt(var)
    return float(m), sd, float(np.mean(d**3) / sd**3), float(np.mean(d**4) / var**2)


def standardize(raw, location=None, scale=None):
    """Centre and scale ``raw``; returns ``(z, location, scale)``.

    ``location`` and ``scale`` default to the sample mean and the moment
    (ddof=0) standard deviation. Passing them reuses earlier parameters,
    e.g. period-one values applied to period-two data.
    """
    raw = np.asarray(raw, dtype=float)
    if location is None or scale is None:
        if raw.shape[0] < MIN_LENGTH:
            raise InputError(f"need at least {MIN_LENGTH} observations, got {raw.shape[0]}")
        location = raw.mean(axis=0)
        scale = raw.std(axis=0)
        if np.any(scale <= 0.0):
            raise InputError("series has zero variance")
    return (raw - location) / scale, location, scale


@dataclass(frozen=True)
class ReturnPanel:
    """Aligned standardized return series, one column per asset."""

    series: np.ndarray
    labels: Tuple[str, ...]
    location: np.ndarray
    scale: np.ndarray

    @classmethod
    def from_raw(cls, raw, labels=None):
        raw = np.asarray(raw, dtype=float)
        if raw.ndim == 1:
            raw = raw[:, None]
        if not np.all(np.isfinite(raw)):
            raise InputError("return panel contains missing or non-finite values")
        z, loc, scale = standardize(raw)
        labels = tuple(labels) if labels is not None else tuple(f"X{i + 1}" for i in range(raw.shape[1]))
        if len(labels) != raw.shape[1]:
            raise InputError("one label per series is required")
        return cls(z, labels, np.atleast_1d(loc), np.atleast_1d(scale))

    @classmethod
    def from_standardized(cls, z, labels=None):
        """Wrap data already on the model scale (e.g. draws from a spec) without re-standardizing."""
        z = np.asarray(z, dtype=float)
        if z.ndim == 1:
            z = z[:, None]
        n = z.shape[1]
        labels = tuple(labels) if labels is not None else tuple(f"X{i + 1}" for i in range(n))
        return cls(z, labels, np.zeros(n), np.ones(n))

    @property
    def T(self):
        return self.series.shape[0]

    @property
    def n(self):
        return self.series.shape[1]

    @property
    def fingerprint(self):
        return hashlib.sha256(np.ascontiguousarray(self.series).tobytes()).hexdigest()[:16]


def _as_panel(panel):
    if isinstance(panel, ReturnPanel):
        return panel
    return ReturnPanel.from_standardized(panel)


# ---------------------------------------------------------------------------
# reports


def model_name(families, copula):
    fams = set(families)
    if fams == {Family.HS}:
        base = "SGCHS"
    elif fams == {Family.GAUSSIAN}:
        base = "SGCN"
    else:
        base = "SGCHSN"
    return base + ("-C" if copula else "")


def parameter_names(n, copula):
    names = [f"beta_{i + 1}" for i in range(n)]
    if copula:
        names += [f"gamma_{i + 1}{i + 2}" for i in range(n - 1)]
    return tuple(names)


@dataclass
class FitReport:
    """Estimates, uncertainty and model-comparison output of one fit.

    ``feasible[k]`` is False when estimate ``k`` lies outside its admissible
    set; such values are reported as computed, never clamped.
    """

    model: str
    method: str
    families: Tuple[Family, ...]
    labels: Tuple[str, ...]
    names: Tuple[str, ...]
    estimates: np.ndarray
    feasible: Tuple[bool, ...]
    std_errors: Optional[np.ndarray] = None
    covariance: Optional[np.ndarray] = None
    loglik: Optional[float] = None
    claic: Optional[float] = None
    lrt: Optional[Tuple[float, float]] = None
    n_obs: int = 0
    fingerprint: str = ""
    notes: Tuple[str, ...] = ()

    @property
    def copula(self):
        return any(nm.startswith("gamma") for nm in self.names)

    @property
    def n(self):
        return len(self.families)

    @property
    def betas(self):
        return tuple(float(v) for v in self.estimates[: self.n])

    @property
    def gammas(self):
        return tuple(float(v) for v in self.estimates[self.n:]) if self.copula else None

    @property
    def is_feasible(self):
        return all(self.feasible)

    @property
    def z_values(self):
        if self.std_errors is None:
            return None
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.estimates / self.std_errors

    @property
    def p_values(self):
        z = self.z_values
        return None if z is None else 2.0 * stats.norm.sf(np.abs(z))

    def to_spec(self):
        """The fitted :class:`SumSpec`; raises if an estimate is infeasible."""
        return SumSpec.from_betas(self.families, self.betas, self.gammas)


# ---------------------------------------------------------------------------
# concave one-parameter objectives  sum_t log(1 + theta a_t)


def _loglik_terms(theta, a):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log1p(theta * a)


def _gradient(theta, a):
    with np.errstate(divide="ignore", invalid="ignore"):
        return float(np.sum(a / (1.0 + theta * a)))


def argmax_log1p(a, lo, hi, xtol=1e-14):
    """Maximize ``sum log(1 + theta a_t)`` over ``[lo, hi]``.

    The objective is concave, so the maximizer is an end point when the
    gradient there points outward and otherwise the unique root of the
    gradient, found by Brent's method.
    """
    a = np.asarray(a, dtype=float)
    # clip to the domain 1 + theta a >= 0 so a too-wide interval is harmless
    if np.any(a < 0):
        hi = min(hi, float(np.min(-1.0 / a[a < 0])))
    if np.any(a > 0):
        lo = max(lo, float(np.max(-1.0 / a[a > 0])))
    if hi <= lo:
        return float(lo)
    width = hi - lo

    def endpoint(x, inward):
        g = _gradient(x, a)
        if np.isfinite(g):
            return x, g
        # data sits exactly on the boundary zero of the density; step inside
        for k in range(12, 3, -1):
            x2 = x + inward * width * 10.0**-k
            g = _gradient(x2, a)
            if np.isfinite(g):
                return x2, g
        raise ConvergenceError("objective is not finite near the feasible end point")

    lo_x, g_lo = endpoint(lo, 1.0)
    if g_lo <= 0.0:
        return float(lo) if lo_x == lo else float(lo_x)
    hi_x, g_hi = endpoint(hi, -1.0)
    if g_hi >= 0.0:
        return float(hi_x)
    return float(optimize.brentq(_gradient, lo_x, hi_x, args=(a,), xtol=xtol, rtol=1e-15))


def loo_argmax_log1p(A, theta0, lo, hi, max_iter=50, tol=1e-13, rows=None):
    """Leave-one-out maximizers for ``sum_{t != s} log(1 + theta A[k, t])``.

    Row ``k`` of ``A`` holds the terms used when observation ``s = rows[k]``
    is left out (its own entry is ignored); ``rows`` defaults to
    ``0..A.shape[0]-1``. Projected Newton from ``theta0``; ``theta0``,
    ``lo`` and ``hi`` may be per-row arrays.
    """
    K = A.shape[0]
    rows = np.arange(K) if rows is None else np.asarray(rows)
    A = np.array(A, dtype=float)
    A[np.arange(K), rows] = 0.0
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (K,))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (K,))
    theta = np.clip(np.broadcast_to(np.asarray(theta0, dtype=float), (K,)).copy(), lo, hi)
    active = np.flatnonzero(hi > lo)
    theta[hi <= lo] = lo[hi <= lo]
    for _ in range(max_iter):
        if active.size == 0:
            return theta
        Aa = A[active]
        th = theta[active]
        with np.errstate(divide="ignore", invalid="ignore"):
            q = Aa / (1.0 + th[:, None] * Aa)
        g = q.sum(axis=1)
        h = -(q * q).sum(axis=1)
        bad = ~np.isfinite(g) | ~np.isfinite(h)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(h < 0.0, -g / h, 0.0)
        new = np.clip(th + step, lo[active], hi[active])
        # a bound that was hit exactly can put a term on its zero; back off halfway
        new = np.where(bad, 0.5 * (th + np.clip(th, lo[active], hi[active])), new)
        done = (np.abs(new - th) <= tol * np.maximum(1.0, np.abs(th))) & ~bad
        theta[active] = new
        active = active[~done]
    if active.size:
        raise ConvergenceError(
            f"leave-one-out refit did not converge for {active.size} indices",
            index=int(rows[active[0]]),
        )
    return theta


# ---------------------------------------------------------------------------
# model pieces


def _base_logpdf(x, family):
    if family is Family.HS:
        return hs_logpdf(x)
    return np.log(normal_pdf(x))


def gc_weight(x, family):
    """``a(x)`` such that the margin density is ``f0(x) (1 + beta a(x))``."""
    x = np.asarray(x, dtype=float)
    x2 = x * x
    if family is Family.HS:
        return (x2 * x2 - 14.0 * x2 + 9.0) / P4_NORM
    return (x2 * x2 - 6.0 * x2 + 3.0) / 24.0


def _r_parts(x, beta, family):
    """``r``, ``dr/dbeta`` and ``d2r/dbeta2`` at points ``x`` (``beta`` broadcasts)."""
    s = _R_SHAPE[family]
    x2 = np.asarray(x, dtype=float) ** 2
    p4 = (x2 * x2 + s["p"] * x2 + s["q"]) / s["scale"]
    den = s["a"] + beta * p4
    r = (x2 - 1.0) / den
    k = p4 / den
    return r, -r * k, 2.0 * r * k * k


def margin_loglik(x, beta, family):
    return float(np.sum(_base_logpdf(x, family) + _loglik_terms(beta, gc_weight(x, family))))


def pair_weights(x, y, beta_x, beta_y, fam_x, fam_y):
    return _r_parts(x, beta_x, fam_x)[0] * _r_parts(y, beta_y, fam_y)[0]


def composite_loglik(Z, families, betas, gammas=None):
    """Log-likelihood of the chained model (margins plus consecutive copula terms).

    Because the copula density multiplies the product of margins, this is the
    exact joint log-likelihood of the panel.
    """
    total = sum(margin_loglik(Z[:, i], b, f) for i, (b, f) in enumerate(zip(betas, families)))
    if gammas is not None:
        for i, g in enumerate(gammas):
            a = pair_weights(Z[:, i], Z[:, i + 1], betas[i], betas[i + 1], families[i], families[i + 1])
            total += float(np.sum(_loglik_terms(g, a)))
    return total


def composite_hessian(Z, families, betas, gammas=None):
    """Analytic Hessian of :func:`composite_loglik` in ``(betas, gammas)``."""
    n = len(betas)
    k = n + (len(gammas) if gammas is not None else 0)
    H = np.zeros((k, k))
    for i, (b, f) in enumerate(zip(betas, families)):
        a = gc_weight(Z[:, i], f)
        H[i, i] -= np.sum((a / (1.0 + b * a)) ** 2)
    if gammas is None:
        return H
    for i, g in enumerate(gammas):
        j, c = i + 1, n + i
        u, u1, u2 = _r_parts(Z[:, i], betas[i], families[i])
        v, v1, v2 = _r_parts(Z[:, j], betas[j], families[j])
        D = 1.0 + g * u * v
        H[c, c] -= np.sum((u * v / D) ** 2)
        H[i, i] += np.sum(g * v * u2 / D - (g * v * u1 / D) ** 2)
        H[j, j] += np.sum(g * u * v2 / D - (g * u * v1 / D) ** 2)
        H[i, j] += np.sum(g * u1 * v1 / D**2)
        H[i, c] += np.sum(v * u1 / D**2)
        H[j, c] += np.sum(u * v1 / D**2)
    return np.triu(H) + np.triu(H, 1).T


# ---------------------------------------------------------------------------
# estimators


def _families(families, n):
    if families is None:
        families = [Family.HS] * n
    elif isinstance(families, (str, Family)):
        families = [families] * n
    families = tuple(Family.parse(f) for f in families)
    if len(families) != n:
        raise InputError(f"{len(families)} families given for {n} series")
    return families


LOO_CHUNK = 512


def _jackknife_cov(loo):
    """Jackknife covariance from a ``(T, k)`` matrix of leave-one-out estimates."""
    T = loo.shape[0]
    d = loo - loo.mean(axis=0)
    return (T - 1) / T * d.T @ d


def _loo_moments(x):
    """Leave-one-out kurtosis of ``x`` (moment estimator, re-centred)."""
    T = x.size
    s1 = x.sum()
    m = (s1 - x) / (T - 1)
    d = x[None, :] - m[:, None]
    np.fill_diagonal(d, 0.0)
    d2 = d * d
    var = d2.sum(axis=1) / (T - 1)
    return (d2 * d2).sum(axis=1) / (T - 1) / var**2, m, np.sqrt(var)


def mom_betas(kurtoses, families):
    """Moment estimates ``K_i - 5`` (HS) or ``K_i - 3`` (Gaussian) from plain kurtoses."""
    kurt = np.asarray(kurtoses, dtype=float)
    families = _families(families, kurt.size)
    return kurt - np.array([f.parent_kurtosis for f in families])


def estimate_mom(panel, families=None, copula=True, standard_errors=True):
    """Method-of-moments fit.

    ``beta_i = K_i - 5`` (HS) or ``K_i - 3`` (Gaussian) with ``K`` the sample
    kurtosis, and ``gamma_i = mean(x_i^2 x_{i+1}^2) - 1``. Estimates outside
    the admissible set are flagged in :attr:`FitReport.feasible`.
    """
    panel = _as_panel(panel)
    Z = panel.series
    n, T = panel.n, panel.T
    families = _families(families, n)
    copula = bool(copula) and n > 1
    betas = mom_betas([sample_stats(Z[:, i])[3] for i in range(n)], families)
    feasible = [0.0 <= b <= f.beta_max for b, f in zip(betas, families)]
    est = list(betas)
    notes = []
    for i, (b, f, ok) in enumerate(zip(betas, families, feasible)):
        if not ok:
            notes.append(
                f"beta_{i + 1}={b!r} exceeds the admissible interval [0, {f.beta_max}] "
                f"of the {f.value} expansion"
            )
    if copula:
        for i in range(n - 1):
            g = float(np.mean(Z[:, i] ** 2 * Z[:, i + 1] ** 2) - 1.0)
            est.append(g)
            if feasible[i] and feasible[i + 1]:
                gb = gamma_bounds(RPolynomial(families[i], betas[i]), RPolynomial(families[i + 1], betas[i + 1]))
                ok = g in gb
                if not ok:
                    notes.append(f"gamma_{i + 1}{i + 2}={g!r} lies outside [{gb.lower!r}, {gb.upper!r}]")
            else:
                ok = False
            feasible.append(ok)
    est = np.array(est, dtype=float)
    cov = se = None
    if standard_errors:
        cols = []
        parts = [_loo_moments(Z[:, i]) for i in range(n)]
        for i, f in enumerate(families):
            cols.append(parts[i][0] - f.parent_kurtosis)
        if copula:
            for i in range(n - 1):
                zi = (Z[:, i][None, :] - parts[i][1][:, None]) / parts[i][2][:, None]
                zj = (Z[:, i + 1][None, :] - parts[i + 1][1][:, None]) / parts[i + 1][2][:, None]
                prod = zi * zi * zj * zj
                np.fill_diagonal(prod, 0.0)
                cols.append(prod.sum(axis=1) / (T - 1) - 1.0)
        cov = _jackknife_cov(np.column_stack(cols))
        se = np.sqrt(np.diag(cov))
    return FitReport(
        model=model_name(families, copula),
        method="mom",
        families=families,
        labels=panel.labels,
        names=parameter_names(n, copula),
        estimates=est,
        feasible=tuple(bool(v) for v in feasible),
        std_errors=se,
        covariance=cov,
        n_obs=T,
        fingerprint=panel.fingerprint,
        notes=tuple(notes),
    )


def _ifm_betas(Z, families):
    return np.array([
        argmax_log1p(gc_weight(Z[:, i], f), 0.0, f.beta_max) for i, f in enumerate(families)
    ])


def _ifm_gammas(Z, families, betas):
    gammas, notes = [], []
    for i in range(len(betas) - 1):
        gb = gamma_bounds(RPolynomial(families[i], betas[i]), RPolynomial(families[i + 1], betas[i + 1]))
        if gb.degenerate:
            notes.append(f"gamma_{i + 1}{i + 2} fixed at 0: a margin with beta=0 admits no dependence")
            gammas.append(0.0)
            continue
        a = pair_weights(Z[:, i], Z[:, i + 1], betas[i], betas[i + 1], families[i], families[i + 1])
        gammas.append(argmax_log1p(a, gb.lower, gb.upper))
    return np.array(gammas), notes


def ifm_fit(panel, families=None, copula=True, standard_errors=True):
    """Two-step IFM maximum-likelihood fit.

    Step one maximizes each marginal likelihood over ``beta_i`` in
    ``[0, beta_max]``; step two maximizes each pairwise copula likelihood
    over ``gamma_i`` inside its positivity bounds given the step-one betas.
    With ``standard_errors`` the leave-one-out jackknife covariance, z- and
    p-values and the CLAIC are filled in.
    """
    panel = _as_panel(panel)
    Z = panel.series
    n = panel.n
    families = _families(families, n)
    copula = bool(copula) and n > 1
    betas = _ifm_betas(Z, families)
    notes = []
    est = list(betas)
    gammas = None
    if copula:
        gammas, notes = _ifm_gammas(Z, families, betas)
        est += list(gammas)
    report = FitReport(
        model=model_name(families, copula),
        method="ifm",
        families=families,
        labels=panel.labels,
        names=parameter_names(n, copula),
        estimates=np.array(est, dtype=float),
        feasible=(True,) * len(est),
        loglik=composite_loglik(Z, families, betas, gammas),
        n_obs=panel.T,
        fingerprint=panel.fingerprint,
        notes=tuple(notes),
    )
    if standard_errors:
        cov = godambe_jackknife(panel, report)
        report.covariance = cov
        report.std_errors = np.sqrt(np.diag(cov))
        report.claic = claic(report, panel)
    return report


def godambe_jackknife(panel, fitted):
    """Jackknife estimate of the IFM sandwich covariance ``H^-1 J H^-1``.

    Each leave-one-out refit repeats both IFM steps on ``T - 1`` observations,
    warm-started at the full-sample estimate.
    """
    panel = _as_panel(panel)
    if panel.fingerprint != fitted.fingerprint:
        raise InputError("fit and panel refer to different data")
    Z = panel.series
    T = panel.T
    families = fitted.families
    cols = [np.empty(T) for _ in fitted.estimates]
    # leave-one-out problems are solved LOO_CHUNK rows at a time to bound memory
    for start in range(0, T, LOO_CHUNK):
        rows = np.arange(start, min(start + LOO_CHUNK, T))
        loo_betas = []
        for i, (f, b) in enumerate(zip(families, fitted.betas)):
            a = gc_weight(Z[:, i], f)
            lb = loo_argmax_log1p(np.broadcast_to(a, (rows.size, T)), b, 0.0, f.beta_max, rows=rows)
            loo_betas.append(lb)
            cols[i][rows] = lb
        if fitted.copula:
            n = len(families)
            for i, g in enumerate(fitted.gammas):
                j = i + 1
                bi, bj = loo_betas[i], loo_betas[j]
                A = (_r_parts(Z[:, i][None, :], bi[:, None], families[i])[0]
                     * _r_parts(Z[:, j][None, :], bj[:, None], families[j])[0])
                bounds = [gamma_bounds(RPolynomial(families[i], x), RPolynomial(families[j], y))
                          for x, y in zip(bi, bj)]
                lo = np.array([gb.lower for gb in bounds])
                hi = np.array([gb.upper for gb in bounds])
                cols[n + i][rows] = loo_argmax_log1p(A, g, lo, hi, rows=rows)
    return _jackknife_cov(np.column_stack(cols))


def claic(fit, panel):
    """Composite-likelihood AIC: ``-2 l + 2 tr(J H^-1)``.

    With the jackknife covariance ``C`` estimating ``H^-1 J H^-1`` the
    penalty trace equals ``tr(H C)``, where ``H`` is the observed negative
    Hessian of the composite log-likelihood.
    """
    panel = _as_panel(panel)
    if panel.fingerprint != fit.fingerprint:
        raise InputError("fit and panel refer to different data")
    if fit.covariance is None:
        raise InputError("claic needs a fit with a jackknife covariance")
    H = -composite_hessian(panel.series, fit.families, fit.betas, fit.gammas)
    loglik = fit.loglik if fit.loglik is not None else composite_loglik(
        panel.series, fit.families, fit.betas, fit.gammas)
    return float(-2.0 * loglik + 2.0 * np.trace(H @ fit.covariance))


def lrt_gamma_zero(fit_with, fit_without):
    """Likelihood-ratio test of ``gamma = 0``; returns ``(statistic, p)``.

    The statistic is clamped at zero (the models are nested) and referred
    to a chi-square with one degree of freedom per gamma.
    """
    if fit_with.fingerprint != fit_without.fingerprint:
        raise InputError("likelihood-ratio test needs both fits on identical data")
    if not fit_with.copula or fit_without.copula:
        raise InputError("first fit must include gammas and the second must not")
    if fit_with.loglik is None or fit_without.loglik is None:
        raise InputError("likelihood-ratio test needs likelihood-based fits")
    stat = max(0.0, 2.0 * (fit_with.loglik - fit_without.loglik))
    df = len(fit_with.gammas)
    return float(stat), float(stats.chi2.sf(stat, df))


# ---------------------------------------------------------------------------
# scikit-learn style wrappers


class Standardizer(TransformerMixin, BaseEstimator):
    """Centre and scale columns with moment (ddof=0) statistics.

    Parameters learned on one window (``location_``, ``scale_``) are reused
    by :meth:`transform` on any later window.
    """

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_samples=MIN_LENGTH)
        _, self.location_, self.scale_ = standardize(X)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, ["location_", "scale_"])
        X = check_array(X)
        return standardize(X, self.location_, self.scale_)[0]

    def inverse_transform(self, X):
        check_is_fitted(self, ["location_", "scale_"])
        return check_array(X) * self.scale_ + self.location_


class GCSumEstimator(BaseEstimator):
    """Fit a portfolio-sum model to a standardized ``(T, n)`` return matrix.

    Parameters
    ----------
    families : str or sequence of str, default "HS"
        Parent family per column ("HS" or "Gaussian").
    copula : bool, default True
        Chain consecutive columns with the between-squares copula.
    method : {"ifm", "mom"}, default "ifm"
    standard_errors : bool, default True
        Compute jackknife standard errors (and CLAIC for IFM).

    Attributes
    ----------
    betas_, gammas_ : tuple
    report_ : FitReport
    spec_ : SumSpec or None
        None when a moment estimate falls outside its admissible set.
    covariance_ : ndarray or None
    """

    def __init__(self, families="HS", copula=True, method="ifm", standard_errors=True):
        self.families = families
        self.copula = copula
        self.method = method
        self.standard_errors = standard_errors

    def fit(self, X, y=None, labels=None):
        X = check_array(X, ensure_min_samples=MIN_LENGTH)
        panel = ReturnPanel.from_standardized(X, labels)
        if self.method == "ifm":
            fitter = ifm_fit
        elif self.method == "mom":
            fitter = estimate_mom
        else:
            raise InputError(f"method must be 'ifm' or 'mom', got {self.method!r}")
        self.report_ = fitter(panel, self.families, self.copula, self.standard_errors)
        self.betas_ = self.report_.betas
        self.gammas_ = self.report_.gammas
        self.covariance_ = self.report_.covariance
        self.spec_ = self.report_.to_spec() if self.report_.is_feasible else None
        self.n_features_in_ = X.shape[1]
        return self

    def _fitted_spec(self):
        check_is_fitted(self, "report_")
        if self.spec_ is None:
            raise InputError("fitted parameters are infeasible; the model has no density")
        return self.spec_

    def score_samples(self, X):
        """Joint log-density of each row."""
        spec = self._fitted_spec()
        X = check_array(X)
        fam = spec.families
        out = np.zeros(X.shape[0])
        for i, m in enumerate(spec.margins):
            out += _base_logpdf(X[:, i], fam[i]) + _loglik_terms(m.beta, gc_weight(X[:, i], fam[i]))
        if spec.gammas is not None:
            for i, g in enumerate(spec.gammas):
                a = pair_weights(X[:, i], X[:, i + 1], spec.betas[i], spec.betas[i + 1], fam[i], fam[i + 1])
                out += _loglik_terms(g, a)
        return out

    def score(self, X, y=None):
        """Mean joint log-likelihood per observation."""
        return float(np.mean(self.score_samples(X)))

    def sample(self, n_samples=1, random_state=None):
        from .distcore.sampling import sample

        return sample(self._fitted_spec(), seed=random_state, count=n_samples, joint=True)

    def var(self, alpha):
        from .risk import model_var

        return model_var(self._fitted_spec(), alpha)

    def es(self, alpha):
        from .risk import model_es

        return model_es(self._fitted_spec(), alpha)
