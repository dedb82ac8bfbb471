"""Density dispatch over the whole family, the mixed HS/Gaussian sum, and
numerical moments."""

import math
from functools import lru_cache

import numpy as np
from scipy import integrate

from .._validation import scalar_or_array
from ..exceptions import ConvergenceError, InputError
from .coeffs import sgchs_pdf
from .gaussian import gcn_pdf, sgcn_pdf
from .hs import gchs_pdf
from .numeric import truncation_radius
from .specs import Family, MarginSpec, SumSpec, as_sum_spec

# trapezoid step for convolving with the Gaussian block; the HS-sum kernels are
# analytic in the strip |Im y| < 1, so the rule's error is about exp(-2 pi / h)
CONV_STEP = 1.0 / 8.0


def margin_pdf(x, margin):
    if margin.family is Family.HS:
        return gchs_pdf(x, margin.beta)
    return gcn_pdf(x, margin.beta)


def _block(spec, family):
    return SumSpec(tuple(m for m in spec.margins if m.family is family))


def _block_pdf(y, block):
    if block.margins[0].family is Family.HS:
        return sgchs_pdf(y, block)
    return sgcn_pdf(y, block)


def mixed_sum_pdf(y, spec):
    """Density of an independent sum mixing HS and Gaussian families.

    The HS block and the Gaussian block each have closed forms; their
    convolution is done with the trapezoid rule on a symmetric grid over the
    Gaussian block's support (mass on the grid is checked to 1e-10).
    """
    spec = as_sum_spec(spec)
    if not spec.independent:
        raise InputError("mixed_sum_pdf assumes independent margins (no gammas)")
    fams = set(spec.families)
    if fams == {Family.HS}:
        return sgchs_pdf(y, spec)
    if fams == {Family.GAUSSIAN}:
        return sgcn_pdf(y, spec)
    hs_block = _block(spec, Family.HS)
    n_block = _block(spec, Family.GAUSSIAN)
    t, w = _gaussian_block_grid(n_block)
    y = np.asarray(y, dtype=float)
    vals = _block_pdf(y[..., None] - t, hs_block) @ w
    return scalar_or_array(vals)


@lru_cache(maxsize=64)
def _gaussian_block_grid(block):
    half = math.sqrt(block.n) * 12.0
    t = CONV_STEP * np.arange(-math.ceil(half / CONV_STEP), math.ceil(half / CONV_STEP) + 1)
    w = CONV_STEP * sgcn_pdf(t, block)
    if abs(w.sum() - 1.0) > 1e-10:
        raise ConvergenceError(f"Gaussian block lost mass on the convolution grid: {w.sum()!r}")
    return t, w


def independent_sum_pdf(y, spec):
    spec = as_sum_spec(spec)
    if spec.n == 1:
        return margin_pdf(y, spec.margins[0])
    return mixed_sum_pdf(y, spec)


def density(y, spec):
    """Density of any supported law: a margin, an independent sum, or a copula sum."""
    if isinstance(spec, MarginSpec):
        return margin_pdf(y, spec)
    spec = as_sum_spec(spec)
    if spec.independent:
        return independent_sum_pdf(y, spec)
    from ..copula import portfolio_pdf

    return portfolio_pdf(y, spec)


@lru_cache(maxsize=256)
def radius(spec, tol=1e-17):
    """Truncation radius beyond which the density of ``spec`` is below ``tol``."""
    return truncation_radius(lambda x: density(x, spec), tol=tol)


def numeric_moment(spec, k):
    """``E[X^k]`` by adaptive quadrature (absolute tolerance 1e-11) over the
    truncated support, with the truncation point chosen for ``x^k pdf(x)``."""
    if int(k) != k or not 0 <= k <= 8:
        raise InputError(f"moment order must be an integer in [0, 8], got {k!r}")
    k = int(k)
    lim = truncation_radius(lambda x: np.abs(x) ** k * density(x, spec), tol=1e-18)

    def integrand(x):
        return float(x**k * density(x, spec))

    total = 0.0
    for a, b in ((-lim, 0.0), (0.0, lim)):
        val, err = integrate.quad(integrand, a, b, epsabs=1e-12, epsrel=1e-12, limit=400)
        if err > 1e-9:
            raise ConvergenceError(f"moment quadrature error estimate {err:.2e} too large")
        total += val
    return total
