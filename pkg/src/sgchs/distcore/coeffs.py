"""Coefficient algebra for sums of GC-like HS expansions.

The characteristic function of a sum of independent GCHS margins is
``sech(w)^n * prod_k (1 + bt_k tanh(w)^4)`` with ``bt_k = beta_k / 24``.
Expanding ``tanh^4 = (1 - sech^2)^2`` turns it into a signed combination of
powers ``sech(w)^N``, each the characteristic function of an N-fold HS sum,
so the density is the same combination of HS-sum kernels. Two expansions
are kept: the delta form (double index ``i <= j``) and the theta form
(single index ``j``).
"""

import math
from functools import lru_cache
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np
from scipy.special import gammaln, logsumexp

from .._validation import scalar_or_array
from ..exceptions import InputError
from .hs import log_hs_sum_kernels
from .numeric import neumaier_sum
from .specs import Family, SumSpec, as_sum_spec


class CoeffForm(str, Enum):
    DELTA = "delta"
    THETA = "theta"


def _log_comb(n, k):
    return gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)


@dataclass(frozen=True)
class BVector:
    """Elementary symmetric sums ``b_k`` of ``bt = beta / 24``, k = 0..n."""

    values: np.ndarray
    log_values: np.ndarray

    @property
    def n(self):
        return self.values.size - 1


def b_coeffs(betas):
    """``b_k`` = coefficient of ``z^k`` in ``prod_i (1 + beta_i/24 z)``."""
    bt = np.asarray(betas, dtype=float) / 24.0
    if bt.ndim != 1 or bt.size == 0:
        raise InputError("betas must be a non-empty 1-D sequence")
    if np.any(bt < 0):
        raise InputError("betas must be non-negative")
    b = np.zeros(bt.size + 1)
    b[0] = 1.0
    # all terms are non-negative, so the recursion has no cancellation
    for t in bt:
        b[1:] = b[1:] + t * b[:-1]
    with np.errstate(divide="ignore"):
        return BVector(b, np.log(b))


def equal_b_coeffs(n, beta_tilde):
    """``b_k = C(n, k) bt^k`` for ``n`` margins sharing ``bt = beta/24``."""
    k = np.arange(n + 1)
    if beta_tilde == 0:
        log_b = np.where(k == 0, 0.0, -np.inf)
    else:
        log_b = _log_comb(n, k) + k * math.log(beta_tilde)
    return BVector(np.exp(log_b), log_b)


@dataclass(frozen=True)
class CoeffTable:
    """Signed coefficients stored as ``(sign, log|value|)``.

    ``index`` holds ``(i, j)`` pairs (delta form) or ``(j,)`` (theta form);
    ``orders`` the HS-sum kernel order ``N`` each coefficient multiplies.
    """

    form: CoeffForm
    n: int
    index: Tuple[Tuple[int, ...], ...]
    orders: np.ndarray
    signs: np.ndarray
    log_mags: np.ndarray

    @property
    def values(self):
        return self.signs * np.exp(self.log_mags)

    def as_dict(self):
        return dict(zip(self.index, self.values))


def delta_coeffs(n, b):
    """delta_ij = (-2)^(j-i) C(j,i) sum_{k=j..n} C(k,j) b_k, for 0 <= i <= j <= n."""
    if b.n != n:
        raise InputError(f"BVector has {b.n + 1} entries, expected {n + 1}")
    index, orders, signs, logs = [], [], [], []
    k = np.arange(n + 1)
    for j in range(n + 1):
        tail = logsumexp(_log_comb(k[j:], j) + b.log_values[j:]) if np.any(
            np.isfinite(b.log_values[j:])) else -np.inf
        for i in range(j + 1):
            index.append((i, j))
            orders.append(n + 2 * (i + j))
            if np.isfinite(tail):
                signs.append(-1 if (j - i) % 2 else 1)
                logs.append((j - i) * math.log(2.0) + _log_comb(j, i) + tail)
            else:
                signs.append(0)
                logs.append(-np.inf)
    return CoeffTable(CoeffForm.DELTA, n, tuple(index), np.array(orders),
                      np.array(signs, dtype=np.int8), np.array(logs))


def theta_coeffs(n, beta_tilde):
    """theta_j = (-1)^j sum_{k=ceil(j/2)..n} C(n,k) C(2k,j) bt^k, for 0 <= j <= 2n.

    ``beta_tilde`` may also be a :class:`BVector`, which generalizes the
    coefficients to margins with different betas (``C(n,k) bt^k -> b_k``).
    """
    b = beta_tilde if isinstance(beta_tilde, BVector) else equal_b_coeffs(n, float(beta_tilde))
    if b.n != n:
        raise InputError(f"BVector has {b.n + 1} entries, expected {n + 1}")
    index, orders, signs, logs = [], [], [], []
    for j in range(2 * n + 1):
        k = np.arange(-(-j // 2), n + 1)
        terms = _log_comb(2 * k, j) + b.log_values[k]
        tail = logsumexp(terms) if np.any(np.isfinite(terms)) else -np.inf
        index.append((j,))
        orders.append(n + 2 * j)
        signs.append(0 if not np.isfinite(tail) else (-1 if j % 2 else 1))
        logs.append(tail)
    return CoeffTable(CoeffForm.THETA, n, tuple(index), np.array(orders),
                      np.array(signs, dtype=np.int8), np.array(logs))


def hs_betas(spec):
    """Betas of an all-HS, independent spec (SumSpec, MarginSpec or list of margins)."""
    spec = as_sum_spec(spec)
    if any(f is not Family.HS for f in spec.families):
        raise InputError("closed-form SGCHS density needs HS margins only")
    if not spec.independent:
        raise InputError("closed-form SGCHS density assumes independent margins (no gammas)")
    return np.array(spec.betas)


def coefficient_table(spec, form=CoeffForm.DELTA):
    spec = as_sum_spec(spec)
    return _coefficient_table(spec.without_gammas() if spec.gammas is not None else spec, CoeffForm(form))


@lru_cache(maxsize=256)
def _coefficient_table(spec, form):
    betas = hs_betas(spec)
    n = betas.size
    if form is CoeffForm.DELTA:
        return delta_coeffs(n, b_coeffs(betas))
    if np.all(betas == betas[0]):
        return theta_coeffs(n, betas[0] / 24.0)
    return theta_coeffs(n, b_coeffs(betas))


def expand_density(y, table):
    """Evaluate ``sum_t coeff_t * kernel_{N_t}(y)`` with compensated summation."""
    y = np.asarray(y, dtype=float)
    live = table.signs != 0
    orders = table.orders[live]
    uniq, inverse = np.unique(orders, return_inverse=True)
    log_k = log_hs_sum_kernels(y, uniq)[inverse]
    log_c = table.log_mags[live].reshape((-1,) + (1,) * y.ndim)
    sign = table.signs[live].reshape((-1,) + (1,) * y.ndim)
    return neumaier_sum(sign * np.exp(log_c + log_k))


def sgchs_pdf(y, spec, form=CoeffForm.DELTA):
    """Closed-form density of a sum of independent GCHS margins.

    ``spec`` is a :class:`SumSpec` (or margins) with HS margins and no gammas.
    """
    if not isinstance(spec, SumSpec):
        spec = as_sum_spec(spec)
    return scalar_or_array(expand_density(y, coefficient_table(spec, form)))
