"""Orthogonal-polynomial copula for between-squares dependence.

Consecutive margins ``i, i+1`` are linked by the factor
``1 + gamma_i r_i(x_i) r_{i+1}(x_{i+1})`` where ``r`` is the second
orthogonal polynomial divided by its squared norm and by the margin's GC
factor. Because ``phi_i * r_i`` integrates to zero and has unit second
moment, margins are preserved and ``gamma_i = E[X_i^2 X_{i+1}^2] - 1``.
"""

import itertools
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy import optimize

from ._validation import check_rng, scalar_or_array
from .distcore.numeric import truncation_radius
from .distcore.sampling import sample_margin
from .distcore.specs import Family, MarginSpec, SumSpec, as_sum_spec
from .distcore.sums import margin_pdf
from .exceptions import ConstraintViolationError, InputError, UnsupportedDimensionError

# r(x) = (x^2 - 1) / (a + c(beta) * (x^4 + p x^2 + q))
_R_SHAPE = {
    Family.HS: dict(a=4.0, scale=144.0, p=-14.0, q=9.0),
    Family.GAUSSIAN: dict(a=2.0, scale=12.0, p=-6.0, q=3.0),
}
GAMMA_TOL = 1e-12
MAX_QUAD_DIM = 3


@dataclass(frozen=True)
class RPolynomial:
    """The ratio ``r`` attached to one margin, with its infimum and supremum."""

    family: Family
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        object.__setattr__(self, "beta", float(self.beta))

    @classmethod
    def of(cls, margin):
        return cls(margin.family, margin.beta)

    @property
    def _coef(self):
        s = _R_SHAPE[self.family]
        return s["a"], self.beta / s["scale"], s["p"], s["q"]

    def denominator(self, x):
        a, c, p, q = self._coef
        x2 = np.asarray(x, dtype=float) ** 2
        return a + c * (x2 * x2 + p * x2 + q)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return scalar_or_array((x * x - 1.0) / self.denominator(x))

    @cached_property
    def bounds(self):
        """``(r_minus, r_plus)`` from the stationary points of the ratio.

        With ``u = x^2`` the derivative vanishes at ``x = 0`` and where
        ``u^2 - 2u - (a + c(p + q)) / c = 0``; the positive root gives the
        supremum, ``x = 0`` the infimum. When the denominator reaches zero
        (``beta`` at the feasibility edge) or is constant (``beta = 0``) the
        supremum is ``+inf``.
        """
        a, c, p, q = self._coef
        r_minus = -1.0 / (a + c * q)
        if c == 0.0:
            return r_minus, math.inf
        # minimum of x^4 + p x^2 + q is q - p^2/4, reached at x^2 = -p/2
        if a + c * (q - p * p / 4.0) <= 0.0:
            return r_minus, math.inf
        u = 1.0 + math.sqrt(1.0 + a / c + p + q)
        r_plus = (u - 1.0) / (a + c * (u * u + p * u + q))
        # a tiny beta overflows u; the supremum then tends to +inf
        return r_minus, float(r_plus) if math.isfinite(r_plus) else math.inf

    @property
    def lower(self):
        return self.bounds[0]

    @property
    def upper(self):
        return self.bounds[1]

    def bounds_by_search(self, n_grid=4001, x_max=None):
        """Infimum and supremum by grid scan plus golden-section refinement.

        The grid runs over ``x >= 0`` in the variable ``x = tan(theta)``
        so that far-out suprema (small beta) are covered. A refinement is only
        trusted when the grid maximum is strictly above both neighbours
        (a certified bracket); otherwise the grid value is returned.
        """
        theta_max = math.atan(x_max) if x_max else math.pi / 2 * (1 - 1e-9)
        theta = np.linspace(0.0, theta_max, n_grid)
        x = np.tan(theta)
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = self(x)
        out = []
        for sign in (-1.0, 1.0):
            v = sign * vals
            v = np.where(np.isfinite(v), v, np.inf)
            k = int(np.argmax(v))
            if np.isinf(v[k]):
                out.append(sign * math.inf)
                continue
            best = v[k]
            if 0 < k < n_grid - 1 and v[k] > v[k - 1] and v[k] > v[k + 1]:
                with np.errstate(divide="ignore", invalid="ignore"):
                    res = optimize.minimize_scalar(
                        lambda t: -sign * float(self(math.tan(t))),
                        bracket=(theta[k - 1], theta[k], theta[k + 1]), method="golden",
                        tol=1e-12,
                    )
                best = max(best, -res.fun)
            elif k == 0:
                best = v[0]
            out.append(sign * best)
        return out[0], out[1]


def r_eval(x, rp):
    return rp(x)


@dataclass(frozen=True)
class GammaBounds:
    lower: float
    upper: float

    def __contains__(self, gamma):
        return self.lower - GAMMA_TOL <= gamma <= self.upper + GAMMA_TOL

    @property
    def degenerate(self):
        return self.lower == self.upper == 0.0


def _neg_inv(t):
    v = -1.0 / t
    return 0.0 if v == 0.0 else float(v)


def gamma_bounds(rp_i, rp_j):
    """Interval of ``gamma`` keeping ``1 + gamma r_i(x) r_j(y)`` non-negative.

    ``r_i(x) r_j(y)`` ranges over ``[t_min, t_max]`` with
    ``t_max = max(r_i^- r_j^-, r_i^+ r_j^+) > 0`` and
    ``t_min = min(r_i^- r_j^+, r_i^+ r_j^-) < 0``, so the admissible set is
    ``[-1/t_max, -1/t_min]``; an infinite supremum collapses it to ``{0}``.
    """
    (im, ip), (jm, jp) = rp_i.bounds, rp_j.bounds
    t_max = max(im * jm, ip * jp)
    t_min = min(im * jp, ip * jm)
    return GammaBounds(_neg_inv(t_max), _neg_inv(t_min))


def pair_bounds(spec):
    rps = [RPolynomial.of(m) for m in spec.margins]
    return [gamma_bounds(rps[i], rps[i + 1]) for i in range(spec.n - 1)]


def check_gammas(spec):
    """Raise :class:`ConstraintViolationError` for the first infeasible gamma."""
    if spec.gammas is None:
        return
    for i, (g, gb) in enumerate(zip(spec.gammas, pair_bounds(spec))):
        if g not in gb:
            raise ConstraintViolationError((i, i + 1), g, gb.lower, gb.upper)


def _as_points(x, n):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != n:
        raise InputError(f"last axis of x must have length {n}, got shape {x.shape}")
    return x


def copula_density(x, spec):
    """``prod_i [1 + gamma_i r_i(x_i) r_{i+1}(x_{i+1})]`` at points ``x`` (last axis = margin)."""
    spec = as_sum_spec(spec)
    x = _as_points(x, spec.n)
    out = np.ones(x.shape[:-1])
    if spec.gammas is None:
        return scalar_or_array(out)
    rps = [RPolynomial.of(m) for m in spec.margins]
    for i, g in enumerate(spec.gammas):
        if g != 0.0:
            out = out * (1.0 + g * rps[i](x[..., i]) * rps[i + 1](x[..., i + 1]))
    return scalar_or_array(out)


def joint_pdf(x, spec):
    """Joint density of the margins: product of margin densities times the copula density."""
    spec = as_sum_spec(spec)
    x = _as_points(x, spec.n)
    out = copula_density(x, spec)
    for i, m in enumerate(spec.margins):
        out = out * margin_pdf(x[..., i], m)
    return scalar_or_array(out)


def _separable_terms(spec):
    """Expand the chained copula into ``sum_S coef_S prod_k phi_k r_k^{p_k(S)}``."""
    gammas = spec.gammas or (0.0,) * (spec.n - 1)
    terms = []
    for chosen in itertools.product((False, True), repeat=spec.n - 1):
        coef = math.prod(g for g, c in zip(gammas, chosen) if c)
        if coef == 0.0 and any(chosen):
            continue
        powers = [0] * spec.n
        for i, c in enumerate(chosen):
            if c:
                powers[i] += 1
                powers[i + 1] += 1
        terms.append((coef, tuple(powers)))
    return terms


def _pole_distance(margin):
    # distance of the nearest complex zero of the GC factor from the real axis
    if margin.beta == 0.0:
        return math.inf
    if margin.family is Family.HS:
        poly = [1.0, 0.0, -14.0, 0.0, 9.0 + 576.0 / margin.beta]
    else:
        poly = [1.0, 0.0, -6.0, 0.0, 3.0 + 24.0 / margin.beta]
    return float(np.min(np.abs(np.roots(poly).imag)))


def _factor(margin, power):
    rp = RPolynomial.of(margin)
    if power == 0:
        return lambda x: margin_pdf(x, margin)
    return lambda x: margin_pdf(x, margin) * rp(x) ** power


@lru_cache(maxsize=32)
def _quadrature_plan(spec):
    terms = _separable_terms(spec)
    # squared ratios bring in the GC factor's complex zeros; keep the step well
    # inside the analyticity strip so the trapezoid rule stays exponentially accurate
    d = min([1.0] + [_pole_distance(m) for k, m in enumerate(spec.margins)
                     if any(p[k] == 2 for _, p in terms)])
    step = min(0.125, d / 6.0)
    # r^2 grows at most like x^4, so pad the density by that much before truncating
    radii = [truncation_radius(lambda x, m=m: margin_pdf(x, m) * (1.0 + x ** 4), tol=1e-17)
             for m in spec.margins]
    lim = max(radii)
    grid = step * np.arange(-math.ceil(lim / step), math.ceil(lim / step) + 1)
    plan = []
    for coef, powers in terms:
        # fold margins 2..n on the lattice; margin 1 is evaluated off-lattice
        tail = None
        for m, p in zip(spec.margins[1:], powers[1:]):
            vals = _factor(m, p)(grid)
            tail = vals if tail is None else np.convolve(tail, vals) * step
        offset = (len(spec.margins) - 1) * grid[0]
        support = offset + step * np.arange(tail.size)
        keep = np.abs(tail) > 1e-20 * np.abs(tail).max()
        lo, hi = np.argmax(keep), keep.size - np.argmax(keep[::-1])
        plan.append((coef, _factor(spec.margins[0], powers[0]), support[lo:hi], step * tail[lo:hi]))
    return plan


def portfolio_pdf(y, spec, method="quadrature", mc_samples=200_000, seed=0):
    """Density of ``Y = sum_i X_i`` under the chained copula.

    ``method="quadrature"`` integrates the joint density over the hyperplane
    ``sum x_i = y`` with a tensor-product trapezoid rule on a truncated box.
    The chained copula factorizes into ``2^(n-1)`` separable products, so the
    tensor rule is evaluated as iterated lattice convolutions; supported for
    ``n <= 3``. ``method="montecarlo"`` uses the conditional estimator
    ``E[phi_1(y - S)(1 + gamma_1 r_1(y - S) r_2(X_2))]`` with ``S = X_2 + ...``
    drawn from the remaining chain.
    """
    spec = as_sum_spec(spec)
    if spec.n == 1:
        return margin_pdf(y, spec.margins[0])
    y = np.asarray(y, dtype=float)
    if method == "montecarlo":
        return scalar_or_array(_portfolio_pdf_mc(y, spec, mc_samples, seed))
    if method != "quadrature":
        raise InputError(f"unknown method {method!r}")
    if spec.n > MAX_QUAD_DIM:
        raise UnsupportedDimensionError(
            f"quadrature route supports at most {MAX_QUAD_DIM} margins, got {spec.n}; "
            "use method='montecarlo'"
        )
    check_gammas(spec)
    out = np.zeros(y.shape)
    flat = y.ravel()
    for coef, head, support, weights in _quadrature_plan(spec):
        vals = np.empty(flat.size)
        for start in range(0, flat.size, 256):
            chunk = flat[start:start + 256]
            vals[start:start + 256] = head(chunk[:, None] - support) @ weights
        out = out + coef * vals.reshape(y.shape)
    return scalar_or_array(out)


def _portfolio_pdf_mc(y, spec, count, seed):
    rest = SumSpec(spec.margins[1:], spec.gammas[1:] if spec.gammas and spec.n > 2 else None)
    from .distcore.sampling import sample

    draws = sample(rest, seed=seed, count=count, joint=True)
    s = draws.sum(axis=1)
    g1 = spec.gammas[0] if spec.gammas else 0.0
    r1 = RPolynomial.of(spec.margins[0])
    r2 = RPolynomial.of(spec.margins[1])(draws[:, 0])
    out = np.empty(y.size)
    for k, yk in enumerate(y.ravel()):
        x1 = yk - s
        out[k] = np.mean(margin_pdf(x1, spec.margins[0]) * (1.0 + g1 * r1(x1) * r2))
    return out.reshape(y.shape)


def envelope(spec):
    """Upper bound of the copula density used by the rejection sampler."""
    if spec.gammas is None:
        return 1.0
    rps = [RPolynomial.of(m) for m in spec.margins]
    total = 1.0
    for i, g in enumerate(spec.gammas):
        if g != 0.0:
            a = max(-rps[i].lower, rps[i].upper)
            b = max(-rps[i + 1].lower, rps[i + 1].upper)
            total *= 1.0 + abs(g) * a * b
    return total


def joint_sample(spec, seed=None, count=1):
    """Rejection sampler for the joint law with an independent-margin proposal.

    Returns a ``(count, n)`` array; deterministic given ``seed``.
    """
    spec = as_sum_spec(spec)
    check_gammas(spec)
    rng = check_rng(seed)
    count = int(count)
    bound = envelope(spec)
    chunks, have = [], 0
    while have < count:
        batch = max(64, int(1.2 * (count - have) * bound))
        x = np.column_stack([sample_margin(m, rng, batch) for m in spec.margins])
        u = rng.random(batch)
        keep = x[u * bound <= copula_density(x, spec)]
        chunks.append(keep)
        have += keep.shape[0]
    return np.concatenate(chunks)[:count]


def sum_positivity_interval(margin_a, margin_b, step=0.01):
    """Range of ``gamma`` for which the density of ``X_a + X_b`` stays non-negative.

    The two-margin portfolio density is affine in gamma,
    ``g0(y) + gamma g1(y)``, so the admissible set is an interval.
    """
    lim = 40.0
    x = step * np.arange(-round(lim / step), round(lim / step) + 1)
    ra, rb = RPolynomial.of(margin_a), RPolynomial.of(margin_b)
    pa, pb = margin_pdf(x, margin_a), margin_pdf(x, margin_b)
    g0 = np.convolve(pa, pb) * step
    g1 = np.convolve(pa * ra(x), pb * rb(x)) * step
    live = g0 > 1e-12
    pos, neg = live & (g1 > 0), live & (g1 < 0)
    lower = -np.min(g0[pos] / g1[pos]) if pos.any() else -math.inf
    upper = np.min(g0[neg] / -g1[neg]) if neg.any() else math.inf
    return GammaBounds(float(lower), float(upper))
