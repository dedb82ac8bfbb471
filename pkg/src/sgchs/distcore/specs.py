"""Parameter containers for margins and portfolio sums."""

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from ..exceptions import FeasibilityError, InputError


class Family(str, Enum):
    HS = "HS"
    GAUSSIAN = "Gaussian"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        if key in ("hs", "hypsec", "sech", "hyperbolic-secant"):
            return cls.HS
        if key in ("gaussian", "normal", "n", "gauss"):
            return cls.GAUSSIAN
        raise InputError(f"unknown family {value!r}; expected 'HS' or 'Gaussian'")

    @property
    def beta_max(self):
        return BETA_MAX[self]

    @property
    def parent_kurtosis(self):
        return 5.0 if self is Family.HS else 3.0


# density validity: 1 + beta/norm4 * p4 >= 0 with min p4 = -40 (HS), -6 (Gaussian)
BETA_MAX = {Family.HS: 14.4, Family.GAUSSIAN: 4.0}


def check_beta(family, beta):
    family = Family.parse(family)
    beta = float(beta)
    if not 0.0 <= beta <= family.beta_max:
        raise FeasibilityError(family.value, beta, 0.0, family.beta_max)
    return beta


def _slope_bracket(x, beta, family):
    # sign of d/dx pdf(x, beta) for x > 0 (the positive parent density factored out)
    if family is Family.HS:
        c = beta / 576.0
        p4 = x**4 - 14 * x**2 + 9
        dp4 = 4 * x**3 - 28 * x
        return c * dp4 - (1 + c * p4) * (np.pi / 2) * np.tanh(np.pi * x / 2)
    c = beta / 24.0
    p4 = x**4 - 6 * x**2 + 3
    dp4 = 4 * x**3 - 12 * x
    return c * dp4 - (1 + c * p4) * x


def max_slope(beta, family):
    """Largest sign-bracket of the density slope on x > 0; positive iff multimodal."""
    family = Family.parse(family)
    grid = np.linspace(1e-3, 15.0, 6000)
    vals = _slope_bracket(grid, beta, family)
    k = int(np.argmax(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    res = optimize.minimize_scalar(
        lambda t: -_slope_bracket(t, beta, family), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-12},
    )
    return max(float(vals[k]), float(-res.fun))


@lru_cache(maxsize=None)
def unimodality_bound(family):
    """Largest beta for which the expansion of ``family`` stays unimodal.

    Found numerically as the root of :func:`max_slope` in beta; the slope
    bracket is affine in beta for fixed x, so its maximum over x is convex
    in beta and crosses zero once.
    """
    family = Family.parse(family)
    hi = family.beta_max
    return float(optimize.brentq(max_slope, 1e-6, hi, args=(family,), xtol=1e-12))


@dataclass(frozen=True)
class MarginSpec:
    """One standardized margin: parent family plus excess kurtosis ``beta``."""

    family: Family = Family.HS
    beta: float = 0.0

    def __post_init__(self):
        family = Family.parse(self.family)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "beta", check_beta(family, self.beta))

    @property
    def unimodal(self):
        return self.beta <= unimodality_bound(self.family)

    @property
    def kurtosis(self):
        return self.family.parent_kurtosis + self.beta


@dataclass(frozen=True)
class SumSpec:
    """Ordered margins of an equal-weight portfolio sum, optionally chained by
    between-squares correlations ``gammas`` (one per consecutive pair).

    Margin order matters once ``gammas`` is given: dependence only links
    margins ``i`` and ``i + 1``.
    """

    margins: Tuple[MarginSpec, ...]
    gammas: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        margins = tuple(
            m if isinstance(m, MarginSpec) else MarginSpec(*m) for m in self.margins
        )
        if not margins:
            raise InputError("a SumSpec needs at least one margin")
        object.__setattr__(self, "margins", margins)
        if self.gammas is not None:
            gammas = tuple(float(g) for g in self.gammas)
            if len(gammas) != len(margins) - 1:
                raise InputError(
                    f"expected {len(margins) - 1} gammas for {len(margins)} margins, "
                    f"got {len(gammas)}"
                )
            object.__setattr__(self, "gammas", gammas)
            from ..copula import check_gammas

            check_gammas(self)

    @classmethod
    def from_betas(cls, families, betas, gammas=None):
        if isinstance(families, (str, Family)):
            families = [families] * len(betas)
        if len(families) != len(betas):
            raise InputError("families and betas differ in length")
        return cls(
            tuple(MarginSpec(f, b) for f, b in zip(families, betas)),
            None if gammas is None else tuple(gammas),
        )

    @property
    def n(self):
        return len(self.margins)

    @property
    def betas(self):
        return tuple(m.beta for m in self.margins)

    @property
    def families(self):
        return tuple(m.family for m in self.margins)

    @property
    def independent(self):
        return self.gammas is None or all(g == 0.0 for g in self.gammas)

    def without_gammas(self):
        return SumSpec(self.margins)


def as_sum_spec(spec: "MarginSpec | SumSpec | Sequence") -> SumSpec:
    if isinstance(spec, SumSpec):
        return spec
    if isinstance(spec, MarginSpec):
        return SumSpec((spec,))
    return SumSpec(tuple(spec))
