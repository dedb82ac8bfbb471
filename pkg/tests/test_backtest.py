import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from sgchs.backtest import (
    BacktestReport, ad_statistic, ad_test, backtest, bootstrap_pvalue, kupiec, ks_statistic,
    ks_test, loss_functions, simulate, z1_statistic, z2_statistic,
)
from sgchs.distcore import SumSpec, sample
from sgchs.exceptions import InputError, NoExceedanceError
from sgchs.risk import Law, model_es, model_var

SPEC = SumSpec.from_betas("HS", [4.0, 3.0])


def binomial_lr(N, T, alpha):
    # direct log-likelihood ratio against the MLE coverage
    pi = N / T
    return -2.0 * (stats.binom.logpmf(N, T, alpha) - stats.binom.logpmf(N, T, pi))


# ---------------------------------------------------------------------------
# Kupiec


def test_kupiec_exact_coverage():
    lr, p = kupiec(5, 500, 0.01)
    assert lr == 0.0 and p == 1.0


@pytest.mark.parametrize("N,T,alpha", [(7, 500, 0.01), (1, 476, 0.005), (30, 250, 0.05), (12, 1000, 0.025)])
def test_kupiec_matches_binomial_oracle(N, T, alpha):
    assert kupiec(N, T, alpha)[0] == pytest.approx(binomial_lr(N, T, alpha), abs=1e-10)


def test_kupiec_boundary_counts():
    lr, _ = kupiec(0, 476, 0.005)
    assert lr == pytest.approx(-2 * 476 * math.log(0.995), abs=1e-12)
    assert lr == pytest.approx(4.772, abs=1e-3)
    lr, _ = kupiec(50, 50, 0.05)
    assert lr == pytest.approx(-2 * 50 * math.log(0.05), abs=1e-12)


@given(st.integers(1, 2000), st.data(), st.floats(0.001, 0.3))
def test_kupiec_nonnegative(T, data, alpha):
    N = data.draw(st.integers(0, T))
    lr, p = kupiec(N, T, alpha)
    assert lr >= 0.0 and 0.0 <= p <= 1.0


def test_kupiec_errors():
    for args in [(-1, 10, 0.05), (11, 10, 0.05), (1, 10, 0.0), (1.5, 10, 0.05), (0, 0, 0.05)]:
        with pytest.raises(InputError):
            kupiec(*args)


# ---------------------------------------------------------------------------
# loss functions


def test_loss_functions_hand_example():
    x = np.array([-1.1, -1.2, 0.3, 0.5, -0.9])
    ablf, aqlf = loss_functions(x, -1.0)
    assert ablf == pytest.approx(0.4) and aqlf == pytest.approx(0.41)


def test_loss_functions_trivial():
    assert loss_functions(np.array([0.1, 0.2, 3.0]), -1.0) == (0.0, 0.0)
    assert loss_functions(np.full(7, -1.5), -1.5) == (1.0, 1.0)


@given(st.lists(st.floats(-20, 20), min_size=1, max_size=300), st.floats(-5, 0))
def test_loss_invariants(x, v):
    x = np.asarray(x)
    ablf, aqlf = loss_functions(x, v)
    assert 0.0 <= ablf <= 1.0 and aqlf >= ablf
    assert round(ablf * x.size) == np.sum(x <= v)


# ---------------------------------------------------------------------------
# Z statistics


def test_z1_zero_when_exceedances_equal_es():
    x = np.array([-2.5, 0.3, -2.5, 1.0, -2.5])
    assert z1_statistic(x, -2.0, -2.5) == pytest.approx(0.0, abs=1e-15)


def test_z_without_exceedances():
    x = np.array([0.1, 0.4, -0.3])
    assert z2_statistic(x, -2.0, -2.5, 0.05) == 1.0
    with pytest.raises(NoExceedanceError):
        z1_statistic(x, -2.0, -2.5)


def test_z2_decreases_as_losses_deepen():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(400)
    ve, es = -1.64, -2.06
    base = z2_statistic(x, ve, es, 0.05)
    i = int(np.argmin(x))
    deeper = x.copy()
    deeper[i] -= 1.0
    assert z2_statistic(deeper, ve, es, 0.05) < base


def test_z_statistics_centered_under_null():
    # with var_emp at the true VaR and the true ES, both statistics average near zero
    a = 0.05
    ve, es = model_var(SPEC, a), model_es(SPEC, a)
    draws = simulate(SPEC, (500, 1000), np.random.default_rng(11))
    z1 = np.array([z1_statistic(d, ve, es) for d in draws])
    z2 = np.array([z2_statistic(d, ve, es, a) for d in draws])
    assert abs(z1.mean()) < 3 * z1.std() / math.sqrt(500)
    assert abs(z2.mean()) < 3 * z2.std() / math.sqrt(500)


def test_bootstrap_pvalue_extremes():
    a = 0.05
    common = dict(var_emp=model_var(SPEC, a), es_model=model_es(SPEC, a), alpha=a, T=300)
    for kind in ("z1", "z2"):
        assert bootstrap_pvalue(-1e9, SPEC, kind, 200, seed=1, **common) == 0.0
        assert bootstrap_pvalue(1e9, SPEC, kind, 200, seed=1, **common) == 1.0
    with pytest.raises(InputError):
        bootstrap_pvalue(0.0, SPEC, "z2", 99, seed=1, **common)
    with pytest.raises(InputError):
        bootstrap_pvalue(0.0, SPEC, "z3", 200, seed=1, **common)


def test_bootstrap_pvalue_deterministic_and_block_mode():
    a = 0.025
    x = sample(SPEC, seed=2, count=600)
    common = dict(var_emp=model_var(SPEC, a), es_model=model_es(SPEC, a), alpha=a, T=x.size)
    z = z2_statistic(x, common["var_emp"], common["es_model"], a)
    p1 = bootstrap_pvalue(z, SPEC, "z2", 300, seed=5, **common)
    assert p1 == bootstrap_pvalue(z, SPEC, "z2", 300, seed=5, **common)
    pb = bootstrap_pvalue(z, SPEC, "z2", 300, seed=5, sample=x, **common)
    assert 0.0 <= pb <= 1.0


# ---------------------------------------------------------------------------
# goodness of fit


def test_ks_grid_sample():
    law = Law(SPEC)
    T = 400
    x = law.ppf((np.arange(1, T + 1) - 0.5) / T)
    assert ks_statistic(x, law) <= 1.0 / T + 1e-9


def test_ks_ad_reject_uniform_sample():
    x = np.random.default_rng(3).uniform(-3, 3, 500)
    assert ks_test(x, SPEC, B=200, seed=4).pvalue < 0.01
    assert ad_test(x, SPEC, B=200, seed=4).pvalue < 0.01


def test_ad_statistic_matches_direct_formula():
    x = np.random.default_rng(6).standard_normal(300)
    law = Law(SumSpec.from_betas("Gaussian", [0.0]))
    z = np.sort(x)
    i = np.arange(1, z.size + 1)
    F = stats.norm.cdf(z)
    a2 = -z.size - np.mean((2 * i - 1) * (np.log(F) + np.log1p(-F[::-1])))
    assert ad_statistic(x, law) == pytest.approx(a2, rel=1e-10)


def test_gof_size_under_null():
    # samples from the spec itself rarely reject
    rng = np.random.default_rng(8)
    rejections = 0
    n = 40
    for _ in range(n):
        x = simulate(SPEC, 300, rng)
        rejections += ks_test(x, SPEC, B=100, seed=rng).pvalue < 0.05
    assert rejections <= 8


def test_gof_refit_callable_is_used():
    calls = []

    def refit(draw):
        calls.append(draw.size)
        return SPEC

    ks_test(sample(SPEC, seed=1, count=100), SPEC, B=100, seed=2, refit=refit)
    assert calls == [100] * 100


# ---------------------------------------------------------------------------
# full backtest


def test_backtest_report():
    x1 = sample(SPEC, seed=21, count=800)
    x2 = sample(SPEC, seed=22, count=400)
    specs = {"hs": SPEC, "gc": SumSpec.from_betas("Gaussian", [2.0, 2.0])}
    alphas = (0.01, 0.05)
    rep = backtest(x1, x2, specs, alphas, B=100, seed=3)
    assert isinstance(rep, BacktestReport) and len(rep.rows) == 4
    for r in rep.rows:
        assert 0.0 <= r.ablf <= 1.0 and r.aqlf >= r.ablf
        assert r.N == round(r.ablf * r.T) and r.T == 400
        assert r.es_model <= r.var_model < 0
        assert 0.0 <= r.kupiec_p <= 1.0 and 0.0 <= r.z2_p <= 1.0
    for g in rep.gof.values():
        assert set(g) == {"KS", "AD"}
    again = backtest(x1, x2, specs, alphas, B=100, seed=3)
    assert again.rows == rep.rows
    with pytest.raises(KeyError):
        rep.row("hs", 0.2)
    assert rep.row("gc", 0.05).model == "gc"
