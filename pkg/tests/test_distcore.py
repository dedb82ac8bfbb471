import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from oracles import (
    b_brute_force, gchs, gcn, hs, lattice_convolution, mp_equal_beta_density,
    mp_hs_sum_kernel, numerical_cf, quad_moment,
)
from sgchs.distcore import (
    CoeffForm, Family, MarginSpec, SumSpec, b_coeffs, clh_pdf, coefficient_table, delta_coeffs,
    density, gchs_cf, gchs_pdf, gcn_cf, gcn_pdf, hermite_p4j, hs_cdf, hs_pdf, hs_quantile, hs_sf,
    mixed_sum_pdf, numeric_moment, p4_hs, sample, sgchs_pdf, sgcn_pdf, sum_hs_pdf, theta_coeffs,
    unimodality_bound,
)
from sgchs.distcore.coeffs import equal_b_coeffs
from sgchs.exceptions import FeasibilityError, InputError

EQUAL_BETAS = [[b] * n for n in (2, 3, 4) for b in (2, 4, 8)]
GROWING_BETAS = [[s * k for k in range(1, n + 1)] for n in (2, 3, 4) for s in (1, 2, 3)]

betas_hs = st.floats(0.0, 14.4)
betas_n = st.floats(0.0, 4.0)


# ---------------------------------------------------------------------------
# the parent law and its fourth polynomial


def test_hs_pdf_closed_form():
    x = np.linspace(-30, 30, 601)
    np.testing.assert_allclose(hs_pdf(x), hs(x), rtol=1e-14)
    assert hs_pdf(0.0) == 0.5


def test_hs_moments():
    assert quad_moment(hs_pdf, 0) == pytest.approx(1.0, abs=1e-12)
    assert quad_moment(hs_pdf, 2) == pytest.approx(1.0, abs=1e-12)
    assert quad_moment(hs_pdf, 4) == pytest.approx(5.0, abs=1e-10)


def test_hs_cdf_quantile_and_tails():
    u = np.array([1e-12, 1e-4, 0.01, 0.3, 0.5, 0.9, 1 - 1e-9])
    np.testing.assert_allclose(hs_cdf(hs_quantile(u)), u, rtol=1e-12)
    x = np.array([-40.0, -5.0, 0.0, 3.0])
    exact = [float(mp.mpf(2) / mp.pi * mp.atan(mp.exp(mp.pi * mp.mpf(v) / 2))) for v in x]
    np.testing.assert_allclose(hs_cdf(x), exact, rtol=1e-13)
    np.testing.assert_allclose(hs_sf(-x), exact, rtol=1e-13)


def test_p4_orthogonal_with_norm_576():
    f = lambda x: p4_hs(x) ** 2 * hs_pdf(x)
    assert 2 * integrate.quad(f, 0, 80, epsabs=1e-12, limit=400)[0] == pytest.approx(576.0, abs=1e-8)
    for k in (0, 1):
        g = lambda x: p4_hs(x) * x ** (2 * k) * hs_pdf(x)
        val = 2 * integrate.quad(g, 0, 80, epsabs=1e-12, limit=400)[0]
        assert val == pytest.approx(0.0, abs=1e-8)


@pytest.mark.parametrize("beta", [2.0, 8.0])
def test_gchs_kurtosis(beta):
    m = MarginSpec("HS", beta)
    assert numeric_moment(m, 4) == pytest.approx(5 + beta, abs=1e-8)
    assert numeric_moment(m, 2) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("beta", [1.0, 2.4, 4.0])
def test_gcn_kurtosis(beta):
    m = MarginSpec("Gaussian", beta)
    assert numeric_moment(m, 4) == pytest.approx(3 + beta, abs=1e-8)


def test_gchs_feasibility_edge():
    x = np.linspace(-10, 10, 20001)
    assert gchs_pdf(x, 14.4).min() >= -1e-15
    assert gchs_pdf(x, 14.5, validate=False).min() < -1e-4
    with pytest.raises(FeasibilityError):
        gchs_pdf(0.0, 14.5)
    with pytest.raises(FeasibilityError):
        gcn_pdf(0.0, 4.01)


def _modes(pdf):
    x = np.linspace(-8, 8, 16001)
    v = pdf(x)
    return int(np.sum((v[1:-1] > v[:-2]) & (v[1:-1] > v[2:])))


def test_unimodality_transition():
    assert _modes(lambda x: gchs_pdf(x, 9.6)) == 1
    assert _modes(lambda x: gchs_pdf(x, 9.8)) > 1
    assert 9.6 < unimodality_bound("HS") < 9.8
    assert MarginSpec("HS", 9.6).unimodal and not MarginSpec("HS", 9.8).unimodal
    assert _modes(lambda x: gcn_pdf(x, 2.35)) == 1
    assert _modes(lambda x: gcn_pdf(x, 2.45)) > 1
    assert unimodality_bound("Gaussian") == pytest.approx(2.4, abs=1e-6)


@given(betas_hs)
def test_gchs_nonnegative_and_even(beta):
    x = np.linspace(0, 30, 1201)
    v = gchs_pdf(x, beta)
    assert v.min() >= -1e-15
    np.testing.assert_array_equal(v, gchs_pdf(-x, beta))


@given(betas_n)
def test_gcn_nonnegative(beta):
    x = np.linspace(0, 12, 1201)
    assert gcn_pdf(x, beta).min() >= -1e-16


def test_spec_validation():
    with pytest.raises(InputError):
        SumSpec(())
    with pytest.raises(InputError):
        SumSpec.from_betas("HS", [1.0, 2.0], [0.1, 0.2])
    with pytest.raises(FeasibilityError):
        MarginSpec("HS", -0.1)
    assert Family.parse("normal") is Family.GAUSSIAN


# ---------------------------------------------------------------------------
# kernels and coefficients


@pytest.mark.parametrize("N", [1, 2, 3, 4, 7, 12, 20])
def test_hs_sum_kernels_against_mpmath(N):
    mp.mp.dps = 40
    for y in (0.0, 0.3, 2.0, 11.0, 35.0):
        assert sum_hs_pdf(y, N) == pytest.approx(float(mp_hs_sum_kernel(y, N)), rel=1e-12)


def test_clh_is_two_fold_hs():
    y, g = lattice_convolution([hs, hs])
    sel = np.abs(y) < 30
    assert np.max(np.abs(clh_pdf(y[sel]) - g[sel])) < 1e-12
    assert clh_pdf(0.0) == pytest.approx(1 / math.pi, rel=1e-15)
    np.testing.assert_allclose(sgchs_pdf(y[sel], SumSpec.from_betas("HS", [0.0, 0.0])),
                               clh_pdf(y[sel]), rtol=1e-13, atol=1e-300)


@given(st.lists(st.floats(0.0, 14.4), min_size=1, max_size=6))
def test_b_vector_brute_force(betas):
    b = b_coeffs(betas)
    np.testing.assert_allclose(b.values, b_brute_force(betas), rtol=1e-13, atol=1e-300)
    assert b.values[0] == 1.0
    assert b.values[1] == pytest.approx(sum(betas) / 24.0, rel=1e-13, abs=1e-300)


@given(st.integers(1, 6), st.floats(0.0, 14.4))
def test_equal_beta_delta_matches_single_beta_formula(n, beta):
    # heterogeneous delta coefficients with every beta equal
    table = delta_coeffs(n, b_coeffs([beta] * n)).as_dict()
    bt = beta / 24.0
    for (i, j), v in table.items():
        ref = (-2) ** (j - i) * math.comb(j, i) * sum(
            math.comb(n, k) * math.comb(k, j) * bt**k for k in range(j, n + 1))
        assert v == pytest.approx(ref, rel=1e-12, abs=1e-300)


@given(st.integers(1, 6), st.floats(0.0, 14.4))
def test_theta_coefficients(n, beta):
    table = theta_coeffs(n, beta / 24.0).as_dict()
    bt = beta / 24.0
    for (j,), v in table.items():
        ref = (-1) ** j * sum(math.comb(n, k) * math.comb(2 * k, j) * bt**k
                              for k in range(-(-j // 2), n + 1))
        assert v == pytest.approx(ref, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("n,beta", [(2, 4.0), (3, 8.0), (5, 14.4)])
def test_equal_beta_density_against_mpmath(n, beta):
    mp.mp.dps = 40
    spec = SumSpec.from_betas("HS", [beta] * n)
    for y in (0.0, 0.7, 3.0, 15.0):
        assert sgchs_pdf(y, spec) == pytest.approx(float(mp_equal_beta_density(y, n, beta)), rel=1e-11)


@given(st.lists(st.floats(0.0, 14.4), min_size=1, max_size=5))
def test_delta_and_theta_forms_agree(betas):
    spec = SumSpec.from_betas("HS", betas)
    y = np.linspace(-25, 25, 201)
    d = sgchs_pdf(y, spec, CoeffForm.DELTA)
    t = sgchs_pdf(y, spec, CoeffForm.THETA)
    assert np.max(np.abs(d - t)) <= 1e-12


def test_coefficient_table_stored_as_sign_and_log():
    t = coefficient_table(SumSpec.from_betas("HS", [3.0, 6.0, 9.0]), "delta")
    assert set(np.unique(t.signs)) <= {-1, 0, 1}
    np.testing.assert_allclose(t.values, t.signs * np.exp(t.log_mags))
    eb = equal_b_coeffs(3, 0.25)
    np.testing.assert_allclose(eb.values, b_brute_force([6.0] * 3), rtol=1e-14)


# ---------------------------------------------------------------------------
# sums


@pytest.mark.parametrize("betas", EQUAL_BETAS + GROWING_BETAS)
def test_sgchs_matches_lattice_convolution(betas):
    y, g = lattice_convolution([lambda x, b=b: gchs(x, b) for b in betas])
    sel = np.abs(y) <= 40
    v = sgchs_pdf(y[sel], SumSpec.from_betas("HS", betas))
    assert np.max(np.abs(v - g[sel])) <= 1e-8


@pytest.mark.parametrize("betas", [[2.0, 4.0], [2.0, 3.0, 3.5], [4.0, 4.0, 4.0, 4.0]])
def test_sgcn_matches_lattice_convolution(betas):
    y, g = lattice_convolution([lambda x, b=b: gcn(x, b) for b in betas], half_width=20.0)
    sel = np.abs(y) <= 15
    v = sgcn_pdf(y[sel], SumSpec.from_betas("Gaussian", betas))
    assert np.max(np.abs(v - g[sel])) <= 1e-10


def test_mixed_sum_matches_lattice_convolution():
    betas, fams = [4.0, 3.4, 1.5], ["HS", "HS", "Gaussian"]
    pdfs = [lambda x: gchs(x, 4.0), lambda x: gchs(x, 3.4), lambda x: gcn(x, 1.5)]
    y, g = lattice_convolution(pdfs)
    sel = np.abs(y) <= 30
    v = mixed_sum_pdf(y[sel], SumSpec.from_betas(fams, betas))
    assert np.max(np.abs(v - g[sel])) <= 1e-9


def test_hermite_polynomials():
    z = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(hermite_p4j(z, 1), z**4 - 6 * z**2 + 3, atol=1e-12)
    np.testing.assert_allclose(hermite_p4j(z, 0), 1.0)


@pytest.mark.parametrize("betas", [[2.0, 4.0], [8.0, 10.0, 11.0], [1.0, 2.0, 3.0, 4.0]])
@pytest.mark.parametrize("omega", [0.5, 1.0, 2.0])
def test_cf_product_matches_numerical_cf(betas, omega):
    spec = SumSpec.from_betas("HS", betas)
    prod = np.prod([gchs_cf(omega, b) for b in betas])
    assert numerical_cf(lambda y: sgchs_pdf(y, spec), omega) == pytest.approx(prod, abs=1e-9)


def test_gcn_cf():
    for w in (0.3, 1.0, 2.5):
        num = numerical_cf(lambda x: gcn_pdf(x, 2.0), w, lim=40.0)
        assert gcn_cf(w, 2.0) == pytest.approx(num, abs=1e-10)


@given(st.lists(st.floats(0.0, 14.4), min_size=1, max_size=4))
def test_sum_variance_is_n(betas):
    spec = SumSpec.from_betas("HS", betas)
    assert numeric_moment(spec, 0) == pytest.approx(1.0, abs=1e-8)
    assert numeric_moment(spec, 2) == pytest.approx(len(betas), abs=1e-7)


def test_sum_kurtosis_from_cumulants():
    # independent standardized margins: fourth cumulants add
    betas = [2.0, 5.0, 9.0]
    n = len(betas)
    k4 = sum(2.0 + b for b in betas)
    spec = SumSpec.from_betas("HS", betas)
    assert numeric_moment(spec, 4) == pytest.approx(k4 + 3 * n**2, abs=1e-6)


# ---------------------------------------------------------------------------
# sampling


def test_sampling_is_seeded(rng):
    spec = SumSpec.from_betas("HS", [4.0, 2.0])
    a = sample(spec, seed=7, count=1000)
    b = sample(spec, seed=7, count=1000)
    np.testing.assert_array_equal(a, b)
    assert sample(spec, seed=8, count=10)[0] != a[0]


@pytest.mark.parametrize("family,beta", [("HS", 0.0), ("HS", 6.0), ("Gaussian", 2.0)])
def test_sampled_moments(family, beta):
    m = MarginSpec(family, beta)
    x = sample(m, seed=3, count=200_000)
    assert np.mean(x) == pytest.approx(0.0, abs=0.02)
    assert np.var(x) == pytest.approx(1.0, abs=0.03)
    K = np.mean(x**4) / np.var(x) ** 2
    target = m.kurtosis
    assert K == pytest.approx(target, rel=0.12)


def test_density_dispatch():
    m = MarginSpec("HS", 3.0)
    assert density(0.4, m) == pytest.approx(gchs_pdf(0.4, 3.0))
    assert density(0.4, SumSpec((m,))) == pytest.approx(gchs_pdf(0.4, 3.0))
