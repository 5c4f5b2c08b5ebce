import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, optimize

from phonon_reset.errors import DomainError, InsufficientDataError
from phonon_reset.thermometry import (
    RpmRecordSet, compatibility_check, coverage, norm_cdf, norm_sf, posterior, summarize_records,
    synthesize_records,
)

ratio = st.floats(-5.0, 5.0, allow_nan=False)
scale = st.floats(1e-5, 0.5, allow_nan=False)


def _window(mu, sigma, lo=0.0, hi=1.0):
    """Sub-interval of [lo, hi] holding all mass of the truncated density."""
    return max(lo, mu - 40 * sigma), min(hi, mu + 40 * sigma)


def _quad(f, a, b, mu):
    pts = [mu] if a < mu < b else None
    return integrate.quad(f, a, b, points=pts, epsabs=0, epsrel=1e-13, limit=400)[0]


def quad_moments(mu, sigma):
    f = lambda p: math.exp(-0.5 * ((p - mu) / sigma) ** 2)
    a, b = _window(mu, sigma)
    z = _quad(f, a, b, mu)
    m = _quad(lambda p: p * f(p), a, b, mu)
    return z, m / z, f


def quad_quantile(mu, sigma, q):
    z, _, f = quad_moments(mu, sigma)
    a, b = _window(mu, sigma)
    return optimize.brentq(lambda x: _quad(f, a, x, mu) / z - q, a, b, xtol=1e-15, rtol=1e-14)


def test_normal_tails_consistent():
    for z in (-6.0, -1.0, 0.0, 2.5, 8.0):
        assert norm_cdf(z) + norm_sf(z) == pytest.approx(1.0, abs=1e-16)
    assert norm_sf(10.0) == pytest.approx(7.619853024160527e-24, rel=1e-12)


def test_summary_two_records():
    mu, se = summarize_records([0.0, 2e-4])
    assert mu == pytest.approx(1e-4)
    assert se == pytest.approx(1e-4)


def test_summary_requires_two_records():
    with pytest.raises(InsufficientDataError):
        summarize_records([1e-4])
    with pytest.raises(DomainError):
        summarize_records([0.1, float("nan")])


def test_negative_records_are_kept():
    rs = RpmRecordSet.from_records([-3e-4, 1e-4])
    assert rs.sample_mean == pytest.approx(-1e-4)
    assert len(rs) == 2


@given(ratio, scale)
@settings(max_examples=60, deadline=None)
def test_posterior_mean_matches_quadrature(r, sigma):
    mu = r * sigma
    _, mean, _ = quad_moments(mu, sigma)
    assert posterior(mu, sigma).mean == pytest.approx(mean, abs=1e-8)


@given(ratio, scale)
@settings(max_examples=25, deadline=None)
def test_credible_bounds_match_root_finding(r, sigma):
    mu = r * sigma
    post = posterior(mu, sigma)
    assert post.ci_low == pytest.approx(quad_quantile(mu, sigma, 0.025), abs=1e-8)
    assert post.ci_high == pytest.approx(quad_quantile(mu, sigma, 0.975), abs=1e-8)


@given(st.floats(-3e-4, 3e-4), st.floats(1e-5, 1e-3))
@settings(max_examples=40, deadline=None)
def test_mean_strictly_inside_prior_and_above_mu(mu, sigma):
    post = posterior(mu, sigma)
    assert 0.0 < post.mean < 1.0
    assert post.mean >= mu


def test_mean_monotone_in_mu_and_sigma():
    mus = np.linspace(-5e-4, 5e-4, 21)
    means = [posterior(m, 1.39e-4).mean for m in mus]
    assert np.all(np.diff(means) > 0)
    sigmas = np.linspace(5e-5, 5e-4, 10)
    means = [posterior(-1e-4, s).mean for s in sigmas]
    assert np.all(np.diff(means) > 0)


def test_pdf_integrates_to_one_and_cdf_consistent():
    post = posterior(-0.95e-4, 1.39e-4)
    x = np.linspace(0, 2e-3, 200001)
    assert np.trapezoid(post.pdf(x), x) == pytest.approx(1.0, abs=1e-6)
    # quantiles are bisected to 1e-12 in p, where the density is ~3e3
    assert post.cdf(post.ci_low) == pytest.approx(0.025, abs=1e-8)
    assert post.cdf(-1.0) == 0.0 and post.cdf(2.0) == 1.0


def test_posterior_input_checks():
    with pytest.raises(DomainError):
        posterior(0.0, 0.0)
    with pytest.raises(DomainError):
        posterior(0.0, 1.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        posterior(0.0, 1.0, ci_level=1.0)
    with pytest.raises(DomainError):
        posterior(-1.0, 1e-3)  # essentially no mass inside [0, 1]


def test_compatibility_symmetric():
    a = compatibility_check(4.00e-3, 0.37e-3, 3.72e-3, 0.30e-3)
    b = compatibility_check(3.72e-3, 0.30e-3, 4.00e-3, 0.37e-3)
    assert a == b
    assert compatibility_check(1.0, 0.1, 2.0, 0.1)[1] is False
    with pytest.raises(DomainError):
        compatibility_check(1.0, 0.0, 1.0, 0.1)


def test_synthesis_is_seeded():
    a = synthesize_records(8.3e-5, 1e-3, 50, seed=7)
    b = synthesize_records(8.3e-5, 1e-3, 50, seed=7)
    c = synthesize_records(8.3e-5, 1e-3, 50, seed=8)
    assert np.array_equal(a.records, b.records)
    assert not np.array_equal(a.records, c.records)
    single = synthesize_records(0.0, 1.0, 1, seed=0)
    assert math.isnan(single.standard_error)
    with pytest.raises(InsufficientDataError):
        summarize_records(single.records)


def test_coverage_small_run():
    cov = coverage(8.3e-5, 1.39e-4, 84, trials=100, seed=3)
    assert 0.85 <= cov <= 1.0
