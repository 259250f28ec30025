import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special, stats

from objbayes.exceptions import ConfigError, ImproperPosteriorError, OutOfScopeError
from objbayes.families import make_builtin, make_sample, sample_from_stats
from objbayes.fisher_prior import PriorSpec, jeffreys_prior, named_prior
from objbayes.posterior import (
    IMPROPER,
    PROPER,
    build_posterior,
    credible_interval,
    posterior_expectation,
    posterior_grid,
)

POIS = make_builtin("poisson")
BERN = make_builtin("bernoulli")
NKS = make_builtin("normal_known_sigma", {"sigma": 1.0})


def _zero_counts_posterior(prior):
    return build_posterior(POIS, make_sample(POIS, [0, 0, 0]), prior)


def test_poisson_zero_counts_scale_invariant_is_improper():
    post = _zero_counts_posterior(named_prior("scale_invariant", (0, math.inf)))
    assert post.properness == IMPROPER
    assert "lower" in post.diagnostic
    assert post.log_norm_const is None
    with pytest.raises(ImproperPosteriorError):
        posterior_expectation(post, lambda a: a)


def test_poisson_zero_counts_jeffreys_is_gamma_half_three():
    post = _zero_counts_posterior(jeffreys_prior(POIS))
    assert post.properness == PROPER
    assert post.log_norm_const == pytest.approx(math.log(special.gamma(0.5) / math.sqrt(3.0)), abs=1e-9)
    assert posterior_expectation(post, lambda a: 1.0) == pytest.approx(1.0, abs=1e-9)
    assert posterior_expectation(post, lambda a: a) == pytest.approx(1 / 6, rel=1e-8)


def test_normal_uniform_posterior_moments():
    post = build_posterior(NKS, make_sample(NKS, [0.5]), named_prior("uniform"))
    assert post.properness == PROPER
    assert posterior_expectation(post, lambda m: m) == pytest.approx(0.5, abs=1e-8)
    assert posterior_expectation(post, lambda m: (m - 0.5) ** 2) == pytest.approx(1.0, abs=1e-8)


def test_expectation_reports_error_estimate():
    post = build_posterior(NKS, make_sample(NKS, [0.5]), named_prior("uniform"))
    value, err = posterior_expectation(post, lambda m: m**2, full_output=True, vectorized=True)
    assert value == pytest.approx(1.25, abs=1e-8)
    assert 0 <= err <= 1e-7


def test_density_integrates_to_one():
    cases = [
        (POIS, [0, 0, 0], jeffreys_prior(POIS)),
        (POIS, [3, 7, 1], jeffreys_prior(POIS)),
        (BERN, [1, 1, 1], jeffreys_prior(BERN)),
        (NKS, [0.2, -1.4], named_prior("uniform")),
        (make_builtin("exponential"), [0.4, 2.2], jeffreys_prior(make_builtin("exponential"))),
    ]
    for fam, values, prior in cases:
        post = build_posterior(fam, make_sample(fam, values), prior)
        lo, hi = post.support
        f = lambda a: float(np.exp(post.logpdf(np.array([a]))))
        pieces = [(lo, post.center), (post.center, hi)]
        total = sum(integrate.quad(f, a, b, limit=200, epsabs=1e-12)[0] for a, b in pieces)
        assert total == pytest.approx(1.0, abs=1e-6)


def _erf_quantile(p):
    # bisection on the standard normal CDF written with erf
    lo, hi = -40.0, 40.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if 0.5 * (1 + math.erf(mid / math.sqrt(2))) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_standard_normal_interval():
    post = build_posterior(NKS, make_sample(NKS, [0.0]), named_prior("uniform"))
    lo, hi = credible_interval(post, 0.95)
    assert lo == pytest.approx(-1.95996, abs=1e-4)
    assert hi == pytest.approx(1.95996, abs=1e-4)
    assert hi == pytest.approx(_erf_quantile(0.975), abs=1e-8)
    assert lo == pytest.approx(_erf_quantile(0.025), abs=1e-8)


def test_intervals_widen_with_mass():
    post = build_posterior(POIS, make_sample(POIS, [2, 5]), jeffreys_prior(POIS))
    intervals = [credible_interval(post, m) for m in (0.5, 0.9, 0.99)]
    for (a0, b0), (a1, b1) in zip(intervals, intervals[1:]):
        assert a1 < a0 and b1 > b0


def test_gamma_interval_self_consistent():
    post = _zero_counts_posterior(jeffreys_prior(POIS))
    lo, hi = credible_interval(post, 0.9)
    assert post.cdf(lo) == pytest.approx(0.05, abs=1e-6)
    assert post.cdf(hi) == pytest.approx(0.95, abs=1e-6)
    assert lo == pytest.approx(stats.gamma.ppf(0.05, 0.5, scale=1 / 3), rel=1e-6)
    assert hi == pytest.approx(stats.gamma.ppf(0.95, 0.5, scale=1 / 3), rel=1e-6)


def test_credible_interval_rejects_bad_mass():
    post = build_posterior(NKS, make_sample(NKS, [0.0]), named_prior("uniform"))
    for mass in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ConfigError):
            credible_interval(post, mass)


@pytest.mark.parametrize("name,values", [
    ("normal_known_sigma", [3.0]),
    ("poisson", [0]),
    ("poisson", [40, 50]),
    ("bernoulli", [1, 0]),
    ("bernoulli", [1, 1, 1]),
    ("bernoulli", [0]),
    ("binomial", [7]),
    ("binomial", [0, 0]),
    ("exponential", [0.01]),
])
def test_jeffreys_posteriors_are_proper(name, values):
    fam = make_builtin(name, {"sigma": 2.0} if name == "normal_known_sigma" else {"trials": 7} if name == "binomial" else {})
    post = build_posterior(fam, make_sample(fam, values), jeffreys_prior(fam))
    assert post.properness == PROPER


def test_bernoulli_all_successes_matches_beta():
    post = build_posterior(BERN, make_sample(BERN, [1, 1, 1]), jeffreys_prior(BERN))
    # Beta(3.5, 0.5)
    assert posterior_expectation(post, lambda t: t) == pytest.approx(3.5 / 4.0, rel=1e-6)
    assert post.cdf(0.9) == pytest.approx(stats.beta.cdf(0.9, 3.5, 0.5), abs=1e-7)


def test_haldane_prior_is_improper_on_all_successes():
    def log_haldane(a):
        with np.errstate(divide="ignore"):
            return -np.log(a[..., 0]) - np.log1p(-a[..., 0])

    haldane = PriorSpec(log_haldane, ((0.0, 1.0),), "haldane")
    post = build_posterior(BERN, make_sample(BERN, [1, 1]), haldane)
    assert post.properness == IMPROPER
    assert "upper" in post.diagnostic


def test_refinement_changes_log_norm_const_little():
    s = make_sample(POIS, [4, 0, 9, 2])
    coarse = build_posterior(POIS, s, jeffreys_prior(POIS), panels=200)
    fine = build_posterior(POIS, s, jeffreys_prior(POIS), panels=400)
    assert abs(coarse.table_log_norm_const - fine.table_log_norm_const) < 1e-7
    assert abs(coarse.log_norm_const - fine.table_log_norm_const) < 1e-7


def test_large_sample():
    s = sample_from_stats(NKS, 10**6, mean=0.001)
    post = build_posterior(NKS, s, named_prior("uniform"))
    assert posterior_expectation(post, lambda m: m) == pytest.approx(0.001, abs=1e-9)
    lo, hi = credible_interval(post, 0.95)
    assert hi - lo == pytest.approx(2 * 1.959963984540054e-3, rel=1e-6)


def test_multiparameter_is_out_of_scope():
    fam = make_builtin("normal")
    with pytest.raises(OutOfScopeError):
        build_posterior(fam, make_sample(fam, [0.1, 0.5]), jeffreys_prior(fam))


def test_posterior_grid_display():
    fam = make_builtin("normal")
    rng = np.random.default_rng(0)
    s = make_sample(fam, rng.normal(1.0, 2.0, 30))
    mu = np.linspace(-2, 4, 121)
    sigma = np.linspace(0.8, 4.5, 120)
    out = posterior_grid(fam, s, jeffreys_prior(fam), [mu, sigma])
    assert out["density"].shape == (121, 120)
    for marginal, axis in zip(out["marginals"], (mu, sigma)):
        assert integrate.trapezoid(marginal, axis) == pytest.approx(1.0, abs=1e-6)
    # mu marginal peaks near the sample mean
    assert abs(mu[np.argmax(out["marginals"][0])] - s.summary["mean"]) < 0.1


# conjugate posterior means under the Jeffreys prior
@settings(max_examples=30, deadline=None)
@given(counts=st.lists(st.integers(0, 60), min_size=1, max_size=25))
def test_poisson_conjugate_mean(counts):
    post = build_posterior(POIS, make_sample(POIS, counts), jeffreys_prior(POIS))
    expected = (sum(counts) + 0.5) / len(counts)
    assert posterior_expectation(post, lambda a: a) == pytest.approx(expected, rel=1e-6)


@settings(max_examples=30, deadline=None)
@given(flips=st.lists(st.integers(0, 1), min_size=1, max_size=40))
def test_bernoulli_conjugate_mean(flips):
    post = build_posterior(BERN, make_sample(BERN, flips), jeffreys_prior(BERN))
    expected = (sum(flips) + 0.5) / (len(flips) + 1)
    assert posterior_expectation(post, lambda a: a) == pytest.approx(expected, rel=1e-6)


@settings(max_examples=30, deadline=None)
@given(times=st.lists(st.floats(1e-3, 50), min_size=1, max_size=25))
def test_exponential_conjugate_mean(times):
    fam = make_builtin("exponential")
    post = build_posterior(fam, make_sample(fam, times), jeffreys_prior(fam))
    # prior 1/lambda gives Gamma(n, sum)
    assert posterior_expectation(post, lambda a: a) == pytest.approx(len(times) / sum(times), rel=1e-6)


@settings(max_examples=30, deadline=None)
@given(mean=st.floats(-1e4, 1e4), n=st.integers(1, 10**7), sigma=st.floats(1e-3, 1e3))
def test_normal_posterior_mean_and_interval(mean, n, sigma):
    fam = make_builtin("normal_known_sigma", {"sigma": sigma})
    post = build_posterior(fam, sample_from_stats(fam, n, mean=mean), named_prior("uniform"))
    se = sigma / math.sqrt(n)
    tol = 1e-6 * max(se, abs(mean))
    assert posterior_expectation(post, lambda m: m) == pytest.approx(mean, abs=tol)
    lo, hi = credible_interval(post, 0.9)
    assert lo == pytest.approx(mean - 1.6448536269514722 * se, abs=tol)
    assert hi == pytest.approx(mean + 1.6448536269514722 * se, abs=tol)
