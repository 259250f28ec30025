"""scikit-learn style wrappers around the functional API.

Each estimator takes a one-dimensional sample in ``fit`` (a vector or a
single-column array) and stores its results in trailing-underscore
attributes. Hyperparameters are plain constructor arguments, so
``get_params``, ``set_params`` and ``clone`` work as usual.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array

from .families import builtin_from_flags, make_sample
from .fisher_prior import prior_for
from .intrinsic_test import LOG100, intrinsic_statistic
from .mixed_test import default_spread, mixed_test
from .posterior import build_posterior, credible_interval, posterior_expectation


def _column(X):
    X = check_array(X, ensure_2d=False, dtype=np.float64)
    if X.ndim == 2:
        if X.shape[1] != 1:
            raise ValueError(f"expected a single column of observations, got {X.shape[1]} columns")
        X = X[:, 0]
    return X


class _FamilyMixin:
    def _family(self):
        return builtin_from_flags(self.family, sigma=self.sigma, trials=self.trials)

    def _sample(self, fam, X):
        return make_sample(fam, _column(X))


class JeffreysPosterior(_FamilyMixin, BaseEstimator):
    """Posterior of a one-parameter family under an objective prior.

    After ``fit``: ``posterior_``, ``properness_``, and for proper
    posteriors ``mean_`` and the equal-tail ``interval_`` of probability
    ``mass``.
    """

    def __init__(self, family="poisson", sigma=None, trials=None, prior="jeffreys", mass=0.95):
        self.family = family
        self.sigma = sigma
        self.trials = trials
        self.prior = prior
        self.mass = mass

    def fit(self, X, y=None):
        fam = self._family()
        post = build_posterior(fam, self._sample(fam, X), prior_for(fam, self.prior))
        self.posterior_ = post
        self.properness_ = post.properness
        if post.is_proper:
            self.mean_ = posterior_expectation(post, lambda a: a, vectorized=True)
            self.interval_ = credible_interval(post, self.mass)
        return self


class IntrinsicTest(_FamilyMixin, BaseEstimator):
    """Intrinsic-discrepancy test of ``alpha = null``.

    After ``fit``: ``result_``, ``d_`` and ``decision_``.
    """

    def __init__(self, family="normal_known_sigma", sigma=1.0, trials=None, null=0.0, prior=None,
                 threshold=LOG100, method="auto"):
        self.family = family
        self.sigma = sigma
        self.trials = trials
        self.null = null
        self.prior = prior
        self.threshold = threshold
        self.method = method

    def fit(self, X, y=None):
        fam = self._family()
        prior = None if self.prior is None else prior_for(fam, self.prior)
        self.result_ = intrinsic_statistic(
            fam, self._sample(fam, X), self.null, prior=prior, threshold=self.threshold, method=self.method
        )
        self.d_ = self.result_.d
        self.decision_ = self.result_.decision
        return self


class MixedPriorTest(_FamilyMixin, BaseEstimator):
    """Point-mass mixed-prior test of ``alpha = null``.

    ``spread_loc`` and ``spread_scale`` default to the null and the known
    sigma (1 when there is none). After ``fit``: ``result_``,
    ``bayes_factor_01_`` and ``posterior_null_prob_``.
    """

    def __init__(self, family="normal_known_sigma", sigma=1.0, trials=None, null=0.0, p=0.5,
                 spread="cauchy_proper", spread_loc=None, spread_scale=None):
        self.family = family
        self.sigma = sigma
        self.trials = trials
        self.null = null
        self.p = p
        self.spread = spread
        self.spread_loc = spread_loc
        self.spread_scale = spread_scale

    def _spread(self, fam):
        default = default_spread(fam, self.null)
        loc = default.params["location"] if self.spread_loc is None else self.spread_loc
        scale = default.params["scale"] if self.spread_scale is None else self.spread_scale
        return prior_for(fam, self.spread, location=loc, scale=scale)

    def fit(self, X, y=None):
        fam = self._family()
        self.result_ = mixed_test(fam, self._sample(fam, X), self.null, spread=self._spread(fam), p=self.p)
        self.bayes_factor_01_ = self.result_.bayes_factor_01
        self.posterior_null_prob_ = self.result_.posterior_null_prob
        return self
