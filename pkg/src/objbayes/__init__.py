"""Objective Bayesian estimation and precise-hypothesis testing.

Jeffreys-rule priors from Fisher information, numerically normalized
one-parameter posteriors with a properness verdict, the intrinsic
discrepancy test and a point-mass mixed-prior test.
"""

from .coverage import CoverageResult, coverage_study
from .divergence import DistRef, intrinsic_discrepancy, kl
from .estimators import IntrinsicTest, JeffreysPosterior, MixedPriorTest
from .exceptions import (
    ConfigError,
    DomainError,
    ImproperPosteriorError,
    ImproperPriorError,
    NumericalError,
    ObjBayesError,
    OutOfScopeError,
)
from .families import Family, Sample, log_likelihood, make_builtin, make_sample, sample_from_stats
from .fisher_prior import PriorSpec, fisher_information, jeffreys_prior, named_prior, prior_pushforward
from .intrinsic_test import (
    IntrinsicTestResult,
    discrepancy_at,
    discrepancy_posterior_summary,
    intrinsic_statistic,
)
from .mixed_test import MixedTestResult, lindley_sweep, mixed_test
from .posterior import PosteriorDensity, build_posterior, credible_interval, posterior_expectation

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "CoverageResult", "DistRef", "DomainError", "Family", "ImproperPosteriorError",
    "ImproperPriorError", "IntrinsicTest", "IntrinsicTestResult", "JeffreysPosterior", "MixedPriorTest",
    "MixedTestResult", "NumericalError", "ObjBayesError", "OutOfScopeError", "PosteriorDensity",
    "PriorSpec", "Sample", "build_posterior", "coverage_study", "credible_interval",
    "discrepancy_at", "discrepancy_posterior_summary", "fisher_information", "intrinsic_discrepancy",
    "intrinsic_statistic", "jeffreys_prior", "kl", "lindley_sweep", "log_likelihood", "make_builtin",
    "make_sample", "mixed_test", "named_prior", "posterior_expectation", "prior_pushforward",
    "sample_from_stats",
]
