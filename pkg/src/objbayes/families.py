"""Sampling models.

A :class:`Family` bundles a log-density ``log f(x | alpha)`` with its
parameter space, data support and, for the built-in catalog, closed-form
Fisher information and sufficient statistics.

Parameter points are numpy arrays whose last axis has length
``param_dim``. Built-in log-densities broadcast, so ``alpha`` may also be a
stack of points of shape ``(k, param_dim)``.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import special, stats

from .exceptions import ConfigError, DomainError

BUILTIN_NAMES = ("normal_known_sigma", "normal", "poisson", "bernoulli", "binomial", "exponential")

# Tail mass left outside the data range used for sums and integrals over x.
DISCRETE_TAIL = 1e-12
CONTINUOUS_TAIL = 1e-13

INF = math.inf


@dataclass(frozen=True, eq=False)
class Family:
    """A parametric sampling model.

    Only ``name``, ``param_dim``, ``param_space``, ``data_support``,
    ``discrete`` and ``log_density`` are required for a user-supplied
    family; the remaining hooks are optional accelerations.
    """

    name: str
    param_dim: int
    param_space: tuple
    data_support: tuple
    discrete: bool
    log_density: Callable
    analytic_fisher: Optional[Callable] = None
    sufficient_summary: Optional[Callable] = None
    summary_loglik: Optional[Callable] = None
    data_range: Optional[Callable] = None
    point_estimate: Optional[Callable] = None
    sampler: Optional[Callable] = None
    fixed: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.param_dim < 1 or len(self.param_space) != self.param_dim:
            raise ConfigError("param_space must list one interval per parameter")
        for lo, hi in self.param_space:
            if not lo < hi:
                raise ConfigError(f"empty parameter interval ({lo}, {hi})")

    def summarize(self, values):
        if self.sufficient_summary is not None:
            return self.sufficient_summary(values)
        return _generic_summary(values)

    def range_for(self, alpha, eps):
        """Data interval holding all but ``eps`` of the mass at ``alpha``."""
        if self.data_range is not None:
            return self.data_range(alpha, eps)
        lo, hi = self.data_support
        if self.discrete and not math.isfinite(hi):
            raise ConfigError(
                f"family {self.name!r} has unbounded discrete support and no data_range hook"
            )
        return lo, hi


@dataclass(frozen=True, eq=False)
class Sample:
    """Observed data, kept as raw values when available and always as a summary."""

    summary: dict
    values: Optional[np.ndarray] = None

    @property
    def n(self):
        return int(self.summary["n"])


def _generic_summary(values):
    x = np.asarray(values, dtype=float)
    mean = float(np.mean(x))
    return {
        "n": int(x.size),
        "sum": float(np.sum(x)),
        "mean": mean,
        "ss": float(np.sum((x - mean) ** 2)),
        "log_base": 0.0,
    }


def in_support(fam, x):
    x = np.asarray(x, dtype=float)
    lo, hi = fam.data_support
    ok = np.isfinite(x) & (x >= lo) & (x <= hi)
    if fam.discrete:
        ok &= x == np.round(x)
    return ok


def make_sample(fam, values):
    """Validate raw observations against ``fam`` and summarize them."""
    x = np.asarray(values, dtype=float).ravel()
    if x.size < 1:
        raise ConfigError("a sample needs at least one observation")
    bad = ~in_support(fam, x)
    if bad.any():
        first = int(np.flatnonzero(bad)[0])
        raise ConfigError(
            f"value {x[first]!r} at position {first} is outside the support of {fam.name}"
        )
    x.setflags(write=False)
    return Sample(summary=fam.summarize(x), values=x)


def sample_from_stats(fam, n, mean=None, total=None, ss=0.0):
    """Build a :class:`Sample` from sufficient statistics only.

    Exactly one of ``mean`` and ``total`` must be given. Constant terms of
    the likelihood that depend on the unseen raw values (the base measure
    and the within-sample sum of squares) are set to zero; they cancel in
    posteriors and Bayes factors.
    """
    if n is None or int(n) != n or n < 1:
        raise ConfigError("n must be a positive integer")
    if (mean is None) == (total is None):
        raise ConfigError("give exactly one of mean and sum")
    n = int(n)
    if mean is None:
        mean = total / n
    else:
        total = mean * n
    if not (math.isfinite(mean) and math.isfinite(total)):
        raise ConfigError("sufficient statistics must be finite")
    lo, hi = fam.data_support
    if not lo <= mean <= hi:
        raise ConfigError(f"mean {mean} is outside the support of {fam.name}")
    return Sample(summary={"n": n, "sum": float(total), "mean": float(mean), "ss": float(ss), "log_base": 0.0})


def as_point(fam, alpha):
    """Coerce ``alpha`` to a length-``param_dim`` array and check it is interior."""
    a = np.atleast_1d(np.asarray(alpha, dtype=float))
    if a.shape != (fam.param_dim,):
        raise ConfigError(f"{fam.name} expects a parameter of dimension {fam.param_dim}, got shape {a.shape}")
    for i, (lo, hi) in enumerate(fam.param_space):
        if not (lo < a[i] < hi):
            raise DomainError(
                f"parameter {a[i]!r} is not in the open interval ({lo}, {hi}) of {fam.name}"
            )
    return a


def log_likelihood(fam, s, alpha):
    """Sum of the log-density over the sample, in nats."""
    a = as_point(fam, alpha)
    if s.values is not None:
        value = float(np.sum(fam.log_density(s.values, a)))
    elif fam.summary_loglik is not None:
        value = float(fam.summary_loglik(s.summary, a))
    else:
        raise ConfigError(f"family {fam.name!r} needs raw values to evaluate the likelihood")
    if not math.isfinite(value):
        raise DomainError(f"log-likelihood is not finite at {a.tolist()}")
    return value


def loglik_many(fam, s, alphas):
    """Log-likelihood at a stack of points, shape ``(k, param_dim)`` -> ``(k,)``.

    Uses the sufficient-statistic form when the family offers one. No
    domain checks; callers stay inside the parameter space.
    """
    alphas = np.asarray(alphas, dtype=float)
    if fam.summary_loglik is not None:
        return np.asarray(fam.summary_loglik(s.summary, alphas), dtype=float)
    if s.values is None:
        raise ConfigError(f"family {fam.name!r} needs raw values to evaluate the likelihood")
    return np.array([np.sum(fam.log_density(s.values, a)) for a in alphas])


def draw(fam, alpha, size, rng):
    """Simulate ``size`` observations at ``alpha`` with a numpy Generator."""
    if fam.sampler is None:
        raise ConfigError(f"family {fam.name!r} cannot simulate data")
    return fam.sampler(rng, as_point(fam, alpha), size)


def reparameterize(fam, to_original, new_space, name=None):
    """The same model indexed by a new parameter ``phi`` with ``alpha = to_original(phi)``.

    The result carries no analytic Fisher information, so Fisher-based
    quantities for it are computed numerically.
    """

    def log_density(x, phi):
        return fam.log_density(x, to_original(np.asarray(phi, dtype=float)))

    summary_loglik = None
    if fam.summary_loglik is not None:
        def summary_loglik(summary, phi):
            return fam.summary_loglik(summary, to_original(np.asarray(phi, dtype=float)))

    data_range = None
    if fam.data_range is not None:
        def data_range(phi, eps):
            return fam.data_range(to_original(np.asarray(phi, dtype=float)), eps)

    return replace(
        fam,
        name=name or f"{fam.name}~reparameterized",
        param_space=tuple(tuple(iv) for iv in new_space),
        log_density=log_density,
        analytic_fisher=None,
        summary_loglik=summary_loglik,
        data_range=data_range,
        point_estimate=None,
        sampler=None,
    )


# --------------------------------------------------------------------------
# tail cut-offs


def normal_halfwidth(eps):
    """t with P(|Z| > t) <= eps, from the Chernoff bound 2 exp(-t^2/2)."""
    return math.sqrt(2.0 * math.log(2.0 / eps))


def poisson_cutoff(lam, eps=DISCRETE_TAIL):
    """Smallest K with a guaranteed bound P(X > K) < eps for X ~ Poisson(lam).

    Bound: for K + 2 > lam the tail is dominated by a geometric series,
    P(X > K) <= pmf(K + 1) / (1 - lam / (K + 2)).
    """
    hi = int(lam + 40.0 * math.sqrt(lam) + 60.0)
    k = np.arange(hi + 1)
    valid = (k + 2) > lam
    with np.errstate(divide="ignore", invalid="ignore"):
        log_bound = stats.poisson.logpmf(k + 1, lam) - np.log1p(-lam / (k + 2))
    ok = valid & (log_bound < math.log(eps))
    idx = np.flatnonzero(ok)
    if idx.size == 0:
        raise ConfigError(f"could not bound the Poisson tail at lambda={lam}")
    return int(k[idx[0]])


# --------------------------------------------------------------------------
# built-in catalog


def _first(alpha):
    return np.asarray(alpha, dtype=float)[..., 0]


def _second(alpha):
    return np.asarray(alpha, dtype=float)[..., 1]


def _as_matrix(values):
    return np.asarray(values, dtype=float)[..., None, None]


def _normal_known_sigma(sigma):
    var = sigma * sigma
    log_norm = -0.5 * math.log(2.0 * math.pi * var)

    def log_density(x, alpha):
        return log_norm - 0.5 * (np.asarray(x, dtype=float) - _first(alpha)) ** 2 / var

    def summary_loglik(s, alpha):
        mu = _first(alpha)
        return s["n"] * log_norm - 0.5 * (s["ss"] + s["n"] * (s["mean"] - mu) ** 2) / var

    def data_range(alpha, eps):
        t = normal_halfwidth(eps)
        mu = float(_first(alpha))
        return mu - t * sigma, mu + t * sigma

    return Family(
        name="normal_known_sigma",
        param_dim=1,
        param_space=((-INF, INF),),
        data_support=(-INF, INF),
        discrete=False,
        log_density=log_density,
        analytic_fisher=lambda alpha: np.full(np.shape(_first(alpha)) + (1, 1), 1.0 / var),
        summary_loglik=summary_loglik,
        data_range=data_range,
        point_estimate=lambda s: np.array([s["mean"]]),
        sampler=lambda rng, a, size: rng.normal(a[0], sigma, size),
        fixed={"sigma": float(sigma)},
    )


def _normal():
    half_log_2pi = 0.5 * math.log(2.0 * math.pi)

    def log_density(x, alpha):
        mu, sd = _first(alpha), _second(alpha)
        return -half_log_2pi - np.log(sd) - 0.5 * ((np.asarray(x, dtype=float) - mu) / sd) ** 2

    def summary_loglik(s, alpha):
        mu, sd = _first(alpha), _second(alpha)
        n = s["n"]
        return -n * (half_log_2pi + np.log(sd)) - 0.5 * (s["ss"] + n * (s["mean"] - mu) ** 2) / sd**2

    def fisher(alpha):
        sd = _second(alpha)
        out = np.zeros(np.shape(sd) + (2, 2))
        out[..., 0, 0] = 1.0 / sd**2
        out[..., 1, 1] = 2.0 / sd**2
        return out

    def data_range(alpha, eps):
        t = normal_halfwidth(eps)
        mu, sd = float(_first(alpha)), float(_second(alpha))
        return mu - t * sd, mu + t * sd

    def point_estimate(s):
        sd = math.sqrt(s["ss"] / s["n"]) if s["ss"] > 0 else 1.0
        return np.array([s["mean"], sd])

    return Family(
        name="normal",
        param_dim=2,
        param_space=((-INF, INF), (0.0, INF)),
        data_support=(-INF, INF),
        discrete=False,
        log_density=log_density,
        analytic_fisher=fisher,
        summary_loglik=summary_loglik,
        data_range=data_range,
        point_estimate=point_estimate,
        sampler=lambda rng, a, size: rng.normal(a[0], a[1], size),
    )


def _poisson():
    def log_density(x, alpha):
        x = np.asarray(x, dtype=float)
        return special.xlogy(x, _first(alpha)) - _first(alpha) - special.gammaln(x + 1.0)

    def summary(values):
        out = _generic_summary(values)
        out["log_base"] = -float(np.sum(special.gammaln(np.asarray(values, dtype=float) + 1.0)))
        return out

    def summary_loglik(s, alpha):
        lam = _first(alpha)
        return special.xlogy(s["sum"], lam) - s["n"] * lam + s["log_base"]

    return Family(
        name="poisson",
        param_dim=1,
        param_space=((0.0, INF),),
        data_support=(0, INF),
        discrete=True,
        log_density=log_density,
        analytic_fisher=lambda alpha: _as_matrix(1.0 / _first(alpha)),
        sufficient_summary=summary,
        summary_loglik=summary_loglik,
        data_range=lambda alpha, eps: (0, poisson_cutoff(float(_first(alpha)), eps)),
        point_estimate=lambda s: np.array([(s["sum"] + 0.5) / s["n"]]),
        sampler=lambda rng, a, size: rng.poisson(a[0], size).astype(float),
    )


def _binomial(trials, name="binomial"):
    m = int(trials)

    def log_density(x, alpha):
        x = np.asarray(x, dtype=float)
        th = _first(alpha)
        log_choose = special.gammaln(m + 1.0) - special.gammaln(x + 1.0) - special.gammaln(m - x + 1.0)
        return log_choose + special.xlogy(x, th) + special.xlog1py(m - x, -th)

    def summary(values):
        out = _generic_summary(values)
        x = np.asarray(values, dtype=float)
        out["log_base"] = float(
            np.sum(special.gammaln(m + 1.0) - special.gammaln(x + 1.0) - special.gammaln(m - x + 1.0))
        )
        return out

    def summary_loglik(s, alpha):
        th = _first(alpha)
        return special.xlogy(s["sum"], th) + special.xlog1py(s["n"] * m - s["sum"], -th) + s["log_base"]

    fixed = {} if name == "bernoulli" else {"trials": m}
    return Family(
        name=name,
        param_dim=1,
        param_space=((0.0, 1.0),),
        data_support=(0, m),
        discrete=True,
        log_density=log_density,
        analytic_fisher=lambda alpha: _as_matrix(m / (_first(alpha) * (1.0 - _first(alpha)))),
        sufficient_summary=summary,
        summary_loglik=summary_loglik,
        data_range=lambda alpha, eps: (0, m),
        point_estimate=lambda s: np.array([(s["sum"] + 0.5) / (s["n"] * m + 1.0)]),
        sampler=lambda rng, a, size: rng.binomial(m, a[0], size).astype(float),
        fixed=fixed,
    )


def _exponential():
    def log_density(x, alpha):
        x = np.asarray(x, dtype=float)
        lam = _first(alpha)
        with np.errstate(invalid="ignore"):
            return np.where(x >= 0.0, np.log(lam) - lam * x, -np.inf)

    def summary_loglik(s, alpha):
        lam = _first(alpha)
        return s["n"] * np.log(lam) - lam * s["sum"]

    def point_estimate(s):
        return np.array([s["n"] / s["sum"] if s["sum"] > 0 else 1.0])

    return Family(
        name="exponential",
        param_dim=1,
        param_space=((0.0, INF),),
        data_support=(0.0, INF),
        discrete=False,
        log_density=log_density,
        analytic_fisher=lambda alpha: _as_matrix(1.0 / _first(alpha) ** 2),
        summary_loglik=summary_loglik,
        data_range=lambda alpha, eps: (0.0, math.log(1.0 / eps) / float(_first(alpha))),
        point_estimate=point_estimate,
        sampler=lambda rng, a, size: rng.exponential(1.0 / a[0], size),
    )


def _positive(fixed, key, kind=float):
    if key not in fixed or fixed[key] is None:
        raise ConfigError(f"missing hyperparameter {key!r}")
    try:
        value = kind(fixed[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"hyperparameter {key!r} must be numeric") from exc
    if kind is int and value != float(fixed[key]):
        raise ConfigError(f"hyperparameter {key!r} must be an integer")
    if not (math.isfinite(value) and value > 0):
        raise ConfigError(f"hyperparameter {key!r} must be positive, got {fixed[key]!r}")
    return value


def builtin_from_flags(name, sigma=None, trials=None):
    """make_builtin with hyperparameters given as keywords; unused ones are ignored."""
    fixed = {}
    if name == "normal_known_sigma":
        fixed["sigma"] = sigma
    elif name == "binomial":
        fixed["trials"] = trials
    return make_builtin(name, fixed)


def make_builtin(name, fixed=None):
    """Return one of the catalogued families.

    ``fixed`` supplies ``sigma`` for ``normal_known_sigma`` and ``trials``
    for ``binomial``.
    """
    fixed = dict(fixed or {})
    if name == "normal_known_sigma":
        return _normal_known_sigma(_positive(fixed, "sigma"))
    if name == "normal":
        return _normal()
    if name == "poisson":
        return _poisson()
    if name == "bernoulli":
        return _binomial(1, name="bernoulli")
    if name == "binomial":
        return _binomial(_positive(fixed, "trials", int))
    if name == "exponential":
        return _exponential()
    raise ConfigError(f"unknown family {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
