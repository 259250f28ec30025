"""Frequentist coverage of equal-tail Jeffreys-prior credible intervals.

Replicate ``r`` draws its data from ``numpy.random.PCG64(seed ^ r)``, so
replicates are independent of evaluation order and can run in parallel.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np
from joblib import Parallel, delayed

from .exceptions import ConfigError, ImproperPosteriorError
from .families import as_point, draw, make_sample
from .fisher_prior import jeffreys_prior
from .posterior import build_posterior, credible_interval

PRNG = "PCG64"
SEED_RULE = "replicate seed = seed XOR replicate index"


@dataclass(frozen=True)
class CoverageResult:
    coverage: float
    mc_standard_error: float
    hits: int
    reps: int
    mass: float
    n: int
    true_value: float
    seed: int
    prng: str = PRNG
    seed_rule: str = SEED_RULE

    def to_dict(self):
        return asdict(self)


def replicate_rng(seed, index):
    return np.random.Generator(np.random.PCG64(seed ^ index))


def _check_seed(seed):
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    return int(seed)


def _one(fam, prior, true_value, n, mass, seed, index):
    values = draw(fam, true_value, n, replicate_rng(seed, index))
    post = build_posterior(fam, make_sample(fam, values), prior)
    if not post.is_proper:
        raise ImproperPosteriorError(
            f"replicate {index}: posterior is {post.properness} ({post.diagnostic})",
            diagnostic={"replicate": index, "detail": post.diagnostic},
        )
    lo, hi = credible_interval(post, mass)
    return lo <= true_value <= hi


def coverage_study(fam, true_value, n, reps, mass, seed, prior=None, n_jobs=1):
    """Simulate ``reps`` data sets of size ``n`` and count interval hits."""
    if fam.param_dim != 1:
        raise ConfigError("coverage studies handle one-parameter models")
    true_value = float(as_point(fam, true_value)[0])
    if int(n) != n or n < 1 or int(reps) != reps or reps < 1:
        raise ConfigError("n and reps must be positive integers")
    if not 0.0 < mass < 1.0:
        raise ConfigError("mass must lie in (0, 1)")
    seed = _check_seed(seed)
    prior = jeffreys_prior(fam) if prior is None else prior
    n, reps = int(n), int(reps)
    if n_jobs == 1:
        hits = [_one(fam, prior, true_value, n, mass, seed, r) for r in range(reps)]
    else:
        hits = Parallel(n_jobs=n_jobs)(
            delayed(_one)(fam, prior, true_value, n, mass, seed, r) for r in range(reps)
        )
    k = int(sum(hits))
    c = k / reps
    return CoverageResult(
        coverage=c,
        mc_standard_error=math.sqrt(c * (1.0 - c) / reps),
        hits=k,
        reps=reps,
        mass=mass,
        n=n,
        true_value=true_value,
        seed=seed,
    )
