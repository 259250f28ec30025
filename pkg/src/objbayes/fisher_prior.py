"""Fisher information and objective priors.

Priors are kept in log-unnormalized form throughout. Two priors are
"equal" when their log-densities differ by a constant.
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _quad
from .exceptions import ConfigError, NumericalError
from .families import CONTINUOUS_TAIL, DISCRETE_TAIL, as_point

PRIOR_LABELS = ("jeffreys", "uniform", "scale_invariant", "cauchy_proper")

_REL_STEP = 1e-5


@dataclass(frozen=True, eq=False)
class PriorSpec:
    """A possibly improper prior.

    ``log_density_unnorm`` maps a parameter point (or a stack of them, last
    axis = dimension) to the log of an unnormalized density.
    """

    log_density_unnorm: Callable
    support: tuple
    label: str
    params: dict = field(default_factory=dict)

    @property
    def dim(self):
        return len(self.support)

    def __call__(self, alpha):
        return self.log_density_unnorm(alpha)


def _as_support(support):
    if support is None:
        return None
    support = tuple(support)
    if len(support) == 2 and not isinstance(support[0], (tuple, list)):
        support = (support,)
    out = []
    for iv in support:
        lo, hi = float(iv[0]), float(iv[1])
        if not lo < hi:
            raise ConfigError(f"empty support interval ({lo}, {hi})")
        out.append((lo, hi))
    return tuple(out)


# --------------------------------------------------------------------------
# Fisher information


def _fd_steps(fam, a):
    steps = np.maximum(_REL_STEP, _REL_STEP * np.abs(a))
    for i, (lo, hi) in enumerate(fam.param_space):
        room = min(a[i] - lo, hi - a[i])
        steps[i] = min(steps[i], 0.5 * room)
    return steps


def _score_fn(fam, a, steps):
    """Central-difference score, vectorized over data points."""
    d = fam.param_dim
    shifts = np.eye(d) * steps

    def score(x):
        x = np.asarray(x, dtype=float)
        out = np.empty((d,) + x.shape)
        for i in range(d):
            up = fam.log_density(x, a + shifts[i])
            down = fam.log_density(x, a - shifts[i])
            out[i] = (up - down) / (2.0 * steps[i])
        return out

    return score


def numerical_fisher(fam, alpha):
    """Expected outer product of a finite-difference score.

    The expectation is a truncated sum over the data range for discrete
    families and adaptive quadrature otherwise.
    """
    a = as_point(fam, alpha)
    d = fam.param_dim
    score = _score_fn(fam, a, _fd_steps(fam, a))
    info = np.empty((d, d))
    if fam.discrete:
        lo, hi = fam.range_for(a, DISCRETE_TAIL)
        x = np.arange(int(lo), int(hi) + 1, dtype=float)
        p = np.exp(fam.log_density(x, a))
        s = score(x)
        info = np.einsum("k,ik,jk->ij", p, s, s)
    else:
        lo, hi = fam.range_for(a, CONTINUOUS_TAIL)

        def entry(i, j, epsabs):
            def integrand(x):
                lp = fam.log_density(x, a)
                if not np.isfinite(lp):
                    return 0.0
                s = score(x)
                return float(np.exp(lp) * s[i] * s[j])

            value, _ = _quad.adaptive(
                integrand, lo, hi, epsabs=epsabs, epsrel=1e-11, points=[float(a[0])],
                what="Fisher information integral",
            )
            return value

        for i in range(d):
            info[i, i] = entry(i, i, 1e-13)
        # off-diagonal entries may vanish, so their absolute tolerance follows the diagonal
        for i in range(d):
            for j in range(i + 1, d):
                info[i, j] = info[j, i] = entry(i, j, 1e-11 * math.sqrt(info[i, i] * info[j, j]))
    return info


def fisher_information(fam, alpha, numerical=False):
    """Fisher information matrix at ``alpha``, shape ``(param_dim, param_dim)``.

    Uses the family's closed form unless ``numerical`` is set or none is
    available.
    """
    a = as_point(fam, alpha)
    if fam.analytic_fisher is not None and not numerical:
        info = np.array(fam.analytic_fisher(a), dtype=float).reshape(fam.param_dim, fam.param_dim)
    else:
        info = numerical_fisher(fam, a)
    if not np.all(np.isfinite(info)):
        raise NumericalError(f"non-finite Fisher information at {a.tolist()}")
    info = 0.5 * (info + info.T)
    if np.linalg.eigvalsh(info).min() <= 0:
        raise NumericalError(f"Fisher information is not positive definite at {a.tolist()}")
    return info


# --------------------------------------------------------------------------
# priors


def jeffreys_prior(fam, numerical=False):
    """Jeffreys-rule prior: half the log-determinant of the Fisher information."""
    d = fam.param_dim

    if fam.analytic_fisher is not None and not numerical:
        def log_density(alpha):
            info = fam.analytic_fisher(np.asarray(alpha, dtype=float))
            _, logdet = np.linalg.slogdet(info)
            return 0.5 * logdet
    else:
        def log_density(alpha):
            a = np.asarray(alpha, dtype=float)
            flat = a.reshape(-1, d)
            out = np.array(
                [0.5 * np.linalg.slogdet(fisher_information(fam, p, numerical=True))[1] for p in flat]
            )
            return out.reshape(a.shape[:-1])

    return PriorSpec(log_density, tuple(fam.param_space), "jeffreys")


def _coord(alpha):
    return np.asarray(alpha, dtype=float)[..., 0]


def named_prior(label, support=None, location=None, scale=None):
    """One of the fixed priors: ``uniform``, ``scale_invariant`` or ``cauchy_proper``.

    ``cauchy_proper`` needs ``location`` and a positive ``scale``; a support
    narrower than the real line truncates it, which keeps it proper.
    """
    support = _as_support(support)
    if label == "uniform":
        support = support or ((-math.inf, math.inf),)
        return PriorSpec(lambda a: np.zeros(np.shape(a)[:-1]) if np.ndim(a) else 0.0, support, "uniform")
    if label == "scale_invariant":
        support = support or ((0.0, math.inf),)
        if len(support) != 1 or support[0][0] < 0:
            raise ConfigError("scale_invariant prior needs a one-dimensional support inside (0, inf)")
        return PriorSpec(lambda a: -np.log(_coord(a)), support, "scale_invariant")
    if label == "cauchy_proper":
        support = support or ((-math.inf, math.inf),)
        if len(support) != 1:
            raise ConfigError("cauchy_proper prior is one-dimensional")
        if location is None or scale is None:
            raise ConfigError("cauchy_proper prior needs a location and a scale")
        loc, sc = float(location), float(scale)
        if not (math.isfinite(loc) and math.isfinite(sc) and sc > 0):
            raise ConfigError("cauchy_proper scale must be positive and finite")
        log_norm = -math.log(math.pi * sc)

        def log_density(a):
            return log_norm - np.log1p(((_coord(a) - loc) / sc) ** 2)

        return PriorSpec(log_density, support, "cauchy_proper", {"location": loc, "scale": sc})
    if label == "jeffreys":
        raise ConfigError("the jeffreys prior depends on the family; use jeffreys_prior(fam)")
    raise ConfigError(f"unknown prior label {label!r}; choose from {', '.join(PRIOR_LABELS)}")


def prior_for(fam, label, location=None, scale=None):
    """Prior by label with its support taken from ``fam``."""
    if label == "jeffreys":
        return jeffreys_prior(fam)
    return named_prior(label, fam.param_space, location=location, scale=scale)


def _probe_grid(lo, hi, size=41):
    if math.isfinite(lo) and math.isfinite(hi):
        return lo + (hi - lo) * np.linspace(0.0, 1.0, size + 2)[1:-1]
    offsets = np.logspace(-6, 6, size)
    if math.isfinite(lo):
        return lo + offsets
    if math.isfinite(hi):
        return hi - offsets
    return np.concatenate([-offsets[::-1], [0.0], offsets])


def prior_pushforward(p, transform, new_support, derivative=None):
    """Express prior ``p`` in a new parameter ``phi`` where ``alpha = transform(phi)``.

    The log-density becomes ``log p(transform(phi)) + log|transform'(phi)|``.
    ``derivative`` defaults to a central difference. A sign change of the
    derivative on a probe grid is rejected.
    """
    new_support = _as_support(new_support)
    if p.dim != 1 or len(new_support) != 1:
        raise ConfigError("prior_pushforward handles one-dimensional priors")
    if derivative is None:
        def derivative(phi):
            phi = np.asarray(phi, dtype=float)
            h = np.maximum(1e-6, 1e-6 * np.abs(phi))
            return (transform(phi + h) - transform(phi - h)) / (2.0 * h)

    lo, hi = new_support[0]
    probe = _probe_grid(lo, hi)
    with np.errstate(all="ignore"):
        slopes = np.asarray(derivative(probe), dtype=float)
        images = np.asarray(transform(probe), dtype=float)
    # far-out probes can overflow or flatten to zero slope in floating point;
    # only the informative ones take part in the sign test
    live = np.isfinite(slopes) & (slopes != 0)
    if live.sum() < 2 or not (np.all(slopes[live] > 0) or np.all(slopes[live] < 0)):
        raise ConfigError("transform is not strictly monotone on the new support")
    plo, phi_ = p.support[0]
    if np.any(images < plo) or np.any(images > phi_):
        raise ConfigError("transform maps the new support outside the prior's support")

    def log_density(phi):
        phi = np.asarray(phi, dtype=float)
        inner = transform(phi[..., 0])
        return p.log_density_unnorm(np.asarray(inner)[..., None]) + np.log(np.abs(derivative(phi[..., 0])))

    return PriorSpec(log_density, new_support, p.label, dict(p.params))
