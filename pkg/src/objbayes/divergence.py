"""Kullback-Leibler divergence and intrinsic discrepancy between sampling models."""

import math
from dataclasses import dataclass

import numpy as np

from . import _quad
from .exceptions import ConfigError
from .families import CONTINUOUS_TAIL, DISCRETE_TAIL, Family, as_point

CLOSED_FORMS = ("normal_known_sigma", "normal", "poisson", "bernoulli", "binomial", "exponential")


@dataclass(frozen=True, eq=False)
class DistRef:
    """The law of ``n`` i.i.d. draws from ``fam`` at parameter ``alpha``."""

    fam: Family
    alpha: np.ndarray
    n: int = 1

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_point(self.fam, self.alpha))
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError("replication count n must be a positive integer")
        object.__setattr__(self, "n", int(self.n))


def closed_form_kl(name, fixed, a, b):
    """Single-observation KL of the law at ``b`` from the law at ``a``.

    ``a`` and ``b`` broadcast with the parameter on the last axis.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if name == "normal_known_sigma":
        return (a[..., 0] - b[..., 0]) ** 2 / (2.0 * fixed["sigma"] ** 2)
    if name == "normal":
        r = (a[..., 1] / b[..., 1]) ** 2
        return (a[..., 0] - b[..., 0]) ** 2 / (2.0 * b[..., 1] ** 2) + 0.5 * (r - 1.0 - np.log(r))
    if name == "poisson":
        li, lj = a[..., 0], b[..., 0]
        return li * np.log(li / lj) + lj - li
    if name in ("bernoulli", "binomial"):
        m = fixed.get("trials", 1)
        ti, tj = a[..., 0], b[..., 0]
        return m * (ti * np.log(ti / tj) + (1.0 - ti) * np.log((1.0 - ti) / (1.0 - tj)))
    if name == "exponential":
        li, lj = a[..., 0], b[..., 0]
        return np.log(li / lj) + lj / li - 1.0
    raise KeyError(name)


def _same_builtin(pi, pj):
    return (
        pi.fam.name == pj.fam.name
        and pi.fam.name in CLOSED_FORMS
        and pi.fam.fixed == pj.fam.fixed
        and pi.fam.param_dim == pj.fam.param_dim
    )


class _Diverges(Exception):
    pass


def _support_contained(pi, pj):
    lo_i, hi_i = pi.fam.data_support
    lo_j, hi_j = pj.fam.data_support
    return lo_j <= lo_i and hi_i <= hi_j


def _numerical_single(pi, pj):
    fi, fj = pi.fam, pj.fam
    if fi.discrete:
        lo_i, hi_i = fi.range_for(pi.alpha, DISCRETE_TAIL)
        lo_j, hi_j = fj.range_for(pj.alpha, DISCRETE_TAIL)
        x = np.arange(int(min(lo_i, lo_j)), int(max(hi_i, hi_j)) + 1, dtype=float)
        x = x[(x >= fi.data_support[0]) & (x <= fi.data_support[1])]
        lpi = fi.log_density(x, pi.alpha)
        lpj = fj.log_density(x, pj.alpha)
        live = np.isfinite(lpi)
        if np.any(live & ~np.isfinite(lpj)):
            return math.inf
        return float(np.sum(np.exp(lpi[live]) * (lpi[live] - lpj[live])))

    lo_i, hi_i = fi.range_for(pi.alpha, CONTINUOUS_TAIL)
    lo_j, hi_j = fj.range_for(pj.alpha, CONTINUOUS_TAIL)
    lo = max(min(lo_i, lo_j), fi.data_support[0])
    hi = min(max(hi_i, hi_j), fi.data_support[1])
    if hi < hi_i:
        hi = hi_i

    def integrand(x):
        lp_i = float(fi.log_density(x, pi.alpha))
        if lp_i == -math.inf:
            return 0.0
        lp_j = float(fj.log_density(x, pj.alpha))
        if lp_j == -math.inf:
            raise _Diverges
        return math.exp(lp_i) * (lp_i - lp_j)

    centres = [0.5 * (lo_i + hi_i), 0.5 * (lo_j + hi_j)]
    try:
        value, _ = _quad.adaptive(integrand, lo, hi, epsabs=1e-9, epsrel=1e-7, points=centres, what="KL integral")
    except _Diverges:
        return math.inf
    return value


def kl(pi, pj, method="auto"):
    """Directed divergence of ``pj`` from ``pi``: the expectation under ``pi``
    of ``log(pi / pj)``, in nats.

    ``method`` is ``"auto"`` (closed form when both sides are the same
    built-in family), ``"closed_form"`` or ``"numerical"``. The result is
    ``+inf`` when ``pi`` puts mass where ``pj`` has none.
    """
    if pi.n != pj.n:
        raise ConfigError("both distributions must describe the same number of observations")
    if pi.fam.discrete != pj.fam.discrete:
        raise ConfigError("cannot compare a discrete with a continuous model")
    if not _support_contained(pi, pj):
        return math.inf
    if method == "closed_form" or (method == "auto" and _same_builtin(pi, pj)):
        if not _same_builtin(pi, pj):
            raise ConfigError("no closed form for this pair of models")
        single = float(closed_form_kl(pi.fam.name, pi.fam.fixed, pi.alpha, pj.alpha))
    elif method in ("auto", "numerical"):
        single = _numerical_single(pi, pj)
    else:
        raise ConfigError(f"unknown method {method!r}")
    # floating-point cancellation can leave a tiny negative value near zero
    return pi.n * max(single, 0.0)


def intrinsic_discrepancy(p1, p2, method="auto"):
    """The smaller of the two directed KL divergences; symmetric in its arguments."""
    forward = kl(p1, p2, method)
    backward = kl(p2, p1, method)
    if math.isinf(forward) and math.isinf(backward):
        raise ConfigError("both directed divergences are infinite (disjoint supports)")
    return min(forward, backward)

