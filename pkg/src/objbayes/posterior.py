"""One-parameter posteriors: normalization, properness verdicts, expectations
and equal-tail credible intervals.

All integrals run in an unconstrained coordinate ``u`` (identity, log or
logit map of the parameter interval) so that densities piling up at a
finite boundary stay resolvable. The integrand is ``exp(h(u) - max h)``
with ``h`` the log posterior plus the log Jacobian.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special

from . import _quad
from .exceptions import ConfigError, ImproperPosteriorError, NumericalError, OutOfScopeError
from .families import loglik_many

PROPER = "proper"
IMPROPER = "improper"
UNDETERMINED = "undetermined"

# window contributions must shrink by at least this factor per decade
_DECAY_FACTOR = 1.5
_DECADES = 6
_U_LIMIT = 700.0
# integrand cut-off below the maximum, in nats
_LOG_CUTOFF = 80.0
_SEGMENTS = 16
_SCAN = 64
# relative quadrature error tolerated when quad reports round-off
_ACCEPT_REL = 1e-7
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class _Coordinate:
    """Map between an open interval and the real line."""

    def __init__(self, lo, hi):
        self.lo, self.hi = lo, hi
        if math.isinf(lo) and math.isinf(hi):
            self.kind = "identity"
        elif math.isinf(hi):
            self.kind = "lower"
        elif math.isinf(lo):
            self.kind = "upper"
        else:
            self.kind = "logit"
        self.bounded = self.kind != "identity"

    def to_param(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "identity":
            return u
        if self.kind == "lower":
            return self.lo + np.exp(u)
        if self.kind == "upper":
            return self.hi - np.exp(u)
        return self.lo + (self.hi - self.lo) * special.expit(u)

    def log_jacobian(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "identity":
            return np.zeros_like(u)
        if self.kind in ("lower", "upper"):
            return u
        return math.log(self.hi - self.lo) + special.log_expit(u) + special.log_expit(-u)

    def to_u(self, a):
        a = float(a)
        if self.kind == "identity":
            return a
        if self.kind == "lower":
            return math.log(a - self.lo)
        if self.kind == "upper":
            return math.log(self.hi - a)
        p = (a - self.lo) / (self.hi - self.lo)
        return math.log(p) - math.log1p(-p)

    def clip(self, u):
        return min(max(u, -_U_LIMIT), _U_LIMIT) if self.bounded else u


def golden_section_max(f, a, b, tol=1e-9, maxiter=300):
    """Maximize a unimodal ``f`` on [a, b]; returns ``(x, f(x))``."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(maxiter):
        if abs(b - a) <= tol * (1.0 + abs(c) + abs(d)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


@dataclass(frozen=True, eq=False)
class PosteriorDensity:
    """A normalized (or diagnosed) one-parameter posterior.

    ``log_norm_const`` is ``None`` unless ``properness == "proper"``.
    ``center`` is the parameter value at the maximum of the integrand in the
    working coordinate, which differs from the posterior mode when the
    coordinate map is not the identity.
    """

    log_unnorm: Callable
    support: tuple
    log_norm_const: Optional[float]
    properness: str
    diagnostic: str
    center: Optional[float] = None
    quad_error: Optional[float] = None
    table_log_norm_const: Optional[float] = None
    _coord: Optional[_Coordinate] = field(default=None, repr=False)
    _h: Optional[Callable] = field(default=None, repr=False)
    _h_max: float = field(default=0.0, repr=False)
    _u_mode: float = field(default=0.0, repr=False)
    _u_range: tuple = field(default=(0.0, 0.0), repr=False)
    _segments: Optional[np.ndarray] = field(default=None, repr=False)
    _edges: Optional[np.ndarray] = field(default=None, repr=False)
    _cum: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def is_proper(self):
        return self.properness == PROPER

    def _require_proper(self):
        if not self.is_proper:
            raise ImproperPosteriorError(
                f"posterior is {self.properness}: {self.diagnostic}", diagnostic=self.diagnostic
            )

    def logpdf(self, alpha):
        self._require_proper()
        return np.asarray(self.log_unnorm(alpha)) - self.log_norm_const

    def pdf(self, alpha):
        return np.exp(self.logpdf(alpha))

    def _partial(self, u_lo, u_hi):
        nodes, weights = _quad.gl_nodes(u_lo, u_hi, 16)
        return float(np.sum(weights * np.exp(self._h(nodes) - self._h_max)))

    def _u_cdf(self, u):
        lo, hi = self._u_range
        if u <= lo:
            return 0.0
        if u >= hi:
            return 1.0
        k = min(int(np.searchsorted(self._edges, u, side="right")) - 1, len(self._edges) - 2)
        return self._cum[k] + self._partial(self._edges[k], u) / self._z_table

    @property
    def _z_table(self):
        return math.exp(self.table_log_norm_const - self._h_max)

    def cdf(self, alpha):
        """Posterior probability that the parameter is at most ``alpha``."""
        self._require_proper()
        lo, hi = self.support
        if alpha <= lo:
            return 0.0
        if alpha >= hi:
            return 1.0
        return self._u_cdf(self._coord.to_u(alpha))

    def quantile(self, q, tol=1e-13):
        """Inverse CDF by bisection inside the bracketing quadrature panel."""
        self._require_proper()
        if not 0.0 < q < 1.0:
            raise ConfigError("quantile level must lie in (0, 1)")
        k = int(np.searchsorted(self._cum, q, side="right")) - 1
        k = min(max(k, 0), len(self._edges) - 2)
        a, b = self._edges[k], self._edges[k + 1]
        target = (q - self._cum[k]) * self._z_table
        left = self._edges[k]
        while b - a > tol * (1.0 + abs(a)):
            mid = 0.5 * (a + b)
            if self._partial(left, mid) < target:
                a = mid
            else:
                b = mid
        return float(self._coord.to_param(0.5 * (a + b)))


def _sinh_edges(center, width, lo, hi, count):
    """Panel edges on [lo, hi], dense near ``center`` and geometric in the tails."""
    t = np.linspace(math.asinh((lo - center) / width), math.asinh((hi - center) / width), count + 1)
    edges = center + width * np.sinh(t)
    edges[0], edges[-1] = lo, hi
    return edges


def _window_log_mass(log_unnorm, ref_value, lo, hi):
    """log of the integral of exp(log_unnorm - ref_value) over [lo, hi], 0 < lo < hi.

    Integrates in ``log(x)`` so that a decade is resolved uniformly.
    """
    return _quad.log_gl_integral(
        lambda t: log_unnorm(np.exp(t)) - ref_value + t, math.log(lo), math.log(hi)
    )


def _tail_verdict(log_w):
    """Classify successive window log-masses as converging, diverging or unclear."""
    log_w = np.asarray(log_w, dtype=float)
    if np.any(np.isnan(log_w)) or np.any(log_w == math.inf):
        return "diverges"
    threshold = -math.log(_DECAY_FACTOR)
    ratios = []
    for prev, nxt in zip(log_w[:-1], log_w[1:]):
        if nxt == -math.inf:
            ratios.append(-math.inf)
        elif prev == -math.inf:
            ratios.append(math.inf)
        else:
            ratios.append(nxt - prev)
    ratios = np.array(ratios)
    if np.all(ratios <= threshold):
        return "converges"
    if np.all(ratios[-3:] > threshold):
        return "diverges"
    return "unclear"


def _boundary_check(log_unnorm, coord, ref, scale):
    """Nested decade windows toward each boundary of the support.

    ``log_unnorm`` takes parameter values (not points). Returns a list of
    ``(side, verdict)``.
    """
    ref_value = float(log_unnorm(np.array([ref]))[0])
    if not math.isfinite(ref_value):
        ref_value = 0.0
    out = []
    for side, bound in (("lower", coord.lo), ("upper", coord.hi)):
        sign = -1.0 if side == "lower" else 1.0
        log_w = []
        for k in range(_DECADES + 1):
            if math.isfinite(bound):
                # windows are parametrized by the distance to the boundary
                r = abs(ref - bound)
                near, far = r * 10.0 ** (-k - 1), r * 10.0 ** (-k)
                toward = (lambda x: log_unnorm(bound + x)) if side == "lower" else (lambda x: log_unnorm(bound - x))
                log_w.append(_window_log_mass(toward, ref_value, near, far))
            else:
                near, far = scale * 10.0**k, scale * 10.0 ** (k + 1)
                a, b = sorted((ref + sign * near, ref + sign * far))
                log_w.append(_quad.log_gl_integral(lambda x: log_unnorm(x) - ref_value, a, b, order=48))
        out.append((side, _tail_verdict(log_w)))
    return out


def _safe(values):
    values = np.asarray(values, dtype=float)
    return np.where(np.isnan(values), -np.inf, values)


def build_posterior(fam, s, prior, panels=200):
    """Combine likelihood and prior and normalize numerically.

    The verdict is ``"improper"`` when the boundary window test sees a
    divergent tail, ``"undetermined"`` when no interior maximum or
    integration range could be found, and ``"proper"`` otherwise.
    """
    if fam.param_dim != 1:
        raise OutOfScopeError("posteriors are one-dimensional; use posterior_grid for display")
    if prior.dim != 1:
        raise ConfigError("prior dimension does not match the family")
    (plo, phi), (flo, fhi) = prior.support[0], fam.param_space[0]
    if plo < flo or phi > fhi:
        raise ConfigError("prior support must lie inside the family's parameter space")

    def log_unnorm_values(a):
        pts = np.asarray(a, dtype=float)[..., None]
        return _safe(np.asarray(prior.log_density_unnorm(pts)) + loglik_many(fam, s, pts))

    seed = None
    if fam.point_estimate is not None:
        seed = float(np.ravel(fam.point_estimate(s.summary))[0])
    return _normalize(log_unnorm_values, plo, phi, seed, panels)


def prior_log_mass(prior, panels=200):
    """Normalize a one-dimensional prior on its own support.

    Returns the diagnosed :class:`PosteriorDensity` of the prior alone; its
    ``log_norm_const`` is the log total mass when the prior is proper.
    """
    if prior.dim != 1:
        raise OutOfScopeError("only one-dimensional priors can be normalized")
    lo, hi = prior.support[0]

    def log_values(a):
        return _safe(prior.log_density_unnorm(np.asarray(a, dtype=float)[..., None]))

    return _normalize(log_values, lo, hi, prior.params.get("location"), panels)


def _normalize(log_unnorm_values, plo, phi, seed, panels):
    """Shared engine: locate the mode, test both tails, integrate, tabulate the CDF."""

    def log_unnorm(alpha):
        a = np.asarray(alpha, dtype=float)
        if a.ndim and a.shape[-1] == 1:
            a = a[..., 0]
        return log_unnorm_values(a)

    coord = _Coordinate(plo, phi)

    def h(u):
        u = np.asarray(u, dtype=float)
        a = coord.to_param(u)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            out = _safe(log_unnorm_values(a) + coord.log_jacobian(u))
        # points that round onto the boundary carry no resolvable mass
        return np.where((a <= plo) | (a >= phi), -np.inf, out)

    def h_scalar(u):
        return float(h(np.array([u]))[0])

    seed_u = 0.0
    if seed is not None and plo < seed < phi:
        seed_u = coord.to_u(seed)

    # Each seeded bracket is scanned on a coarse grid; for a unimodal integrand
    # the maximum lies between the neighbours of the best grid point, and
    # golden-section search refines it there.
    best = None
    for width in (2.0, 20.0, 200.0):
        a, b = coord.clip(seed_u - width), coord.clip(seed_u + width)
        grid = np.linspace(a, b, _SCAN + 1)
        vals = h(grid)
        k = int(np.argmax(vals))
        if 0 < k < _SCAN and math.isfinite(vals[k]) and (best is None or vals[k] > best[2]):
            best = (grid[k - 1], grid[k + 1], vals[k])
    if best is not None:
        u, val = golden_section_max(h_scalar, best[0], best[1])
        best = (u, val) if math.isfinite(val) else None

    if best is not None:
        u_mode, h_max = best
        step = 1e-3 * (1.0 + abs(u_mode))
        curv = (h_scalar(u_mode + step) - 2.0 * h_max + h_scalar(u_mode - step)) / step**2
        sd_u = 1.0 / math.sqrt(-curv) if curv < 0 and math.isfinite(curv) else 1.0
    else:
        u_mode, h_max, sd_u = seed_u, h_scalar(seed_u), 1.0
    ref = float(coord.to_param(u_mode))
    slope = math.exp(float(coord.log_jacobian(u_mode)))
    scale = max(sd_u * slope, 1e-300) if best is not None else max(abs(ref), 1.0)

    checks = _boundary_check(log_unnorm_values, coord, ref, scale)
    diverging = [side for side, v in checks if v == "diverges"]
    unclear = [side for side, v in checks if v == "unclear"]
    common = dict(log_unnorm=log_unnorm, support=(plo, phi))
    if diverging:
        where = " and ".join(
            f"{side} boundary ({'alpha -> ' + str(coord.lo if side == 'lower' else coord.hi)})" for side in diverging
        )
        return PosteriorDensity(
            log_norm_const=None, properness=IMPROPER, diagnostic=f"integral diverges at the {where}", **common
        )
    if best is None:
        return PosteriorDensity(
            log_norm_const=None, properness=UNDETERMINED,
            diagnostic="no interior maximum found in any seeded bracket", **common,
        )
    if unclear:
        return PosteriorDensity(
            log_norm_const=None, properness=UNDETERMINED,
            diagnostic=f"tail behaviour inconclusive at the {' and '.join(unclear)} boundary", **common,
        )

    def inside(u):
        a = float(coord.to_param(u))
        return plo < a < phi

    limits = []
    for direction in (-1.0, 1.0):
        dist = sd_u
        prev = u_mode
        while True:
            u = coord.clip(u_mode + direction * dist)
            if not inside(u):
                # stop at the last coordinate that still resolves an interior point
                good, bad = prev, u
                for _ in range(80):
                    mid = 0.5 * (good + bad)
                    good, bad = (mid, bad) if inside(mid) else (good, mid)
                u = good
                break
            if h_scalar(u) - h_max < -_LOG_CUTOFF:
                break
            if coord.bounded and abs(u) >= _U_LIMIT:
                return PosteriorDensity(
                    log_norm_const=None, properness=UNDETERMINED,
                    diagnostic="posterior mass does not decay inside the representable range", **common,
                )
            prev = u
            dist *= 2.0
            if dist > 1e300:
                raise NumericalError("could not locate the posterior's effective range")
        limits.append(u)
    u_lo, u_hi = limits

    width = 2.0 * sd_u
    segments = _sinh_edges(u_mode, width, u_lo, u_hi, _SEGMENTS)
    value, abserr = _quad.adaptive_vec(
        lambda u: np.exp(h(u) - h_max), segments, epsabs=1e-14, epsrel=1e-11,
        what="posterior normalization", accept=_ACCEPT_REL * width,
    )
    if value <= 0:
        raise NumericalError("posterior normalization underflowed")
    log_norm = h_max + math.log(value)

    edges = _sinh_edges(u_mode, width, u_lo, u_hi, panels)
    nodes, weights = _quad.gauss_legendre(16)
    half = 0.5 * np.diff(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    pts = mids[:, None] + half[:, None] * nodes[None, :]
    masses = np.sum(weights[None, :] * half[:, None] * np.exp(h(pts) - h_max), axis=1)
    total = float(np.sum(masses))
    cum = np.concatenate([[0.0], np.cumsum(masses) / total])

    return PosteriorDensity(
        log_norm_const=log_norm,
        properness=PROPER,
        diagnostic="both tails converge",
        center=ref,
        quad_error=abserr / value,
        table_log_norm_const=h_max + math.log(total),
        _coord=coord,
        _h=h,
        _h_max=h_max,
        _u_mode=u_mode,
        _u_range=(u_lo, u_hi),
        _segments=segments,
        _edges=edges,
        _cum=cum,
        **common,
    )


def posterior_expectation(post, g, full_output=False, vectorized=False):
    """Posterior mean of ``g(alpha)``; with ``full_output`` also the absolute
    error estimate of the quadrature.

    Set ``vectorized`` when ``g`` maps arrays elementwise; otherwise it is
    called once per node.
    """
    post._require_proper()
    coord, h, shift = post._coord, post._h, post.log_norm_const

    if not vectorized:
        g = np.vectorize(g, otypes=[float])

    def integrand(u):
        log_w = h(u) - shift
        weight = np.exp(log_w)
        with np.errstate(invalid="ignore"):
            out = np.asarray(g(coord.to_param(u)), dtype=float) * weight
        return np.where(weight == 0.0, 0.0, out)

    value, abserr = _quad.adaptive_vec(
        integrand, post._segments, epsabs=1e-12, epsrel=1e-10, what="posterior expectation", accept=math.inf
    )
    # absolute 1e-7, or relative 1e-9 for large values
    if abserr > max(1e-7, 1e-9 * abs(value)):
        raise NumericalError(
            f"posterior expectation did not converge (estimated error {abserr:.3g})", error_estimate=abserr
        )
    if full_output:
        return value, abserr
    return value


def credible_interval(post, mass):
    """Equal-tail interval holding posterior probability ``mass``."""
    if not 0.0 < mass < 1.0:
        raise ConfigError("credible mass must lie in (0, 1)")
    post._require_proper()
    tail = 0.5 * (1.0 - mass)
    return post.quantile(tail), post.quantile(1.0 - tail)


def posterior_grid(fam, s, prior, grids):
    """Posterior on a rectangular grid, for display of multi-parameter models.

    ``grids`` holds one increasing 1-D array per coordinate. Returns the
    grid-normalized density and the per-coordinate marginals (trapezoid rule).
    """
    axes = [np.asarray(g, dtype=float) for g in grids]
    if len(axes) != fam.param_dim:
        raise ConfigError("one grid per parameter is required")
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    flat = mesh.reshape(-1, fam.param_dim)
    logp = _safe(np.asarray(prior.log_density_unnorm(flat)) + loglik_many(fam, s, flat)).reshape(mesh.shape[:-1])
    dens = np.exp(logp - logp.max())
    z = dens
    for ax in reversed(axes):
        z = integrate.trapezoid(z, ax, axis=-1)
    dens = dens / z
    marginals = []
    for i in range(len(axes)):
        m = dens
        for j in reversed(range(len(axes))):
            if j != i:
                m = integrate.trapezoid(m, axes[j], axis=j)
        marginals.append(m)
    return {"grids": axes, "density": dens, "marginals": marginals}
