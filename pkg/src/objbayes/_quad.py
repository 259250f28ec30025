"""Quadrature helpers shared by the divergence, posterior and test modules."""

import math

import numpy as np
from scipy import integrate, special

from .exceptions import NumericalError

_GL_CACHE = {}


def gauss_legendre(order):
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


def gl_nodes(a, b, order=16):
    """Nodes and weights of an ``order``-point Gauss-Legendre rule on [a, b]."""
    x, w = gauss_legendre(order)
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * x, half * w


def log_gl_integral(log_f, a, b, order=32):
    """log of the integral of exp(log_f) on [a, b] by a fixed Gauss-Legendre rule."""
    nodes, weights = gl_nodes(a, b, order)
    vals = np.asarray(log_f(nodes), dtype=float)
    with np.errstate(divide="ignore"):
        return float(special.logsumexp(vals + np.log(weights)))


def adaptive(func, a, b, epsabs=1e-9, epsrel=1e-7, points=None, limit=200, what="integral", accept=None):
    """scipy ``quad`` that raises :class:`NumericalError` instead of warning.

    A result quad flags is still accepted when its absolute error estimate
    is below ``accept`` (default: 100 times the requested tolerance). Returns
    ``(value, abserr)``.
    """
    kwargs = dict(epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1)
    if points is not None and math.isfinite(a) and math.isfinite(b):
        pts = [p for p in points if a < p < b]
        if pts:
            kwargs["points"] = pts
    out = integrate.quad(func, a, b, **kwargs)
    value, abserr = out[0], out[1]
    if not math.isfinite(value):
        raise NumericalError(f"{what} is not finite", error_estimate=abserr)
    if len(out) > 3:
        tol = max(epsabs, epsrel * abs(value))
        limit_err = 100 * tol if accept is None else max(accept, 100 * tol)
        if abserr > limit_err:
            raise NumericalError(
                f"{what} did not converge (estimated error {abserr:.3g})",
                error_estimate=abserr,
            )
    return value, abserr


# Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15), positive half.
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_KX = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(15)
_GW[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


_EPS = np.finfo(float).eps


def _gk15(func, a, b):
    half = 0.5 * (b - a)
    x = 0.5 * (a + b)[:, None] + half[:, None] * _KX[None, :]
    fx = np.asarray(func(x), dtype=float)
    kron = half * (fx @ _KW)
    gauss = half * (fx @ _GW)
    return kron, np.abs(kron - gauss)


def adaptive_vec(func, edges, epsabs=1e-12, epsrel=1e-10, max_rounds=60, max_intervals=5000,
                 what="integral", accept=None):
    """Globally adaptive Gauss-Kronrod 7/15 quadrature for a vectorized integrand.

    ``edges`` gives the initial partition. Every round bisects the
    intervals whose error estimate is largest until the summed estimate
    meets the tolerance. Returns ``(value, abserr)``.
    """
    a = np.asarray(edges[:-1], dtype=float)
    b = np.asarray(edges[1:], dtype=float)
    vals, errs = _gk15(func, a, b)
    for _ in range(max_rounds):
        total, err = float(np.sum(vals)), float(np.sum(errs))
        tol = max(epsabs, epsrel * abs(total))
        if err <= tol:
            break
        # split every interval carrying more than its share of the budget,
        # unless its estimate is already at rounding level
        split = (errs > tol / len(errs)) & (errs > 50.0 * _EPS * np.abs(vals))
        if not split.any() or len(errs) + split.sum() > max_intervals:
            break
        mid = 0.5 * (a[split] + b[split])
        na = np.concatenate([a[split], mid])
        nb = np.concatenate([mid, b[split]])
        nv, ne = _gk15(func, na, nb)
        keep = ~split
        a, b = np.concatenate([a[keep], na]), np.concatenate([b[keep], nb])
        vals, errs = np.concatenate([vals[keep], nv]), np.concatenate([errs[keep], ne])
        order = np.argsort(a, kind="stable")
        a, b, vals, errs = a[order], b[order], vals[order], errs[order]
    total, err = float(np.sum(vals)), float(np.sum(errs))
    if not math.isfinite(total):
        raise NumericalError(f"{what} is not finite", error_estimate=err)
    tol = max(epsabs, epsrel * abs(total))
    if err > (tol if accept is None else max(tol, accept)):
        raise NumericalError(f"{what} did not converge (estimated error {err:.3g})", error_estimate=err)
    return total, err
