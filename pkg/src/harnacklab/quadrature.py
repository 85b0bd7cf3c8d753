"""Panel Gauss-Legendre quadrature with power-law tail extrapolation.

The improper integrals in this package share one shape: a positive integrand
that is eventually power-like because the growth conditions force power lower
bounds on the nonlinearities.  We therefore integrate over geometrically
growing panels and close the integral with a power-law fit of the integrand
over the last sampled decade.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ArgumentError, DomainError


@lru_cache(maxsize=16)
def gauss_legendre(n: int):
    """Nodes/weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def panel_integral(fn, a: float, b: float, n: int = 16) -> float:
    x, w = gauss_legendre(n)
    s = a + (b - a) * x
    return float((b - a) * np.dot(w, fn(s)))


def adaptive_panel(fn, a, b, tol, depth=0, max_depth=24):
    """Integral of fn over [a, b], bisecting until the GL16/GL32 gap is small."""
    coarse = panel_integral(fn, a, b, 16)
    fine = panel_integral(fn, a, b, 32)
    err = abs(fine - coarse)
    if err <= tol or depth >= max_depth:
        return fine, err
    mid = 0.5 * (a + b)
    left, el = adaptive_panel(fn, a, mid, tol / 2, depth + 1, max_depth)
    right, er = adaptive_panel(fn, mid, b, tol / 2, depth + 1, max_depth)
    return left + right, el + er


def integrate(fn, a: float, b: float, tol: float = 1e-10) -> float:
    """Adaptive integral on a finite interval, geometric panel splitting."""
    if b < a:
        raise ArgumentError(f"integration bounds out of order: [{a}, {b}]")
    if b == a:
        return 0.0
    # split [a, b] into panels with bounded ratio so GL stays accurate
    edges = _geometric_edges(a, b)
    total, errs = 0.0, 0.0
    scale = max(abs(a), abs(b), 1.0)
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e = adaptive_panel(fn, lo, hi, tol * scale)
        total += v
        errs += e
    return total


def _geometric_edges(a: float, b: float):
    """Panel edges on [a, b] with geometric growth away from a."""
    width = b - a
    first = min(width, max(width * 1e-6, abs(a) * 1e-3, 1e-12))
    edges = [a]
    x = a + first
    while x < b:
        edges.append(x)
        x = a + (x - a) * 2.0
    edges.append(b)
    return edges


def cumulative_gauss(fn, start: float, stops: np.ndarray, n: int = 12) -> np.ndarray:
    """Cumulative integrals int_start^stop fn for an increasing array of stops.

    Each gap between consecutive stops is integrated with one GL panel, so
    accuracy relies on the caller providing reasonably graded stops (the
    integrands here are smooth between stops).  Avoids the catastrophic
    cancellation of computing F(s) - F(t) from a global antiderivative.
    """
    stops = np.asarray(stops, dtype=float)
    if stops.ndim != 1 or np.any(np.diff(stops) < 0):
        raise ArgumentError("stops must be a non-decreasing 1-D array")
    if stops.size and stops[0] < start:
        raise ArgumentError("stops must not precede the start point")
    x, w = gauss_legendre(n)
    edges = np.concatenate(([start], stops))
    widths = np.diff(edges)
    # matrix of sample points: one row per gap
    pts = edges[:-1, None] + widths[:, None] * x[None, :]
    vals = fn(pts.ravel()).reshape(pts.shape)
    per_gap = widths * (vals @ w)
    return np.cumsum(per_gap)


@dataclass
class TailFit:
    """Power-law closure of an improper integral."""

    slope: float
    level: float          # integrand value at the fit anchor
    anchor: float         # abscissa where the tail was attached
    tail: float           # estimated integral over [anchor, infinity)
    residual: float       # rms deviation of log-integrand from the fit
    convergent: bool


def fit_power_tail(s: np.ndarray, vals: np.ndarray) -> TailFit:
    """Least-squares log-log fit; tail integral if the fit slope < -1."""
    s = np.asarray(s, float)
    vals = np.asarray(vals, float)
    if np.all(vals == 0.0):
        # integrand underflowed: the remaining tail is below representable
        return TailFit(-np.inf, 0.0, float(s[-1]), 0.0, 0.0, True)
    keep = (vals > 0) & np.isfinite(vals) & np.isfinite(s)
    s, vals = s[keep], vals[keep]
    if s.size < 4:
        return TailFit(0.0, 0.0, float(s[-1]) if s.size else np.inf, np.inf, np.inf, False)
    ls, lv = np.log(s), np.log(vals)
    A = np.vstack([ls, np.ones_like(ls)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, lv, rcond=None)
    resid = float(np.sqrt(np.mean((lv - (slope * ls + intercept)) ** 2)))
    anchor = float(s[-1])
    level = float(np.exp(slope * np.log(anchor) + intercept))
    if slope < -1.0:
        tail = level * anchor / (-slope - 1.0)
        return TailFit(float(slope), level, anchor, float(tail), resid, True)
    return TailFit(float(slope), level, anchor, np.inf, resid, False)


@dataclass
class ImproperResult:
    value: float
    error: float
    fit: TailFit
    upper: float          # where direct quadrature stopped
    divergent: bool


def tail_fitted_integral(fn, lower: float, tol: float = 1e-9,
                         slope_margin: float = 0.05,
                         max_upper: float = 1e15) -> ImproperResult:
    """Integral of fn over [lower, infinity).

    Direct panel quadrature up to an adaptively chosen truncation point, then
    a power-law tail.  The integral is declared divergent when the fitted
    log-log slope of the integrand on the last decade is >= -(1 + margin);
    this matches the power-lower-bound structure the growth conditions give.
    """
    if not np.isfinite(lower):
        raise ArgumentError("lower bound must be finite")
    probe = fn(np.array([lower * (1 + 1e-12) if lower else 1e-300]))[0]
    if not np.isfinite(probe):
        # integrand already infinite at the lower end: nothing to sum
        return ImproperResult(np.inf, np.inf,
                              TailFit(np.inf, np.inf, lower, np.inf, np.inf, False),
                              lower, True)
    base = max(abs(lower), 1.0)
    upper = base * 8.0
    total = integrate(fn, lower, upper, tol)
    fit = _last_decade_fit(fn, upper, lower)
    while True:
        grown = upper * 4.0
        if grown > max_upper or not np.isfinite(fn(np.array([grown]))[0]):
            break
        total += integrate(fn, upper, grown, tol)
        upper = grown
        fit = _last_decade_fit(fn, upper, lower)
        if fit.convergent and fit.tail < max(tol * abs(total), 1e-300) / 10.0:
            break
        if not fit.convergent and fit.slope > -1.0 + slope_margin and upper > base * 1e6:
            break
    divergent = not fit.convergent or not np.isfinite(total)
    value = np.inf if divergent else total + fit.tail
    error = np.inf if divergent else tol * abs(total) + 0.5 * fit.tail * min(1.0, fit.residual * 10 + 0.2)
    return ImproperResult(value, error, fit, upper, divergent)


def _last_decade_fit(fn, upper: float, lower: float) -> TailFit:
    lo = max(upper / 10.0, lower * (1 + 1e-9), 1e-300)
    s = np.geomspace(lo, upper, 24)
    return fit_power_tail(s, fn(s))
