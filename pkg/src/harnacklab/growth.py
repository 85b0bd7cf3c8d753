"""Keller-Osserman growth calculus: antiderivatives, distance integral, inverse.

The central object is the distance-to-blow-up integral

    Psi(t) = (1/C(q)) * int_t^inf ds / (sqrt(F(s)-F(t)) + (G(s)-G(t))^(1/(2-q)))

together with its decreasing inverse Phi and the distance-indexed ceiling
Q(t) = Phi(min(t, Psi(0+))).  The integrable endpoint singularity at s = t is
removed by the substitution s = t + tau^2 (plus an extra power substitution
when f(t) = 0 < g(t)); the infinite tail is closed with a power-law fit.
"""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import ArgumentError, DomainError, PreconditionError
from .nonlinearity import ConditionReport, NonlinearityPair, check_KO, h_value
from .quadrature import cumulative_gauss, fit_power_tail, gauss_legendre, integrate


def growth_constant(q: float) -> float:
    """The q-only constant in the lower gradient bound.

    Chosen as 0.5*min(1, (2-q)^(1/(2-q))), which is exactly 1/2 on 0 <= q <= 1:
    the radial gradient dominates max(sqrt(F-diff), ((2-q)*G-diff)^(1/(2-q))),
    hence half the sum, whenever (2-q)^(1/(2-q)) >= 1.
    """
    if not 0.0 <= q < 2.0:
        raise ArgumentError(f"q={q} outside [0, 2)")
    return 0.5 * min(1.0, (2.0 - q) ** (1.0 / (2.0 - q)))


def antiderivative(fn, t: float, tol: float = 1e-10) -> float:
    """int_0^t fn, exact for piecewise-linear families.

    Raises DomainError when fn is negative somewhere on [0, t].
    """
    if t < 0:
        raise ArgumentError("antiderivative is defined for t >= 0")
    if t == 0:
        return 0.0
    probe = np.concatenate(([0.0], np.geomspace(t * 1e-8, t, 41)))
    vals = np.asarray(fn(probe), float)
    if np.any(vals < 0):
        i = int(np.argmax(vals < 0))
        raise DomainError(f"negative integrand sample fn({probe[i]:.6g}) = {vals[i]:.6g}")
    if getattr(fn, "family", None) == "piecewise_linear":
        return _piecewise_linear_antiderivative(fn, t)
    return integrate(lambda s: np.asarray(fn(s), float), 0.0, t, tol)


def _piecewise_linear_antiderivative(fn, t: float) -> float:
    kt = np.asarray(fn.knots_t, float)
    # trapezoid over knots is exact for a piecewise-linear integrand
    edges = np.concatenate(([0.0], kt[(kt > 0) & (kt < t)], [t]))
    vals = np.asarray(fn(edges), float)
    return float(np.sum(0.5 * (vals[1:] + vals[:-1]) * np.diff(edges)))


@dataclass
class PsiEvaluation:
    value: float
    error: float
    upper: float
    divergent: bool


class _PairIntegrals:
    """Cumulative integrals of f and g anchored at a fixed base point."""

    def __init__(self, pair: NonlinearityPair, base: float):
        self.pair = pair
        self.base = base
        self._f = lambda x: np.asarray(pair.f(x), float)
        self._g = lambda x: np.asarray(pair.g(x), float)

    def frak(self, stops: np.ndarray, f_acc: float, g_acc: float, start: float):
        """(F-diff, G-diff) at increasing stops, given accumulated values at start."""
        F = f_acc + cumulative_gauss(self._f, start, stops)
        G = g_acc + cumulative_gauss(self._g, start, stops)
        return F, G


def psi_value(pair: NonlinearityPair, t: float, C_q: float | None = None,
              tol: float = 1e-9, max_s: float = 1e15) -> PsiEvaluation:
    """One evaluation of the distance integral at level t > 0."""
    if t <= 0:
        raise ArgumentError("psi is defined for t > 0; use psi_zero_plus for the limit")
    q = pair.q
    if C_q is None:
        C_q = growth_constant(q)
    f_t = float(pair.f(t))
    g_t = float(pair.g(t))
    if f_t < 0 or g_t < 0:
        raise DomainError("psi requires f, g >= 0 at and beyond t")
    if f_t == 0.0 and g_t == 0.0:
        # integrand is infinite on a neighborhood of t
        return PsiEvaluation(math.inf, math.inf, t, True)
    if f_t == 0.0 and q >= 1.0:
        # gradient-only endpoint decays too slowly to integrate
        return PsiEvaluation(math.inf, math.inf, t, True)

    k = 1.0 if f_t > 0 else (2.0 - q) / (2.0 - 2.0 * q)
    inv = 1.0 / (2.0 - q)
    ints = _PairIntegrals(pair, t)
    x12, w12 = gauss_legendre(12)
    x24, w24 = gauss_legendre(24)

    tau1 = math.sqrt(max(t, 1e-6) * 1e-4)
    # below tau_floor^2 the node t + tau^2 is not representably above t; that
    # sliver is integrated on the local model F ~ f(t) tau^2, G ~ g(t) tau^2
    tau2_floor = 64.0 * np.finfo(float).eps * max(t, 1e-300)
    sigma_floor = math.sqrt(tau2_floor) ** (1.0 / k)
    if f_t > 0:
        xg, wg = gauss_legendre(16)
        tau_f = math.sqrt(tau2_floor)
        tn = tau_f * xg
        den_loc = math.sqrt(f_t) * tn + (g_t * tn * tn) ** inv
        sliver = float(tau_f * np.dot(wg, 2.0 * tn / den_loc))
    else:
        # gradient-only endpoint: the substituted integrand is constant
        sliver = 2.0 * k * sigma_floor / g_t ** inv
    sigma_edges_lo = sigma_floor
    sigma_hi = max(tau1 ** (1.0 / k), 4.0 * sigma_floor)

    total = sliver
    err = 0.1 * sliver
    f_acc = 0.0
    g_acc = 0.0
    s_prev = t
    samples_s = []
    samples_i = []
    small_panels = 0
    upper = t

    def panel(sa, sb, f0, g0, s0):
        """Panel integral with an embedded error estimate; returns new carries."""
        vals = []
        for xs, ws in ((x24, w24), (x12, w12)):
            sigma = sa + (sb - sa) * xs
            tau = sigma ** k
            s = t + tau * tau
            F, G = ints.frak(s, f0, g0, s0)
            with np.errstate(over="ignore"):
                den = np.sqrt(np.maximum(F, 0.0)) + np.power(np.maximum(G, 0.0), inv)
            integ = 2.0 * k * sigma ** (2.0 * k - 1.0) / den
            vals.append(float((sb - sa) * np.dot(ws, integ)))
            if xs is x24:
                node_s, node_i = s, 1.0 / den
        # advance the cumulative carry to the panel end
        tau_b = sb ** k
        s_b = t + tau_b * tau_b
        Fb, Gb = ints.frak(np.array([s_b]), f0, g0, s0)
        return vals[0], abs(vals[0] - vals[1]), float(Fb[0]), float(Gb[0]), s_b, node_s, node_i

    max_panels = 400
    n_panels = 0
    sa = sigma_edges_lo
    sb = sigma_hi
    while n_panels < max_panels:
        v, e, f_acc_new, g_acc_new, s_b, node_s, node_i = panel(sa, sb, f_acc, g_acc, s_prev)
        if not np.isfinite(v):
            return PsiEvaluation(math.inf, math.inf, s_prev, True)
        if e > tol * max(abs(total + v), 1e-300) and (sb - sa) > max(1e-14 * sb, sigma_floor):
            sb = 0.5 * (sa + sb)       # halve the panel and retry
            n_panels += 1
            continue
        total += v
        err += e
        f_acc, g_acc, s_prev = f_acc_new, g_acc_new, s_b
        samples_s.extend(node_s.tolist())
        samples_i.extend(node_i.tolist())
        upper = s_b
        n_panels += 1
        if v < tol * max(abs(total), 1e-300) / 8.0:
            small_panels += 1
        else:
            small_panels = 0
        if len(samples_s) >= 24 and upper > 4 * max(t, 1.0):
            fit = _tail_from_samples(samples_s, samples_i)
            if fit.convergent and fit.tail < tol * max(abs(total), 1e-300) / 8.0:
                return PsiEvaluation((total + fit.tail) / C_q,
                                     (err + 0.5 * fit.tail) / C_q, upper, False)
            if small_panels >= 3 and fit.convergent:
                return PsiEvaluation((total + fit.tail) / C_q,
                                     (err + fit.tail) / C_q, upper, False)
        if upper > max_s or not np.isfinite(f_acc) or not np.isfinite(g_acc):
            break
        sa, sb = sb, 2.0 * sb
    fit = _tail_from_samples(samples_s, samples_i)
    if fit.convergent and np.isfinite(total):
        return PsiEvaluation((total + fit.tail) / C_q, (err + fit.tail) / C_q, upper, False)
    return PsiEvaluation(math.inf, math.inf, upper, True)


def _tail_from_samples(samples_s, samples_i):
    s = np.asarray(samples_s[-48:], float)
    v = np.asarray(samples_i[-48:], float)
    keep = s >= s[-1] / 10.0
    return fit_power_tail(s[keep], v[keep])


def partial_growth_integral(pair: NonlinearityPair, a: float, phis,
                            tol: float = 1e-9) -> np.ndarray:
    """int_a^phi ds/(sqrt(F(s)-F(a)) + (G(s)-G(a))^(1/(2-q))) for each phi.

    Shares the endpoint substitution with psi but stops at finite levels; the
    phis must be >= a.
    """
    phis = np.asarray(phis, float)
    if np.any(phis < a):
        raise ArgumentError("all levels must be >= a")
    q = pair.q
    inv = 1.0 / (2.0 - q)
    f_a = float(pair.f(a))
    g_a = float(pair.g(a))
    if f_a == 0.0 and g_a == 0.0:
        return np.where(phis > a, np.inf, 0.0)
    k = 1.0 if f_a > 0 else (2.0 - q) / (2.0 - 2.0 * q)
    if f_a == 0.0 and q >= 1.0:
        return np.where(phis > a, np.inf, 0.0)

    tau_max = math.sqrt(max(np.max(phis) - a, 0.0))
    if tau_max == 0.0:
        return np.zeros_like(phis)
    sig_max = tau_max ** (1.0 / k)
    sig_min = min(math.sqrt(max(a, 1e-6) * 1e-8) ** (1.0 / k), sig_max / 4)
    # dense geometric sigma edges; cumulative panel sums then interpolation
    n_geo = max(8, int(math.ceil(24 * math.log10(sig_max / sig_min))))
    edges = np.concatenate(([0.0], np.geomspace(sig_min, sig_max, n_geo)))
    x, w = gauss_legendre(16)
    ints = _PairIntegrals(pair, a)
    f_acc = g_acc = 0.0
    s_prev = a
    cum = [0.0]
    for sa, sb in zip(edges[:-1], edges[1:]):
        sigma = sa + (sb - sa) * x
        tau = sigma ** k
        s = a + tau * tau
        F, G = ints.frak(s, f_acc, g_acc, s_prev)
        den = np.sqrt(np.maximum(F, 0.0)) + np.power(np.maximum(G, 0.0), inv)
        integ = 2.0 * k * sigma ** (2.0 * k - 1.0) / den
        cum.append(cum[-1] + float((sb - sa) * np.dot(w, integ)))
        s_b = a + (sb ** k) ** 2
        Fb, Gb = ints.frak(np.array([s_b]), f_acc, g_acc, s_prev)
        f_acc, g_acc, s_prev = float(Fb[0]), float(Gb[0]), s_b
    cum = np.asarray(cum)
    sig_of_phi = np.sqrt(np.maximum(phis - a, 0.0)) ** (1.0 / k)
    return np.interp(sig_of_phi, edges, cum)


@dataclass
class GrowthProfile:
    """Cached growth calculus for one nonlinearity pair."""

    pair: NonlinearityPair
    C_q: float
    quadrature_tol: float
    s_nodes: np.ndarray
    F_table: np.ndarray
    G_table: np.ndarray
    psi_t: np.ndarray
    psi_values: np.ndarray
    psi_zero_plus: float
    ko_report: ConditionReport
    cap: float = 1e8
    _phi_cache: dict = field(default_factory=dict, repr=False)

    @property
    def ko_passed(self) -> bool:
        return self.ko_report.passed

    # -- evaluations -------------------------------------------------------
    def psi(self, t: float, with_error: bool = False):
        ev = psi_value(self.pair, t, self.C_q, self.quadrature_tol)
        if with_error:
            return ev.value, ev.error
        return ev.value

    def F(self, s: float) -> float:
        return antiderivative(self.pair.f, s, self.quadrature_tol)

    def G(self, s: float) -> float:
        return antiderivative(self.pair.g, s, self.quadrature_tol)


def build_profile(pair: NonlinearityPair, quadrature_tol: float = 1e-9,
                  t_lo: float = 1e-2, t_hi: float = 1e4,
                  nodes_per_decade: int = 8, cap: float = 1e8) -> GrowthProfile:
    """Construct the cached tables; psi nodes that diverge are dropped."""
    C_q = growth_constant(pair.q)
    ko = check_KO(pair)

    s_nodes = np.geomspace(max(t_lo, 1e-6) / 10.0, t_hi * 10.0,
                           int(nodes_per_decade * (np.log10(t_hi * 10) - np.log10(max(t_lo, 1e-6) / 10)) + 1))
    fvals = np.asarray(pair.f(s_nodes), float)
    gvals = np.asarray(pair.g(s_nodes), float)
    if np.any(fvals < 0) or np.any(gvals < 0):
        raise DomainError("f and g must be non-negative on the positive axis")
    F_table = cumulative_gauss(lambda x: np.asarray(pair.f(x), float), 0.0, s_nodes)
    G_table = cumulative_gauss(lambda x: np.asarray(pair.g(x), float), 0.0, s_nodes)

    n_t = int(nodes_per_decade * (np.log10(t_hi) - np.log10(t_lo)) + 1)
    t_nodes = np.geomspace(t_lo, t_hi, max(n_t, 8))
    psi_vals = []
    kept_t = []
    if ko.passed:
        for t in t_nodes:
            ev = psi_value(pair, float(t), C_q, quadrature_tol)
            if not ev.divergent:
                kept_t.append(float(t))
                psi_vals.append(ev.value)
    psi_t = np.asarray(kept_t)
    psi_values = np.asarray(psi_vals)

    zero_plus = _psi_zero_limit(pair, C_q, quadrature_tol,
                                t_ref=psi_t[0] if psi_t.size else t_lo, cap=cap) \
        if ko.passed else math.inf

    return GrowthProfile(pair, C_q, quadrature_tol, s_nodes, F_table, G_table,
                         psi_t, psi_values, zero_plus, ko, cap)


def _psi_zero_limit(pair, C_q, tol, t_ref, cap, steps: int = 9) -> float:
    vals = []
    t = float(t_ref)
    for _ in range(steps):
        ev = psi_value(pair, t, C_q, tol)
        if ev.divergent or ev.value > cap:
            return math.inf
        vals.append(ev.value)
        t /= 4.0
    deltas = np.diff(np.asarray(vals))
    if deltas.size >= 2:
        # increments of an increasing sequence; geometric decay means finite
        recent = np.abs(deltas[-3:])
        if recent[-1] <= 1e-12 * vals[-1]:
            return float(vals[-1])
        ratios = recent[1:] / np.maximum(recent[:-1], 1e-300)
        if np.all(ratios < 0.9):
            rho = float(ratios[-1])
            return float(vals[-1] + recent[-1] * rho / (1.0 - rho))
    return math.inf


def psi_zero_plus(profile: GrowthProfile) -> float:
    """Limit of psi as t drops to 0 (cached at profile construction)."""
    return profile.psi_zero_plus


def script_FG(profile: GrowthProfile, s: float, t: float):
    """(F(s)-F(t), G(s)-G(t)) for 0 < t <= s."""
    if s < t:
        raise ArgumentError("need s >= t")
    if t <= 0:
        raise ArgumentError("need t > 0")
    f_diff = integrate(lambda x: np.asarray(profile.pair.f(x), float), t, s,
                       profile.quadrature_tol)
    g_diff = integrate(lambda x: np.asarray(profile.pair.g(x), float), t, s,
                       profile.quadrature_tol)
    return max(f_diff, 0.0), max(g_diff, 0.0)


def psi(profile: GrowthProfile, t: float) -> float:
    """Distance integral at level t; +inf flags divergence."""
    if t <= 0:
        raise ArgumentError("psi needs t > 0; query psi_zero_plus instead")
    if not profile.ko_passed:
        return math.inf
    return profile.psi(t)


def phi(profile: GrowthProfile, r: float) -> float:
    """Inverse of psi: the unique level t with psi(t) = r."""
    if r <= 0:
        raise ArgumentError("phi is defined for r > 0")
    if r >= profile.psi_zero_plus:
        raise DomainError(
            f"r={r:.6g} >= psi(0+)={profile.psi_zero_plus:.6g}; use q_bound")
    if not profile.ko_passed:
        raise PreconditionError("phi undefined: Keller-Osserman condition fails")
    key = round(math.log(r), 12)
    if key in profile._phi_cache:
        return profile._phi_cache[key]
    if profile.psi_t.size == 0:
        raise PreconditionError("profile has no finite psi nodes")

    t_lo, t_hi = None, None
    # table bracket: psi is decreasing in t
    above = profile.psi_values >= r
    if above.any() and (~above).any():
        i = int(np.argmax(~above))       # first node with psi < r
        t_lo, t_hi = profile.psi_t[max(i - 1, 0)], profile.psi_t[i]
    elif not above.any():
        # r above the whole table: extend toward 0
        t_hi = float(profile.psi_t[0])
        t_lo = t_hi / 4.0
        for _ in range(200):
            if profile.psi(t_lo) >= r:
                break
            t_hi = t_lo
            t_lo /= 4.0
        else:
            raise DomainError(f"could not bracket r={r:.6g} toward 0")
    else:
        # r below the whole table: extend upward (psi -> 0 under KO)
        t_lo = float(profile.psi_t[-1])
        t_hi = t_lo * 4.0
        for _ in range(200):
            if profile.psi(t_hi) <= r:
                break
            t_lo = t_hi
            t_hi *= 4.0
        else:
            raise DomainError(f"could not bracket r={r:.6g} toward infinity")

    def fun(t):
        return profile.psi(float(t)) - r

    f_lo, f_hi = fun(t_lo), fun(t_hi)
    if f_lo < 0 or f_hi > 0:
        # quadrature noise at the bracket ends; widen once
        t_lo, t_hi = t_lo * 0.5, t_hi * 2.0
        f_lo, f_hi = fun(t_lo), fun(t_hi)
    root = brentq(fun, t_lo, t_hi, rtol=1e-8, maxiter=200)
    profile._phi_cache[key] = float(root)
    return float(root)


def q_bound(profile: GrowthProfile, t: float) -> float:
    """Ceiling Q(t) = phi(min(t, psi(0+))); zero beyond a finite psi(0+)."""
    if t <= 0:
        raise ArgumentError("q_bound is defined for t > 0")
    zp = profile.psi_zero_plus
    if math.isfinite(zp) and t >= zp * (1.0 - 1e-12):
        return 0.0
    return phi(profile, t)


def q_bound_interpolant(profile: GrowthProfile, r_min: float, r_max: float,
                        n: int = 160):
    """Vectorized evaluator of Q over [r_min, r_max] (monotone interpolation)."""
    from scipy.interpolate import PchipInterpolator
    if not (0 < r_min < r_max):
        raise ArgumentError("need 0 < r_min < r_max")
    zp = profile.psi_zero_plus
    hi = min(r_max, zp * (1 - 1e-9)) if math.isfinite(zp) else r_max
    rs = np.geomspace(r_min, hi, n)
    qs = np.array([q_bound(profile, float(r)) for r in rs])
    interp = PchipInterpolator(np.log(rs), qs, extrapolate=True)

    def evaluator(r):
        r = np.asarray(r, float)
        out = np.where(r >= hi, qs[-1], interp(np.log(np.clip(r, r_min, hi))))
        if math.isfinite(zp):
            out = np.where(r >= zp, 0.0, out)
        return out

    return evaluator


def verify_limit_psi(profile: GrowthProfile, t_sequence, threshold: float = 1e-2) -> bool:
    """Decay of psi along an increasing level sequence."""
    if not profile.ko_passed:
        raise PreconditionError("limit check requires the Keller-Osserman condition")
    ts = np.asarray(t_sequence, float)
    if np.any(np.diff(ts) <= 0):
        raise ArgumentError("t sequence must be increasing")
    vals = np.array([profile.psi(float(t)) for t in ts])
    if np.any(~np.isfinite(vals)):
        raise PreconditionError("psi divergent along the sequence")
    decreasing = np.all(np.diff(vals) < 1e-10 * vals[:-1])
    return bool(decreasing and vals[-1] < threshold)


@dataclass
class Ap1TailReport:
    lhs: float
    rhs: float
    passed: bool
    p: float
    diagnostic: str = ""


def ap1_tail_check(h, t: float, theta: float, varrho: float,
                   tol: float = 1e-6) -> Ap1TailReport:
    """Tail bound int_t^inf ds/(s h(s)) <= theta^p log(theta)/(theta^p - 1) / h(t)."""
    if theta <= 1 or varrho <= 1:
        raise ArgumentError("theta and varrho must exceed 1")
    p = math.log(varrho) / math.log(theta)
    h_t = float(np.asarray(h(np.array([t])), float)[0])
    if h_t <= 0:
        raise DomainError("h(t) must be positive")
    rhs = (theta ** p) * math.log(theta) / (theta ** p - 1.0) / h_t

    from .quadrature import tail_fitted_integral

    def integrand(s):
        s = np.asarray(s, float)
        return 1.0 / (s * np.asarray(h(s), float))

    res = tail_fitted_integral(integrand, t, tol=1e-9)
    if res.divergent:
        return Ap1TailReport(math.inf, rhs, False, p,
                             "tail integral divergent on the fitted window")
    passed = res.value <= rhs * (1.0 + tol)
    return Ap1TailReport(res.value, rhs, passed, p)


def ap1_log_limit(h, t_sequence, threshold: float = 0.1) -> bool:
    """Decay of log(t)/h(t) along an increasing sequence.

    Raises when the ratio-growth hypothesis on h visibly fails on the window
    (constant h), since the limit statement presupposes it.
    """
    ts = np.asarray(t_sequence, float)
    if ts.size < 3 or np.any(np.diff(ts) <= 0) or np.any(ts <= 1):
        raise ArgumentError("need an increasing sequence with t > 1")
    hv = np.asarray(h(ts), float)
    ratio = np.asarray(h(2.0 * ts), float) / np.maximum(hv, 1e-300)
    if np.min(ratio) <= 1.0 + 1e-12:
        raise PreconditionError("ratio condition fails on the window: h(2t) <= h(t)")
    vals = np.log(ts) / hv
    decreasing = np.all(np.diff(vals) < 1e-12 + 1e-9 * np.abs(vals[:-1]))
    return bool(decreasing and vals[-1] < threshold)


@dataclass
class Ap2Report:
    C_estimate: float
    rows: list      # (r, phi_r, lhs, scaled)


def ap2_estimate(profile: GrowthProfile, r_grid) -> Ap2Report:
    """Estimate the constant in the inverse-profile bound.

    Evaluates L(r) = h(phi(r)) on the grid and returns the max of L(r)*r for
    q < 1, or L(r)*r/log(phi(r)) for q = 1.
    """
    rs = np.asarray(r_grid, float)
    if np.any(rs <= 0):
        raise ArgumentError("r grid must be positive")
    q = profile.pair.q
    rows = []
    worst = 0.0
    for r in rs:
        t = phi(profile, float(r))       # DomainError if r out of range
        lhs = float(h_value(profile.pair, t))
        if q == 1.0:
            if t <= 1.0:
                raise DomainError(
                    f"q=1 estimate needs phi(r) > 1; phi({r:.6g}) = {t:.6g}")
            scaled = lhs * r / math.log(t)
        else:
            scaled = lhs * r
        rows.append((float(r), t, lhs, float(scaled)))
        worst = max(worst, scaled)
    return Ap2Report(float(worst), rows)


# ---------------------------------------------------------------------------
# profile serialization: two-column tables with a descriptive header
# ---------------------------------------------------------------------------

def _pair_header(pair: NonlinearityPair) -> str:
    def one(fn):
        if fn.family in ("piecewise_linear", "tabulated"):
            pts = ";".join(f"{t:.9g},{v:.9g}" for t, v in zip(fn.knots_t, fn.knots_v))
            return f"{fn.family}[{pts}]odd={int(fn.odd_extension)}"
        return (f"{fn.family}(c={fn.c:.9g},gamma={fn.gamma:.9g},"
                f"odd={int(fn.odd_extension)})")
    return f"f={one(pair.f)} g={one(pair.g)} q={pair.q:.9g}"


def dump_profile(profile: GrowthProfile, directory: str) -> list:
    """Write (s, F), (s, G), (t, psi) tables; returns the file paths."""
    os.makedirs(directory, exist_ok=True)
    header = (f"{_pair_header(profile.pair)} C_q={profile.C_q:.9g} "
              f"quadrature_tol={profile.quadrature_tol:.3g} "
              f"psi_zero_plus={profile.psi_zero_plus:.9g}")
    paths = []
    for name, xs, ys in (("F", profile.s_nodes, profile.F_table),
                         ("G", profile.s_nodes, profile.G_table),
                         ("psi", profile.psi_t, profile.psi_values)):
        path = os.path.join(directory, f"profile_{name}.dat")
        with open(path, "w") as fh:
            fh.write(f"# {name} {header}\n")
            for x, y in zip(xs, ys):
                fh.write(f"{x:.9g} {y:.9g}\n")
        paths.append(path)
    return paths


def load_profile_table(path: str):
    """Read one dumped table back: (header string, x array, y array)."""
    with open(path) as fh:
        header = fh.readline().lstrip("#").strip()
        data = np.loadtxt(io.StringIO(fh.read()))
    data = np.atleast_2d(data)
    return header, data[:, 0], data[:, 1]
