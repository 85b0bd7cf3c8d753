"""Radial initial-value problem, blow-up bracketing, and radial extension.

Solves phi'' = f(phi) + g(phi)|phi'|^q with phi(0) = a, phi'(0) = 0 by
adaptive Runge-Kutta, switching near blow-up to the inverse formulation
dr/dphi = 1/phi' (integrated in log(phi), where the solution is smooth all
the way to infinity).  The blow-up radius is returned as a bracket: the last
computed radius plus an analytic tail bound from the energy inequality
phi' >= sqrt(F(phi) - F(a)).

Convention: |phi'|^q at phi' = 0 with q = 0 is taken as 1, so the initial
curvature is f(a) + g(a); this matters only for the q = 0 trajectory start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp as _scipy_solve_ivp
from scipy.interpolate import PchipInterpolator

from .errors import ArgumentError, DomainError, PreconditionError
from .growth import GrowthProfile, partial_growth_integral, psi_value
from .nonlinearity import NonlinearityPair
from .quadrature import cumulative_gauss, fit_power_tail, integrate


@dataclass
class RadialSolution:
    """Nodes (r, phi, phi') of one radial solve plus blow-up bookkeeping."""

    pair: NonlinearityPair
    a: float
    nodes: np.ndarray                 # shape (N, 3): r, phi, dphi
    status: str                       # blew_up | reached_cap | reached_rmax
    R_bracket: tuple | None = None    # (R_lo, R_hi) when status != reached_rmax
    degenerate_rest_point: bool = False
    _interp: object = None

    @property
    def q(self) -> float:
        return self.pair.q

    @property
    def max_radius(self) -> float:
        return float(self.nodes[-1, 0])

    def interpolant(self):
        if self._interp is None:
            r, p = self.nodes[:, 0], self.nodes[:, 1]
            keep = np.concatenate(([True], np.diff(r) > 0))
            self._interp = PchipInterpolator(r[keep], p[keep])
        return self._interp

    def save(self, path: str):
        with open(path, "w") as fh:
            br = ("" if self.R_bracket is None
                  else f" R_lo={self.R_bracket[0]:.9g} R_hi={self.R_bracket[1]:.9g}")
            fh.write(f"# a={self.a:.9g} q={self.q:.9g} status={self.status}{br}\n")
            for r, p, dp in self.nodes:
                fh.write(f"{r:.9g} {p:.9g} {dp:.9g}\n")


def _speed_power(p, q):
    """|p|^q with the 0^0 = 1 convention at (p, q) = (0, 0)."""
    if q == 0.0:
        return np.ones_like(np.asarray(p, float)) if np.ndim(p) else 1.0
    return np.abs(p) ** q


def solve_ivp(pair: NonlinearityPair, a: float, phi_cap: float = 1e6,
              r_max: float = 10.0, rtol: float = 1e-11, atol: float = 1e-12,
              max_step: float = 0.05) -> RadialSolution:
    """Integrate the radial problem until the level cap, blow-up, or r_max."""
    if a <= 0:
        raise ArgumentError("initial value a must be positive")
    q = pair.q
    f, g = pair.f, pair.g
    f_a, g_a = float(f(a)), float(g(a))
    if f_a < 0 or g_a < 0:
        raise DomainError("f and g must be non-negative at the initial level")
    if f_a == 0.0 and g_a == 0.0:
        # rest point: the constant function solves the problem (uniqueness is
        # not guaranteed here; flagged rather than hidden)
        rr = np.linspace(0.0, r_max, 33)
        nodes = np.column_stack([rr, np.full_like(rr, a), np.zeros_like(rr)])
        return RadialSolution(pair, a, nodes, "reached_rmax",
                              degenerate_rest_point=True)

    def rhs(_, y):
        phi, p = y
        return [p, float(f(phi)) + float(g(phi)) * float(_speed_power(p, q))]

    phi_switch = min(phi_cap, max(10.0 * a, a + 10.0))
    hit = lambda _, y: y[0] - phi_switch
    hit.terminal = True
    hit.direction = 1.0

    sol = _scipy_solve_ivp(rhs, (0.0, r_max), [a, 0.0], method="DOP853",
                           rtol=rtol, atol=atol, max_step=max_step, events=hit)
    nodes = np.column_stack([sol.t, sol.y[0], sol.y[1]])
    if sol.status == 0:
        return RadialSolution(pair, a, nodes, "reached_rmax")
    if sol.status < 0:
        bracket = _bracket_from_tail(pair, a, nodes[-1, 0], nodes[-1, 1])
        return RadialSolution(pair, a, nodes, "blew_up", bracket)

    r_sw, phi_sw, p_sw = sol.t_events[0][0], phi_switch, float(sol.y_events[0][0][1])
    if phi_sw >= phi_cap:
        bracket = _bracket_from_tail(pair, a, r_sw, phi_sw)
        return RadialSolution(pair, a, nodes, "reached_cap", bracket)

    # inverse formulation in lam = log(phi): r' = phi/p, p' = phi*rhs/p
    def rhs_inv(lam, y):
        r, p = y
        phi = math.exp(lam)
        acc = float(f(phi)) + float(g(phi)) * float(_speed_power(p, q))
        return [phi / p, phi * acc / p]

    sol2 = _scipy_solve_ivp(rhs_inv, (math.log(phi_sw), math.log(phi_cap)),
                            [r_sw, p_sw], method="DOP853",
                            rtol=max(rtol, 1e-12), atol=atol)
    if sol2.status < 0 or not np.all(np.isfinite(sol2.y)):
        good = np.isfinite(sol2.y[0]) & np.isfinite(sol2.y[1])
        phis = np.exp(sol2.t[good])
        extra = np.column_stack([sol2.y[0][good], phis, sol2.y[1][good]])
        nodes = np.vstack([nodes, extra[1:]])
        bracket = _bracket_from_tail(pair, a, nodes[-1, 0], nodes[-1, 1])
        return RadialSolution(pair, a, nodes, "blew_up", bracket)
    phis = np.exp(sol2.t)
    extra = np.column_stack([sol2.y[0], phis, sol2.y[1]])
    nodes = np.vstack([nodes, extra[1:]])
    r_cap = float(nodes[-1, 0])
    if r_cap > r_max:
        keep = nodes[:, 0] <= r_max
        return RadialSolution(pair, a, nodes[keep], "reached_rmax")
    bracket = _bracket_from_tail(pair, a, r_cap, float(nodes[-1, 1]))
    return RadialSolution(pair, a, nodes, "reached_cap", bracket)


def _bracket_from_tail(pair: NonlinearityPair, a: float, r_last: float,
                       phi_last: float) -> tuple:
    """(R_lo, R_hi): remaining run bounded by int_phi^inf ds/sqrt(F(s)-F(a))."""
    f = lambda x: np.asarray(pair.f(x), float)
    g = lambda x: np.asarray(pair.g(x), float)
    Fbase = integrate(f, a, phi_last, 1e-10)
    Gbase = integrate(g, a, phi_last, 1e-10)
    inv = 1.0 / (2.0 - pair.q)
    cg = (2.0 - pair.q) ** inv

    def integrand(s):
        s = np.atleast_1d(np.asarray(s, float))
        srt = np.sort(s)
        F = Fbase + cumulative_gauss(f, phi_last, srt)
        G = Gbase + cumulative_gauss(g, phi_last, srt)
        order = np.argsort(np.argsort(s))
        with np.errstate(over="ignore"):
            lower = np.maximum(np.sqrt(F[order]), cg * np.power(G[order], inv))
        with np.errstate(divide="ignore"):
            return np.where(lower > 0, 1.0 / lower, np.inf)

    from .quadrature import tail_fitted_integral
    res = tail_fitted_integral(integrand, phi_last, tol=1e-8)
    tail = res.value if np.isfinite(res.value) else math.inf
    return (r_last, r_last + tail)


def verify_lo_ul(sol: RadialSolution, profile: GrowthProfile,
                 tol: float = 1e-6):
    """Per-node check of the gradient lower bound and its integrated form."""
    if sol.degenerate_rest_point:
        return {"vacuous": True, "passed": True, "min_lo_slack": math.inf,
                "min_ul_slack": math.inf, "rows": []}
    nodes = sol.nodes
    mask = (nodes[:, 1] > sol.a * (1 + 1e-12)) & (nodes[:, 0] > 0)
    if np.count_nonzero(mask) < 3:
        raise PreconditionError("need at least 3 nodes above the initial level")
    r = nodes[mask, 0]
    ph = nodes[mask, 1]
    dp = nodes[mask, 2]
    pair, C_q = sol.pair, profile.C_q
    inv = 1.0 / (2.0 - pair.q)

    order = np.argsort(ph)
    F = np.empty_like(ph)
    G = np.empty_like(ph)
    F[order] = cumulative_gauss(lambda x: np.asarray(pair.f(x), float), sol.a, ph[order])
    G[order] = cumulative_gauss(lambda x: np.asarray(pair.g(x), float), sol.a, ph[order])
    den = np.sqrt(np.maximum(F, 0)) + np.power(np.maximum(G, 0), inv)
    lo_ratio = dp / np.maximum(den, 1e-300)
    lo_ok = lo_ratio >= C_q * (1 - tol)

    ul_rhs = partial_growth_integral(pair, sol.a, ph, profile.quadrature_tol)
    ul_ok = C_q * r <= ul_rhs * (1 + tol) + 1e-14
    rows = list(zip(r, ph, lo_ratio, ul_rhs))
    return {
        "vacuous": False,
        "passed": bool(np.all(lo_ok) and np.all(ul_ok)),
        "min_lo_slack": float(np.min(lo_ratio / C_q)),
        "min_ul_slack": float(np.min(ul_rhs - C_q * r)),
        "rows": rows,
    }


def verify_Ra(sol: RadialSolution, profile: GrowthProfile, tol: float = 1e-6):
    """Blow-up radius against the distance integral at the initial level."""
    if not profile.ko_passed:
        raise PreconditionError("psi divergent: Keller-Osserman condition fails")
    if sol.status == "reached_rmax":
        return {"inconclusive": True, "R_hi": None,
                "psi_a": profile.psi(sol.a), "passed": False}
    psi_a = profile.psi(sol.a)
    if not math.isfinite(psi_a):
        raise PreconditionError("psi divergent at the initial level")
    R_hi = sol.R_bracket[1]
    return {"inconclusive": False, "R_hi": float(R_hi), "psi_a": float(psi_a),
            "passed": bool(R_hi <= psi_a * (1 + tol))}


def radial_extension(sol: RadialSolution, center, x) -> float:
    """w(x) = phi(|x - center|), monotone cubic interpolation of the nodes."""
    center = np.asarray(center, float)
    x = np.asarray(x, float)
    dist = float(np.linalg.norm(x - center))
    limit = sol.R_bracket[0] if sol.R_bracket is not None else sol.max_radius
    if dist > limit:
        raise DomainError(f"|x - center| = {dist:.6g} outside radius {limit:.6g}")
    return float(sol.interpolant()(min(dist, sol.max_radius)))
