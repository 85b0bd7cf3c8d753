"""Scalar nonlinearities and the structural-condition checkers.

The absorption pair (f, g, q) drives everything else in the package; this
module decides, on finite sample windows, the sign/monotonicity conditions,
the ratio conditions on the combined growth function h, the Keller-Osserman
integral condition, and the epsilon-regularized monotonicity transfer.
Asymptotic conditions are decided with an explicit margin and can come back
``inconclusive`` -- finite samples cannot prove a liminf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, DomainError, PreconditionError
from .quadrature import cumulative_gauss, fit_power_tail, integrate, tail_fitted_integral

_REL_SLACK = 1e-12          # floating-point plateau slack for strictness checks
_DIF_TOL = 1e-10            # allowed relative decrease in the eps-regularized sweep


@dataclass(frozen=True)
class ScalarFunction:
    """One scalar nonlinearity, vectorized over numpy arrays.

    Families:
      power:           c * t**gamma              (t >= 0)
      exp_minus_one:   c * (exp(t) - 1)
      log_plus_one:    c * log(1 + t)            (t > -1)
      piecewise_linear: interpolation of knots, linear extrapolation outside
      tabulated:       interpolation of samples, out-of-range is an error

    ``odd_extension`` defines values at t < 0 as -value(-t) for families that
    are only given on the non-negative axis.
    """

    family: str
    c: float = 1.0
    gamma: float = 1.0
    knots_t: tuple = ()
    knots_v: tuple = ()
    odd_extension: bool = False

    def __post_init__(self):
        if self.family not in ("power", "exp_minus_one", "log_plus_one",
                               "piecewise_linear", "tabulated"):
            raise ArgumentError(f"unknown family {self.family!r}")
        if self.family in ("piecewise_linear", "tabulated"):
            t = np.asarray(self.knots_t, float)
            if t.size < 2:
                raise ArgumentError("need at least two knots")
            if np.any(np.diff(t) <= 0):
                raise ArgumentError("knot abscissae must be strictly increasing")
            if len(self.knots_t) != len(self.knots_v):
                raise ArgumentError("knot abscissae/values length mismatch")

    # -- constructors ------------------------------------------------------
    @classmethod
    def power(cls, c: float, gamma: float, odd: bool = False):
        return cls("power", c=c, gamma=gamma, odd_extension=odd)

    @classmethod
    def exp_minus_one(cls, c: float = 1.0, odd: bool = False):
        return cls("exp_minus_one", c=c, odd_extension=odd)

    @classmethod
    def log_plus_one(cls, c: float = 1.0, odd: bool = False):
        return cls("log_plus_one", c=c, odd_extension=odd)

    @classmethod
    def piecewise_linear(cls, knots, odd: bool = False):
        t, v = zip(*knots)
        return cls("piecewise_linear", knots_t=tuple(map(float, t)),
                   knots_v=tuple(map(float, v)), odd_extension=odd)

    @classmethod
    def tabulated(cls, t, v, odd: bool = False):
        return cls("tabulated", knots_t=tuple(map(float, t)),
                   knots_v=tuple(map(float, v)), odd_extension=odd)

    @classmethod
    def zero(cls):
        return cls("power", c=0.0, gamma=1.0, odd_extension=True)

    @property
    def is_zero(self) -> bool:
        if self.family == "power":
            return self.c == 0.0
        if self.family in ("exp_minus_one", "log_plus_one"):
            return self.c == 0.0
        return all(v == 0.0 for v in self.knots_v)

    # -- evaluation --------------------------------------------------------
    def _native(self, t: np.ndarray) -> np.ndarray:
        if self.family == "power":
            if self.c == 0.0:
                return np.zeros_like(t)
            bad = t < 0
            if np.any(bad) and self.gamma != round(self.gamma):
                raise DomainError(
                    "power family with non-integer exponent is undefined for "
                    "negative arguments; set odd_extension")
            with np.errstate(over="ignore"):
                return self.c * np.power(t, self.gamma)
        if self.family == "exp_minus_one":
            return self.c * np.expm1(t)
        if self.family == "log_plus_one":
            if np.any(t <= -1):
                raise DomainError("log_plus_one undefined for t <= -1")
            return self.c * np.log1p(t)
        kt = np.asarray(self.knots_t)
        kv = np.asarray(self.knots_v)
        if self.family == "tabulated":
            if np.any(t < kt[0]) or np.any(t > kt[-1]):
                raise DomainError(
                    f"tabulated query outside [{kt[0]}, {kt[-1]}]")
            return np.interp(t, kt, kv)
        # piecewise_linear: linear extrapolation with the end segment slopes
        out = np.interp(t, kt, kv)
        lo_slope = (kv[1] - kv[0]) / (kt[1] - kt[0])
        hi_slope = (kv[-1] - kv[-2]) / (kt[-1] - kt[-2])
        out = np.where(t < kt[0], kv[0] + lo_slope * (t - kt[0]), out)
        out = np.where(t > kt[-1], kv[-1] + hi_slope * (t - kt[-1]), out)
        return out

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        if not np.all(np.isfinite(arr)):
            raise DomainError("evaluation point must be finite")
        if self.odd_extension:
            out = np.empty_like(arr)
            neg = arr < 0
            if np.any(~neg):
                out[~neg] = self._native(arr[~neg])
            if np.any(neg):
                out[neg] = -self._native(-arr[neg])
        else:
            out = self._native(arr)
        return float(out[0]) if scalar else out


def evaluate(fn: ScalarFunction, t):
    """Value of fn at t (odd extension applied when flagged)."""
    return fn(t)


@dataclass(frozen=True)
class NonlinearityPair:
    """The absorption/gradient pair (f, g) with gradient exponent q.

    The PDE and Harnack machinery require 0 <= q <= 1; the growth calculus
    and the radial problem accept 0 <= q < 2.
    """

    f: ScalarFunction
    g: ScalarFunction
    q: float

    def __post_init__(self):
        if not 0.0 <= self.q < 2.0:
            raise ArgumentError(f"q={self.q} outside [0, 2)")

    def require_pde_range(self):
        if self.q > 1.0:
            raise ArgumentError(
                f"q={self.q}: PDE/Harnack operations require 0 <= q <= 1")


@dataclass
class ConditionReport:
    """Verdict for one structural condition, with counterexample witnesses.

    ``evidence`` holds (sample point, value) witnesses; a fail verdict always
    carries at least one.  Compound checks carry their sub-reports in
    ``parts``.
    """

    condition_id: str
    verdict: str                       # pass | fail | inconclusive
    evidence: list = field(default_factory=list)
    parameters: dict = field(default_factory=dict)
    parts: tuple = ()

    def __post_init__(self):
        if self.verdict not in ("pass", "fail", "inconclusive"):
            raise ArgumentError(f"bad verdict {self.verdict!r}")
        if self.verdict == "fail" and not self.evidence and not any(
                p.verdict == "fail" for p in self.parts):
            raise ArgumentError("fail verdict requires a witness")

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def _combine(condition_id, parts, parameters=None):
    verdict = "pass"
    if any(p.verdict == "fail" for p in parts):
        verdict = "fail"
    elif any(p.verdict == "inconclusive" for p in parts):
        verdict = "inconclusive"
    ev = []
    for p in parts:
        if p.verdict != "pass":
            ev.extend(p.evidence[:2])
    return ConditionReport(condition_id, verdict, ev, parameters or {}, tuple(parts))


# ---------------------------------------------------------------------------
# combined growth function h and its epsilon regularization
# ---------------------------------------------------------------------------

def h_value(pair: NonlinearityPair, s):
    """(f(s)/s)^(1/2) + (g(s)/s^(1-q))^(1/(2-q)) for s > 0."""
    arr = np.asarray(s, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(arr <= 0):
        raise DomainError("h is defined for s > 0 only")
    fs = np.atleast_1d(np.asarray(pair.f(arr), float))
    gs = np.atleast_1d(np.asarray(pair.g(arr), float))
    if np.any(fs < 0) or np.any(gs < 0):
        raise DomainError("h requires f(s) >= 0 and g(s) >= 0")
    out = np.sqrt(fs / arr) + np.power(gs / arr ** (1.0 - pair.q),
                                       1.0 / (2.0 - pair.q))
    return float(out[0]) if scalar else out


def h_epsilon_value(pair: NonlinearityPair, s, eps: float):
    """Regularized variant with s replaced by s + eps in the denominators."""
    if eps <= 0:
        raise ArgumentError("eps must be positive")
    arr = np.asarray(s, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(arr < 0):
        raise DomainError("h_eps is defined for s >= 0")
    fs = np.atleast_1d(np.asarray(pair.f(arr), float))
    gs = np.atleast_1d(np.asarray(pair.g(arr), float))
    if np.any(fs < 0) or np.any(gs < 0):
        raise DomainError("h_eps requires f(s) >= 0 and g(s) >= 0")
    den = arr + eps
    out = np.sqrt(fs / den) + np.power(gs / den ** (1.0 - pair.q),
                                       1.0 / (2.0 - pair.q))
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# condition checkers
# ---------------------------------------------------------------------------

def _nondecreasing(vals, rel_slack=_REL_SLACK):
    vals = np.asarray(vals, float)
    scale = np.maximum.accumulate(np.abs(vals)) + 1e-300
    return np.diff(vals) >= -rel_slack * scale[:-1]


def _strictly_increasing(vals, rel_slack=_REL_SLACK):
    vals = np.asarray(vals, float)
    scale = np.maximum(np.abs(vals[:-1]), np.abs(vals[1:])) + 1e-300
    return np.diff(vals) > rel_slack * scale


def check_condition_P(pair: NonlinearityPair, sample_grid) -> ConditionReport:
    """Sign condition on f plus strict monotonicity of f or g."""
    grid = np.asarray(sample_grid, float)
    if grid.size == 0:
        raise ArgumentError("sample grid must be non-empty")
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ArgumentError("sample grid must be strictly increasing and positive")

    f_pos = pair.f(grid)
    f_neg = pair.f(-grid)
    bad = ~((f_neg < 0) & (f_pos > 0))
    if np.any(bad):
        i = int(np.argmax(bad))
        part_a = ConditionReport(
            "P_a", "fail",
            [(float(grid[i]), float(f_pos[i])), (float(-grid[i]), float(f_neg[i]))])
    else:
        part_a = ConditionReport("P_a", "pass",
                                 [(float(grid[0]), float(f_pos[0]))])

    g_vals = pair.g(grid)
    f_strict = bool(np.all(_strictly_increasing(f_pos)))
    g_strict = bool(np.all(_strictly_increasing(g_vals)))
    if f_strict or g_strict:
        part_b = ConditionReport("P_b", "pass", [],
                                 {"f_strict": f_strict, "g_strict": g_strict})
    else:
        i = int(np.argmin(_strictly_increasing(f_pos)))
        part_b = ConditionReport(
            "P_b", "fail",
            [(float(grid[i]), float(f_pos[i])), (float(grid[i + 1]), float(f_pos[i + 1]))],
            {"f_strict": f_strict, "g_strict": g_strict})
    return _combine("P", (part_a, part_b),
                    {"grid_lo": float(grid[0]), "grid_hi": float(grid[-1]),
                     "samples": int(grid.size)})


def check_C1_C2(pair: NonlinearityPair, theta: float, window, samples: int = 64,
                margin: float = 0.05) -> ConditionReport:
    """Monotonicity of h and the ratio condition h(theta*t)/h(t) > 1.

    The ratio verdict is decided on the upper half of the window: fail at or
    below 1 (within floating slack), pass above 1 + margin, inconclusive in
    between.
    """
    t0, t1 = float(window[0]), float(window[1])
    if theta <= 1:
        raise ArgumentError("theta must exceed 1")
    if not (0 < t0 < t1) or t1 / theta <= t0:
        raise ArgumentError("window must satisfy 0 < T0 < T1/theta")
    if samples < 16:
        raise ArgumentError("need at least 16 samples")

    grid = np.geomspace(t0, t1, samples)
    hv = h_value(pair, grid)
    mono = _nondecreasing(hv)
    if np.all(mono):
        part_c1 = ConditionReport("C1", "pass", [(float(grid[0]), float(hv[0]))])
    else:
        i = int(np.argmin(mono))
        part_c1 = ConditionReport(
            "C1", "fail",
            [(float(grid[i]), float(hv[i])), (float(grid[i + 1]), float(hv[i + 1]))])

    base = np.geomspace(t0, t1 / theta, samples)
    base = base[base >= math.sqrt(t0 * t1 / theta)]      # upper half (log scale)
    ratios = h_value(pair, theta * base) / np.maximum(h_value(pair, base), 1e-300)
    i_min = int(np.argmin(ratios))
    r_min = float(ratios[i_min])
    params = {"theta": theta, "margin": margin, "min_ratio": r_min,
              "window_lo": t0, "window_hi": t1}
    witness = [(float(base[i_min]), r_min)]
    if r_min <= 1.0 + _REL_SLACK:
        part_c2 = ConditionReport("C2", "fail", witness, params)
    elif r_min > 1.0 + margin:
        part_c2 = ConditionReport("C2", "pass", witness, params)
    else:
        part_c2 = ConditionReport("C2", "inconclusive", witness, params)
    return _combine("C1C2", (part_c1, part_c2), params)


def check_C3_C4(pair: NonlinearityPair, window, samples: int = 64,
                thresholds=(1.0, 10.0, 100.0), cap: float = 10.0) -> ConditionReport:
    """q = 1 extra conditions: f unbounded, g/(log t sqrt(f)) bounded."""
    if pair.q != 1.0:
        raise ArgumentError("C3/C4 apply to q = 1 only")
    t0, t1 = float(window[0]), float(window[1])
    if not (1.0 < t0 < t1):
        raise ArgumentError("window must satisfy 1 < T0 < T1")
    grid = np.geomspace(t0, t1, samples)
    fv = pair.f(grid)

    growing = bool(np.all(_nondecreasing(fv))) and fv[-1] > fv[0] + _REL_SLACK * abs(fv[-1])
    cleared = fv[-1] > max(thresholds)
    if growing and cleared:
        part_c3 = ConditionReport("C3", "pass", [(float(grid[-1]), float(fv[-1]))],
                                  {"thresholds": tuple(thresholds)})
    elif not growing or fv[-1] <= min(thresholds):
        part_c3 = ConditionReport("C3", "fail",
                                  [(float(grid[0]), float(fv[0])),
                                   (float(grid[-1]), float(fv[-1]))],
                                  {"thresholds": tuple(thresholds)})
    else:
        part_c3 = ConditionReport("C3", "inconclusive",
                                  [(float(grid[-1]), float(fv[-1]))],
                                  {"thresholds": tuple(thresholds)})

    gv = pair.g(grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = gv / (np.log(grid) * np.sqrt(np.maximum(fv, 1e-300)))
    upper = grid >= math.sqrt(t0 * t1)
    r_up = ratio[upper]
    g_up = grid[upper]
    r_max = float(np.max(r_up))
    i_max = int(np.argmax(r_up))
    # trend: log-log slope of the ratio over the upper half
    slope = float(np.polyfit(np.log(g_up), np.log(np.maximum(r_up, 1e-300)), 1)[0])
    params = {"cap": cap, "max_ratio": r_max, "trend_slope": slope}
    witness = [(float(g_up[i_max]), r_max)]
    if r_max > cap:
        part_c4 = ConditionReport("C4", "fail", witness, params)
    elif slope <= _REL_SLACK:
        part_c4 = ConditionReport("C4", "pass", witness, params)
    elif r_max < 0.9 * cap:
        part_c4 = ConditionReport("C4", "inconclusive", witness, params)
    else:
        part_c4 = ConditionReport("C4", "inconclusive", witness, params)
    return _combine("C3C4", (part_c3, part_c4), params)


def check_KO(pair: NonlinearityPair, tol: float = 1e-8,
             slope_margin: float = 0.05, fit_residual_cap: float = 0.1) -> ConditionReport:
    """Keller-Osserman integral test from s = 1.

    Quadrature on a finite range plus a power-law fit of the integrand on the
    last sampled decade: fitted slope <= -(1 + margin) declares convergence,
    anything decaying like 1/s or slower fails, a poor power fit is
    inconclusive.
    """
    q = pair.q

    F1 = integrate(lambda x: np.asarray(pair.f(x), float), 0.0, 1.0, tol)
    G1 = integrate(lambda x: np.asarray(pair.g(x), float), 0.0, 1.0, tol)

    def integrand(s):
        s = np.atleast_1d(np.asarray(s, float))
        srt = np.sort(s)
        F = F1 + cumulative_gauss(lambda x: np.asarray(pair.f(x), float), 1.0, srt)
        G = G1 + cumulative_gauss(lambda x: np.asarray(pair.g(x), float), 1.0, srt)
        order = np.argsort(np.argsort(s))
        with np.errstate(over="ignore"):
            den = np.sqrt(F[order]) + np.power(G[order], 1.0 / (2.0 - q))
        with np.errstate(divide="ignore"):
            return np.where(den > 0, 1.0 / den, np.inf)

    first = integrand(np.array([1.0]))[0]
    if not np.isfinite(first):
        return ConditionReport(
            "KO_q", "fail", [(1.0, float("inf"))],
            {"reason": "F and G vanish at the lower limit; integrand infinite"})

    res = tail_fitted_integral(integrand, 1.0, tol=tol, slope_margin=slope_margin)
    params = {"slope": res.fit.slope, "fit_residual": res.fit.residual,
              "upper": res.upper, "value": res.value, "margin": slope_margin}
    witness = [(res.fit.anchor, res.fit.level)]
    if res.fit.residual > fit_residual_cap:
        # not power-like on the window; decide by local slopes when they are
        # uniformly steep (e.g. exponential decay), otherwise stay honest
        s = np.geomspace(res.upper / 10.0, res.upper, 24)
        v = integrand(s)
        pos = v > 0
        if np.all(~pos):
            return ConditionReport("KO_q", "pass", witness, params)
        local = np.diff(np.log(v[pos])) / np.diff(np.log(s[pos]))
        if local.size and np.all(local <= -(1.0 + slope_margin)):
            return ConditionReport("KO_q", "pass", witness, params)
        return ConditionReport("KO_q", "inconclusive", witness, params)
    if res.fit.slope <= -(1.0 + slope_margin):
        return ConditionReport("KO_q", "pass", witness, params)
    return ConditionReport("KO_q", "fail", witness, params)


def check_g_zero(pair: NonlinearityPair, tol: float = 1e-12) -> ConditionReport:
    """Consistency prerequisite g(0) = 0 for the q < 1 pipeline."""
    if not 0.0 <= pair.q < 1.0:
        raise ArgumentError("g(0) = 0 is required for 0 <= q < 1 only")
    g0 = float(pair.g(0.0))
    if abs(g0) <= tol:
        return ConditionReport("G_ZERO", "pass", [(0.0, g0)], {"tol": tol})
    return ConditionReport("G_ZERO", "fail", [(0.0, g0)], {"tol": tol})


def verify_dif_monotonicity(pair: NonlinearityPair, eps_list, t_grid) -> ConditionReport:
    """Monotonicity transfer from h to its eps-regularized variants.

    Precondition (the lemma's hypothesis): h is non-decreasing on the grid.
    Violations of the hypothesis raise, they are not a fail verdict.
    """
    grid = np.asarray(t_grid, float)
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ArgumentError("t grid must be positive and strictly increasing")
    eps_list = [float(e) for e in eps_list]
    if any(e <= 0 for e in eps_list):
        raise ArgumentError("all eps must be positive")
    hv = h_value(pair, grid)
    if not np.all(_nondecreasing(hv)):
        i = int(np.argmin(_nondecreasing(hv)))
        raise PreconditionError(
            f"hypothesis violated: h decreases between t={grid[i]:.6g} "
            f"and t={grid[i + 1]:.6g}")
    for eps in eps_list:
        he = h_epsilon_value(pair, grid, eps)
        ok = _nondecreasing(he, rel_slack=_DIF_TOL)
        if not np.all(ok):
            i = int(np.argmin(ok))
            return ConditionReport(
                "DIF", "fail",
                [(float(grid[i]), float(he[i])), (float(grid[i + 1]), float(he[i + 1]))],
                {"eps": eps})
    return ConditionReport("DIF", "pass", [], {"eps_count": len(eps_list),
                                               "grid_size": int(grid.size)})


def random_monotone_piecewise_pair(rng: np.random.Generator, q: float,
                                   n_knots: int = 8, t_max: float = 10.0,
                                   grid=None, max_tries: int = 200) -> NonlinearityPair:
    """Random monotone piecewise-linear pair with f(0) = g(0) = 0.

    Rejection-samples until h passes the grid monotonicity hypothesis, so the
    pair is usable in the monotonicity-transfer property sweep.
    """
    if grid is None:
        grid = np.geomspace(1e-3, t_max, 120)
    for _ in range(max_tries):
        kt = np.concatenate(([0.0], np.sort(rng.uniform(0.05, t_max, n_knots - 1))))
        fv = np.concatenate(([0.0], np.cumsum(rng.uniform(0.0, 1.0, n_knots - 1))))
        gv = np.concatenate(([0.0], np.cumsum(rng.uniform(0.0, 1.0, n_knots - 1))))
        # convex-ish amplification keeps h from dipping
        fv = fv ** 2
        gv = gv ** 2
        pair = NonlinearityPair(
            ScalarFunction.piecewise_linear(list(zip(kt, fv)), odd=True),
            ScalarFunction.piecewise_linear(list(zip(kt, gv)), odd=True), q)
        hv = h_value(pair, grid)
        if np.all(_nondecreasing(hv)):
            return pair
    raise RuntimeError("could not sample a pair satisfying the h hypothesis")
