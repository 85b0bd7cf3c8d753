"""Damped fixed-point solver for the Dirichlet problem and its verifiers.

The update at an interior node is

    u <- (1 - lam) u + lam [ (max + min)/2 - (rho^2/2) RHS(u, |Du|) ]

which is the dynamic-programming form of the discrete equation: at a fixed
point, (max + min - 2u)/rho^2 = RHS exactly, so the reported PDE residual of
a solve converged to update tolerance ``tol`` is at most 2 tol / rho^2.

Two sweeps are provided: Jacobi (fresh field per iteration, parallelizable)
and in-place Gauss-Seidel with rotating sweep orders (single-threaded,
numba-compiled, typically an order of magnitude fewer iterations).
Negative iterates are clamped to zero for right-hand-side evaluation only;
the state itself is never clamped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import ArgumentError, DivergenceError, DomainError, PreconditionError
from .grid import (BOUNDARY, EXTERIOR, INTERIOR, Grid2D, GridFunction,
                   StencilOperator)
from .growth import GrowthProfile, q_bound_interpolant
from .nonlinearity import NonlinearityPair


@dataclass
class PDEProblem:
    """Dirichlet problem for the normalized operator with absorption terms.

    kind 'nonlinear':   operator u = f(u) + g(u) |Du|^q
    kind 'coefficient': operator u = A(x) u + B(x) |Du|^q |u|^(1-q)
    """

    grid: Grid2D
    kind: str
    boundary: np.ndarray
    rho: float
    K: int = 16
    pair: NonlinearityPair | None = None
    A: np.ndarray | None = None
    B: np.ndarray | None = None
    q: float | None = None

    def __post_init__(self):
        if self.kind not in ("nonlinear", "coefficient"):
            raise ArgumentError(f"unknown problem kind {self.kind!r}")
        g = self.grid
        if self.boundary.shape != (g.ny, g.nx):
            raise ArgumentError("boundary array shape mismatch")
        if not np.all(np.isfinite(self.boundary[g.boundary])):
            raise ArgumentError("boundary data must be finite")
        if self.kind == "nonlinear":
            if self.pair is None:
                raise ArgumentError("nonlinear problem needs a pair")
            self.pair.require_pde_range()
            self.q = self.pair.q
        else:
            if self.A is None or self.B is None or self.q is None:
                raise ArgumentError("coefficient problem needs A, B, q")
            if not 0.0 <= self.q <= 1.0:
                raise ArgumentError("coefficient problem needs 0 <= q <= 1")
            for name, arr in (("A", self.A), ("B", self.B)):
                if arr.shape != (g.ny, g.nx):
                    raise ArgumentError(f"{name} shape mismatch")
                if np.any(arr[g.non_exterior] < 0):
                    raise ArgumentError(f"{name} must be non-negative")

    def stencil(self, interpolation: str = "linear") -> StencilOperator:
        return self.grid.stencil(self.rho, self.K, interpolation)

    def rhs_fields(self, u: np.ndarray):
        """Coefficient arrays (A_like, B_like) with u frozen for f, g."""
        up = np.clip(u, 0.0, None)
        if self.kind == "nonlinear":
            a = np.asarray(self.pair.f(up), float)
            b = np.asarray(self.pair.g(up), float)
        else:
            a = self.A * up
            b = self.B * np.power(up, 1.0 - self.q) if self.q < 1.0 else self.B.copy()
        return a, b

    def rhs(self, u: np.ndarray, grad: np.ndarray) -> np.ndarray:
        a, b = self.rhs_fields(u)
        gq = np.ones_like(grad) if self.q == 0.0 else np.abs(grad) ** self.q
        return a + b * gq


def dirichlet_values(grid: Grid2D, data) -> np.ndarray:
    """Boundary array from a constant or callable data(x, y).

    For disk domains the band nodes take the value of their nearest-boundary
    projection onto the circle; rectangle bands evaluate at the node.
    """
    vals = np.zeros((grid.ny, grid.nx))
    bnd = grid.boundary
    if not callable(data):
        vals[bnd] = float(data)
        return vals
    X, Y = grid.meshgrid()
    if grid.domain is not None and grid.domain.kind == "disk":
        cx, cy = grid.domain.center
        R = grid.domain.radius
        dx, dy = X - cx, Y - cy
        dist = np.hypot(dx, dy)
        scale = np.where(dist > 0, R / np.maximum(dist, 1e-300), 0.0)
        Xp, Yp = cx + dx * scale, cy + dy * scale
        vals[bnd] = np.asarray(data(Xp, Yp), float)[bnd]
    else:
        vals[bnd] = np.asarray(data(X, Y), float)[bnd]
    return vals


def nonlinear_problem(grid: Grid2D, pair: NonlinearityPair, data,
                      rho_mult: int = 3, K: int = 16) -> PDEProblem:
    return PDEProblem(grid, "nonlinear", dirichlet_values(grid, data),
                      rho_mult * grid.spacing, K, pair=pair)


def coefficient_problem(grid: Grid2D, A, B, q: float, data,
                        rho_mult: int = 3, K: int = 16) -> PDEProblem:
    shape = (grid.ny, grid.nx)

    def field(v):
        if isinstance(v, GridFunction):
            return v.values
        if np.isscalar(v):
            return np.full(shape, float(v))
        return np.asarray(v, float)

    return PDEProblem(grid, "coefficient", dirichlet_values(grid, data),
                      rho_mult * grid.spacing, K, A=field(A), B=field(B), q=float(q))


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

@njit(cache=True)
def _gs_sweep(u, interior, a_field, b_field, corner_idx, corner_w, corner_len,
              rho, q, coefficient_mode, one_minus_q, lam, order):
    ny, nx = u.shape
    K = corner_idx.shape[0]
    max_upd = 0.0
    if order == 0:
        i0, i1, istep = 0, ny, 1
        j0, j1, jstep = 0, nx, 1
    elif order == 1:
        i0, i1, istep = ny - 1, -1, -1
        j0, j1, jstep = nx - 1, -1, -1
    elif order == 2:
        i0, i1, istep = 0, ny, 1
        j0, j1, jstep = nx - 1, -1, -1
    else:
        i0, i1, istep = ny - 1, -1, -1
        j0, j1, jstep = 0, nx, 1
    half_rho2 = 0.5 * rho * rho
    for i in range(i0, i1, istep):
        for j in range(j0, j1, jstep):
            if not interior[i, j]:
                continue
            mx = -1.0e300
            mn = 1.0e300
            for k in range(K):
                acc = 0.0
                for c in range(corner_len[k]):
                    acc += corner_w[k, c] * u[i + corner_idx[k, c, 0],
                                              j + corner_idx[k, c, 1]]
                if acc > mx:
                    mx = acc
                if acc < mn:
                    mn = acc
            if q == 0.0:
                gq = 1.0
            else:
                gq = (abs(mx - mn) / (2.0 * rho)) ** q
            if coefficient_mode:
                up = u[i, j] if u[i, j] > 0.0 else 0.0
                if one_minus_q == 0.0:
                    upow = 1.0
                else:
                    upow = up ** one_minus_q
                rhs = a_field[i, j] * up + b_field[i, j] * gq * upow
            else:
                rhs = a_field[i, j] + b_field[i, j] * gq
            t = 0.5 * (mx + mn) - half_rho2 * rhs
            d = t - u[i, j]
            u[i, j] += lam * d
            if d < 0.0:
                d = -d
            if d > max_upd:
                max_upd = d
    return max_upd


def _corner_tables(op: StencilOperator):
    K = op.K
    max_c = max(len(c) for c in op._corners)
    idx = np.zeros((K, max_c, 2), np.int64)
    w = np.zeros((K, max_c))
    lens = np.zeros(K, np.int64)
    for k, corners in enumerate(op._corners):
        lens[k] = len(corners)
        for c, (oy, ox, ww) in enumerate(corners):
            idx[k, c, 0] = oy
            idx[k, c, 1] = ox
            w[k, c] = ww
    return idx, w, lens


@dataclass
class SolveResult:
    u: GridFunction
    residual_history: list
    iterations: int
    converged: bool
    damping: float
    method: str


def _fixed_point_map(problem: PDEProblem, values: np.ndarray) -> np.ndarray:
    """Full-field image of the Jacobi update (interior nodes)."""
    op = problem.stencil()
    mx, mn = op.extrema(values)
    grad = (mx - mn) / (2 * problem.rho)
    rhs = problem.rhs(values, grad)
    return 0.5 * (mx + mn) - 0.5 * problem.rho ** 2 * rhs


def solve_dirichlet(problem: PDEProblem, initial: GridFunction | None = None,
                    tol: float = 1e-9, max_iter: int = 200000,
                    damping: float = 1.0,
                    method: str = "gauss_seidel") -> SolveResult:
    """Iterate to the discrete fixed point; boundary nodes stay pinned."""
    if not 0.0 < damping <= 1.0:
        raise ArgumentError("damping must lie in (0, 1]")
    if method not in ("gauss_seidel", "jacobi"):
        raise ArgumentError("method must be gauss_seidel or jacobi")
    g = problem.grid
    interior = g.interior
    u = np.where(g.boundary, problem.boundary, 0.0)
    if initial is not None:
        u = np.where(interior, initial.values, u)
    else:
        u = np.where(interior, float(np.mean(problem.boundary[g.boundary])), u)
    u[g.mask == EXTERIOR] = 0.0

    lam = damping
    history: list = []
    start = u.copy()
    op = problem.stencil()
    idx, w, lens = _corner_tables(op)
    coeff = problem.kind == "coefficient"
    one_minus_q = 1.0 - problem.q
    pad = op._pad

    # persistent padded state for the in-place kernel
    P = np.zeros((g.ny + 2 * pad, g.nx + 2 * pad))
    view = P[pad:pad + g.ny, pad:pad + g.nx]
    view[...] = np.where(g.non_exterior, u, 0.0)
    Pi = np.zeros(P.shape, np.bool_)
    Pi[pad:pad + g.ny, pad:pad + g.nx] = interior
    Pa = np.zeros_like(P)
    Pb = np.zeros_like(P)
    if coeff:
        Pa[pad:pad + g.ny, pad:pad + g.nx] = problem.A
        Pb[pad:pad + g.ny, pad:pad + g.nx] = problem.B

    it = 0
    grow_streak = 0
    prev_upd = math.inf
    while it < max_iter:
        it += 1
        if method == "gauss_seidel":
            if not coeff:
                a_field, b_field = problem.rhs_fields(view)
                Pa[pad:pad + g.ny, pad:pad + g.nx] = a_field
                Pb[pad:pad + g.ny, pad:pad + g.nx] = b_field
            upd = _gs_sweep(P, Pi, Pa, Pb, idx, w, lens, problem.rho,
                            float(problem.q), coeff, one_minus_q, lam,
                            (it - 1) % 4)
        else:
            target = _fixed_point_map(problem, u)
            delta = np.where(interior, target - u, 0.0)
            upd = float(np.max(np.abs(delta)))
            u = u + lam * delta
        history.append(float(upd))
        if not np.isfinite(upd):
            grow_streak = 51
        elif upd > prev_upd * (1 + 1e-12):
            grow_streak += 1
        else:
            grow_streak = 0
        prev_upd = upd
        if grow_streak > 50:
            lam *= 0.5
            if lam < 1.0 / 16.0:
                raise DivergenceError(
                    f"iteration diverged at damping {lam * 2:.4g}", history)
            u = start.copy()
            view[...] = np.where(g.non_exterior, start, 0.0)
            grow_streak = 0
            prev_upd = math.inf
            continue
        if upd < tol:
            break
    if method == "gauss_seidel":
        u = view.copy()
        u[g.mask == EXTERIOR] = 0.0
    converged = bool(history and history[-1] < tol)
    return SolveResult(GridFunction(g, u), history, it, converged, lam, method)


def prolong(coarse: GridFunction, fine_grid: Grid2D) -> GridFunction:
    """Linear interpolation of a coarse solution onto a finer grid."""
    from scipy.interpolate import RegularGridInterpolator
    cg = coarse.grid
    interp = RegularGridInterpolator((cg.ys, cg.xs), coarse.values,
                                     bounds_error=False, fill_value=None)
    X, Y = fine_grid.meshgrid()
    vals = interp(np.stack([Y.ravel(), X.ravel()], axis=1)).reshape(X.shape)
    vals[fine_grid.mask == EXTERIOR] = 0.0
    return GridFunction(fine_grid, vals)


def residual(problem: PDEProblem, u: GridFunction):
    """(sup residual, signed residual field operator - RHS) on interior nodes."""
    op = problem.stencil()
    opval, grad = op.apply(u.values)
    rhs = problem.rhs(u.values, grad)
    res = np.where(problem.grid.interior, opval - rhs, 0.0)
    return float(np.max(np.abs(res))), res


@dataclass
class ComparisonReport:
    passed: bool
    worst_violation: float
    node: tuple | None


def check_comparison(u_sub: GridFunction, v_super: GridFunction,
                     tol: float = 1e-8,
                     problem: PDEProblem | None = None,
                     residual_tol: float | None = None) -> ComparisonReport:
    """Interior ordering of a subsolution against a supersolution.

    Boundary ordering is a precondition and raises when violated.  When a
    problem and residual tolerance are supplied, the residual sign convention
    (>= -tol for the sub, <= +tol for the super) is verified first.
    """
    if u_sub.grid is not v_super.grid and u_sub.grid.mask.shape != v_super.grid.mask.shape:
        raise ArgumentError("grid mismatch")
    g = u_sub.grid
    bnd = g.boundary
    if np.any(u_sub.values[bnd] > v_super.values[bnd] + 1e-14):
        raise PreconditionError("boundary ordering violated: sub > super on the boundary")
    if problem is not None and residual_tol is not None:
        _, res_sub = residual(problem, u_sub)
        _, res_super = residual(problem, v_super)
        if np.min(res_sub[g.interior]) < -residual_tol:
            raise PreconditionError("claimed subsolution has residual below -tol")
        if np.max(res_super[g.interior]) > residual_tol:
            raise PreconditionError("claimed supersolution has residual above +tol")
    diff = np.where(g.interior, u_sub.values - v_super.values, -np.inf)
    worst = float(np.max(diff))
    if worst > tol:
        node = tuple(int(v) for v in np.unravel_index(np.argmax(diff), diff.shape))
        return ComparisonReport(False, worst, node)
    return ComparisonReport(True, max(worst, 0.0), None)


@dataclass
class GlobalBoundReport:
    passed: bool
    worst_margin: float
    node: tuple | None
    margin: GridFunction


def check_global_bound(u: GridFunction, profile: GrowthProfile, rho: float,
                       tol: float = 1e-6, slack_coeff: float = 10.0,
                       problem: PDEProblem | None = None,
                       residual_tol: float | None = None) -> GlobalBoundReport:
    """Distance-indexed ceiling on a subsolution: u <= Q(d) + slack.

    slack = slack_coeff * rho absorbs the first-order discretization error.
    Requires a grid with an exact domain shape.
    """
    if not profile.ko_passed:
        raise PreconditionError("ceiling undefined: Keller-Osserman condition fails")
    g = u.grid
    if g.domain is None:
        raise ArgumentError("grid carries no domain shape for exact distances")
    if problem is not None and residual_tol is not None:
        _, res = residual(problem, u)
        if np.min(res[g.interior]) < -residual_tol:
            raise PreconditionError("not a subsolution: residual below -tol")
    dist = g.distance_field()
    interior = g.interior
    d_int = dist[interior]
    evaluator = q_bound_interpolant(profile, max(float(np.min(d_int)) / 2, 1e-8),
                                    float(np.max(d_int)) * 1.01)
    bound = np.zeros_like(u.values)
    bound[interior] = evaluator(d_int) * (1 + tol) + slack_coeff * rho
    margin_vals = np.where(interior, bound - u.values, 0.0)
    worst = float(np.min(margin_vals[interior]))
    margin = GridFunction(g, margin_vals)
    if worst < 0:
        node = tuple(int(v) for v in
                     np.unravel_index(np.argmin(np.where(interior, margin_vals, np.inf)),
                                      margin_vals.shape))
        return GlobalBoundReport(False, worst, node, margin)
    return GlobalBoundReport(True, worst, None, margin)
