"""Per-ball and chain-of-balls Harnack verification.

The per-ball bound is absolute: sup over the third-radius ball is at most 6
times the inf, for non-negative supersolutions of the coefficient equation on
a double ball of radius below the structural threshold r0.  The chain verifier
covers a connected region with balls on a hexagonal lattice, walks grid paths
between sampled point pairs, and checks the propagated constant K^(2l+1).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, GeometryError, PreconditionError
from .grid import GridFunction
from .growth import GrowthProfile
from .nonlinearity import NonlinearityPair
from .solver import PDEProblem, residual

HARNACK_BOUND = 6.0


def r0_constant(q: float, A0: float, B0: float) -> float:
    """Radius threshold min(1, (4(A0+B0))^(-1/(2-q))) for the barrier sign."""
    if A0 < 0 or B0 < 0 or A0 + B0 <= 0:
        raise ArgumentError("need non-negative A0, B0 with A0 + B0 > 0")
    if not 0.0 <= q <= 1.0:
        raise ArgumentError("q must lie in [0, 1]")
    return min(1.0, (4.0 * (A0 + B0)) ** (-1.0 / (2.0 - q)))


@dataclass
class HarnackReport:
    center: tuple
    r: float
    sup_val: float
    inf_val: float
    ratio: float
    bound: float
    slack: float
    passed: bool

    def csv_row(self) -> str:
        return (f"{self.center[0]:.9g},{self.center[1]:.9g},{self.r:.9g},"
                f"{self.sup_val:.9g},{self.inf_val:.9g},{self.ratio:.9g},"
                f"{self.bound:.9g},{int(self.passed)}")


def _nodes_in_ball(grid, center, radius):
    X, Y = grid.meshgrid()
    inside = (np.hypot(X - center[0], Y - center[1]) <= radius) & grid.non_exterior
    return inside


def ball_harnack(u: GridFunction, x0, r: float, slack_coeff: float = 2.0,
                 problem: PDEProblem | None = None,
                 residual_tol: float | None = None,
                 check_geometry: bool = True) -> HarnackReport:
    """Extrema ratio over B(x0, r/3) against the absolute bound 6.

    The slack 6 * slack_coeff * rho / r absorbs the first-order discretization
    error; with a problem given, the supersolution residual sign and the
    radius threshold are verified as preconditions.
    """
    g = u.grid
    vals = u.values
    if np.min(vals[g.non_exterior]) < -1e-12:
        raise PreconditionError("supersolution must be non-negative")
    if check_geometry:
        ball2 = _ball_contained(g, x0, 2 * r)
        if not ball2:
            raise PreconditionError(
                f"B(({x0[0]:.4g},{x0[1]:.4g}), {2 * r:.4g}) leaves the masked region")
    slack = 0.0
    if problem is not None:
        if problem.kind != "coefficient":
            raise ArgumentError("per-ball verification runs on the coefficient form")
        A0 = float(np.max(problem.A[g.non_exterior]))
        B0 = float(np.max(problem.B[g.non_exterior]))
        r0 = r0_constant(problem.q, max(A0, 1e-300), max(B0, 1e-300))
        if r >= r0:
            raise PreconditionError(f"r = {r:.6g} not below r0 = {r0:.6g}")
        if residual_tol is not None:
            _, res = residual(problem, u)
            if np.max(res[g.interior]) > residual_tol:
                raise PreconditionError(
                    "not a discrete supersolution: residual above +tol")
        slack = slack_coeff * (problem.rho / r)
    else:
        # geometric slack from the grid spacing when no problem is attached
        slack = slack_coeff * (3 * g.spacing / r)
    inside = _nodes_in_ball(g, x0, r / 3.0)
    if not np.any(inside):
        raise PreconditionError("no grid nodes inside the r/3 ball")
    sup_val = float(np.max(vals[inside]))
    inf_val = float(np.min(vals[inside]))
    if inf_val <= 0.0:
        ratio = 1.0 if sup_val <= 0.0 else math.inf
    else:
        ratio = sup_val / inf_val
    bound = HARNACK_BOUND
    passed = ratio <= bound * (1.0 + slack)
    return HarnackReport(tuple(map(float, x0)), float(r), sup_val, inf_val,
                         float(ratio), bound, float(slack), bool(passed))


def _ball_contained(grid, center, radius) -> bool:
    xs, ys = grid.xs, grid.ys
    cx, cy = center
    if (cx - radius < xs[0] or cx + radius > xs[-1]
            or cy - radius < ys[0] or cy + radius > ys[-1]):
        return False
    inside = _nodes_in_ball(grid, center, radius)
    X, Y = grid.meshgrid()
    covered = (np.hypot(X - cx, Y - cy) <= radius)
    return bool(np.all(grid.mask[covered] != 2))


@dataclass
class CoefficientFields:
    A: GridFunction
    B: GridFunction
    A0: float
    B0: float
    est00_pass: bool
    worst_margin: float
    eps: float


def coefficient_fields(u: GridFunction, pair: NonlinearityPair, eps: float,
                       o_dist: float, profile: GrowthProfile,
                       C_est: float, tol: float = 1e-9) -> CoefficientFields:
    """Frozen coefficients A = f(u)/(u+eps), B = g(u)/(u+eps)^(1-q).

    Suprema are taken over the inner region where the distance to the boundary
    exceeds o_dist/6; the inverse-profile estimate is checked there node by
    node with the constant C_est.
    """
    if eps <= 0:
        raise ArgumentError("eps must be positive")
    pair.require_pde_range()
    g = u.grid
    if g.domain is None:
        raise ArgumentError("grid carries no domain shape for exact distances")
    q = pair.q
    up = np.clip(u.values, 0.0, None)
    ne = g.non_exterior
    A = np.zeros_like(up)
    B = np.zeros_like(up)
    A[ne] = np.asarray(pair.f(up[ne]), float) / (up[ne] + eps)
    B[ne] = np.asarray(pair.g(up[ne]), float) / (up[ne] + eps) ** (1.0 - q)

    dist = g.distance_field()
    inner = ne & (dist > o_dist / 6.0)
    if not np.any(inner):
        raise ArgumentError("inner region is empty; o_dist too large")
    A0 = float(np.max(A[inner]))
    B0 = float(np.max(B[inner]))

    lhs = np.sqrt(A[inner]) + np.power(B[inner], 1.0 / (2.0 - q))
    d_in = dist[inner]
    if q < 1.0:
        bound = C_est * (1.0 + tol) / d_in
    else:
        # inverse-profile logarithm bound; meaningful where the level exceeds e
        from .growth import phi
        levels = np.array([_safe_phi(profile, float(dd)) for dd in d_in])
        logs = np.where(levels > math.e, np.log(levels), np.nan)
        bound = np.where(np.isnan(logs), np.inf, C_est * (1.0 + tol) * logs / d_in)
    margin = bound - lhs
    worst = float(np.min(margin))
    return CoefficientFields(GridFunction(g, A), GridFunction(g, B), A0, B0,
                             bool(worst >= 0.0), worst, eps)


def _safe_phi(profile, r):
    from .errors import DomainError
    from .growth import phi
    try:
        return phi(profile, r)
    except DomainError:
        return 0.0


@dataclass
class ChainPair:
    x: tuple
    y: tuple
    chain_length: int
    ratio: float
    log_bound: float
    passed: bool


@dataclass
class ChainReport:
    ball_count: int
    K: float
    per_ball_reports: list
    per_ball_pass: bool
    pairs: list
    worst_chain_length: int
    log10_global_bound: float
    global_bound: float           # inf when it overflows a float
    observed_ratio: float
    passed: bool

    def csv_summary(self) -> str:
        worst = max((p.ratio for p in self.pairs), default=1.0)
        return (f"{self.ball_count},{self.worst_chain_length},{self.K:.9g},"
                f"{self.log10_global_bound:.9g},{self.observed_ratio:.9g},"
                f"{worst:.9g},{int(self.passed)}")


def _o_mask(grid, o_spec):
    """Boolean node mask of the connected test region."""
    X, Y = grid.meshgrid()
    kind = o_spec["kind"]
    if kind == "annulus":
        cx, cy = o_spec["center"]
        d = np.hypot(X - cx, Y - cy)
        inside = (d >= o_spec["r_inner"]) & (d <= o_spec["r_outer"])
    elif kind == "disk":
        cx, cy = o_spec["center"]
        inside = np.hypot(X - cx, Y - cy) <= o_spec["radius"]
    elif kind == "rectangle":
        (x0, y0), (x1, y1) = o_spec["lo"], o_spec["hi"]
        inside = (X >= x0) & (X <= x1) & (Y >= y0) & (Y <= y1)
    else:
        raise ArgumentError(f"unknown region kind {kind!r}")
    return inside & grid.interior


def _connected_components(mask):
    lab = np.full(mask.shape, -1, np.int32)
    comp = 0
    for i, j in zip(*np.nonzero(mask)):
        if lab[i, j] >= 0:
            continue
        queue = deque([(i, j)])
        lab[i, j] = comp
        while queue:
            a, b = queue.popleft()
            for da, db in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                na, nb = a + da, b + db
                if (0 <= na < mask.shape[0] and 0 <= nb < mask.shape[1]
                        and mask[na, nb] and lab[na, nb] < 0):
                    lab[na, nb] = comp
                    queue.append((na, nb))
        comp += 1
    return lab, comp


def _bfs_path(mask, start, goal):
    prev = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            path = []
            while node is not None:
                path.append(node)
                node = prev[node]
            return path[::-1]
        a, b = node
        for da, db in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            na, nb = a + da, b + db
            if (0 <= na < mask.shape[0] and 0 <= nb < mask.shape[1]
                    and mask[na, nb] and (na, nb) not in prev):
                prev[(na, nb)] = node
                queue.append((na, nb))
    raise GeometryError("no grid path between the sampled points")


def hex_cover_centers(o_spec, r: float):
    """Hexagonal lattice of centers with spacing r/2 covering the region."""
    if o_spec["kind"] == "annulus":
        cx, cy = o_spec["center"]
        extent = o_spec["r_outer"]
        lo = (cx - extent, cy - extent)
        hi = (cx + extent, cy + extent)
    elif o_spec["kind"] == "disk":
        cx, cy = o_spec["center"]
        extent = o_spec["radius"]
        lo = (cx - extent, cy - extent)
        hi = (cx + extent, cy + extent)
    else:
        lo, hi = o_spec["lo"], o_spec["hi"]
    s = r / 2.0
    dy = s * math.sqrt(3.0) / 2.0
    centers = []
    row = 0
    y = lo[1] - s
    while y <= hi[1] + s:
        offset = 0.5 * s if row % 2 else 0.0
        x = lo[0] - s + offset
        while x <= hi[0] + s:
            centers.append((x, y))
            x += s
        y += dy
        row += 1
    return centers, s


def chain_harnack(u: GridFunction, o_spec: dict, r: float, K: float = HARNACK_BOUND,
                  problem: PDEProblem | None = None,
                  residual_tol: float | None = None,
                  n_pairs: int = 10, seed: int = 0,
                  slack_coeff: float = 2.0) -> ChainReport:
    """Cover the region, verify each ball, and propagate K along chains.

    Precondition 6r < min(r0, o_dist) is the caller's responsibility (r0
    needs the coefficient bounds); each covering ball is however verified by
    the per-ball checker on its triple radius.
    """
    g = u.grid
    mask = _o_mask(g, o_spec)
    if not np.any(mask):
        raise ArgumentError("test region contains no interior nodes")
    lab, ncomp = _connected_components(mask)
    if ncomp != 1:
        raise ArgumentError(f"test region is disconnected on the grid ({ncomp} parts)")

    centers_all, lattice = hex_cover_centers(o_spec, r)
    X, Y = g.meshgrid()
    pts = np.stack([X[mask], Y[mask]], axis=1)
    centers = []
    for c in centers_all:
        d = np.hypot(pts[:, 0] - c[0], pts[:, 1] - c[1])
        if np.min(d) <= lattice:
            centers.append(c)
    if not centers:
        raise GeometryError("covering produced no balls")
    centers = np.asarray(centers)
    # verify the cover: every region node within r of some center
    dmat_min = np.full(pts.shape[0], np.inf)
    for c in centers:
        dmat_min = np.minimum(dmat_min, np.hypot(pts[:, 0] - c[0], pts[:, 1] - c[1]))
    if np.max(dmat_min) > r:
        raise GeometryError("ball covering failed to reach every region node")
    m = len(centers)

    per_ball = []
    ball_ok = True
    for c in centers:
        rep = ball_harnack(u, tuple(c), 3.0 * r, slack_coeff=slack_coeff,
                           problem=problem, residual_tol=residual_tol,
                           check_geometry=False)
        per_ball.append(rep)
        ball_ok = ball_ok and rep.passed

    rng = np.random.default_rng(seed)
    nodes = np.argwhere(mask)
    pairs = []
    worst_len = 1
    logK = math.log(K)
    for _ in range(n_pairs):
        ia, ib = rng.integers(0, len(nodes), size=2)
        start = tuple(nodes[ia])
        goal = tuple(nodes[ib])
        path = _bfs_path(mask, start, goal)
        chain_len = _greedy_chain_length(path, centers, r, g)
        worst_len = max(worst_len, chain_len)
        ux = float(u.values[start])
        uy = float(u.values[goal])
        if uy <= 0.0:
            ratio = 1.0 if ux <= 0.0 else math.inf
        else:
            ratio = ux / uy
        log_bound = (2 * chain_len + 1) * logK
        ok = (ratio <= 0) or (math.log(max(ratio, 1e-300)) <= log_bound + 1e-12)
        pairs.append(ChainPair((float(X[start]), float(Y[start])),
                               (float(X[goal]), float(Y[goal])),
                               chain_len, float(ratio), log_bound, bool(ok)))

    sup_o = float(np.max(u.values[mask]))
    inf_o = float(np.min(u.values[mask]))
    observed = math.inf if inf_o <= 0 < sup_o else (sup_o / inf_o if inf_o > 0 else 1.0)
    log10_bound = (2 * m + 1) * math.log10(K)
    global_bound = 10 ** log10_bound if log10_bound < 308 else math.inf
    global_ok = math.log10(max(observed, 1e-300)) <= log10_bound
    passed = bool(ball_ok and global_ok and all(p.passed for p in pairs))
    return ChainReport(m, K, per_ball, bool(ball_ok), pairs, worst_len,
                       log10_bound, global_bound, observed, passed)


def _greedy_chain_length(path, centers, r, grid):
    """Minimal count of covering balls along a grid path (interval greedy)."""
    pos = np.array([grid.node_position(i, j) for i, j in path])
    n = len(pos)
    # ball membership of each path node
    reach = np.zeros(n, np.int64)
    covered_until = 0
    chains = 0
    idx = 0
    while idx < n:
        best = idx
        node = pos[idx]
        d = np.hypot(centers[:, 0] - node[0], centers[:, 1] - node[1])
        candidates = np.nonzero(d <= r)[0]
        if candidates.size == 0:
            raise GeometryError("path node not covered by any ball")
        for c in candidates:
            dd = np.hypot(pos[idx:, 0] - centers[c, 0], pos[idx:, 1] - centers[c, 1])
            inside = dd <= r
            # furthest contiguous prefix covered by this ball
            stop = np.argmin(inside) if not inside.all() else inside.size
            best = max(best, idx + int(stop))
        chains += 1
        if best == idx:
            raise GeometryError("chain construction stalled")
        idx = best
    return max(chains, 1)
