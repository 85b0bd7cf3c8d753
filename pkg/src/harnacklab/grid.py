"""Uniform 2-D grids, masked domains, and the monotone circle stencil.

The discrete operator at an interior node is (max + min - 2u)/rho^2 over an
interpolated circle of radius rho (K equally spaced directions); the gradient
magnitude is (max - min)/(2 rho).  Linear (bilinear) interpolation keeps the
scheme monotone and is what the solver iterates; cubic interpolation is
available for high-accuracy consistency checks of the operator itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, DomainError, StencilError

INTERIOR, BOUNDARY, EXTERIOR = 0, 1, 2


@dataclass
class DomainShape:
    """Rectangle or disk with an exact distance-to-boundary formula."""

    kind: str                  # rectangle | disk
    lo: tuple = (0.0, 0.0)     # rectangle corners
    hi: tuple = (1.0, 1.0)
    center: tuple = (0.0, 0.0)
    radius: float = 1.0

    def distance_to_boundary(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        if self.kind == "rectangle":
            return np.minimum.reduce([x - self.lo[0], self.hi[0] - x,
                                      y - self.lo[1], self.hi[1] - y])
        if self.kind == "disk":
            return self.radius - np.hypot(x - self.center[0], y - self.center[1])
        raise ArgumentError(f"unknown domain kind {self.kind!r}")

    def contains(self, x, y):
        return self.distance_to_boundary(x, y) >= 0


@dataclass
class Grid2D:
    """Uniform grid with an interior/boundary/exterior mask."""

    nx: int
    ny: int
    spacing: float
    origin: tuple
    mask: np.ndarray                  # int8, shape (ny, nx)
    domain: DomainShape | None = None
    _ops: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.spacing <= 0:
            raise ArgumentError("spacing must be positive")
        if self.mask.shape != (self.ny, self.nx):
            raise ArgumentError("mask shape mismatch")
        if not np.any(self.mask == INTERIOR) or not np.any(self.mask == BOUNDARY):
            raise ArgumentError("mask needs at least one interior and one boundary node")

    @property
    def xs(self):
        return self.origin[0] + self.spacing * np.arange(self.nx)

    @property
    def ys(self):
        return self.origin[1] + self.spacing * np.arange(self.ny)

    def meshgrid(self):
        return np.meshgrid(self.xs, self.ys)

    def node_position(self, i, j):
        return (self.origin[0] + self.spacing * j, self.origin[1] + self.spacing * i)

    @property
    def interior(self):
        return self.mask == INTERIOR

    @property
    def boundary(self):
        return self.mask == BOUNDARY

    @property
    def non_exterior(self):
        return self.mask != EXTERIOR

    def distance_field(self):
        if self.domain is None:
            raise ArgumentError("grid has no attached domain shape")
        X, Y = self.meshgrid()
        return self.domain.distance_to_boundary(X, Y)

    def stencil(self, rho: float, K: int = 16, interpolation: str = "linear"):
        key = (round(rho, 15), K, interpolation)
        if key not in self._ops:
            self._ops[key] = StencilOperator(self, rho, K, interpolation)
        return self._ops[key]


def rectangle_grid(lo, hi, n: int, band: int = 3) -> Grid2D:
    """Grid over a rectangle; a band of ``band`` rings carries boundary data."""
    lo = (float(lo[0]), float(lo[1]))
    hi = (float(hi[0]), float(hi[1]))
    if hi[0] <= lo[0] or hi[1] <= lo[1]:
        raise ArgumentError("degenerate rectangle")
    n = int(n)
    spacing = (hi[0] - lo[0]) / (n - 1)
    ny = int(round((hi[1] - lo[1]) / spacing)) + 1
    m = int(band)
    if m < 2:
        raise ArgumentError("boundary band must be >= 2 rings")
    mask = np.full((ny, n), BOUNDARY, np.int8)
    mask[m:-m, m:-m] = INTERIOR
    return Grid2D(n, ny, spacing, lo, mask,
                  DomainShape("rectangle", lo=lo, hi=(lo[0] + spacing * (n - 1),
                                                      lo[1] + spacing * (ny - 1))))


def disk_grid(center, radius: float, n: int, band: int = 3,
              margin_cells: int = 3) -> Grid2D:
    """Grid over a disk's bounding square; cut cells become boundary nodes."""
    if radius <= 0:
        raise ArgumentError("radius must be positive")
    m = int(band)
    if m < 2:
        raise ArgumentError("boundary band must be >= 2 rings")
    cx, cy = float(center[0]), float(center[1])
    half = radius * 1.02
    spacing = 2 * half / (n - 1)
    origin = (cx - half, cy - half)
    xs = origin[0] + spacing * np.arange(n)
    ys = origin[1] + spacing * np.arange(n)
    X, Y = np.meshgrid(xs, ys)
    dist = radius - np.hypot(X - cx, Y - cy)
    band = (m + margin_cells) * spacing
    mask = np.full((n, n), EXTERIOR, np.int8)
    mask[dist >= 0] = BOUNDARY
    mask[dist > band] = INTERIOR
    return Grid2D(n, n, spacing, origin, mask,
                  DomainShape("disk", center=(cx, cy), radius=radius))


@dataclass
class GridFunction:
    """Real values on a grid; exterior entries are kept at zero."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, float)
        if self.values.shape != (self.grid.ny, self.grid.nx):
            raise ArgumentError("values shape mismatch")
        if not np.all(np.isfinite(self.values[self.grid.non_exterior])):
            raise ArgumentError("non-exterior values must be finite")

    @classmethod
    def from_function(cls, grid: Grid2D, fn):
        X, Y = grid.meshgrid()
        vals = np.zeros((grid.ny, grid.nx))
        ne = grid.non_exterior
        vals[ne] = np.asarray(fn(X, Y), float)[ne] if callable(fn) else float(fn)
        return cls(grid, vals)

    @classmethod
    def constant(cls, grid: Grid2D, value: float):
        vals = np.zeros((grid.ny, grid.nx))
        vals[grid.non_exterior] = float(value)
        return cls(grid, vals)

    def copy(self):
        return GridFunction(self.grid, self.values.copy())

    def save(self, path: str):
        g = self.grid
        with open(path, "w") as fh:
            fh.write(f"# nx={g.nx} ny={g.ny} spacing={g.spacing:.9g} "
                     f"origin=({g.origin[0]:.9g},{g.origin[1]:.9g})\n")
            np.savetxt(fh, self.values, fmt="%.9g")

    @classmethod
    def load(cls, path: str, grid: Grid2D):
        vals = np.loadtxt(path)
        return cls(grid, vals)


def _catmull_rom_weights(f: float) -> np.ndarray:
    return np.array([
        -0.5 * f + f * f - 0.5 * f ** 3,
        1.0 - 2.5 * f * f + 1.5 * f ** 3,
        0.5 * f + 2.0 * f * f - 1.5 * f ** 3,
        -0.5 * f * f + 0.5 * f ** 3,
    ])


class StencilOperator:
    """Precomputed circle-sampling machinery for one (grid, rho, K) choice."""

    def __init__(self, grid: Grid2D, rho: float, K: int = 16,
                 interpolation: str = "linear"):
        if rho < 2 * grid.spacing:
            raise ArgumentError("stencil radius must be at least two grid cells")
        if K < 4 or K % 2:
            raise ArgumentError("need an even number of directions, K >= 4")
        if interpolation not in ("linear", "cubic"):
            raise ArgumentError("interpolation must be linear or cubic")
        self.grid = grid
        self.rho = float(rho)
        self.K = int(K)
        self.interpolation = interpolation
        rh = self.rho / grid.spacing
        ang = 2 * np.pi * np.arange(K) / K
        corners = []   # (di, dj, weight) per direction
        for k in range(K):
            dx, dy = rh * math.cos(ang[k]), rh * math.sin(ang[k])
            bx, by = math.floor(dx), math.floor(dy)
            fx, fy = dx - bx, dy - by
            if interpolation == "linear":
                w = [(0, 0, (1 - fx) * (1 - fy)), (0, 1, fx * (1 - fy)),
                     (1, 0, (1 - fx) * fy), (1, 1, fx * fy)]
            else:
                wx = _catmull_rom_weights(fx)
                wy = _catmull_rom_weights(fy)
                w = [(a - 1, b - 1, wy[a] * wx[b])
                     for a in range(4) for b in range(4)]
            corners.append([(by + oy, bx + ox, ww) for oy, ox, ww in w
                            if ww != 0.0])
        self._corners = corners
        self._pad = int(math.ceil(rh)) + 3
        self._validate()

    # -- internals ----------------------------------------------------------
    def _padded(self, values: np.ndarray) -> np.ndarray:
        g = self.grid
        P = np.zeros((g.ny + 2 * self._pad, g.nx + 2 * self._pad))
        inner = P[self._pad:self._pad + g.ny, self._pad:self._pad + g.nx]
        inner[...] = np.where(g.non_exterior, values, 0.0)
        return P

    def _validate(self):
        ok = self._padded(np.ones((self.grid.ny, self.grid.nx)))
        cover = self._direction_values(ok)
        good = np.all(np.abs(cover - 1.0) < 1e-9, axis=0)
        bad = self.grid.interior & ~good
        if np.any(bad):
            i, j = np.argwhere(bad)[0]
            raise StencilError(
                f"stencil at node (i={i}, j={j}) leaves the masked region")

    def _direction_values(self, P: np.ndarray) -> np.ndarray:
        g = self.grid
        p = self._pad
        out = np.empty((self.K, g.ny, g.nx))
        for k, corners in enumerate(self._corners):
            acc = np.zeros((g.ny, g.nx))
            for oy, ox, w in corners:
                acc += w * P[p + oy: p + oy + g.ny, p + ox: p + ox + g.nx]
            out[k] = acc
        return out

    # -- public -------------------------------------------------------------
    def extrema(self, values: np.ndarray):
        """(max, min) over the circle at every node (valid on interior)."""
        vals = self._direction_values(self._padded(values))
        return vals.max(axis=0), vals.min(axis=0)

    def apply(self, values: np.ndarray):
        """(operator, gradient magnitude) fields; valid on interior nodes."""
        mx, mn = self.extrema(values)
        op = (mx + mn - 2.0 * values) / self.rho ** 2
        grad = (mx - mn) / (2.0 * self.rho)
        return op, grad


def stencil_extrema(u: GridFunction, node, rho: float, K: int = 16,
                    interpolation: str = "linear"):
    """(max, min, |Du| approx) of u over the rho-circle at one interior node."""
    i, j = node
    if u.grid.mask[i, j] != INTERIOR:
        raise StencilError(f"node (i={i}, j={j}) is not interior")
    op = u.grid.stencil(rho, K, interpolation)
    mx, mn = op.extrema(u.values)
    return float(mx[i, j]), float(mn[i, j]), float((mx[i, j] - mn[i, j]) / (2 * rho))


def barrier_v(r: float, x):
    """Barrier sqrt(r) - sqrt(|x|) and its exact operator value |x|^(-3/2)/4."""
    x = np.asarray(x, float)
    dist = float(np.linalg.norm(x))
    if dist == 0.0:
        raise DomainError("barrier operator is singular at the origin")
    if dist > r:
        raise DomainError(f"|x| = {dist:.6g} outside the barrier ball radius {r:.6g}")
    return math.sqrt(r) - math.sqrt(dist), 0.25 * dist ** -1.5


def barrier_w(u_center: float, r: float, x_center, z) -> float:
    """Comparison cap u(x) * (sqrt(r) - sqrt(|z - x|)) / sqrt(r)."""
    if r <= 0:
        raise ArgumentError("radius must be positive")
    if u_center < 0:
        raise ArgumentError("center value must be non-negative")
    z = np.asarray(z, float)
    x_center = np.asarray(x_center, float)
    dist = float(np.linalg.norm(z - x_center))
    if dist > r * (1 + 1e-12):
        raise DomainError(f"|z - x| = {dist:.6g} outside radius {r:.6g}")
    return u_center * (math.sqrt(r) - math.sqrt(min(dist, r))) / math.sqrt(r)
