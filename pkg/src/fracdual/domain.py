"""Uniform grids, domain shapes, interior masks, and uniform ball-condition checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DegenerateDomainError, DomainParameterError


# ---------------------------------------------------------------------------
# Grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid of cell-centered nodes on a bounding box."""

    lo: np.ndarray
    h: float
    counts: tuple

    def __post_init__(self):
        object.__setattr__(self, "lo", np.atleast_1d(np.asarray(self.lo, dtype=float)))
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if self.h <= 0:
            raise DomainParameterError("grid spacing must be positive")
        if len(self.counts) != len(self.lo):
            raise DomainParameterError("counts and box dimension mismatch")

    @property
    def n(self) -> int:
        return len(self.counts)

    @property
    def hi(self) -> np.ndarray:
        return self.lo + self.h * np.asarray(self.counts, dtype=float)

    @property
    def shape(self) -> tuple:
        return self.counts

    def axis_nodes(self, d: int) -> np.ndarray:
        return self.lo[d] + self.h * (np.arange(self.counts[d]) + 0.5)

    def nodes(self) -> np.ndarray:
        """All node coordinates, shape counts + (n,)."""
        axes = [self.axis_nodes(d) for d in range(self.n)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    @property
    def cell_volume(self) -> float:
        return self.h**self.n


def grid_for_shape(shape: "DomainShape", n_across: int, pad: float = 0.5) -> Grid:
    """Grid whose box is the shape's bounding box inflated by ``pad`` diameters
    per side, with spacing set by ``n_across`` cells across the widest extent."""
    blo, bhi = shape.bounding_box()
    extent = bhi - blo
    diam = float(extent.max())
    h = diam / n_across
    pad_cells = max(1, math.ceil(pad * diam / h))
    counts = []
    lo = np.empty_like(blo)
    for d in range(len(blo)):
        inner = math.ceil(extent[d] / h - 1e-12)
        c = inner + 2 * pad_cells
        center = 0.5 * (blo[d] + bhi[d])
        lo[d] = center - 0.5 * c * h
        counts.append(c)
    return Grid(lo=lo, h=h, counts=tuple(counts))


# ---------------------------------------------------------------------------
# Shapes
# ---------------------------------------------------------------------------

class DomainShape:
    """Bounded open domain with an indicator and boundary projection."""

    dim: int

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """Strict interior indicator, vectorized over points (..., dim)."""
        raise NotImplementedError

    def nearest_boundary(self, pts: np.ndarray) -> np.ndarray:
        """Nearest boundary point for each query point, shape (..., dim)."""
        raise NotImplementedError

    def boundary_distance(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        z = self.nearest_boundary(pts)
        return np.linalg.norm(pts - z, axis=-1)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError


@dataclass(frozen=True)
class Ball(DomainShape):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.atleast_1d(np.asarray(self.center, dtype=float)))
        if self.radius <= 0:
            raise DomainParameterError("ball radius must be positive")

    @property
    def dim(self):
        return len(self.center)

    def contains(self, pts):
        pts = np.asarray(pts, dtype=float)
        return np.linalg.norm(pts - self.center, axis=-1) < self.radius

    def nearest_boundary(self, pts):
        pts = np.asarray(pts, dtype=float)
        d = pts - self.center
        r = np.linalg.norm(d, axis=-1, keepdims=True)
        unit = np.where(r > 0, d / np.where(r > 0, r, 1.0), _e1(self.dim))
        return self.center + self.radius * unit

    def boundary_distance(self, pts):
        pts = np.asarray(pts, dtype=float)
        return np.abs(np.linalg.norm(pts - self.center, axis=-1) - self.radius)

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius


def _e1(dim):
    e = np.zeros(dim)
    e[0] = 1.0
    return e


@dataclass(frozen=True)
class Box(DomainShape):
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.atleast_1d(np.asarray(self.lo, dtype=float)))
        object.__setattr__(self, "hi", np.atleast_1d(np.asarray(self.hi, dtype=float)))
        if np.any(self.hi <= self.lo):
            raise DomainParameterError("box must have positive extent")

    @property
    def dim(self):
        return len(self.lo)

    def contains(self, pts):
        pts = np.asarray(pts, dtype=float)
        return np.all((pts > self.lo) & (pts < self.hi), axis=-1)

    def nearest_boundary(self, pts):
        pts = np.asarray(pts, dtype=float)
        clipped = np.clip(pts, self.lo, self.hi)
        outside = np.any((pts <= self.lo) | (pts >= self.hi), axis=-1)
        # interior points: push the coordinate closest to a face onto it
        gap_lo = pts - self.lo
        gap_hi = self.hi - pts
        gaps = np.concatenate([gap_lo, gap_hi], axis=-1)
        k = np.argmin(gaps, axis=-1)
        d = k % self.dim
        val = np.where(k < self.dim, self.lo[d], self.hi[d])
        proj = pts.copy()
        np.put_along_axis(proj, d[..., None], val[..., None], axis=-1)
        return np.where(outside[..., None], clipped, proj)

    def bounding_box(self):
        return self.lo.copy(), self.hi.copy()


@dataclass(frozen=True)
class Annulus(DomainShape):
    center: np.ndarray
    r_in: float
    r_out: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.atleast_1d(np.asarray(self.center, dtype=float)))
        if not (0 < self.r_in < self.r_out):
            raise DomainParameterError("annulus requires 0 < r_in < r_out")

    @property
    def dim(self):
        return len(self.center)

    def contains(self, pts):
        pts = np.asarray(pts, dtype=float)
        r = np.linalg.norm(pts - self.center, axis=-1)
        return (r > self.r_in) & (r < self.r_out)

    def nearest_boundary(self, pts):
        pts = np.asarray(pts, dtype=float)
        d = pts - self.center
        r = np.linalg.norm(d, axis=-1, keepdims=True)
        unit = np.where(r > 0, d / np.where(r > 0, r, 1.0), _e1(self.dim))
        to_outer = np.abs(r - self.r_out)
        to_inner = np.abs(r - self.r_in)
        radius = np.where(to_inner < to_outer, self.r_in, self.r_out)
        return self.center + radius * unit

    def boundary_distance(self, pts):
        pts = np.asarray(pts, dtype=float)
        r = np.linalg.norm(pts - self.center, axis=-1)
        return np.minimum(np.abs(r - self.r_in), np.abs(r - self.r_out))

    def bounding_box(self):
        return self.center - self.r_out, self.center + self.r_out


@dataclass(frozen=True)
class LShape(DomainShape):
    """2D box with the closed upper-right quadrant (from the midpoint) removed."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float))
        if len(self.lo) != 2:
            raise DomainParameterError("LShape is 2D only")
        if np.any(self.hi <= self.lo):
            raise DomainParameterError("box must have positive extent")

    @property
    def dim(self):
        return 2

    @property
    def corner(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def contains(self, pts):
        pts = np.asarray(pts, dtype=float)
        c = self.corner
        in_box = np.all((pts > self.lo) & (pts < self.hi), axis=-1)
        in_cut = (pts[..., 0] >= c[0]) & (pts[..., 1] >= c[1])
        return in_box & ~in_cut

    def _segments(self):
        a0, a1 = self.lo
        b0, b1 = self.hi
        c0, c1 = self.corner
        return np.array([
            [[a0, a1], [b0, a1]],   # bottom
            [[a0, a1], [a0, b1]],   # left
            [[b0, a1], [b0, c1]],   # right, below the cut
            [[a0, b1], [c0, b1]],   # top, left of the cut
            [[c0, c1], [c0, b1]],   # reentrant vertical edge
            [[c0, c1], [b0, c1]],   # reentrant horizontal edge
        ])

    def nearest_boundary(self, pts):
        pts = np.asarray(pts, dtype=float)
        segs = self._segments()
        p = pts[..., None, :]                       # (..., 1, 2)
        a = segs[:, 0]                              # (S, 2)
        b = segs[:, 1]
        ab = b - a
        t = np.sum((p - a) * ab, axis=-1) / np.sum(ab * ab, axis=-1)
        t = np.clip(t, 0.0, 1.0)
        proj = a + t[..., None] * ab                # (..., S, 2)
        d2 = np.sum((proj - p) ** 2, axis=-1)
        k = np.argmin(d2, axis=-1)
        return np.take_along_axis(proj, k[..., None, None], axis=-2)[..., 0, :]

    def bounding_box(self):
        return self.lo.copy(), self.hi.copy()


@dataclass(frozen=True)
class Predicate(DomainShape):
    """User-supplied vectorized indicator on a declared bounding box."""

    indicator: Callable[[np.ndarray], np.ndarray]
    box_lo: np.ndarray
    box_hi: np.ndarray
    directions: int = 32

    def __post_init__(self):
        object.__setattr__(self, "box_lo", np.atleast_1d(np.asarray(self.box_lo, dtype=float)))
        object.__setattr__(self, "box_hi", np.atleast_1d(np.asarray(self.box_hi, dtype=float)))

    @property
    def dim(self):
        return len(self.box_lo)

    def contains(self, pts):
        return np.asarray(self.indicator(np.asarray(pts, dtype=float)), dtype=bool)

    def nearest_boundary(self, pts):
        pts = np.asarray(pts, dtype=float)
        flat = pts.reshape(-1, self.dim)
        out = np.array([self._nearest_one(p) for p in flat])
        return out.reshape(pts.shape)

    def _nearest_one(self, p):
        diam = float(np.linalg.norm(self.box_hi - self.box_lo))
        k = self.directions
        if self.dim == 1:
            dirs = np.array([[1.0], [-1.0]])
        else:
            ang = 2.0 * math.pi * np.arange(k) / k
            dirs = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        inside0 = bool(self.contains(p))
        ts = np.linspace(0.0, diam, 48)[1:]
        pts = p[None, None, :] + ts[None, :, None] * dirs[:, None, :]
        ins = self.contains(pts.reshape(-1, self.dim)).reshape(len(dirs), len(ts))
        best = None
        for i in range(len(dirs)):
            flips = np.nonzero(ins[i] != inside0)[0]
            if len(flips) == 0:
                continue
            t_lo = ts[flips[0]] - (ts[1] - ts[0])
            t_hi = ts[flips[0]]
            for _ in range(40):
                t_mid = 0.5 * (t_lo + t_hi)
                if bool(self.contains(p + t_mid * dirs[i])) == inside0:
                    t_lo = t_mid
                else:
                    t_hi = t_mid
            t_cross = 0.5 * (t_lo + t_hi)
            if best is None or t_cross < best[0]:
                best = (t_cross, p + t_cross * dirs[i])
        if best is None:
            return p.copy()
        return best[1]

    def bounding_box(self):
        return self.box_lo.copy(), self.box_hi.copy()


# ---------------------------------------------------------------------------
# Mask
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DomainMask:
    grid: Grid
    shape: DomainShape
    interior: np.ndarray            # boolean array over the grid
    boundary_distance: np.ndarray   # unsigned distance estimate per node
    indices: np.ndarray = field(default=None)  # flat indices of interior nodes

    @property
    def n_interior(self) -> int:
        return int(np.count_nonzero(self.interior))

    def interior_nodes(self) -> np.ndarray:
        """Coordinates of interior nodes, shape (n_interior, n)."""
        return self.grid.nodes()[self.interior]


def build_mask(grid: Grid, shape: DomainShape) -> DomainMask:
    """Mask the grid nodes whose cell centers lie strictly inside the shape.

    Nodes exactly on the boundary count as exterior (zero Dirichlet data)."""
    nodes = grid.nodes()
    inside = shape.contains(nodes)
    if not np.any(inside):
        raise DegenerateDomainError("no grid node falls inside the domain")
    dist = shape.boundary_distance(nodes)
    flat = np.flatnonzero(inside.ravel())
    return DomainMask(grid=grid, shape=shape, interior=inside,
                      boundary_distance=dist, indices=flat)


# ---------------------------------------------------------------------------
# Uniform ball conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BallCheckResult:
    passed: bool
    witness: Optional[np.ndarray]
    tested: int

    def __bool__(self):
        return self.passed


def _collect_near_boundary(shape, s_omega, samples, want_inside, rng, max_batches=400):
    blo, bhi = shape.bounding_box()
    blo = blo - 2.0 * s_omega
    bhi = bhi + 2.0 * s_omega
    dim = shape.dim
    got_x, got_z = [], []
    count = 0
    for _ in range(max_batches):
        cand = rng.uniform(blo, bhi, size=(4 * samples, dim))
        inside = shape.contains(cand)
        cand = cand[inside] if want_inside else cand[~inside]
        if len(cand) == 0:
            continue
        z = shape.nearest_boundary(cand)
        d = np.linalg.norm(cand - z, axis=-1)
        keep = (d > 1e-12) & (d < s_omega)
        cand, z = cand[keep], z[keep]
        take = min(len(cand), samples - count)
        got_x.append(cand[:take])
        got_z.append(z[:take])
        count += take
        if count >= samples:
            break
    if count == 0:
        return np.empty((0, dim)), np.empty((0, dim))
    return np.concatenate(got_x), np.concatenate(got_z)


def _ball_probe_points(centers, radius, probes, rng):
    m, dim = centers.shape
    dirs = rng.normal(size=(m, probes, dim))
    dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
    radii = radius * rng.uniform(size=(m, probes, 1)) ** (1.0 / dim)
    return centers[:, None, :] + radii * dirs


def _ball_check(shape, s_omega, samples, probes, seed, interior_side):
    if samples < 100:
        raise DomainParameterError("ball checks need at least 100 samples")
    rng = np.random.default_rng(seed)
    xs, zs = _collect_near_boundary(shape, s_omega, samples, interior_side, rng)
    if len(xs) == 0:
        # no near-boundary points found: vacuous pass
        return BallCheckResult(passed=True, witness=None, tested=0)
    dirs = xs - zs
    norms = np.linalg.norm(dirs, axis=-1, keepdims=True)
    centers = zs + s_omega * dirs / norms
    chunk = 128
    for i0 in range(0, len(xs), chunk):
        c = centers[i0:i0 + chunk]
        pts = _ball_probe_points(c, s_omega, probes, rng)
        ins = shape.contains(pts.reshape(-1, shape.dim)).reshape(len(c), probes)
        bad = ins.any(axis=-1) if interior_side is False else (~ins).any(axis=-1)
        if bad.any():
            j = int(np.argmax(bad))
            return BallCheckResult(passed=False, witness=xs[i0 + j], tested=len(xs))
    return BallCheckResult(passed=True, witness=None, tested=len(xs))


def exterior_ball_check(shape: DomainShape, s_omega: float, samples: int = 10_000,
                        probes: int = 1_000, seed: int = 0) -> BallCheckResult:
    """Monte Carlo test of the uniform exterior ball condition.

    Exterior points x with dist(x, boundary) < s_omega are sampled; for each,
    the ball of radius s_omega tangent at the nearest boundary point on the
    exterior side must avoid the domain."""
    return _ball_check(shape, s_omega, samples, probes, seed, interior_side=False)


def interior_ball_check(shape: DomainShape, s_omega: float, samples: int = 10_000,
                        probes: int = 1_000, seed: int = 0) -> BallCheckResult:
    """Mirror image of :func:`exterior_ball_check` with the domain in place of
    its complement."""
    return _ball_check(shape, s_omega, samples, probes, seed, interior_side=True)
