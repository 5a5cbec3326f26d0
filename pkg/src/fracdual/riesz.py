"""Full-space Riesz potential convolution for alpha-stable potential kernels."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.signal import fftconvolve

from .analysis import holder_seminorm, lq_norm
from .domain import Grid
from .errors import (
    BoundViolationError,
    DivergentPotentialError,
    DomainParameterError,
    HypothesisViolationError,
)
from .gridfn import GridFunction
from .kernels import _interp_periodic, lanczos_gamma


def riesz_normalization(n: int, alpha: float) -> float:
    """Constant c with c |y|^{alpha-n} the inverse kernel of (-Delta)^{alpha/2}."""
    return lanczos_gamma((n - alpha) / 2.0) / (
        2.0**alpha * math.pi ** (n / 2.0) * lanczos_gamma(alpha / 2.0)
    )


@dataclass(frozen=True)
class PotentialKernel:
    """K(y) = m(y/|y|) |y|^{alpha - n} with an even angular multiplier.

    ``c1``/``c2`` are the declared comparability constants
    c1 |y|^{alpha-n} <= K(y) <= c2 |y|^{alpha-n}."""

    n: int
    alpha: float
    multiplier: np.ndarray      # angular table (length 1 = isotropic)
    c1: float
    c2: float

    def __post_init__(self):
        if not (0.0 < self.alpha < 2.0):
            raise DomainParameterError(f"alpha must lie in (0, 2), got {self.alpha}")
        if self.alpha >= self.n:
            raise DivergentPotentialError(
                f"potential requires alpha < n, got alpha={self.alpha}, n={self.n}")
        m = np.atleast_1d(np.asarray(self.multiplier, dtype=float))
        if self.n >= 2 and len(m) > 1:
            if len(m) % 2 != 0:
                raise DomainParameterError("angular table length must be even")
            m = 0.5 * (m + np.roll(m, len(m) // 2))
        object.__setattr__(self, "multiplier", m)
        if not (0.0 < self.c1 <= self.c2):
            raise DomainParameterError("comparability requires 0 < c1 <= c2")

    def angular(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if len(self.multiplier) == 1:
            return np.full(theta.shape, float(self.multiplier[0]))
        return _interp_periodic(self.multiplier, theta)

    def eval(self, y: np.ndarray) -> np.ndarray:
        """K at points y of shape (..., n), vectorized; infinite at 0."""
        y = np.asarray(y, dtype=float)
        r = np.linalg.norm(y, axis=-1)
        if self.n == 1:
            mult = np.full(r.shape, float(self.multiplier[0]))
        else:
            mult = self.angular(np.arctan2(y[..., 1], y[..., 0]))
        with np.errstate(divide="ignore"):
            return mult * r ** (self.alpha - self.n)


def isotropic_potential(n: int, alpha: float, constant: Optional[float] = None) -> PotentialKernel:
    """Isotropic potential kernel; defaults to the Riesz normalization."""
    c = riesz_normalization(n, alpha) if constant is None else float(constant)
    return PotentialKernel(n=n, alpha=alpha, multiplier=np.array([c]), c1=c, c2=c)


def anisotropic_potential(n: int, alpha: float, table) -> PotentialKernel:
    t = np.asarray(table, dtype=float)
    return PotentialKernel(n=n, alpha=alpha, multiplier=t,
                           c1=float(t.min()), c2=float(t.max()))


def _self_cell_integral(kernel: PotentialKernel, h: float, angular_nodes: int = 256) -> float:
    """Exact-to-quadrature integral of K over the cell centered at the origin."""
    a = kernel.alpha
    if kernel.n == 1:
        return 2.0 * float(kernel.multiplier[0]) * (0.5 * h) ** a / a
    m = angular_nodes
    theta = 2.0 * math.pi * (np.arange(m) + 0.5) / m
    rho = 0.5 * h / np.maximum(np.abs(np.cos(theta)), np.abs(np.sin(theta)))
    vals = kernel.angular(theta) * rho**a / a
    return float(np.sum(vals) * 2.0 * math.pi / m)


def _offset_kernel_table(kernel: PotentialKernel, grid: Grid) -> np.ndarray:
    axes = [np.arange(-(c - 1), c, dtype=float) * grid.h for c in grid.counts]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    k = kernel.eval(mesh)
    k[tuple(c - 1 for c in grid.counts)] = 0.0
    return k


def trusted_region(grid: Grid, margin_fraction: float = 0.1) -> np.ndarray:
    """Nodes farther than margin_fraction of the box extent from its boundary."""
    nodes = grid.nodes()
    ok = np.ones(grid.shape, dtype=bool)
    for d in range(grid.n):
        margin = margin_fraction * (grid.hi[d] - grid.lo[d])
        x = nodes[..., d]
        ok &= (x > grid.lo[d] + margin) & (x < grid.hi[d] - margin)
    return ok


def riesz_convolve(f: GridFunction, kernel: PotentialKernel,
                   margin_fraction: float = 0.1):
    """I f(x_i) = h^n sum_j f_j K(x_i - x_j), singular cell handled exactly.

    The convolution is truncated to the grid box; ``f`` must vanish on the
    margin band (outer ``margin_fraction`` of the box) because the kernel
    decays only polynomially, and outputs inside the band are untrusted.
    Returns (I f as a GridFunction, trusted boolean array)."""
    grid = f.grid
    if kernel.n != grid.n:
        raise DomainParameterError("kernel and grid dimension mismatch")
    trusted = trusted_region(grid, margin_fraction)
    peak = float(np.max(np.abs(f.values))) if f.values.size else 0.0
    band = np.abs(f.values[~trusted])
    if band.size and peak > 0.0 and float(band.max()) > 1e-12 * peak:
        raise DomainParameterError(
            "f must be supported away from the box boundary "
            f"(outer {margin_fraction:.0%} margin)")
    fv = np.where(trusted, f.values, 0.0)
    table = _offset_kernel_table(kernel, grid)
    out = grid.cell_volume * fftconvolve(fv, table, mode="same")
    out += fv * _self_cell_integral(kernel, grid.h)
    return GridFunction(grid, out, zero_exterior=False), trusted


def kernel_bounds_check(kernel: PotentialKernel, samples: int = 10_000,
                        seed: int = 0, tol: float = 1e-9):
    """Measured min/max of K(y)|y|^{n - alpha} over sampled y; asserts the
    declared comparability band [c1, c2]."""
    if samples < 1000:
        raise DomainParameterError("bounds check needs at least 10^3 samples")
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(samples, kernel.n))
    dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
    radii = 10.0 ** rng.uniform(-3, 3, size=(samples, 1))
    y = dirs * radii
    vals = kernel.eval(y) * np.linalg.norm(y, axis=-1) ** (kernel.n - kernel.alpha)
    lo, hi = float(vals.min()), float(vals.max())
    if lo < kernel.c1 - tol or hi > kernel.c2 + tol:
        k = int(np.argmin(vals)) if lo < kernel.c1 - tol else int(np.argmax(vals))
        raise BoundViolationError(
            f"measured bounds [{lo}, {hi}] leave [{kernel.c1}, {kernel.c2}]",
            witness=y[k])
    return lo, hi


def holder_mapping_check(f: GridFunction, p: float, kernel: PotentialKernel,
                         mask, region=None) -> float:
    """Ratio [I f]_{C^gamma} / ||f||_{L^p} with gamma = alpha - n/p.

    Refuses when the mapping theorem's hypothesis p > n/alpha fails."""
    n = kernel.n
    if p <= n / kernel.alpha:
        raise HypothesisViolationError(
            f"Riesz-Holder mapping requires p > n/alpha = {n / kernel.alpha}, got p={p}")
    gamma = kernel.alpha - n / p
    pot, trusted = riesz_convolve(f, kernel)
    sel = trusted[mask.interior]
    if region is not None:
        sel = sel & np.asarray(region, dtype=bool)
    num = holder_seminorm(pot, min(gamma, 1.0), mask, region=sel)
    den = lq_norm(f, p, mask)
    return float(num / den)
