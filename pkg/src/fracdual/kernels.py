"""Jump-kernel families and their exact/quadrature integrals.

Supported families:

* ``fractional-laplacian``: K(y) = c(n, s) |y|^{-n-2s}
* ``comparable-radial``:    K(y) = m(|y|) |y|^{-n-2s} with lam <= m <= Lam
* ``alpha-stable``:         K(y) = a(y/|y|) |y|^{-n-alpha}, alpha = 2s,
                            a given as an even table on the unit circle (2D)

All operations are pure; kernels are translation invariant and even.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainParameterError, SingularityError

FAMILIES = ("fractional-laplacian", "comparable-radial", "alpha-stable")

# Lanczos approximation, g = 7, 9 coefficients (Godfrey/Press et al.).
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def lanczos_gamma(x: float) -> float:
    """Gamma function via the Lanczos approximation (~1e-13 relative on (0, 10])."""
    if x < 0.5:
        # reflection formula
        return math.pi / (math.sin(math.pi * x) * lanczos_gamma(1.0 - x))
    x = x - 1.0
    a = _LANCZOS_COEF[0]
    t = x + _LANCZOS_G + 0.5
    for i in range(1, len(_LANCZOS_COEF)):
        a += _LANCZOS_COEF[i] / (x + i)
    return math.sqrt(2.0 * math.pi) * t ** (x + 0.5) * math.exp(-t) * a


def normalization_constant(n: int, s: float) -> float:
    """Positive normalization c(n, s) of the fractional Laplacian.

    c(n, s) = s (1 - s) 4^s Gamma((n + 2s)/2) / (pi^{n/2} Gamma(2 - s)).
    The commonly printed s(s-1) variant is negative on (0, 1); the positive
    form is used so that the operator satisfies the maximum principle and
    matches the classical 1D value c(1, 1/2) = 1/pi.
    """
    if not (isinstance(n, (int, np.integer)) and 1 <= n <= 3):
        raise DomainParameterError(f"dimension n must be an integer in [1, 3], got {n!r}")
    if not (0.0 < s < 1.0):
        raise DomainParameterError(f"order s must lie in (0, 1), got {s!r}")
    return (
        s * (1.0 - s) * 4.0**s * lanczos_gamma((n + 2.0 * s) / 2.0)
        / (math.pi ** (n / 2.0) * lanczos_gamma(2.0 - s))
    )


def sphere_measure(n: int) -> float:
    """Surface measure of the unit sphere S^{n-1}."""
    return {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}[n]


@dataclass(frozen=True)
class QuadConfig:
    """Quadrature knobs for cell and tail integrals."""

    gauss_order: int = 4          # tensor Gauss points per axis (2D cells)
    subdivision_depth: int = 6    # dyadic refinement near the singular node
    subdivision_factor: float = 2.5   # refine while dist(source, cell) < factor * diam
    angular_nodes: int = 64       # angular quadrature for tails (2D)
    radial_nodes: int = 64        # radial quadrature for comparable-radial tails


DEFAULT_QUAD = QuadConfig()


@dataclass(frozen=True)
class KernelSpec:
    """A symmetric jump kernel comparable to the fractional-Laplacian kernel.

    ``anisotropy`` is an even table a(theta_m) at M uniformly spaced angles
    theta_m = 2 pi m / M (2D alpha-stable family); it is symmetrized at
    construction. ``profile`` is the radial multiplier m(r) of the
    comparable-radial family.
    """

    n: int
    s: float
    family: str
    lam: float
    Lam: float
    profile: Optional[Callable[[np.ndarray], np.ndarray]] = None
    anisotropy: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainParameterError(f"unknown kernel family {self.family!r}")
        if not (0.0 < self.s < 1.0):
            raise DomainParameterError(f"order s must lie in (0, 1), got {self.s!r}")
        if not (isinstance(self.n, (int, np.integer)) and 1 <= self.n <= 3):
            raise DomainParameterError(f"dimension n must be in [1, 3], got {self.n!r}")
        if not (0.0 < self.lam <= self.Lam):
            raise DomainParameterError("ellipticity requires 0 < lam <= Lam")

    @property
    def alpha(self) -> float:
        return 2.0 * self.s

    def multiplier(self, y: np.ndarray) -> np.ndarray:
        """K(y) |y|^{n+2s}, vectorized over points y of shape (..., n)."""
        y = np.asarray(y, dtype=float)
        if self.n == 1 and (y.ndim == 0 or y.shape[-1] != 1):
            y = y.reshape(y.shape + (1,))
        if y.shape[-1] != self.n:
            raise DomainParameterError(
                f"points have dimension {y.shape[-1]}, kernel has n={self.n}")
        if self.family == "fractional-laplacian":
            return np.full(y.shape[:-1], self.lam)
        if self.family == "comparable-radial":
            r = np.linalg.norm(y, axis=-1)
            return np.asarray(self.profile(r), dtype=float)
        # alpha-stable
        if self.n == 1:
            return np.full(y.shape[:-1], float(self.anisotropy[0]))
        theta = np.arctan2(y[..., 1], y[..., 0])
        return _interp_periodic(self.anisotropy, theta)

    def multiplier_direction(self, theta: np.ndarray) -> np.ndarray:
        """Angular part of the multiplier for r-independent families (2D)."""
        theta = np.asarray(theta, dtype=float)
        if self.family == "fractional-laplacian":
            return np.full(theta.shape, self.lam)
        if self.family == "alpha-stable":
            return _interp_periodic(self.anisotropy, theta)
        raise DomainParameterError("comparable-radial multiplier depends on r, not theta")


def _interp_periodic(table: np.ndarray, theta: np.ndarray) -> np.ndarray:
    m = len(table)
    pos = np.mod(theta, 2.0 * math.pi) * m / (2.0 * math.pi)
    i0 = np.floor(pos).astype(int) % m
    t = pos - np.floor(pos)
    i1 = (i0 + 1) % m
    return (1.0 - t) * table[i0] + t * table[i1]


def fractional_laplacian_kernel(n: int, s: float) -> KernelSpec:
    c = normalization_constant(n, s)
    return KernelSpec(n=n, s=s, family="fractional-laplacian", lam=c, Lam=c)


def comparable_radial_kernel(n, s, profile, lam, Lam) -> KernelSpec:
    """Kernel m(|y|)|y|^{-n-2s}; validates lam <= m <= Lam on a log-spaced sample."""
    r = np.logspace(-6, 6, 1000)
    m = np.asarray(profile(r), dtype=float)
    if not np.all(np.isfinite(m)):
        raise DomainParameterError("radial profile is not finite on the sample")
    if np.any(m < lam - 1e-12) or np.any(m > Lam + 1e-12):
        raise DomainParameterError("radial profile leaves the ellipticity band [lam, Lam]")
    return KernelSpec(n=n, s=s, family="comparable-radial", lam=lam, Lam=Lam, profile=profile)


def alpha_stable_kernel(n: int, alpha: float, anisotropy) -> KernelSpec:
    """alpha-stable kernel a(y/|y|)|y|^{-n-alpha} from an angular table.

    The table is symmetrized (a(theta) <- (a(theta) + a(theta + pi)) / 2) so
    the kernel is exactly even; its length must be even in 2D.
    """
    if not (0.0 < alpha < 2.0):
        raise DomainParameterError(f"alpha must lie in (0, 2), got {alpha!r}")
    a = np.atleast_1d(np.asarray(anisotropy, dtype=float)).copy()
    if np.any(a <= 0.0):
        raise DomainParameterError("anisotropy table must be positive")
    if n == 1:
        a = np.full(1, a.mean())
    else:
        if len(a) % 2 != 0:
            raise DomainParameterError("anisotropy table length must be even")
        a = 0.5 * (a + np.roll(a, len(a) // 2))
    return KernelSpec(
        n=n, s=alpha / 2.0, family="alpha-stable",
        lam=float(a.min()), Lam=float(a.max()), anisotropy=a,
    )


def kernel_eval(spec: KernelSpec, y) -> float:
    """K(y) at a single point y != 0."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.shape != (spec.n,):
        raise DomainParameterError(f"point dimension {y.shape} does not match n={spec.n}")
    r = float(np.linalg.norm(y))
    if r == 0.0:
        raise SingularityError("kernel evaluated at the origin")
    return float(spec.multiplier(y)) / r ** (spec.n + 2.0 * spec.s)


_GAUSS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order not in _GAUSS_CACHE:
        x, w = np.polynomial.legendre.leggauss(order)
        _GAUSS_CACHE[order] = (x, w)
    return _GAUSS_CACHE[order]


def _gauss_cell(spec: KernelSpec, lo: np.ndarray, hi: np.ndarray, order: int) -> float:
    """Tensor Gauss quadrature of K over one cell (coordinates relative to source)."""
    x, w = gauss_rule(order)
    axes = [0.5 * (lo[d] + hi[d]) + 0.5 * (hi[d] - lo[d]) * x for d in range(spec.n)]
    wts = [0.5 * (hi[d] - lo[d]) * w for d in range(spec.n)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    wt = wts[0]
    for d in range(1, spec.n):
        wt = np.multiply.outer(wt, wts[d])
    r = np.linalg.norm(pts, axis=-1)
    vals = spec.multiplier(pts) / r ** (spec.n + 2.0 * spec.s)
    return float(np.sum(vals * wt))


def _cell_weight_rec(spec, lo, hi, depth, quad) -> float:
    diam = float(np.linalg.norm(hi - lo))
    dist = float(np.linalg.norm(np.clip(0.0, lo, hi)))
    if depth > 0 and dist < quad.subdivision_factor * diam:
        total = 0.0
        mid = 0.5 * (lo + hi)
        for corner in range(2**spec.n):
            clo = lo.copy()
            chi = hi.copy()
            for d in range(spec.n):
                if (corner >> d) & 1:
                    clo[d] = mid[d]
                else:
                    chi[d] = mid[d]
            total += _cell_weight_rec(spec, clo, chi, depth - 1, quad)
        return total
    return _gauss_cell(spec, lo, hi, quad.gauss_order)


def cell_weight(spec: KernelSpec, source, lo, hi, quad: QuadConfig = DEFAULT_QUAD) -> float:
    """Integral of K(source - y) over the axis-aligned cell [lo, hi].

    1D: exact antiderivative of r^{-1-2s} times the midpoint multiplier.
    2D: tensor Gauss quadrature with dyadic subdivision next to the source.
    """
    source = np.atleast_1d(np.asarray(source, dtype=float))
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    rlo = lo - source
    rhi = hi - source
    if np.all((rlo <= 0.0) & (rhi >= 0.0)):
        raise SingularityError("source lies inside the closed cell")
    if spec.n == 1:
        a, b = float(rlo[0]), float(rhi[0])
        r1, r2 = sorted((abs(a), abs(b)))
        mid = abs(0.5 * (a + b))
        mult = float(spec.multiplier(np.array([mid if a + b >= 0 else -mid])))
        return mult * (r1 ** (-2.0 * spec.s) - r2 ** (-2.0 * spec.s)) / (2.0 * spec.s)
    return _cell_weight_rec(spec, rlo, rhi, quad.subdivision_depth, quad)


def _radial_tail(spec: KernelSpec, a: np.ndarray, theta=None) -> np.ndarray:
    """Integral of multiplier(r, theta) r^{-1-2s} over r in [a, inf), vectorized in a."""
    a = np.asarray(a, dtype=float)
    s2 = 2.0 * spec.s
    base = a ** (-s2) / s2
    if spec.family == "comparable-radial":
        u, w = gauss_rule(DEFAULT_QUAD.radial_nodes)
        uu = 0.5 * (u + 1.0)   # nodes on (0, 1)
        ww = 0.5 * w
        r = a[..., None] * uu ** (-1.0 / s2)
        m = np.asarray(spec.profile(r), dtype=float)
        return base * np.sum(m * ww, axis=-1)
    if spec.family == "fractional-laplacian":
        return base * spec.lam
    # alpha-stable
    if spec.n == 1:
        return base * float(spec.anisotropy[0])
    return base * spec.multiplier_direction(theta)


def tail_mass(spec: KernelSpec, R: float, quad: QuadConfig = DEFAULT_QUAD) -> float:
    """Integral of K over {|y| >= R}."""
    if R <= 0.0:
        raise DomainParameterError(f"tail radius must be positive, got {R!r}")
    if spec.n == 1:
        out = _radial_tail(spec, np.array([R, R]), theta=None)
        return float(np.sum(out))
    if spec.n == 2:
        m = quad.angular_nodes
        theta = 2.0 * math.pi * (np.arange(m) + 0.5) / m
        vals = _radial_tail(spec, np.full(m, R), theta=theta)
        return float(np.sum(vals) * 2.0 * math.pi / m)
    # n = 3: isotropic families only
    if spec.family == "alpha-stable":
        raise DomainParameterError("anisotropic tails unsupported for n = 3")
    return float(sphere_measure(3) * _radial_tail(spec, np.array(R)))


def box_exterior_mass(spec: KernelSpec, x, box_lo, box_hi,
                      quad: QuadConfig = DEFAULT_QUAD) -> float:
    """Integral of K(x - y) over the complement of the box [box_lo, box_hi].

    Polar decomposition around x: the box is star-shaped with respect to any
    interior point, so the mass is the angular integral of the radial tail
    beyond the distance rho(theta) to the box boundary.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    box_lo = np.atleast_1d(np.asarray(box_lo, dtype=float))
    box_hi = np.atleast_1d(np.asarray(box_hi, dtype=float))
    if np.any(x <= box_lo) or np.any(x >= box_hi):
        raise DomainParameterError("point must lie strictly inside the box")
    if spec.n == 1:
        dists = np.array([box_hi[0] - x[0], x[0] - box_lo[0]])
        return float(np.sum(_radial_tail(spec, dists)))
    if spec.n != 2:
        raise DomainParameterError("box tails implemented for n in {1, 2}")
    m = quad.angular_nodes
    theta = 2.0 * math.pi * (np.arange(m) + 0.5) / m
    rho = _box_ray_distance(x, box_lo, box_hi, theta)
    vals = _radial_tail(spec, rho, theta=theta)
    return float(np.sum(vals) * 2.0 * math.pi / m)


def _box_ray_distance(x, box_lo, box_hi, theta):
    """Distance from x to the box boundary along each direction theta (2D)."""
    d = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    t = np.full(theta.shape, np.inf)
    for ax in range(2):
        pos = d[..., ax] > 0
        neg = d[..., ax] < 0
        t = np.where(pos, np.minimum(t, (box_hi[ax] - x[ax]) / d[..., ax]), t)
        t = np.where(neg, np.minimum(t, (box_lo[ax] - x[ax]) / d[..., ax]), t)
    return t
