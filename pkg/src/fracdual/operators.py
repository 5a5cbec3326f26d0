"""Assembly and application of the discrete nonlocal operator.

The operator is stored as a translation-invariant offset weight table w(k)
(one nonnegative weight per integer offset inside the bounding box), a
per-node exterior tail T_i (kernel mass beyond the box), and the induced
diagonal d_i = sum_{j != i} w(j - i) + T_i.  The induced matrix over interior
nodes (d_i on the diagonal, -w(j - i) off it) is a symmetric M-matrix.

The principal-value self-cell (offset 0) is omitted: the odd part of the
integrand cancels over the symmetric cell and the even remainder is a local
O(h^{2-2s}) consistency term measured by the convergence suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import irfftn, next_fast_len, rfftn
from scipy.signal import convolve as _direct_convolve

from . import kernels
from .domain import DomainMask, Grid
from .errors import AssemblyError, DimensionError
from .gridfn import GridFunction
from .kernels import DEFAULT_QUAD, KernelSpec, QuadConfig


class _ConvEngine:
    """FFT convolution with a cached kernel transform ('same' indexing).

    The offset table is even, so convolution and correlation coincide and the
    induced operator is symmetric up to floating-point roundoff.
    """

    def __init__(self, weights: np.ndarray, grid_shape: tuple):
        self.grid_shape = grid_shape
        self.wshape = weights.shape
        full = [g + w - 1 for g, w in zip(grid_shape, self.wshape)]
        self.fshape = tuple(next_fast_len(f) for f in full)
        self.kf = rfftn(weights, self.fshape)
        self.out_slice = tuple(
            slice((w - 1) // 2, (w - 1) // 2 + g)
            for g, w in zip(grid_shape, self.wshape)
        )
        self._weights = weights

    def conv(self, u: np.ndarray, method: str = "fft") -> np.ndarray:
        if method == "direct":
            return _direct_convolve(u, self._weights, mode="same", method="direct")
        uf = rfftn(u, self.fshape)
        out = irfftn(uf * self.kf, self.fshape)
        return out[self.out_slice]


@dataclass
class DiscreteOperator:
    spec: KernelSpec
    grid: Grid
    mask: DomainMask
    quad: QuadConfig
    weights: np.ndarray            # offset table, center entry = 0
    tail: np.ndarray               # T_i per interior node
    diag: np.ndarray               # d_i per interior node
    _engine: _ConvEngine = field(default=None, repr=False)

    def __post_init__(self):
        if self._engine is None:
            self._engine = _ConvEngine(self.weights, self.grid.shape)

    @property
    def n_interior(self) -> int:
        return self.mask.n_interior

    # -- core linear algebra -------------------------------------------------

    def conv_full(self, u_full: np.ndarray, method: str = "fft") -> np.ndarray:
        """sum_j w(j - i) u_j over the whole grid, for each grid node i."""
        return self._engine.conv(u_full, method=method)

    def matvec(self, x: np.ndarray, method: str = "fft") -> np.ndarray:
        """A x over interior nodes: (Ax)_i = d_i x_i - sum_j w(j-i) x_j."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_interior,):
            raise DimensionError(
                f"expected interior vector of length {self.n_interior}, got {x.shape}")
        u = np.zeros(self.grid.shape)
        u[self.mask.interior] = x
        c = self.conv_full(u, method=method)
        return self.diag * x - c[self.mask.interior]

    def apply(self, u: GridFunction, method: str = "fft") -> GridFunction:
        """Operator applied to a zero-exterior grid function."""
        if u.grid.shape != self.grid.shape:
            raise DimensionError("grid function does not match operator grid")
        out = np.zeros(self.grid.shape)
        out[self.mask.interior] = self.matvec(u.values[self.mask.interior], method=method)
        return GridFunction(self.grid, out)

    def interior_offdiag_rowsums(self) -> np.ndarray:
        """sum_{interior j != i} w(j - i), per interior node."""
        ind = np.zeros(self.grid.shape)
        ind[self.mask.interior] = 1.0
        return self.conv_full(ind)[self.mask.interior]

    def dominance_surplus(self) -> np.ndarray:
        """d_i minus the interior off-diagonal row sum (strictly positive)."""
        return self.diag - self.interior_offdiag_rowsums()

    def exterior_rhs(self, phi_full: np.ndarray, tail_value: float = 0.0) -> np.ndarray:
        """Right-hand side moving exterior data to the interior equations:
        b_i = sum_{exterior j} w(j - i) phi_j + T_i * tail_value."""
        phi = np.asarray(phi_full, dtype=float).copy()
        phi[self.mask.interior] = 0.0
        return self.conv_full(phi)[self.mask.interior] + self.tail * tail_value

    def dense_matrix(self, limit: int = 4000) -> np.ndarray:
        """Explicit interior matrix (tests and the direct-solver fallback)."""
        m = self.n_interior
        if m > limit:
            raise DimensionError(f"dense matrix requested for {m} > {limit} unknowns")
        idx = np.argwhere(self.mask.interior)        # (m, n)
        center = (np.asarray(self.weights.shape) - 1) // 2
        off = idx[None, :, :] - idx[:, None, :] + center
        if self.grid.n == 1:
            a = -self.weights[off[..., 0]]
        else:
            a = -self.weights[off[..., 0], off[..., 1]]
        np.fill_diagonal(a, self.diag)
        return a


def _offset_cells_needing_subdivision(quad: QuadConfig) -> float:
    # recursion triggers while dist < factor * diam; in grid units the cell
    # diameter is sqrt(n), so offsets with corner distance below this need it
    return quad.subdivision_factor


def _bulk_weights_1d(spec: KernelSpec, h: float, kmax: int) -> np.ndarray:
    k = np.arange(1, kmax + 1, dtype=float)
    r1 = (k - 0.5) * h
    r2 = (k + 0.5) * h
    mid = (k * h)[:, None]
    mult = spec.multiplier(mid)
    s2 = 2.0 * spec.s
    pos = mult * (r1 ** (-s2) - r2 ** (-s2)) / s2
    w = np.concatenate([pos[::-1], [0.0], pos])
    return w


def _bulk_weights_2d(spec: KernelSpec, h: float, kmax: tuple, quad: QuadConfig) -> np.ndarray:
    """Offset weight table via vectorized tensor Gauss quadrature; offsets near
    the origin are recomputed with dyadic subdivision."""
    kx = np.arange(-kmax[0], kmax[0] + 1)
    ky = np.arange(-kmax[1], kmax[1] + 1)
    q = quad.gauss_order
    xi, wq = kernels.gauss_rule(q)
    gx = (kx[:, None] * h + 0.5 * h * xi[None, :]).ravel()     # (Kx*q,)
    gy = (ky[:, None] * h + 0.5 * h * xi[None, :]).ravel()
    r2 = gx[:, None] ** 2 + gy[None, :] ** 2
    expo = 0.5 * (2.0 + 2.0 * spec.s)
    if spec.family == "fractional-laplacian":
        mult = spec.lam
    elif spec.family == "alpha-stable":
        mult = spec.multiplier_direction(np.arctan2(gy[None, :], gx[:, None]))
    else:
        mult = np.asarray(spec.profile(np.sqrt(r2)), dtype=float)
    with np.errstate(divide="ignore"):
        vals = mult / r2**expo
    vals = vals.reshape(len(kx), q, len(ky), q)
    wh = 0.5 * h * wq
    w = np.einsum("aibj,i,j->ab", vals, wh, wh)
    # recompute offsets close to the singularity with the adaptive rule
    thresh = quad.subdivision_factor * math.sqrt(2.0)
    for ix, kxv in enumerate(kx):
        dx = max(abs(kxv) - 0.5, 0.0)
        if dx > thresh:
            continue
        for iy, kyv in enumerate(ky):
            if kxv == 0 and kyv == 0:
                w[ix, iy] = 0.0
                continue
            dy = max(abs(kyv) - 0.5, 0.0)
            if math.hypot(dx, dy) >= thresh:
                continue
            lo = np.array([(kxv - 0.5) * h, (kyv - 0.5) * h])
            hi = np.array([(kxv + 0.5) * h, (kyv + 0.5) * h])
            w[ix, iy] = kernels.cell_weight(spec, np.zeros(2), lo, hi, quad)
    w[kmax[0], kmax[1]] = 0.0
    return w


def _box_ray(pts: np.ndarray, lo, hi, theta: np.ndarray) -> np.ndarray:
    """Ray distance from interior points to the box boundary; ``pts`` is
    (m, 2), ``theta`` broadcastable against (m, ...)."""
    c, s = np.cos(theta), np.sin(theta)
    t = np.full(np.broadcast_shapes(pts.shape[:1] + theta.shape[1:], theta.shape),
                np.inf)
    for ax, d in ((0, c), (1, s)):
        gap_hi = (hi[ax] - pts[:, ax]).reshape((-1,) + (1,) * (theta.ndim - 1))
        gap_lo = (lo[ax] - pts[:, ax]).reshape((-1,) + (1,) * (theta.ndim - 1))
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = np.where(d > 0, gap_hi / d, np.where(d < 0, gap_lo / d, np.inf))
        t = np.minimum(t, cand)
    return t


def _node_tails(spec: KernelSpec, pts: np.ndarray, grid: Grid, quad: QuadConfig,
                gauss_order: int = 16, chunk: int = 1024) -> np.ndarray:
    """Kernel mass outside the bounding box, per node.

    2D: the angular integral of the radial tail beyond the box-ray distance is
    smooth except at the four corner angles (ray-distance kinks) and at the
    anisotropy table knots, so it is integrated by Gauss quadrature on the
    segments between those breakpoints (near machine precision)."""
    lo, hi = grid.lo, grid.hi
    if grid.n == 1:
        a = np.stack([hi[0] - pts[:, 0], pts[:, 0] - lo[0]], axis=-1)
        return np.sum(kernels._radial_tail(spec, a), axis=-1)
    corners = np.array([[lo[0], lo[1]], [lo[0], hi[1]], [hi[0], lo[1]], [hi[0], hi[1]]])
    knots = np.array([])
    aniso = getattr(spec, "anisotropy", None)
    if spec.family == "alpha-stable" and aniso is not None and len(aniso) > 1:
        knots = 2.0 * math.pi * np.arange(len(aniso)) / len(aniso)
    xi, wq = kernels.gauss_rule(gauss_order)
    out = np.empty(len(pts))
    for i0 in range(0, len(pts), chunk):
        p = pts[i0:i0 + chunk]
        ca = np.mod(np.arctan2(corners[None, :, 1] - p[:, None, 1],
                               corners[None, :, 0] - p[:, None, 0]), 2.0 * math.pi)
        brk = np.concatenate([ca, np.broadcast_to(knots, (len(p), len(knots)))],
                             axis=1)
        brk = np.sort(brk, axis=1)                       # (m, B)
        ends = np.concatenate([brk[:, 1:], brk[:, :1] + 2.0 * math.pi], axis=1)
        half = 0.5 * (ends - brk)                        # (m, B)
        theta = (brk[:, :, None] + half[:, :, None] * (xi[None, None, :] + 1.0))
        rho = _box_ray(p, lo, hi, theta)                 # (m, B, G)
        vals = kernels._radial_tail(spec, rho, theta=theta)
        out[i0:i0 + chunk] = np.einsum("mbg,g,mb->m", vals, wq, half)
    return out


def assemble(spec: KernelSpec, grid: Grid, mask: DomainMask,
             quad: QuadConfig = DEFAULT_QUAD) -> DiscreteOperator:
    """Assemble the discrete operator for a kernel on a masked grid."""
    if spec.n != grid.n:
        raise DimensionError(f"kernel dimension {spec.n} != grid dimension {grid.n}")
    h = grid.h
    if grid.n == 1:
        w = _bulk_weights_1d(spec, h, grid.counts[0] - 1)
    else:
        kmax = (grid.counts[0] - 1, grid.counts[1] - 1)
        w = _bulk_weights_2d(spec, h, kmax, quad)
    if not np.all(np.isfinite(w)):
        raise AssemblyError("non-finite offset weight produced by quadrature")
    if np.any(w < 0.0):
        raise AssemblyError("negative offset weight produced by quadrature")
    w = 0.5 * (w + w[tuple(slice(None, None, -1) for _ in range(grid.n))])

    pts = mask.interior_nodes()
    tail = _node_tails(spec, pts, grid, quad)
    if not np.all(np.isfinite(tail)) or np.any(tail <= 0.0):
        raise AssemblyError("invalid exterior tail")

    engine = _ConvEngine(w, grid.shape)
    ones = np.ones(grid.shape)
    all_rowsum = engine.conv(ones)[mask.interior]
    diag = all_rowsum + tail
    return DiscreteOperator(spec=spec, grid=grid, mask=mask, quad=quad,
                            weights=w, tail=tail, diag=diag, _engine=engine)


def consistency_residual(op: DiscreteOperator, reference: GridFunction,
                         image, region: np.ndarray = None) -> float:
    """max |(A u_ref)_i - (L u_ref)(x_i)| over a region of interior nodes.

    ``image`` is the analytic value of the operator applied to the reference,
    as a callable on points or an array over interior nodes; ``region`` is a
    boolean array over interior nodes (default: all of them).
    """
    au = op.matvec(reference.values[op.mask.interior])
    pts = op.mask.interior_nodes()
    target = np.asarray(image(pts) if callable(image) else image, dtype=float)
    res = np.abs(au - target)
    if region is not None:
        res = res[np.asarray(region, dtype=bool)]
    return float(res.max()) if res.size else 0.0
