"""Discrete norms and seminorms, critical exponents, and refinement scans."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.signal import fftconvolve

from . import operators, solve
from .domain import DomainMask, DomainShape, build_mask, grid_for_shape
from .errors import DomainParameterError, UndefinedRatioError
from .gridfn import GridFunction, sample
from .kernels import KernelSpec
from .measures import RadonMeasure


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------

def _region_values(u: GridFunction, mask: DomainMask, region):
    vals = u.values[mask.interior]
    pts = mask.interior_nodes()
    if region is not None:
        region = np.asarray(region, dtype=bool)
        vals = vals[region]
        pts = pts[region]
    return vals, pts


def lq_norm(u: GridFunction, q: float, mask: DomainMask, region=None) -> float:
    """(h^n sum |u_i|^q)^{1/q} over interior nodes (or a subset)."""
    if q < 1.0:
        raise DomainParameterError(f"q must be >= 1, got {q}")
    vals, _ = _region_values(u, mask, region)
    return float((mask.grid.cell_volume * np.sum(np.abs(vals) ** q)) ** (1.0 / q))


def lq_energy(u: GridFunction, q: float, mask: DomainMask, region=None) -> float:
    """h^n sum |u_i|^q, the integral monitored by the integrability scans."""
    if q < 1.0:
        raise DomainParameterError(f"q must be >= 1, got {q}")
    vals, _ = _region_values(u, mask, region)
    return float(mask.grid.cell_volume * np.sum(np.abs(vals) ** q))


def _gagliardo_brute(vals, pts, sigma, p, n, hn, chunk=512) -> float:
    expo = n + sigma * p
    total = 0.0
    for i0 in range(0, len(vals), chunk):
        d = pts[i0:i0 + chunk, None, :] - pts[None, :, :]
        dist = np.linalg.norm(d, axis=-1)
        du = np.abs(vals[i0:i0 + chunk, None] - vals[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            term = du**p / dist**expo
        term[~np.isfinite(term)] = 0.0          # excludes the diagonal
        total += float(term.sum())
    return (hn * hn * total) ** (1.0 / p)


def _gagliardo_fft(u: GridFunction, mask: DomainMask, sigma: float, region) -> float:
    """p = 2 fast path: the pair sum is a lattice convolution with the
    translation-invariant weight |k h|^{-(n + 2 sigma)}."""
    grid = mask.grid
    n = grid.n
    sel = np.zeros(grid.shape, dtype=bool)
    sel[mask.interior] = True if region is None else np.asarray(region, dtype=bool)
    uu = np.zeros(grid.shape)
    uu[mask.interior] = u.values[mask.interior]
    uu[~sel] = 0.0
    axes = [np.arange(-(c - 1), c, dtype=float) * grid.h for c in grid.counts]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    dist = np.linalg.norm(mesh, axis=-1)
    with np.errstate(divide="ignore"):
        w = dist ** (-(n + 2.0 * sigma))
    w[tuple((c - 1) for c in grid.counts)] = 0.0
    chi = sel.astype(float)
    wchi = fftconvolve(chi, w, mode="same")
    wu = fftconvolve(uu, w, mode="same")
    quad = 2.0 * (np.sum(uu**2 * wchi * sel) - np.sum(uu * wu * sel))
    hn = grid.cell_volume
    return float(max(quad, 0.0) ** 0.5 * hn)


def gagliardo_seminorm(u: GridFunction, sigma: float, p: float, mask: DomainMask,
                       region=None, method: str = "auto") -> float:
    """Discrete Gagliardo seminorm: double Riemann sum of
    |u_i - u_j|^p / |x_i - x_j|^{n + sigma p} over region pairs, i != j."""
    if not (0.0 < sigma < 1.0):
        raise DomainParameterError(f"sigma must lie in (0, 1), got {sigma}")
    if p < 1.0:
        raise DomainParameterError(f"p must be >= 1, got {p}")
    if method == "auto":
        method = "fft" if p == 2.0 else "brute"
    if method == "fft":
        if p != 2.0:
            raise DomainParameterError("fft path requires p = 2")
        return _gagliardo_fft(u, mask, sigma, region)
    vals, pts = _region_values(u, mask, region)
    return _gagliardo_brute(vals, pts, sigma, p, mask.grid.n, mask.grid.cell_volume)


def holder_seminorm(u: GridFunction, gamma: float, mask: DomainMask,
                    region=None, chunk: int = 512) -> float:
    """max |u_i - u_j| / |x_i - x_j|^gamma over region pairs."""
    if not (0.0 < gamma <= 1.0):
        raise DomainParameterError(f"gamma must lie in (0, 1], got {gamma}")
    vals, pts = _region_values(u, mask, region)
    if len(vals) < 2:
        raise DomainParameterError("holder seminorm needs at least two nodes")
    best = 0.0
    for i0 in range(0, len(vals), chunk):
        d = np.linalg.norm(pts[i0:i0 + chunk, None, :] - pts[None, :, :], axis=-1)
        du = np.abs(vals[i0:i0 + chunk, None] - vals[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = du / d**gamma
        ratio[~np.isfinite(ratio)] = 0.0
        best = max(best, float(ratio.max()))
    return best


# ---------------------------------------------------------------------------
# Exponent arithmetic
# ---------------------------------------------------------------------------

def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x).limit_denominator(10**9)


@dataclass(frozen=True)
class ExponentSet:
    """All critical exponents as exact rationals (None when undefined)."""

    n: int
    s: Fraction
    q: Optional[Fraction] = None
    p: Optional[Fraction] = None
    q_crit: Optional[Fraction] = None          # n / (n - 2s)
    p_star: Optional[Fraction] = None          # n p / (n - s p)
    eta: Optional[Fraction] = None             # 1 - (2 - 2s)/q, only when > 0
    alpha_local_bound: Optional[Fraction] = None   # (n + 2 - a)/(n + 1 - a), a = 2s
    riesz_gamma: Optional[Fraction] = None     # 2s - n/p, only when p > n/(2s)
    unconstrained: bool = False                # 2s >= n: no integrability threshold

    def to_dict(self):
        def enc(v):
            if v is None:
                return None
            if isinstance(v, Fraction):
                return {"fraction": f"{v.numerator}/{v.denominator}", "value": float(v)}
            return v
        return {k: enc(getattr(self, k)) for k in
                ("n", "s", "q", "p", "q_crit", "p_star", "eta",
                 "alpha_local_bound", "riesz_gamma", "unconstrained")}


def critical_exponents(n: int, s=None, alpha=None, q=None, p=None) -> ExponentSet:
    """Pure arithmetic map of the critical exponents (exact rationals).

    Provide the order as ``s`` or as ``alpha`` = 2s."""
    if (s is None) == (alpha is None):
        raise DomainParameterError("provide exactly one of s or alpha")
    s = _frac(alpha) / 2 if alpha is not None else _frac(s)
    if not (0 < s < 1):
        raise DomainParameterError(f"order s must lie in (0, 1), got {s}")
    a = 2 * s
    q = _frac(q) if q is not None else None
    p = _frac(p) if p is not None else None
    unconstrained = a >= n
    q_crit = None if unconstrained else Fraction(n, 1) / (n - a)
    p_star = None
    if p is not None and s * p < n:
        p_star = n * p / (n - s * p)
    eta = None
    if q is not None:
        cand = 1 - (2 - a) / q
        if cand > 0:
            eta = cand
    alpha_local = (n + 2 - a) / (n + 1 - a)
    riesz_gamma = None
    if p is not None and p * a > n:
        riesz_gamma = a - Fraction(n, 1) / p
    return ExponentSet(n=n, s=s, q=q, p=p, q_crit=q_crit, p_star=p_star,
                       eta=eta, alpha_local_bound=alpha_local,
                       riesz_gamma=riesz_gamma, unconstrained=unconstrained)


# ---------------------------------------------------------------------------
# Embedding ratio
# ---------------------------------------------------------------------------

def embedding_ratio(v: GridFunction, s: float, p: float, grid, mask: DomainMask) -> float:
    """||v||_{L^{p*}} / (||v||_{L^p} + [v]_{s,p}) with p* = np/(n - sp)."""
    n = mask.grid.n
    if s * p >= n:
        raise DomainParameterError("embedding ratio requires s p < n")
    if not np.any(v.values[mask.interior]):
        raise UndefinedRatioError("embedding ratio undefined for the zero function")
    p_star = n * p / (n - s * p)
    num = lq_norm(v, p_star, mask)
    den = lq_norm(v, p, mask) + gagliardo_seminorm(v, s, p, mask)
    return float(num / den)


# ---------------------------------------------------------------------------
# Refinement scans
# ---------------------------------------------------------------------------

@dataclass
class ScanResult:
    levels: list                      # [(h, value), ...]
    slope: float                      # log-log slope of value vs h
    verdict: str                      # bounded | diverging | inconclusive
    metadata: dict = field(default_factory=dict)


VERDICT_BOUNDED_DRIFT = 0.10    # <10% change per level: bounded
VERDICT_DIVERGING_GROWTH = 0.25  # >25% growth per level: diverging


def _verdict(values) -> str:
    ratios = [values[i + 1] / values[i] for i in range(len(values) - 1)]
    if all(abs(r - 1.0) < VERDICT_BOUNDED_DRIFT for r in ratios):
        return "bounded"
    if all(r > 1.0 + VERDICT_DIVERGING_GROWTH for r in ratios):
        return "diverging"
    return "inconclusive"


def _fit_slope(hs, values) -> float:
    x = np.log(np.asarray(hs))
    y = np.log(np.maximum(np.asarray(values), 1e-300))
    return float(np.polyfit(x, y, 1)[0])


def _difference_quotients(u: GridFunction, mask: DomainMask):
    """First differences along each axis as zero-exterior grid functions,
    restricted to node pairs that are both interior."""
    grid = mask.grid
    out = []
    for ax in range(grid.n):
        d = np.zeros(grid.shape)
        sl_hi = [slice(None)] * grid.n
        sl_lo = [slice(None)] * grid.n
        sl_hi[ax] = slice(1, None)
        sl_lo[ax] = slice(None, -1)
        diff = (u.values[tuple(sl_hi)] - u.values[tuple(sl_lo)]) / grid.h
        both = mask.interior[tuple(sl_hi)] & mask.interior[tuple(sl_lo)]
        d[tuple(sl_lo)] = np.where(both, diff, 0.0)
        out.append(GridFunction(grid, d))
    return out


def sobolev_norm(u: GridFunction, order: float, q: float, mask: DomainMask,
                 region=None) -> tuple[float, str]:
    """Discrete W^{order, q} norm and a tag describing its realization.

    order in (0, 1): L^q norm plus the Gagliardo seminorm of that order;
    order in [1, 2): L^q norm plus the order-(order-1) Gagliardo seminorm of
    the first difference quotients (capped at 0.99 when order-1 -> 1)."""
    base = lq_norm(u, q, mask, region)
    if order < 1.0:
        sigma = min(order, 0.99)
        semi = gagliardo_seminorm(u, sigma, q, mask, region,
                                  method="auto" if q == 2.0 else "brute")
        return base + semi, f"lq+gagliardo(sigma={sigma})"
    sigma = min(order - 1.0, 0.99)
    if sigma <= 0.0:
        grads = _difference_quotients(u, mask)
        semi = sum(lq_norm(g, q, mask, region) for g in grads)
        return base + semi, "lq+first-differences"
    semi = 0.0
    for g in _difference_quotients(u, mask):
        semi += gagliardo_seminorm(g, sigma, q, mask, region,
                                   method="auto" if q == 2.0 else "brute")
    return base + semi, f"lq+gagliardo-of-differences(sigma={sigma})"


def regularity_scan(spec_for_level, shape: DomainShape, data: RadonMeasure,
                    levels, scan: dict, tol: float = 1e-10,
                    pad: float = 0.5) -> ScanResult:
    """Solve the measure problem at each refinement level and track a norm.

    ``spec_for_level``: KernelSpec or callable n_across -> KernelSpec.
    ``scan``: {"kind": "lq", "q": ...}
              {"kind": "gagliardo", "order": ..., "q": ..., "margin": ...}
              {"kind": "cz", "r": ..., "order": ..., "g": callable}
    The L^q scan monitors the integral of |u|^q (the quantity whose finiteness
    the integrability theorem asserts); the others monitor norms.
    """
    if len(levels) < 3:
        raise DomainParameterError("scans need at least 3 refinement levels")
    rows = []
    meta = {"scan": {k: (v if not callable(v) else "<callable>") for k, v in scan.items()}}
    for n_across in levels:
        spec = spec_for_level(n_across) if callable(spec_for_level) else spec_for_level
        grid = grid_for_shape(shape, n_across, pad=pad)
        mask = build_mask(grid, shape)
        op = operators.assemble(spec, grid, mask)
        kind = scan["kind"]
        if kind == "cz":
            gfun = sample(mask, scan["g"])
            w, _ = solve.weak_solve(op, gfun, tol=tol)
            order = scan.get("order", 2.0 * spec.s)
            wnorm, realization = sobolev_norm(w, order, scan["r"], mask)
            value = wnorm / lq_norm(gfun, scan["r"], mask)
            meta["realization"] = realization
        else:
            u, _ = solve.duality_solve(op, data, tol=tol)
            if kind == "lq":
                value = lq_energy(u, scan["q"], mask)
            elif kind == "gagliardo":
                region = None
                if scan.get("margin"):
                    dist = mask.boundary_distance[mask.interior]
                    region = dist > scan["margin"]
                unorm, realization = sobolev_norm(u, scan["order"], scan["q"],
                                                  mask, region)
                value = unorm
                meta["realization"] = realization
            else:
                raise DomainParameterError(f"unknown scan kind {kind!r}")
        rows.append((grid.h, float(value)))
    hs = [r[0] for r in rows]
    vals = [r[1] for r in rows]
    return ScanResult(levels=rows, slope=_fit_slope(hs, vals),
                      verdict=_verdict(vals), metadata=meta)


# ---------------------------------------------------------------------------
# Seeded test-function families
# ---------------------------------------------------------------------------

def random_bump_functions(shape: DomainShape, count: int, seed: int = 0,
                          width_range=(0.08, 0.25)):
    """Seeded family of Gaussian bumps centered inside the shape, returned as
    vectorized callables in physical coordinates (grid independent)."""
    rng = np.random.default_rng(seed)
    blo, bhi = shape.bounding_box()
    diam = float(np.max(bhi - blo))
    out = []
    while len(out) < count:
        c = rng.uniform(blo, bhi)
        if not bool(shape.contains(c)):
            continue
        wdt = diam * rng.uniform(*width_range)
        amp = rng.uniform(0.5, 1.5) * rng.choice([-1.0, 1.0])

        def bump(pts, c=c, wdt=wdt, amp=amp):
            pts = np.asarray(pts, dtype=float)
            r2 = np.sum((pts - c) ** 2, axis=-1)
            return amp * np.exp(-r2 / (2.0 * wdt**2))

        out.append(bump)
    return out
