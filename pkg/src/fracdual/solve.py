"""Weak, duality, and exterior-data solves, plus the duality certificate."""

from __future__ import annotations

import time
from dataclasses import dataclass, asdict

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.sparse.linalg import LinearOperator, cg

from .errors import (
    ConvergenceError,
    DimensionError,
    ResolutionError,
)
from .gridfn import GridFunction, from_interior
from .measures import RadonMeasure, discretize_to_functional
from .operators import DiscreteOperator

DIRECT_LIMIT = 2000          # dense Cholesky below this many unknowns
RELATIVE_FLOOR = 1e-14       # absolute floor in relative mismatches


@dataclass
class SolveReport:
    iterations: int
    relative_residual: float
    wall_time_s: float
    solver: str

    def to_dict(self):
        return asdict(self)


def _as_interior(op: DiscreteOperator, data) -> np.ndarray:
    if isinstance(data, GridFunction):
        return data.values[op.mask.interior].astype(float)
    arr = np.asarray(data, dtype=float)
    if arr.shape == op.grid.shape:
        return arr[op.mask.interior]
    if arr.shape != (op.n_interior,):
        raise DimensionError(
            f"expected interior vector of length {op.n_interior}, got {arr.shape}")
    return arr


def solve_linear(op: DiscreteOperator, b: np.ndarray, tol: float = 1e-10,
                 max_iter: int = 10_000, x0=None, method: str = "auto"):
    """Solve A x = b over interior nodes.

    ``method``: 'direct' (dense Cholesky), 'cg' (diagonally preconditioned
    conjugate gradients), or 'auto' (direct below DIRECT_LIMIT unknowns).
    """
    b = np.asarray(b, dtype=float)
    if b.shape != (op.n_interior,):
        raise DimensionError("right-hand side has wrong length")
    if method == "auto":
        method = "direct" if op.n_interior <= DIRECT_LIMIT else "cg"
    t0 = time.perf_counter()
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros_like(b), SolveReport(0, 0.0, time.perf_counter() - t0, method)
    if method == "direct":
        a = op.dense_matrix(limit=max(DIRECT_LIMIT, op.n_interior))
        x = cho_solve(cho_factor(a), b)
        res = float(np.linalg.norm(op.matvec(x) - b)) / bnorm
        return x, SolveReport(0, res, time.perf_counter() - t0, "direct")
    count = {"it": 0}

    def _cb(_):
        count["it"] += 1

    linop = LinearOperator((op.n_interior, op.n_interior), matvec=op.matvec)
    dinv = 1.0 / op.diag
    precond = LinearOperator((op.n_interior, op.n_interior), matvec=lambda v: dinv * v)
    x, info = cg(linop, b, x0=x0, rtol=tol, atol=0.0, maxiter=max_iter,
                 M=precond, callback=_cb)
    res = float(np.linalg.norm(op.matvec(x) - b)) / bnorm
    report = SolveReport(count["it"], res, time.perf_counter() - t0, "pcg")
    if info != 0 or not np.isfinite(res):
        raise ConvergenceError(
            f"cg failed to reach tol={tol} in {max_iter} iterations "
            f"(residual {res:.3e})", report=report)
    return x, report


def weak_solve(op: DiscreteOperator, f, tol: float = 1e-10, max_iter: int = 10_000,
               x0=None, method: str = "auto"):
    """Solve A u = f for density data f (values at interior nodes)."""
    b = _as_interior(op, f)
    x, report = solve_linear(op, b, tol=tol, max_iter=max_iter, x0=x0, method=method)
    return from_interior(op.mask, x), report


def duality_solve(op: DiscreteOperator, mu: RadonMeasure, tol: float = 1e-10,
                  max_iter: int = 10_000, x0=None, method: str = "auto"):
    """Solve A u = mu_h / h^n where mu_h is the discretized measure functional.

    Because A is symmetric, the single solve realizes the duality definition:
    <u, g> h^n = <w, mu_h> for every g with A w = g (see duality_verify)."""
    func = discretize_to_functional(mu, op.grid, op.mask)
    b = func / op.grid.cell_volume
    x, report = solve_linear(op, b, tol=tol, max_iter=max_iter, x0=x0, method=method)
    return from_interior(op.mask, x), report


def duality_verify(op: DiscreteOperator, u: GridFunction, mu: RadonMeasure,
                   g_list, tol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Certificate for the duality identity: for each test datum g solve
    A w = g and compare <u, g> h^n against <w, mu_h>; returns the max
    relative mismatch."""
    func = discretize_to_functional(mu, op.grid, op.mask)
    u_int = u.values[op.mask.interior]
    hn = op.grid.cell_volume
    worst = 0.0
    for g in g_list:
        g_int = _as_interior(op, g)
        w, _ = solve_linear(op, g_int, tol=tol, max_iter=max_iter)
        lhs = hn * float(u_int @ g_int)
        rhs = float(w @ func)
        mismatch = abs(lhs - rhs) / (abs(lhs) + RELATIVE_FLOOR)
        worst = max(worst, mismatch)
    return worst


def exterior_data_solve(op: DiscreteOperator, phi, tol: float = 1e-10,
                        max_iter: int = 10_000, tail_value: float = 0.0,
                        method: str = "auto"):
    """Solve L u = 0 in Omega with u = phi on the exterior grid nodes.

    ``phi`` is a full-grid array (interior entries ignored) or a scalar;
    ``tail_value`` is the constant value assumed beyond the bounding box."""
    if np.isscalar(phi):
        phi_full = np.full(op.grid.shape, float(phi))
    else:
        phi_full = np.asarray(phi, dtype=float)
        if phi_full.shape != op.grid.shape:
            raise DimensionError("phi must be scalar or a full-grid array")
    b = op.exterior_rhs(phi_full, tail_value=tail_value)
    x, report = solve_linear(op, b, tol=tol, max_iter=max_iter, method=method)
    out = phi_full.copy()
    out[op.mask.interior] = x
    return GridFunction(op.grid, out, zero_exterior=False), report


def fundamental_ratio_scan(u: GridFunction, mask, x0, s: float, n: int, radii):
    """Ratio statistics u(x) / |x - x0|^{2s - n} over dyadic annuli [r, 2r].

    Returns a list of (r, min_ratio, max_ratio) rows."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    h = u.grid.h
    pts = mask.interior_nodes()
    vals = u.values[mask.interior]
    dist = np.linalg.norm(pts - x0, axis=-1)
    rows = []
    for r in radii:
        if r < 2.0 * h:
            raise ResolutionError(f"annulus radius {r} below 2h = {2*h}")
        sel = (dist >= r) & (dist < 2.0 * r)
        if not np.any(sel):
            raise ResolutionError(f"no interior nodes in annulus [{r}, {2*r})")
        ratio = vals[sel] / dist[sel] ** (2.0 * s - n)
        rows.append((float(r), float(ratio.min()), float(ratio.max())))
    return rows
