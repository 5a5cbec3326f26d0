import math

import numpy as np
import pytest

from fracdual import closedform, domain, kernels, operators
from fracdual.gridfn import GridFunction, from_interior, sample


def _interval_op(n_across, s=0.5, radius=1.0):
    spec = kernels.fractional_laplacian_kernel(1, s)
    shape = domain.Box(lo=[-radius], hi=[radius])
    grid = domain.grid_for_shape(shape, n_across)
    mask = domain.build_mask(grid, shape)
    return operators.assemble(spec, grid, mask), grid, mask


def _disc_op(n_across, s=0.5, spec=None):
    spec = spec or kernels.fractional_laplacian_kernel(2, s)
    shape = domain.Ball(center=[0.0, 0.0], radius=1.0)
    grid = domain.grid_for_shape(shape, n_across)
    mask = domain.build_mask(grid, shape)
    return operators.assemble(spec, grid, mask), grid, mask


# ---------------------------------------------------------------------------
# frozen assembly examples
# ---------------------------------------------------------------------------

def test_single_node_diagonal_is_4_over_pi():
    # interval (-0.5, 0.5), h = 1, one interior node at 0, box (-1.5, 1.5)
    spec = kernels.fractional_laplacian_kernel(1, 0.5)
    grid = domain.Grid(lo=[-1.5], h=1.0, counts=(3,))
    shape = domain.Box(lo=[-0.5], hi=[0.5])
    mask = domain.build_mask(grid, shape)
    op = operators.assemble(spec, grid, mask)
    assert op.n_interior == 1
    assert op.diag[0] == pytest.approx(4.0 / math.pi, rel=1e-12)
    assert op.dense_matrix()[0, 0] == pytest.approx(4.0 / math.pi, rel=1e-12)


def test_unit_offset_weight_8_over_3pi():
    spec = kernels.fractional_laplacian_kernel(1, 0.5)
    grid = domain.Grid(lo=[-2.0], h=0.5, counts=(8,))
    shape = domain.Box(lo=[-1.0], hi=[1.0])
    mask = domain.build_mask(grid, shape)
    op = operators.assemble(spec, grid, mask)
    center = (len(op.weights) - 1) // 2
    assert op.weights[center + 1] == pytest.approx(8.0 / (3.0 * math.pi), rel=1e-12)
    assert op.weights[center] == 0.0


# ---------------------------------------------------------------------------
# M-matrix structure
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("maker", [lambda: _interval_op(16), lambda: _disc_op(16)])
def test_m_matrix_structure(maker):
    op, _, _ = maker()
    assert np.all(op.weights >= 0.0)
    assert np.all(op.diag > 0.0)
    assert np.all(op.dominance_surplus() > 0.0)
    a = op.dense_matrix()
    assert np.array_equal(a, a.T)                    # bitwise symmetry
    off = a - np.diag(np.diag(a))
    assert np.all(off <= 0.0)


def test_apply_zero_and_constant():
    op, grid, mask = _disc_op(16)
    zero = GridFunction(grid, np.zeros(grid.shape))
    assert np.all(op.apply(zero).values == 0.0)
    ones = from_interior(mask, np.ones(op.n_interior))
    out = op.apply(ones).values[mask.interior]
    assert np.all(out > 0.0)                         # exterior absorption


def test_matvec_symmetry_bilinear():
    op, _, _ = _disc_op(16)
    rng = np.random.default_rng(0)
    u = rng.normal(size=op.n_interior)
    v = rng.normal(size=op.n_interior)
    lhs = float(op.matvec(u) @ v)
    rhs = float(u @ op.matvec(v))
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_fft_matvec_matches_direct_and_dense():
    op, _, _ = _disc_op(12)
    rng = np.random.default_rng(1)
    x = rng.normal(size=op.n_interior)
    fft = op.matvec(x, method="fft")
    direct = op.matvec(x, method="direct")
    dense = op.dense_matrix() @ x
    assert np.allclose(fft, direct, rtol=1e-12, atol=1e-12)
    assert np.allclose(fft, dense, rtol=1e-10, atol=1e-12)


def test_anisotropic_tail_richardson():
    spec = kernels.alpha_stable_kernel(2, 1.2, [1.0, 1.5, 2.0, 1.5, 1.0, 1.5, 2.0, 1.5])
    shape = domain.Ball(center=[0.0, 0.0], radius=1.0)
    grid = domain.grid_for_shape(shape, 12)
    mask = domain.build_mask(grid, shape)
    pts = mask.interior_nodes()
    t1 = operators._node_tails(spec, pts, grid, kernels.DEFAULT_QUAD, gauss_order=16)
    t2 = operators._node_tails(spec, pts, grid, kernels.DEFAULT_QUAD, gauss_order=32)
    assert np.max(np.abs(t1 - t2) / t2) < 1e-8


# ---------------------------------------------------------------------------
# consistency against the closed-form profile
# ---------------------------------------------------------------------------

def test_consistency_residual_zero_reference():
    op, grid, mask = _interval_op(16)
    zero = GridFunction(grid, np.zeros(grid.shape))
    assert operators.consistency_residual(op, zero, lambda p: np.zeros(len(p))) == 0.0


def test_getoor_center_residual_1d():
    # operator applied to (1 - x^2)_+^s has constant image inside the interval
    s = 0.5
    target = closedform.getoor_constant(1, s)
    op, grid, mask = _interval_op(512, s=s)          # h = 1/256
    ref = sample(mask, closedform.getoor_profile(1, s))
    pts = mask.interior_nodes()
    center = np.abs(pts[:, 0]) < grid.h              # the two nodes nearest 0
    res = operators.consistency_residual(
        op, ref, lambda p: np.full(len(p), target), region=center)
    assert res < 0.05


def test_getoor_residual_monotone_decay_1d():
    s = 0.5
    target = closedform.getoor_constant(1, s)
    residuals = []
    for n_across in (32, 64, 128, 256):
        op, grid, mask = _interval_op(n_across, s=s)
        ref = sample(mask, closedform.getoor_profile(1, s))
        deep = mask.boundary_distance[mask.interior] > 0.2
        residuals.append(operators.consistency_residual(
            op, ref, lambda p: np.full(len(p), target), region=deep))
    for a, b in zip(residuals[:-1], residuals[1:]):
        assert a / b >= 1.3


def test_getoor_residual_decays_2d():
    s = 0.5
    target = closedform.getoor_constant(2, s)
    residuals = []
    for n_across in (16, 32, 64):
        op, grid, mask = _disc_op(n_across, s=s)
        ref = sample(mask, closedform.getoor_profile(2, s))
        deep = mask.boundary_distance[mask.interior] > 0.3
        residuals.append(operators.consistency_residual(
            op, ref, lambda p: np.full(len(p), target), region=deep))
    for a, b in zip(residuals[:-1], residuals[1:]):
        assert a / b >= 1.3
