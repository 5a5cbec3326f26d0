import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracdual import domain, measures
from fracdual.errors import InvalidMeasureError, MeasureSupportError


def _interval_setup(h=0.5, lo=-2.0, n_cells=8):
    grid = domain.Grid(lo=[lo], h=h, counts=(n_cells,))
    shape = domain.Box(lo=[-1.0], hi=[1.0])
    return grid, domain.build_mask(grid, shape)


def _disc_setup(n_across=20):
    shape = domain.Ball(center=[0.0, 0.0], radius=1.0)
    grid = domain.grid_for_shape(shape, n_across)
    return grid, domain.build_mask(grid, shape)


# ---------------------------------------------------------------------------
# total variation
# ---------------------------------------------------------------------------

def test_total_variation_of_signed_atoms():
    grid, mask = _interval_setup()
    mu = measures.RadonMeasure(atoms=(([0.25], 0.5), ([-0.25], -0.5)))
    assert measures.total_variation(mu, grid, mask) == 1.0


def test_total_variation_zero_measure():
    grid, mask = _interval_setup()
    assert measures.total_variation(measures.RadonMeasure(), grid, mask) == 0.0


def test_total_variation_unit_density_on_disc():
    shape = domain.Ball(center=[0.0, 0.0], radius=1.0)
    grid = domain.grid_for_shape(shape, 20)   # h = 0.1
    mask = domain.build_mask(grid, shape)
    mu = measures.density_measure(lambda p: np.ones(np.asarray(p).shape[:-1]))
    tv = measures.total_variation(mu, grid, mask)
    assert abs(tv - math.pi) / math.pi < 0.05


def test_atom_outside_domain_rejected():
    grid, mask = _interval_setup()
    mu = measures.atom([1.5], 1.0)
    with pytest.raises(InvalidMeasureError):
        measures.total_variation(mu, grid, mask)
    with pytest.raises(InvalidMeasureError):
        measures.discretize_to_functional(mu, grid, mask)


# ---------------------------------------------------------------------------
# hat-weight discretization
# ---------------------------------------------------------------------------

def test_atom_at_node_gives_unit_vector():
    grid, mask = _interval_setup()
    f = measures.discretize_to_functional(measures.atom([0.25], 1.0), grid, mask)
    nodes = mask.interior_nodes()[:, 0]
    expected = (nodes == 0.25).astype(float)
    assert np.allclose(f, expected, atol=1e-14)


def test_atom_midway_splits_half_half():
    grid, mask = _interval_setup()
    f = measures.discretize_to_functional(measures.atom([0.0], 1.0), grid, mask)
    nodes = mask.interior_nodes()[:, 0]
    assert f[nodes == -0.25][0] == pytest.approx(0.5)
    assert f[nodes == 0.25][0] == pytest.approx(0.5)


def test_2d_quarter_offset_hat_weights():
    grid, mask = _disc_setup(8)               # h = 0.25
    h = grid.h
    nodes = grid.nodes()
    base = np.array([nodes[..., 0].flat[0], 0.0])
    # pick the interior node closest to the center, then offset by h/4 each way
    pts = mask.interior_nodes()
    i = int(np.argmin(np.linalg.norm(pts, axis=-1)))
    x0 = pts[i] + np.array([0.25 * h, 0.25 * h])
    f = measures.discretize_to_functional(measures.atom(x0, 1.0), grid, mask)
    w = np.sort(f[f > 0])[::-1]
    assert np.allclose(w, [0.5625, 0.1875, 0.1875, 0.0625], atol=1e-12)


def test_atom_with_fully_exterior_stencil_rejected():
    grid, mask = _disc_setup(8)
    # a point just inside the domain boundary but whose four surrounding grid
    # nodes are all exterior cannot be represented
    shape = mask.shape
    with pytest.raises((MeasureSupportError, InvalidMeasureError)):
        for t in np.linspace(0.999, 0.9, 30):
            measures.discretize_to_functional(
                measures.atom([t, 0.0], 1.0), grid, mask)
        raise MeasureSupportError("no near-boundary atom was rejected")


@given(st.lists(st.tuples(st.floats(-0.5, 0.5), st.floats(-0.5, 3.0)),
                min_size=1, max_size=5))
@settings(max_examples=40, deadline=None)
def test_mass_conservation_exact(atom_list):
    grid, mask = _interval_setup()
    mu = measures.RadonMeasure(atoms=tuple(([x], m) for x, m in atom_list))
    f = measures.discretize_to_functional(mu, grid, mask)
    # all atoms are >= h away from the boundary, so no weight is dropped
    assert float(np.sum(f)) == pytest.approx(sum(m for _, m in atom_list),
                                             rel=1e-13, abs=1e-13)


def test_mass_conservation_with_density():
    grid, mask = _disc_setup(16)
    dens = lambda p: np.exp(-np.sum(np.asarray(p) ** 2, axis=-1))  # noqa: E731
    mu = measures.RadonMeasure(atoms=(([0.1, 0.2], 0.7),), density=dens)
    f = measures.discretize_to_functional(mu, grid, mask)
    expected = 0.7 + grid.cell_volume * float(
        np.sum(dens(grid.nodes())[mask.interior]))
    assert float(np.sum(f)) == pytest.approx(expected, rel=1e-13)


def test_nonnegative_measure_gives_nonnegative_functional():
    grid, mask = _disc_setup(16)
    mu = measures.RadonMeasure(
        atoms=(([0.1, 0.2], 0.7), ([-0.3, 0.4], 0.1)),
        density=lambda p: np.ones(np.asarray(p).shape[:-1]))
    f = measures.discretize_to_functional(mu, grid, mask)
    assert np.all(f >= 0.0)


def test_atom_pairing_second_order_consistency():
    # <w_h, mu_h> -> w(x0) at O(h^2) for smooth w
    shape = domain.Ball(center=[0.0, 0.0], radius=1.0)
    w = lambda p: np.cos(np.asarray(p)[..., 0]) * np.exp(np.asarray(p)[..., 1])  # noqa: E731
    rng = np.random.default_rng(4)
    locs = rng.uniform(-0.5, 0.5, size=(20, 2))
    errs = []
    for n_across in (16, 32, 64):
        grid = domain.grid_for_shape(shape, n_across)
        mask = domain.build_mask(grid, shape)
        wh = w(grid.nodes())[mask.interior]
        e = 0.0
        for x0 in locs:
            f = measures.discretize_to_functional(measures.atom(x0, 1.0), grid, mask)
            e += abs(float(wh @ f) - float(w(x0)))
        errs.append(e / len(locs))
    assert errs[1] < errs[0] and errs[2] < errs[1]
    assert errs[0] / errs[2] > 8.0      # about two orders over two halvings
