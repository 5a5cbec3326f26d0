import math
from fractions import Fraction

import numpy as np
import pytest

from fracdual import analysis, domain, kernels, measures
from fracdual.errors import DomainParameterError, UndefinedRatioError
from fracdual.gridfn import GridFunction, sample


def _disc_mask(n_across=40):
    shape = domain.Ball(center=[0.0, 0.0], radius=1.0)
    grid = domain.grid_for_shape(shape, n_across)
    return grid, domain.build_mask(grid, shape), shape


def _small_interval(n_nodes=12):
    # nodes at 0, h, 2h, ... with a node exactly at 0
    grid = domain.Grid(lo=[-0.05], h=0.1, counts=(n_nodes,))
    shape = domain.Box(lo=[-0.05], hi=[-0.05 + 0.1 * n_nodes])
    return grid, domain.build_mask(grid, shape)


# ---------------------------------------------------------------------------
# L^q norms
# ---------------------------------------------------------------------------

def test_lq_norm_of_one_on_disc_is_sqrt_area():
    grid, mask, _ = _disc_mask(64)
    u = sample(mask, lambda p: np.ones(np.asarray(p).shape[:-1]))
    assert analysis.lq_norm(u, 2.0, mask) == pytest.approx(math.sqrt(math.pi),
                                                           rel=0.03)


def test_lq_norm_zero_and_homogeneity():
    grid, mask, _ = _disc_mask(16)
    zero = GridFunction(grid, np.zeros(grid.shape))
    assert analysis.lq_norm(zero, 3.0, mask) == 0.0
    rng = np.random.default_rng(0)
    u = GridFunction(grid, rng.normal(size=grid.shape))
    a = analysis.lq_norm(u, 3.0, mask)
    b = analysis.lq_norm(GridFunction(grid, -2.5 * u.values), 3.0, mask)
    assert b == pytest.approx(2.5 * a, rel=1e-13)


def test_lq_norm_rejects_q_below_one():
    grid, mask, _ = _disc_mask(16)
    u = GridFunction(grid, np.zeros(grid.shape))
    with pytest.raises(DomainParameterError):
        analysis.lq_norm(u, 0.5, mask)


# ---------------------------------------------------------------------------
# Gagliardo seminorm
# ---------------------------------------------------------------------------

def test_gagliardo_brute_matches_hand_double_sum():
    grid, mask = _small_interval(12)
    rng = np.random.default_rng(1)
    u = GridFunction(grid, rng.normal(size=grid.shape))
    sigma, p = 0.4, 3.0
    got = analysis.gagliardo_seminorm(u, sigma, p, mask, method="brute")
    vals = u.values[mask.interior]
    pts = mask.interior_nodes()[:, 0]
    total = 0.0
    for i in range(len(vals)):
        for j in range(len(vals)):
            if i == j:
                continue
            total += abs(vals[i] - vals[j]) ** p / abs(pts[i] - pts[j]) ** (1 + sigma * p)
    want = (grid.h * grid.h * total) ** (1.0 / p)
    assert got == pytest.approx(want, rel=1e-12)


def test_gagliardo_fft_matches_brute_for_p2():
    grid, mask, _ = _disc_mask(12)
    rng = np.random.default_rng(2)
    u = GridFunction(grid, rng.normal(size=grid.shape))
    brute = analysis.gagliardo_seminorm(u, 0.5, 2.0, mask, method="brute")
    fft = analysis.gagliardo_seminorm(u, 0.5, 2.0, mask, method="fft")
    assert fft == pytest.approx(brute, rel=1e-10)


def test_gagliardo_constant_is_zero_and_homogeneous():
    grid, mask = _small_interval(10)
    const = sample(mask, lambda p: np.full(np.asarray(p).shape[:-1], 3.0))
    assert analysis.gagliardo_seminorm(const, 0.3, 2.0, mask) == 0.0
    rng = np.random.default_rng(3)
    u = GridFunction(grid, rng.normal(size=grid.shape))
    a = analysis.gagliardo_seminorm(u, 0.3, 2.0, mask)
    b = analysis.gagliardo_seminorm(GridFunction(grid, -4.0 * u.values), 0.3, 2.0, mask)
    assert b == pytest.approx(4.0 * a, rel=1e-12)


def test_gagliardo_rejects_bad_sigma():
    grid, mask = _small_interval(10)
    u = GridFunction(grid, np.zeros(grid.shape))
    for sigma in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(DomainParameterError):
            analysis.gagliardo_seminorm(u, sigma, 2.0, mask)


# ---------------------------------------------------------------------------
# Holder seminorm
# ---------------------------------------------------------------------------

def test_holder_constant_is_zero():
    grid, mask = _small_interval(10)
    const = sample(mask, lambda p: np.full(np.asarray(p).shape[:-1], 7.0))
    assert analysis.holder_seminorm(const, 0.5, mask) == 0.0


def test_holder_abs_x_lipschitz_constant_one():
    grid = domain.Grid(lo=[-2.0], h=0.25, counts=(16,))
    shape = domain.Box(lo=[-1.5], hi=[1.5])
    mask = domain.build_mask(grid, shape)
    u = sample(mask, lambda p: np.abs(np.asarray(p)[..., 0]))
    assert analysis.holder_seminorm(u, 1.0, mask) == pytest.approx(1.0, abs=1e-12)


def test_holder_sqrt_has_exponent_half_constant_one():
    grid, mask = _small_interval(12)     # node exactly at x = 0
    u = sample(mask, lambda p: np.sqrt(np.maximum(np.asarray(p)[..., 0], 0.0)))
    # the pair (0, h) realizes |sqrt(h) - 0| / h^{1/2} = 1 exactly
    assert analysis.holder_seminorm(u, 0.5, mask) == pytest.approx(1.0, abs=1e-10)


def test_holder_triangle_inequality():
    grid, mask = _small_interval(12)
    rng = np.random.default_rng(4)
    for _ in range(5):
        u = GridFunction(grid, rng.normal(size=grid.shape))
        v = GridFunction(grid, rng.normal(size=grid.shape))
        su = analysis.holder_seminorm(u, 0.6, mask)
        sv = analysis.holder_seminorm(v, 0.6, mask)
        sw = analysis.holder_seminorm(GridFunction(grid, u.values + v.values),
                                      0.6, mask)
        assert sw <= su + sv + 1e-12


# ---------------------------------------------------------------------------
# Exponent arithmetic
# ---------------------------------------------------------------------------

def test_critical_exponent_values():
    e = analysis.critical_exponents(2, s=Fraction(3, 4), q=Fraction(6, 5))
    assert e.q_crit == Fraction(4, 1)
    assert e.eta == Fraction(7, 12)
    e2 = analysis.critical_exponents(2, alpha=Fraction(3, 2))
    assert e2.alpha_local_bound == Fraction(5, 3)
    e3 = analysis.critical_exponents(2, alpha=1, p=8)
    assert e3.riesz_gamma == Fraction(3, 4)
    e4 = analysis.critical_exponents(2, s=Fraction(1, 2), p=2)
    assert e4.p_star == Fraction(4, 1)


def test_exponents_unconstrained_flag():
    e = analysis.critical_exponents(1, s=Fraction(3, 5))
    assert e.unconstrained is True
    assert e.q_crit is None


def test_eta_omitted_when_nonpositive():
    e = analysis.critical_exponents(2, s=Fraction(2, 5), q=1)
    assert e.eta is None


def test_exponents_are_exact_fractions_and_round_trip():
    e = analysis.critical_exponents(3, s=Fraction(3, 4), q=2, p=8)
    for v in (e.q_crit, e.eta, e.alpha_local_bound, e.riesz_gamma):
        assert isinstance(v, Fraction)
    d = e.to_dict()
    assert d["q_crit"]["fraction"] == "2/1"
    assert d["q_crit"]["value"] == 2.0
    assert d["unconstrained"] is False


def test_exponents_require_exactly_one_order():
    with pytest.raises(DomainParameterError):
        analysis.critical_exponents(2)
    with pytest.raises(DomainParameterError):
        analysis.critical_exponents(2, s=0.5, alpha=1.0)


# ---------------------------------------------------------------------------
# Embedding ratio
# ---------------------------------------------------------------------------

def test_embedding_ratio_scale_invariant():
    grid, mask, shape = _disc_mask(16)
    bump = analysis.random_bump_functions(shape, 1, seed=5)[0]
    v = sample(mask, bump)
    r1 = analysis.embedding_ratio(v, 0.5, 2.0, grid, mask)
    r2 = analysis.embedding_ratio(GridFunction(grid, 3.0 * v.values),
                                  0.5, 2.0, grid, mask)
    assert r1 > 0.0
    assert r2 == pytest.approx(r1, rel=1e-12)


def test_embedding_ratio_zero_function_rejected():
    grid, mask, _ = _disc_mask(16)
    zero = GridFunction(grid, np.zeros(grid.shape))
    with pytest.raises(UndefinedRatioError):
        analysis.embedding_ratio(zero, 0.5, 2.0, grid, mask)


def test_embedding_ratio_requires_subcritical_order():
    grid, mask, _ = _disc_mask(16)
    u = GridFunction(grid, np.ones(grid.shape))
    with pytest.raises(DomainParameterError):
        analysis.embedding_ratio(u, 0.999, 2.1, grid, mask)


# ---------------------------------------------------------------------------
# Sobolev norm realizations
# ---------------------------------------------------------------------------

def test_sobolev_norm_realization_tags():
    grid, mask, shape = _disc_mask(12)
    u = sample(mask, analysis.random_bump_functions(shape, 1, seed=6)[0])
    _, tag1 = analysis.sobolev_norm(u, 0.5, 2.0, mask)
    assert tag1 == "lq+gagliardo(sigma=0.5)"
    _, tag2 = analysis.sobolev_norm(u, 1.0, 2.0, mask)
    assert tag2 == "lq+first-differences"
    _, tag3 = analysis.sobolev_norm(u, 1.5, 2.0, mask)
    assert tag3 == "lq+gagliardo-of-differences(sigma=0.5)"


# ---------------------------------------------------------------------------
# Refinement scans
# ---------------------------------------------------------------------------

def test_regularity_scan_smooth_data_is_bounded():
    spec = kernels.fractional_laplacian_kernel(2, 0.75)
    shape = domain.Ball(center=[0.0, 0.0], radius=1.0)
    mu = measures.density_measure(
        lambda p: np.exp(-np.sum(np.asarray(p) ** 2, axis=-1)))
    res = analysis.regularity_scan(spec, shape, mu, [24, 32, 48],
                                   {"kind": "lq", "q": 2.0})
    assert res.verdict == "bounded"
    assert len(res.levels) == 3


def test_regularity_scan_needs_three_levels():
    spec = kernels.fractional_laplacian_kernel(2, 0.75)
    shape = domain.Ball(center=[0.0, 0.0], radius=1.0)
    with pytest.raises(DomainParameterError):
        analysis.regularity_scan(spec, shape, measures.RadonMeasure(),
                                 [16, 32], {"kind": "lq", "q": 2.0})


# ---------------------------------------------------------------------------
# Seeded bump families
# ---------------------------------------------------------------------------

def test_random_bumps_deterministic_and_supported():
    shape = domain.Ball(center=[0.0, 0.0], radius=1.0)
    a = analysis.random_bump_functions(shape, 4, seed=9)
    b = analysis.random_bump_functions(shape, 4, seed=9)
    pts = np.array([[0.1, 0.2], [-0.4, 0.3], [0.0, 0.0]])
    for fa, fb in zip(a, b):
        assert np.array_equal(fa(pts), fb(pts))
    c = analysis.random_bump_functions(shape, 4, seed=10)
    assert not all(np.array_equal(fa(pts), fc(pts)) for fa, fc in zip(a, c))
