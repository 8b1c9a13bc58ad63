from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from energyfp.density import (
    Barenblatt,
    BetaOpinion,
    DiracMixture,
    Exponential,
    GaussianND,
    Grid1D,
    GridDensity1D,
    InverseGamma,
    SampleCloud,
    Uniform,
    analytic_from_json,
    cdf_from_density,
    is_symmetric,
    mean_from_cdf,
    moment,
    quantile_cloud,
    rasterize,
)
from energyfp.errors import MomentDiverges, TailMassTooLarge, ValidationError


def test_grid_invariants():
    g = Grid1D(-1.0, 3.0, 16)
    assert g.h == pytest.approx(0.25)
    assert np.all(np.diff(g.centers) > 0)
    assert np.allclose(np.diff(g.centers), g.h, rtol=0, atol=1e-15)
    with pytest.raises(ValidationError):
        Grid1D(1.0, 0.0, 16)
    with pytest.raises(ValidationError):
        Grid1D(0.0, 1.0, 7)


def test_grid_density_rejects_bad_values():
    g = Grid1D(0.0, 1.0, 10)
    with pytest.raises(ValidationError):
        GridDensity1D(g, -np.ones(10))
    with pytest.raises(ValidationError):
        GridDensity1D(g, 2 * np.ones(10))
    f = GridDensity1D.from_values(g, np.arange(10.0))
    assert f.mass == pytest.approx(1.0, abs=1e-12)


def test_cdf_uniform_half():
    g = Grid1D(0.0, 1.0, 100)
    F = cdf_from_density(rasterize(Uniform(0.0, 1.0), g))
    assert F(0.5) == pytest.approx(0.5, abs=g.h)


def test_cdf_of_single_cell_mass():
    g = Grid1D(-1.0, 1.0, 20)
    vals = np.zeros(20)
    vals[10] = 1.0 / g.h
    F = cdf_from_density(GridDensity1D(g, vals))
    assert np.all(F.values[:10] == 0.0)
    assert np.all(F.values[10:] == pytest.approx(1.0))


def test_cdf_gaussian_symmetry():
    g = Grid1D(-8.0, 8.0, 512)
    F = cdf_from_density(rasterize(GaussianND((0.0,), 1.0), g))
    assert F(0.0) == pytest.approx(0.5, abs=1e-3)


def test_mean_from_cdf_examples():
    u = cdf_from_density(rasterize(Uniform(0.0, 1.0), Grid1D(0.0, 1.0, 200)))
    assert mean_from_cdf(u) == pytest.approx(0.5, abs=1e-6)
    gauss = cdf_from_density(rasterize(GaussianND((0.0,), 1.0), Grid1D(-8.0, 8.0, 512)))
    assert mean_from_cdf(gauss) == pytest.approx(0.0, abs=1e-6)


def test_mean_from_cdf_inverse_gamma_oracle():
    a = InverseGamma(3.0)
    f = rasterize(a, Grid1D(0.0, 60.0, 4096), max_tail=1e-3)
    # oracle: direct quadrature of x f(x) over the same window, renormalized
    num, _ = integrate.quad(lambda x: x * a.pdf(x), 0, 60, limit=400, points=[0.5, 1, 2, 5])
    den, _ = integrate.quad(lambda x: a.pdf(x), 0, 60, limit=400, points=[0.5, 1, 2, 5])
    m = mean_from_cdf(cdf_from_density(f))
    assert m == pytest.approx(num / den, abs=1e-4)
    assert m == pytest.approx(1.0, abs=1e-2)


def test_rasterize_beta_symmetric():
    f = rasterize(BetaOpinion(0.0, 0.5), Grid1D(-1.0, 1.0, 400))
    assert is_symmetric(f, 1e-12)
    assert f.mass == pytest.approx(1.0, abs=1e-8)


def test_rasterize_barenblatt_support():
    b = Barenblatt(2.0)
    f = rasterize(b, Grid1D(-2.0, 2.0, 400))
    outside = np.abs(f.grid.centers) - f.grid.h / 2 > b.C
    assert np.all(f.values[outside] == 0.0)
    assert np.all(f.values[np.abs(f.grid.centers) < 0.9 * b.C] > 0)


def test_rasterize_tail_error():
    with pytest.raises(TailMassTooLarge):
        rasterize(GaussianND((0.0,), 1.0), Grid1D(-3.0, 3.0, 100))
    # the clipped mass matches the complementary error function
    assert GaussianND((0.0,), 1.0).mass_outside(-3, 3) == pytest.approx(special.erfc(3 / math.sqrt(2)))


def test_point_masses_never_rasterized():
    with pytest.raises(ValidationError):
        rasterize(DiracMixture(((0.0,),), (1.0,)), Grid1D(-1.0, 1.0, 10))


def test_moment_examples():
    d = DiracMixture(((0.0,), (2.0,)), (0.5, 0.5))
    assert moment(d, 1) == pytest.approx(1.0)
    u = rasterize(Uniform(0.0, 1.0), Grid1D(0.0, 1.0, 100))
    assert moment(u, 2) == pytest.approx(1 / 3, abs=1e-6)
    with pytest.raises(MomentDiverges):
        moment(InverseGamma(2.0), 2)
    assert moment(InverseGamma(3.0), 1) == pytest.approx(1.0)


def test_sample_cloud_weights():
    with pytest.raises(ValidationError):
        SampleCloud(np.zeros((3, 1)), np.array([0.5, 0.5, 0.5]))
    with pytest.raises(ValidationError):
        SampleCloud(np.array([[np.inf]]))
    c = SampleCloud(np.arange(4.0)[:, None])
    assert c.weights.sum() == pytest.approx(1.0)


def test_dirac_weights_sum_to_one():
    with pytest.raises(ValidationError):
        DiracMixture(((0.0,), (1.0,)), (0.5, 0.6))


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_barenblatt_normalization(p):
    b = Barenblatt(p)
    mass, _ = integrate.quad(b.pdf, -b.C, b.C)
    assert mass == pytest.approx(1.0, abs=1e-10)
    L = max(2.0, 1.25 * b.C)
    assert rasterize(b, Grid1D(-L, L, 512)).mass == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("a", [
    GaussianND((0.3,), 0.7), Barenblatt(2.0), InverseGamma(4.0), BetaOpinion(0.2, 0.5),
    Uniform(-1.0, 2.0), Exponential(2.0), DiracMixture(((0.0,), (1.5,)), (0.25, 0.75)),
])
def test_json_round_trip(a):
    assert analytic_from_json(a.to_json()) == a


def test_quantile_cloud_midpoints():
    c = quantile_cloud(Uniform(0.0, 1.0), 4)
    assert np.allclose(c.points[:, 0], [0.125, 0.375, 0.625, 0.875])


def test_steady_state_parameters():
    mu = InverseGamma(3.0)
    assert mu.mean() == pytest.approx(1.0)
    b = BetaOpinion(0.2, 0.5)
    assert b.exponents == pytest.approx((-1 + 0.8 / 0.5, -1 + 1.2 / 0.5))


# properties


@st.composite
def grid_densities(draw):
    n = draw(st.integers(8, 120))
    lo = draw(st.floats(-5, 0))
    width = draw(st.floats(0.5, 10))
    vals = np.array(draw(st.lists(st.floats(0, 10), min_size=n, max_size=n)))
    if vals.sum() == 0:
        vals[0] = 1.0
    return GridDensity1D.from_values(Grid1D(lo, lo + width, n), vals)


@settings(max_examples=60, deadline=None)
@given(grid_densities())
def test_cdf_difference_round_trip(f):
    F = cdf_from_density(f)
    back = np.diff(F.node_values) / f.h
    assert np.max(np.abs(back - f.values)) <= 1e-6


@settings(max_examples=60, deadline=None)
@given(grid_densities())
def test_mean_from_cdf_matches_direct(f):
    direct = f.h * np.sum(f.grid.centers * f.values)
    assert mean_from_cdf(cdf_from_density(f)) == pytest.approx(direct, abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.floats(-2, 2), st.floats(0.05, 1.0), st.integers(8, 300))
def test_rasterize_preserves_symmetry(c, v, n):
    L = 8 * math.sqrt(v) + 1
    f = rasterize(GaussianND((c,), v), Grid1D(c - L, c + L, n))
    assert np.max(np.abs(f.values - f.values[::-1])) <= 1e-12 * f.values.max()
