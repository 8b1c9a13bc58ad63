from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special, stats

from energyfp.density import (
    DiracMixture,
    Exponential,
    GaussianND,
    Grid1D,
    GridDensity1D,
    SampleCloud,
    Uniform,
    cdf_from_density,
    mean_from_cdf,
    quantile_cloud,
    rasterize,
)
from energyfp.errors import (
    AlphaOutOfRange,
    DimensionMismatch,
    GridMismatch,
    NonPositiveMean,
    OrderNotAdmissible,
)
from energyfp.fourier import default_grid_for
from energyfp.metrics import (
    cramer,
    cramer_cdf,
    cramer_expectation,
    cramer_fourier,
    cramer_steps,
    d1_metric,
    energy_alpha_fourier,
    energy_alpha_grid,
    energy_alpha_pairwise,
    energy_negative_order,
    gini,
    interpolation_bound,
    metric_constants,
    min_cdf,
    optimized_bound,
    split_bound,
)


def gauss(m, v=1.0):
    return GaussianND((float(m),), float(v))


def grid_pair(a, b, lo, hi, n=4096):
    g = Grid1D(lo, hi, n)
    return rasterize(a, g), rasterize(b, g)


def folded_normal_mean(mu, var):
    s = math.sqrt(var)
    return s * math.sqrt(2 / math.pi) * math.exp(-mu * mu / (2 * var)) + mu * (1 - 2 * stats.norm.cdf(-mu / s))


# constants


def test_constant_examples():
    assert metric_constants(1, 1.0).c == pytest.approx(1 / math.pi, rel=1e-14)
    assert metric_constants(3, 1.0).d == pytest.approx(1 / (2 * math.pi ** 2), rel=1e-14)
    k = metric_constants(1, 0.5)
    assert k.d is None and k.D is None


@pytest.mark.parametrize("n,alpha", [(2, 0.5), (2, 1.0), (3, 1.5), (5, 0.3)])
def test_constant_relations(n, alpha):
    k = metric_constants(n, alpha)
    area = 2 * math.pi ** (n / 2) / math.gamma(n / 2)
    assert k.A == pytest.approx(k.c * area)
    assert k.B == pytest.approx(alpha * (n - 2 + alpha))
    p, q = 2 / (4 - alpha), (2 - alpha) / (4 - alpha)
    assert k.D == pytest.approx(k.A ** p * k.B ** q * (2 ** q / (2 - alpha) + 0.5 ** p))


def test_alpha_range():
    with pytest.raises(AlphaOutOfRange):
        metric_constants(1, 2.0)
    with pytest.raises(AlphaOutOfRange):
        energy_alpha_pairwise(DiracMixture(((0.0,),), (1.0,)), DiracMixture(((1.0,),), (1.0,)), 0.0)


# Cramér


def test_cramer_cdf_identity_and_points():
    f, _ = grid_pair(gauss(0), gauss(1), -10, 11, 512)
    F = cdf_from_density(f)
    assert cramer_cdf(F, F).value == 0.0
    a = DiracMixture(((0.0,),), (1.0,))
    b = DiracMixture(((1.5,),), (1.0,))
    assert cramer_steps(a, b).value == pytest.approx(1.5, abs=1e-15)


def test_cramer_cdf_gaussians_oracle():
    f, g = grid_pair(gauss(0), gauss(1), -10, 11)
    oracle, _ = integrate.quad(lambda x: (special.ndtr(x) - special.ndtr(x - 1)) ** 2, -np.inf, np.inf, epsabs=1e-13)
    d = cramer_cdf(cdf_from_density(f), cdf_from_density(g))
    assert d.value == pytest.approx(oracle, abs=1e-5)


def test_cramer_grid_mismatch():
    f = rasterize(gauss(0), Grid1D(-10, 10, 128))
    g = rasterize(gauss(0), Grid1D(-10, 10, 256))
    with pytest.raises(GridMismatch):
        cramer_cdf(cdf_from_density(f), cdf_from_density(g))


def test_cramer_expectation_examples():
    X = quantile_cloud(gauss(0), 200)
    Y = quantile_cloud(gauss(1), 200)
    assert cramer_expectation(X, X).value == pytest.approx(0.0, abs=1e-14)
    a = DiracMixture(((0.0,),), (1.0,))
    b = DiracMixture(((1.5,),), (1.0,))
    assert cramer_expectation(a, b).value == pytest.approx(1.5, abs=1e-14)
    assert cramer_expectation(X, Y).value == pytest.approx(cramer_steps(X, Y).value, abs=1e-10)
    with pytest.raises(DimensionMismatch):
        cramer_expectation(SampleCloud(np.zeros((2, 2))), SampleCloud(np.ones((2, 2))))


@pytest.mark.parametrize("b", [gauss(1), gauss(0, 4)])
def test_cramer_fourier_matches_cdf(b):
    f, g = grid_pair(gauss(0), b, -12, 13)
    ref = cramer_cdf(cdf_from_density(f), cdf_from_density(g)).value
    assert cramer_fourier(f, g).value == pytest.approx(ref, rel=1e-3)
    assert cramer_fourier(f, f).value == pytest.approx(0.0, abs=1e-12)
    # the analytic pair gives the same number
    assert cramer_fourier(gauss(0), b).value == pytest.approx(ref, rel=1e-3)


def test_cramer_dispatch():
    f, g = grid_pair(gauss(0), gauss(1), -10, 11, 1024)
    assert cramer(f, g).form == "cdf"
    assert cramer(f, g, "fourier").form == "fourier"


# Gini


def test_gini_examples():
    assert gini(DiracMixture(((1.0,),), (1.0,))).value == pytest.approx(0.0, abs=1e-15)
    u = gini(rasterize(Uniform(0.0, 1.0), Grid1D(0.0, 1.0, 1000)))
    assert u.value == pytest.approx(1 / 3, abs=1e-6)
    assert u.details["cdf_form"] == pytest.approx(1 / 3, abs=1e-6)
    e = gini(rasterize(Exponential(1.0), Grid1D(0.0, 30.0, 4096), max_tail=1e-12))
    assert e.value == pytest.approx(0.5, abs=1e-4)
    assert e.details["discrepancy"] < 1e-6


def test_gini_uniform_double_quadrature_oracle():
    # E|X - X'| / (2 E X) for uniform[0,1]
    emd, _ = integrate.dblquad(lambda y, x: abs(x - y), 0, 1, 0, 1, epsabs=1e-12)
    assert emd / (2 * 0.5) == pytest.approx(1 / 3, abs=1e-8)


def test_gini_cloud_forms_agree():
    g = gini(quantile_cloud(Exponential(1.0), 500))
    assert g.details["discrepancy"] < 1e-10


def test_gini_errors():
    with pytest.raises(NonPositiveMean):
        gini(DiracMixture(((0.0,),), (1.0,)))


def test_min_cdf_examples():
    f = rasterize(Uniform(0.0, 1.0), Grid1D(0.0, 1.0, 1000))
    F = cdf_from_density(f)
    H = min_cdf(F, F)
    assert np.allclose(H.values, 1 - (1 - F.values) ** 2)
    assert mean_from_cdf(H) == pytest.approx(1 / 3, abs=1e-4)
    g = Grid1D(0.0, 1.0, 1000)
    vals = np.zeros(1000)
    vals[0] = 1 / g.h
    G = cdf_from_density(GridDensity1D(g, vals))
    assert np.allclose(min_cdf(F, G).values, 1.0)


# energy distances


def test_pairwise_examples():
    X = quantile_cloud(gauss(0), 100)
    assert energy_alpha_pairwise(X, X, 1.3).value == pytest.approx(0.0, abs=1e-14)
    for n in (1, 2, 3):
        a = np.linspace(0.3, 1.1, n)
        p = DiracMixture((tuple(np.zeros(n)),), (1.0,))
        q = DiracMixture((tuple(a),), (1.0,))
        for alpha in (0.5, 1.0, 1.7):
            expect = 2 * np.linalg.norm(a) ** alpha
            assert energy_alpha_pairwise(p, q, alpha).value == pytest.approx(expect, rel=1e-14)
    Y = quantile_cloud(Uniform(-1.0, 2.0), 77)
    e = energy_alpha_pairwise(X, Y, 1.0).value
    assert e == pytest.approx(2 * cramer_expectation(X, Y).value, rel=1e-13)


def test_pairwise_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        energy_alpha_pairwise(SampleCloud(np.zeros((2, 1))), SampleCloud(np.zeros((2, 2))), 1.0)


def test_grid_energy_examples():
    f, g = grid_pair(gauss(0), gauss(1), -10, 11)
    assert energy_alpha_grid(f, f, 1.0).value == pytest.approx(0.0, abs=1e-14)
    e = energy_alpha_grid(f, g, 1.0).value
    cr = cramer_cdf(cdf_from_density(f), cdf_from_density(g)).value
    assert e == pytest.approx(2 * cr, rel=1e-4)
    # 2 E|X-Y| - E|X-X'| - E|Y-Y'| with folded-normal means
    oracle = 2 * folded_normal_mean(1.0, 2.0) - 2 * folded_normal_mean(0.0, 2.0)
    assert e == pytest.approx(oracle, abs=1e-4)


def test_energy_fourier_examples():
    f, g = grid_pair(gauss(0), gauss(1), -10, 11)
    assert energy_alpha_fourier(f, f, 1.0).value == pytest.approx(0.0, abs=1e-12)
    X, Y = quantile_cloud(gauss(0), 400), quantile_cloud(gauss(1), 400)
    pw = energy_alpha_pairwise(X, Y, 1.0).value
    assert energy_alpha_fourier(gauss(0), gauss(1), 1.0).value == pytest.approx(pw, rel=1e-3)


def test_fourier_energy_is_twice_parseval_cramer_on_same_grid():
    f, g = grid_pair(gauss(0), Uniform(-1.0, 2.0), -8, 8, 512)
    fg = default_grid_for(f, g)
    e = energy_alpha_fourier(f, g, 1.0, fg).value
    c = cramer_fourier(f, g, fg).value
    assert e == pytest.approx(2 * c, rel=1e-12)


def test_negative_order_examples():
    a = GaussianND((0.0, 0.0, 0.0), 1.0)
    b = GaussianND((0.0, 0.0, 0.0), 2.0)
    assert energy_negative_order(a, a, 1.0).value == pytest.approx(0.0, abs=1e-12)
    pw = energy_negative_order(a, b, 1.0).value
    fo = energy_negative_order(a, b, 1.0, backend="fourier").value
    assert pw > 0
    assert pw == pytest.approx(fo, rel=1e-2)
    with pytest.raises(OrderNotAdmissible):
        energy_negative_order(gauss(0), gauss(1), 0.5)


def test_d1_examples():
    f = GaussianND((0.0, 0.0), 1.0)
    assert d1_metric(f, f).value == pytest.approx(0.0, abs=1e-12)
    p = DiracMixture(((0.0,),), (1.0,))
    q = DiracMixture(((1.5,),), (1.0,))
    assert d1_metric(p, q).value == pytest.approx(1.5, rel=1e-12)
    # oracle: dense scan of 2|sin(xi a / 2)| / xi
    xi = np.linspace(1e-6, 50, 200001)
    assert np.max(2 * np.abs(np.sin(xi * 0.75)) / xi) <= 1.5
    delta = 0.1
    vals = []
    for t in (0.0, 0.5, 2.0):
        v = 1 + 2 * t
        vals.append(d1_metric(GaussianND((0.0,), v), GaussianND((delta,), v)).value)
    assert vals[0] >= delta * (1 - 1e-6)
    assert all(b <= a * (1 + 1e-9) for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("f,g,alpha", [
    (GaussianND((0.0, 0.0), 1.0), GaussianND((1.0, 0.0), 1.0), 1.0),
    (GaussianND((0.0, 0.0, 0.0), 1.0), GaussianND((0.0, 0.0, 0.0), 1.5), 0.5),
])
def test_interpolation_bound_examples(f, g, alpha):
    trivial = interpolation_bound(f, f, alpha)
    assert trivial.lhs == pytest.approx(0.0, abs=1e-12) and trivial.holds
    R0 = interpolation_bound(f, g, alpha)
    chk = interpolation_bound(f, g, alpha, R=R0.r_opt * np.logspace(-1, 1, 20))
    assert chk.holds and chk.lhs > 0
    opt = optimized_bound(f.dim, alpha, chk.d1, chk.e_neg)
    assert opt == pytest.approx(chk.rhs)
    for _, val in chk.split:
        assert val >= opt * (1 - 1e-9)
        assert val >= chk.lhs


def test_interpolation_bound_needs_admissible_order():
    with pytest.raises(OrderNotAdmissible):
        interpolation_bound(gauss(0), gauss(1), 1.0)


# properties

small = st.floats(-3, 3, allow_nan=False)


@st.composite
def dirac_mixtures(draw, n=None):
    n = n or draw(st.integers(1, 3))
    k = draw(st.integers(1, 5))
    pts = [tuple(draw(small) for _ in range(n)) for _ in range(k)]
    w = np.array([draw(st.floats(0.1, 1.0)) for _ in range(k)])
    return DiracMixture(tuple(pts), tuple(w / w.sum()))


@settings(max_examples=80, deadline=None)
@given(st.data(), st.floats(0.05, 1.95))
def test_pairwise_symmetric_nonnegative(data, alpha):
    n = data.draw(st.integers(1, 3))
    f = data.draw(dirac_mixtures(n))
    g = data.draw(dirac_mixtures(n))
    a = energy_alpha_pairwise(f, g, alpha)
    b = energy_alpha_pairwise(g, f, alpha)
    assert a.value == pytest.approx(b.value, rel=1e-12, abs=1e-12)
    assert a.details["raw"] >= -1e-12
    assert energy_alpha_pairwise(f, f, alpha).value <= 1e-12


@settings(max_examples=80, deadline=None)
@given(st.data(), st.floats(0.05, 1.95), st.floats(0.1, 10))
def test_scaling_law_point_masses(data, alpha, c):
    n = data.draw(st.integers(1, 3))
    f = data.draw(dirac_mixtures(n))
    g = data.draw(dirac_mixtures(n))
    base = energy_alpha_pairwise(f, g, alpha).value
    fc = DiracMixture(tuple(map(tuple, c * f.points)), f.weights)
    gc = DiracMixture(tuple(map(tuple, c * g.points)), g.weights)
    assert energy_alpha_pairwise(fc, gc, alpha).value == pytest.approx(c ** alpha * base, rel=1e-9, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 1.9), st.floats(0.25, 4.0), st.floats(-1, 1))
def test_scaling_law_grid(alpha, c, shift):
    g0 = Grid1D(-6.0, 6.0, 256)
    f = rasterize(GaussianND((shift,), 0.5), g0)
    g = rasterize(Uniform(-1.0, 1.5), g0)
    base = energy_alpha_grid(f, g, alpha).value
    scaled = energy_alpha_grid(f.scaled(c), g.scaled(c), alpha).value
    assert scaled == pytest.approx(c ** alpha * base, rel=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_cramer_forms_symmetric(data):
    f = data.draw(dirac_mixtures(1))
    g = data.draw(dirac_mixtures(1))
    a, b = cramer_steps(f, g).value, cramer_steps(g, f).value
    assert a == pytest.approx(b, rel=1e-12, abs=1e-15)
    assert cramer_expectation(f, g).value == pytest.approx(a, rel=1e-9, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0, 5), min_size=16, max_size=16), st.lists(st.floats(0, 5), min_size=16, max_size=16),
       st.floats(0.1, 1.9))
def test_negative_order_nonnegative_and_symmetric(u, v, alpha):
    g = Grid1D(-2.0, 2.0, 16)
    if sum(u) == 0 or sum(v) == 0:
        return
    f1 = GridDensity1D.from_values(g, u)
    f2 = GridDensity1D.from_values(g, v)
    if alpha <= 1.0:
        with pytest.raises(OrderNotAdmissible):
            energy_negative_order(f1, f2, alpha)
        return
    a = energy_negative_order(f1, f2, alpha)
    b = energy_negative_order(f2, f1, alpha)
    assert a.details["raw"] >= -1e-10
    assert a.value == pytest.approx(b.value, rel=1e-10, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([2, 3]), st.floats(0.2, 1.8), st.floats(1e-3, 2), st.floats(1e-4, 2),
       st.floats(-2, 2))
def test_split_bound_dominates_optimized(n, alpha, d1, e_neg, log_r):
    R = 10.0 ** log_r
    assert split_bound(n, alpha, d1, e_neg, R) >= optimized_bound(n, alpha, d1, e_neg) * (1 - 1e-9)


def test_identical_inputs_within_error():
    f = GaussianND((0.0, 0.0), 1.0)
    assert energy_alpha_fourier(f, f, 1.0).value <= energy_alpha_fourier(f, f, 1.0).error + 1e-15
