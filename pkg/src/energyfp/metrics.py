"""Cramér, energy and Fourier-based distances in their equivalent forms.

Every function returns a :class:`DistanceValue` recording which form produced
it and an estimate of its numerical error, so that the different forms can be
compared against each other.

Conventions
-----------
For two probability densities with difference ``D = f - g`` on R^n:

* ``E_alpha(f, g) = -int int |x - y|^alpha D(x) D(y) dx dy
  = c_{n,alpha} int |D^(xi)|^2 / |xi|^(n + alpha) dxi``
* ``E_-(f, g) = int int |x - y|^-(2 - alpha) D(x) D(y) dx dy
  = d_{n,alpha} int |D^(xi)|^2 / |xi|^(n - 2 + alpha) dxi``
* ``d_1(f, g) = sup |D^(xi)| / |xi|``

In one dimension ``E_1 = 2 * cramer``.  Splitting the Fourier integral of
``E_alpha`` at radius ``R`` and bounding each piece gives

    E_alpha <= A d_1^2 R^(2-alpha) / (2-alpha) + B E_- / R^2

with ``A = c_{n,alpha} |S^{n-1}|`` (surface area of the unit sphere) and
``B = c_{n,alpha} / d_{n,alpha} = alpha (n - 2 + alpha)``; minimizing over
``R`` yields ``E_alpha <= D_{n,alpha} d_1^(4/(4-alpha)) E_-^((2-alpha)/(4-alpha))``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import optimize, special

from . import kernels
from .density import (
    AnalyticDensity,
    CdfCurve,
    DiracMixture,
    GaussianMixture,
    GaussianND,
    Grid1D,
    GridDensity1D,
    GridDensityND,
    SampleCloud,
    cdf_from_density,
    rasterize_nd,
)
from .errors import (
    AlphaOutOfRange,
    DimensionMismatch,
    GridMismatch,
    NonPositiveMean,
    OrderNotAdmissible,
    ValidationError,
)
from .fourier import (
    FourierGrid,
    default_grid_for,
    grid_axis_factors,
    grid_char_diff_1d,
    mixture_char_diff,
    mixture_components,
    radial_spectrum,
    spectral_pair,
    spectrum_tail_bound,
    sphere_directions,
)

EPS = np.finfo(float).eps
BLOCK = 256


@dataclass(frozen=True)
class DistanceValue:
    """A distance together with the form that produced it."""

    value: float
    form: str
    error: float = 0.0
    details: dict = field(default_factory=dict, compare=False)

    def __float__(self) -> float:
        return float(self.value)


def _dv(raw: float, form: str, error: float, **details) -> DistanceValue:
    details.setdefault("raw", float(raw))
    return DistanceValue(max(float(raw), 0.0), form, float(abs(error)), details)


# ---------------------------------------------------------------------------
# constants


def sphere_area(n: int) -> float:
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 2.0:
        raise AlphaOutOfRange(f"alpha={alpha} must lie in (0, 2)")
    return alpha


def admissible(n: int, alpha: float) -> bool:
    return n - 2 + alpha > 0


@dataclass(frozen=True)
class MetricConstants:
    """Constants of the Fourier forms and of the interpolation bound.

    ``d``, ``A``, ``B`` and ``D`` are ``None`` when the negative-order
    distance is not defined (``n - 2 + alpha <= 0``).
    """

    n: int
    alpha: float
    c: float
    d: float | None
    A: float | None
    B: float | None
    D: float | None


@lru_cache(maxsize=None)
def metric_constants(n: int, alpha: float) -> MetricConstants:
    alpha = check_alpha(alpha)
    if int(n) != n or n < 1:
        raise ValidationError(f"dimension n={n} must be a positive integer")
    n = int(n)
    g2 = special.gamma((2 - alpha) / 2)
    c = alpha * 2 ** alpha * special.gamma((n + alpha) / 2) / (2 * math.pi ** (n / 2) * g2)
    if not admissible(n, alpha):
        return MetricConstants(n, alpha, float(c), None, None, None, None)
    d = 2 ** alpha / (4 * math.pi ** (n / 2)) * special.gamma((n - 2 + alpha) / 2) / g2
    A = c * sphere_area(n)
    B = c / d
    p, q = 2 / (4 - alpha), (2 - alpha) / (4 - alpha)
    D = A ** p * B ** q * (2 ** q / (2 - alpha) + 0.5 ** p)
    return MetricConstants(n, alpha, float(c), float(d), float(A), float(B), float(D))


# ---------------------------------------------------------------------------
# pairwise sums


def _as_cloud(x) -> SampleCloud:
    if isinstance(x, SampleCloud):
        return x
    if isinstance(x, DiracMixture):
        return x.to_cloud()
    if isinstance(x, GridDensity1D):
        return x.to_cloud()
    raise ValidationError(f"expected a sample cloud, got {type(x).__name__}")


def _block_form(z: np.ndarray, c: np.ndarray, alpha: float, lo: int, hi: int) -> tuple[float, float]:
    diff = z[lo:hi, None, :] - z[None, :, :]
    r = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)) if z.shape[1] > 1 else np.abs(diff[..., 0])
    K = r ** alpha
    row = K @ c
    absrow = K @ np.abs(c)
    return float(np.dot(c[lo:hi], row)), float(np.dot(np.abs(c[lo:hi]), absrow))


def signed_pair_sum(z: np.ndarray, c: np.ndarray, alpha: float, threads: int = 1) -> tuple[float, float]:
    """``sum_ij c_i c_j |z_i - z_j|^alpha`` and the same sum with ``|c|``.

    Rows are processed in fixed blocks and the block partials reduced with
    ``math.fsum``, so the result does not depend on ``threads``.
    """
    bounds = [(lo, min(lo + BLOCK, len(c))) for lo in range(0, len(c), BLOCK)]
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda b: _block_form(z, c, alpha, *b), bounds))
    else:
        parts = [_block_form(z, c, alpha, *b) for b in bounds]
    return math.fsum(p[0] for p in parts), math.fsum(p[1] for p in parts)


def energy_alpha_pairwise(X, Y, alpha: float, threads: int = 1) -> DistanceValue:
    """V-statistic of the energy distance between two weighted point sets."""
    alpha = check_alpha(alpha)
    X, Y = _as_cloud(X), _as_cloud(Y)
    if X.dim != Y.dim:
        raise DimensionMismatch(f"dimensions differ: {X.dim} vs {Y.dim}")
    z = np.concatenate([X.points, Y.points])
    c = np.concatenate([X.weights, -Y.weights])
    s, sabs = signed_pair_sum(z, c, alpha, threads)
    err = 4 * EPS * sabs * math.log2(len(c) + 1)
    return _dv(-s, "pairwise", err, n_points=len(c))


# ---------------------------------------------------------------------------
# Cramér distance


def _same_grid(a, b):
    if not a.grid.same_as(b.grid):
        raise GridMismatch("arguments live on different grids")


def cramer_cdf(F: CdfCurve, G: CdfCurve) -> DistanceValue:
    """``int (F - G)^2 dx`` by the trapezoid rule on the CDF nodes."""
    _same_grid(F, G)
    d = F.node_values - G.node_values
    h = F.grid.h
    a, b = d[:-1], d[1:]
    val = h * math.fsum(0.5 * (a * a + b * b))
    # trapezoid overshoots the exact integral of the piecewise-linear square by h (a-b)^2 / 6
    err = h * math.fsum((a - b) ** 2) / 6 + F.grid.n_cells * h * (4 * EPS) ** 2
    return _dv(val, "cdf", err)


def cramer_steps(X, Y) -> DistanceValue:
    """Exact ``int (F_X - F_Y)^2`` for the step CDFs of two 1D clouds."""
    X, Y = _as_cloud(X), _as_cloud(Y)
    if X.dim != 1 or Y.dim != 1:
        raise DimensionMismatch("Cramér distance is defined for one-dimensional data")
    x = np.concatenate([X.points[:, 0], Y.points[:, 0]])
    c = np.concatenate([X.weights, -Y.weights])
    order = np.argsort(x, kind="stable")
    x, c = x[order], c[order]
    D = np.cumsum(c)
    val = math.fsum(D[:-1] ** 2 * np.diff(x))
    return _dv(val, "cdf", 4 * EPS * max(val, 0.0))


def cramer_expectation(X, Y, threads: int = 1) -> DistanceValue:
    """``E|X-Y| - E|X-X'|/2 - E|Y-Y'|/2`` (V-statistic)."""
    X, Y = _as_cloud(X), _as_cloud(Y)
    if X.dim != 1 or Y.dim != 1:
        raise DimensionMismatch("Cramér distance is defined for one-dimensional data")
    e = energy_alpha_pairwise(X, Y, 1.0, threads)
    return _dv(0.5 * e.details["raw"], "expectation", 0.5 * e.error)


def cramer_fourier(f, g, fg: FourierGrid | None = None) -> DistanceValue:
    """Parseval form ``(1/2pi) int |f^ - g^|^2 / xi^2 dxi``.

    The integrand tends to ``(mean_f - mean_g)^2 / (2 pi)`` at the origin;
    the quadrature never samples ``xi = 0``.
    """
    f, g = spectral_pair(f, g)
    if f.dim != 1:
        raise DimensionMismatch("Cramér distance is defined for one-dimensional data")
    fg = fg or default_grid_for(f, g)
    S = radial_spectrum(f, g, fg.nodes)
    val = fg.integrate(S / fg.nodes ** 2) / math.pi
    tail = spectrum_tail_bound(f, g, -2.0, fg.xi_max) / math.pi
    return _dv(val, "fourier", tail + 1e-12 * abs(val), xi_max=fg.xi_max, nodes=fg.size, tail_bound=tail)


def cramer(f, g, form: str = "cdf") -> DistanceValue:
    """Dispatch on representation: grid densities, clouds or CDF curves."""
    if form == "fourier":
        return cramer_fourier(f, g)
    if isinstance(f, CdfCurve):
        return cramer_cdf(f, g)
    if isinstance(f, GridDensity1D):
        if form == "expectation":
            return cramer_expectation(f, g)
        _same_grid(f, g)
        return cramer_cdf(cdf_from_density(f), cdf_from_density(g))
    if form == "expectation":
        return cramer_expectation(f, g)
    return cramer_steps(f, g)


def min_cdf(F: CdfCurve, G: CdfCurve) -> CdfCurve:
    """Distribution function of ``min(X, Y)`` for independent ``X, Y``."""
    _same_grid(F, G)
    H = 1.0 - (1.0 - F.values) * (1.0 - G.values)
    return CdfCurve(F.grid, np.clip(np.maximum.accumulate(H), 0.0, 1.0))


# ---------------------------------------------------------------------------
# Gini index


def _sq_linear(x: np.ndarray, y: np.ndarray) -> float:
    """Exact ``int y^2`` for piecewise-linear ``y`` through the nodes."""
    a, b = y[:-1], y[1:]
    return math.fsum(np.diff(x) * (a * a + a * b + b * b) / 3.0)


def _lin_product(x, y1, y2) -> float:
    a1, b1, a2, b2 = y1[:-1], y1[1:], y2[:-1], y2[1:]
    return math.fsum(np.diff(x) * (2 * a1 * a2 + a1 * b2 + b1 * a2 + 2 * b1 * b2) / 6.0)


def _positive_part_nodes(F: CdfCurve):
    x, y = F.nodes, F.node_values
    if x[0] < 0.0:
        if float(np.interp(0.0, x, y)) > 1e-12:
            raise ValidationError("Gini index requires a nonnegative random variable")
        k = np.searchsorted(x, 0.0)
        x = np.concatenate(([0.0], x[k:]))
        y = np.concatenate(([0.0], y[k:]))
    elif x[0] > 0.0:
        x = np.concatenate(([0.0], x))
        y = np.concatenate(([0.0], y))
    return x, y


def gini(X) -> DistanceValue:
    """Gini index ``E|X - X'| / (2 E X)`` and its CDF form ``1 - (1/EX) int (1 - F)^2``.

    Accepts a :class:`GridDensity1D`, a :class:`CdfCurve` or a 1D cloud.  Both
    forms are returned; ``value`` holds the expectation form and
    ``details['cdf_form']`` the CDF form.
    """
    if isinstance(X, (GridDensity1D, CdfCurve)):
        F = cdf_from_density(X) if isinstance(X, GridDensity1D) else X
        x, y = _positive_part_nodes(F)
        one = 1.0 - y
        mean = math.fsum(np.diff(x) * (one[:-1] + one[1:]) / 2)
        tail_sq = _sq_linear(x, one)
        if isinstance(X, GridDensity1D):
            # cell-constant density: exact double integral of |x - y| f f
            emd = kernels.quadratic_form(X.values, X.values, X.h, 1.0, "cell")
        else:
            emd = 2.0 * _lin_product(x, y, one)
    else:
        C = _as_cloud(X)
        if C.dim != 1:
            raise DimensionMismatch("Gini index needs one-dimensional data")
        if C.points.min() < 0:
            raise ValidationError("Gini index requires a nonnegative random variable")
        order = np.argsort(C.points[:, 0], kind="stable")
        pts = C.points[order, 0]
        w = C.weights[order]
        mean = math.fsum(w * pts)
        s, _ = signed_pair_sum(pts[:, None], w, 1.0)
        emd = s
        Fs = np.cumsum(w)
        gaps = np.diff(np.concatenate(([0.0], pts)))
        tail_sq = math.fsum(gaps * np.concatenate(([1.0], 1.0 - Fs[:-1])) ** 2)
    if not mean > 0:
        raise NonPositiveMean(f"mean {mean:.3e} must be positive")
    g_exp = emd / (2 * mean)
    g_cdf = 1.0 - tail_sq / mean
    disc = abs(g_exp - g_cdf)
    return DistanceValue(
        float(min(max(g_exp, 0.0), 1.0)),
        "expectation",
        disc,
        {"cdf_form": g_cdf, "expectation_form": g_exp, "discrepancy": disc, "mean": mean},
    )


# ---------------------------------------------------------------------------
# energy distances


def _grid_pair(f, g):
    kinds = (GridDensity1D, GridDensityND)
    if not (isinstance(f, kinds) and isinstance(g, kinds)):
        raise ValidationError("grid forms need grid densities")
    if type(f) is not type(g) or f.dim != g.dim:
        raise DimensionMismatch("densities have different dimensions")
    _same_grid(f, g)


def energy_alpha_grid(f, g, alpha: float, kind: str = "cell") -> DistanceValue:
    """``-int int |x-y|^alpha D(x) D(y)`` for cell-constant densities.

    ``kind="cell"`` integrates the kernel exactly over cell pairs;
    ``kind="midpoint"`` lumps each cell at its center (in 1D with ``alpha=1``
    this equals twice the trapezoid Cramér distance).
    """
    alpha = check_alpha(alpha)
    _grid_pair(f, g)
    D = f.values - g.values
    val = -kernels.quadratic_form(D, D, f.h, alpha, kind)
    absform = kernels.quadratic_form(np.abs(D), np.abs(D), f.h, alpha, kind)
    return _dv(val, "pairwise", 64 * EPS * absform, kernel=kind)


def _tensor_axis_rule(grid: Grid1D) -> FourierGrid:
    width = grid.x_max - grid.x_min
    xi_max = 12.0 / grid.h
    scale = 4 * math.pi / width
    n_uni = int(math.ceil(xi_max / scale))
    return FourierGrid.build(xi_max, scale, n_geometric=16, geo_order=4, n_uniform=n_uni, uni_order=8, tail_order=8)


def _tensor_integral(f: GridDensityND, g: GridDensityND, q: float, rule: FourierGrid | None = None) -> tuple[float, float]:
    """``int_{R^n} |D^|^2 |xi|^-q`` by a tensor Gauss rule; returns (value, cutoff)."""
    n = f.dim
    if n > 3:
        raise ValidationError("tensor Fourier quadrature is provided for n <= 3")
    rule = rule or _tensor_axis_rule(f.grid)
    xp, wp = rule.nodes, rule.weights
    xf = np.concatenate([-xp[::-1], xp])
    wf = np.concatenate([wp[::-1], wp])
    D = f.values - g.values
    Ep = grid_axis_factors(f.grid, xp)
    Ef = grid_axis_factors(f.grid, xf)
    total = 0.0
    # |D^(-xi)| = |D^(xi)|: integrate over xi_1 > 0 and double
    if n == 1:
        A = Ep @ D
        total = np.dot(wp, np.abs(A) ** 2 * xp ** -q)
    elif n == 2:
        A = Ep @ D @ Ef.T
        r2 = xp[:, None] ** 2 + xf[None, :] ** 2
        total = np.sum(np.outer(wp, wf) * np.abs(A) ** 2 * r2 ** (-q / 2))
    else:
        W = np.outer(wf, wf)
        s2 = xf[:, None] ** 2 + xf[None, :] ** 2
        chunk = 8
        parts = []
        for lo in range(0, xp.size, chunk):
            T = np.einsum("ai,ijk->ajk", Ep[lo:lo + chunk], D)
            U = np.einsum("ajk,bj->abk", T, Ef)
            V = U @ Ef.T
            r2 = xp[lo:lo + chunk, None, None] ** 2 + s2[None]
            parts.append(float(np.sum(wp[lo:lo + chunk, None, None] * W[None] * np.abs(V) ** 2 * r2 ** (-q / 2))))
        total = math.fsum(parts)
    return 2.0 * float(total), rule.xi_max


def _fourier_power_integral(f, g, q: float, fg: FourierGrid | None):
    """``int |D^|^2 |xi|^-q dxi`` over R^n; radial or tensor depending on input."""
    f, g = spectral_pair(f, g)
    n = f.dim
    if isinstance(f, GridDensityND) and n > 1:
        val, xi_max = _tensor_integral(f, g, q, fg)
        tail = spectrum_tail_bound(f, g, n - 1 - q, xi_max) * sphere_area(n)
        return val, tail, {"xi_max": xi_max, "quadrature": "tensor"}
    if isinstance(f, GridDensityND):
        f = GridDensity1D(f.grid, f.values)
        g = GridDensity1D(g.grid, g.values)
    fg = fg or default_grid_for(f, g)
    S = radial_spectrum(f, g, fg.nodes)
    p = n - 1 - q
    val = sphere_area(n) * fg.integrate(S * fg.nodes ** p)
    tail = sphere_area(n) * spectrum_tail_bound(f, g, p, fg.xi_max)
    return val, tail, {"xi_max": fg.xi_max, "nodes": fg.size, "quadrature": "radial"}


def energy_alpha_fourier(f, g, alpha: float, fg: FourierGrid | None = None) -> DistanceValue:
    """``c_{n,alpha} int |f^ - g^|^2 / |xi|^(n+alpha) dxi``."""
    alpha = check_alpha(alpha)
    f2, g2 = spectral_pair(f, g)
    n = f2.dim
    k = metric_constants(n, alpha)
    val, tail, info = _fourier_power_integral(f2, g2, n + alpha, fg)
    return _dv(k.c * val, "fourier", k.c * tail + 1e-12 * abs(k.c * val), tail_bound=k.c * tail, **info)


def energy_alpha(f, g, alpha: float, form: str | None = None, threads: int = 1) -> DistanceValue:
    """Pick the natural form for the representation unless ``form`` is given."""
    if form == "fourier":
        return energy_alpha_fourier(f, g, alpha)
    if form == "pairwise" and isinstance(f, (GridDensity1D, GridDensityND)):
        return energy_alpha_grid(f, g, alpha)
    if form in ("pairwise", "expectation") or isinstance(f, (SampleCloud, DiracMixture)):
        return energy_alpha_pairwise(f, g, alpha, threads)
    if isinstance(f, (GridDensity1D, GridDensityND)):
        return energy_alpha_grid(f, g, alpha)
    return energy_alpha_fourier(f, g, alpha)


def default_nd_grid(f, g, n_cells: int | None = None, sds: float = 7.0) -> Grid1D:
    """Common cubic window holding ``sds`` standard deviations of every component."""
    mix = [GaussianMixture.from_state(s) for s in (f, g)]
    means = np.concatenate([m.m for m in mix])
    var = np.concatenate([m.v for m in mix])
    if np.any(var <= 0):
        raise ValidationError("point masses have no bounded density")
    center = 0.5 * (means.max(axis=0) + means.min(axis=0))
    half = float(np.max(np.abs(means - center)) + sds * math.sqrt(var.max()))
    n = means.shape[1]
    if n_cells is None:
        n_cells = {1: 1024, 2: 160, 3: 48}.get(n, 24)
    # a common window for all axes keeps the grid cubic
    c = float(np.mean(center))
    half += float(np.max(np.abs(center - c)))
    return Grid1D(c - half, c + half, n_cells)


def sharpen(u: np.ndarray) -> np.ndarray:
    """``u - (1/12) sum_k delta_k^2 u``: undoes cell averaging to second order.

    Cell averages of a smooth density, read back as a piecewise-constant
    function, damp its spectrum by ``prod sinc^2 ~ 1 - h^2 |xi|^2 / 12``; the
    filter restores it up to ``O(h^4)``.  Values beyond the window are 0.
    """
    out = np.array(u, dtype=float)
    for axis in range(u.ndim):
        pad = [(1, 1) if a == axis else (0, 0) for a in range(u.ndim)]
        p = np.pad(u, pad)
        lo = [slice(None)] * u.ndim
        hi = [slice(None)] * u.ndim
        lo[axis] = slice(0, -2)
        hi[axis] = slice(2, None)
        out -= (p[tuple(lo)] + p[tuple(hi)] - 2 * u) / 12.0
    return out


def energy_negative_order(f, g, alpha: float, backend: str = "pairwise", fg: FourierGrid | None = None,
                          grid: Grid1D | None = None) -> DistanceValue:
    """``int int |x-y|^-(2-alpha) D(x) D(y)`` for bounded densities.

    ``backend="pairwise"`` uses exact cell-pair integrals of the singular
    kernel (analytic inputs are first rasterized on a default cubic grid);
    ``backend="fourier"`` evaluates ``d_{n,alpha} int |D^|^2 / |xi|^(n-2+alpha)``.
    """
    alpha = check_alpha(alpha)
    n = f.dim
    if g.dim != n:
        raise DimensionMismatch(f"dimensions differ: {n} vs {g.dim}")
    if not admissible(n, alpha):
        raise OrderNotAdmissible(f"n - 2 + alpha = {n - 2 + alpha:g} must be positive")
    k = metric_constants(n, alpha)
    if isinstance(f, (SampleCloud, DiracMixture)) or getattr(f, "has_atoms", False) or getattr(g, "has_atoms", False):
        raise ValidationError("negative-order distance needs bounded densities, not point masses")
    if backend == "fourier":
        val, tail, info = _fourier_power_integral(f, g, n - 2 + alpha, fg)
        return _dv(k.d * val, "fourier", k.d * tail + 1e-10 * abs(k.d * val), tail_bound=k.d * tail, **info)
    if backend != "pairwise":
        raise ValidationError(f"unknown backend {backend!r}")
    if not isinstance(f, (GridDensity1D, GridDensityND)):
        grid = grid or default_nd_grid(f, g)
        fr = rasterize_nd(f, grid, n, max_tail=1e-9)
        gr = rasterize_nd(g, grid, n, max_tail=1e-9)
        D = sharpen(fr.values - gr.values)
        h = grid.h
    else:
        _grid_pair(f, g)
        D = f.values - g.values
        h = f.h
    gamma = -(2.0 - alpha)
    val = kernels.quadratic_form(D, D, h, gamma, "cell")
    absform = kernels.quadratic_form(np.abs(D), np.abs(D), h, gamma, "cell")
    return _dv(val, "pairwise", 64 * EPS * absform, n_cells=D.shape[0])


# ---------------------------------------------------------------------------
# d_1


def _mean_gap(f, g) -> float:
    mf, mg = np.atleast_1d(f.mean()), np.atleast_1d(g.mean())
    return float(np.linalg.norm(mf - mg))


def _refine_max(fun, nodes: np.ndarray, vals: np.ndarray) -> float:
    """Polish the largest sampled value by bounded scalar search between neighbours."""
    k = int(np.argmax(vals))
    lo = nodes[max(k - 1, 0)]
    hi = nodes[min(k + 1, nodes.size - 1)]
    if hi <= lo:
        return float(vals[k])
    res = optimize.minimize_scalar(lambda r: -fun(r), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12 * hi})
    return float(max(vals[k], -res.fun))


def d1_metric(f, g, fg: FourierGrid | None = None, n_directions: int = 96) -> DistanceValue:
    """``sup_xi |f^ - g^| / |xi|`` including the limit ``|mean_f - mean_g|`` at 0."""
    f, g = spectral_pair(f, g)
    n = f.dim
    limit = _mean_gap(f, g)
    if isinstance(f, GridDensityND) and n > 1:
        rule = fg or _tensor_axis_rule(f.grid)
        dirs = sphere_directions(n, n_directions)
        best = 0.0
        D = f.values - g.values
        for w in dirs:
            mats = [grid_axis_factors(f.grid, rule.nodes * w[k]) for k in range(n)]
            A = np.einsum("ri,i...->r...", mats[0], D)
            for M in mats[1:]:
                A = np.einsum("ri,ri...->r...", M, A)
            best = max(best, float(np.max(np.abs(A) / rule.nodes)))
        val = max(best, limit)
        return _dv(val, "fourier", 1e-3 * val, limit=limit, quadrature="directions")
    if isinstance(f, GridDensityND):
        f = GridDensity1D(f.grid, f.values)
        g = GridDensity1D(g.grid, g.values)
    fg = fg or default_grid_for(f, g)
    rho = fg.nodes
    if isinstance(f, GridDensity1D):
        def fun(r):
            return float(np.abs(grid_char_diff_1d(f, g, np.array([r])))[0] / r)
        vals = np.abs(grid_char_diff_1d(f, g, rho)) / rho
    elif len(f.weights) == 1 and len(g.weights) == 1:
        # single components: the direction maximum of |D^| is available in closed form
        v1, v2 = f.variances[0], g.variances[0]
        dist = float(np.linalg.norm(f.m[0] - g.m[0]))

        def S(r):
            r = np.asarray(r, dtype=float)
            ph = np.minimum(r * dist, math.pi)
            # |a - b e^{i ph}|^2 = (a - b)^2 + 4ab sin^2(ph/2), free of cancellation
            amb = np.expm1(-v1 * r * r / 2) - np.expm1(-v2 * r * r / 2)
            ab = np.exp(-(v1 + v2) * r * r / 2)
            return np.sqrt(amb ** 2 + 4 * ab * np.sin(ph / 2) ** 2)

        def fun(r):
            return float(S(np.array([r]))[0] / r)
        vals = S(rho) / rho
    else:
        dirs = sphere_directions(n, n_directions)
        c, m, v = mixture_components(f, g)

        def along(r, w):
            return np.abs(mixture_char_diff(f, g, np.outer(np.atleast_1d(r), w)))

        table = np.stack([along(rho, w) for w in dirs])
        vals = np.max(table, axis=0) / rho
        kbest = int(np.argmax(np.max(table / rho, axis=1)))
        wbest = dirs[kbest]

        def fun(r):
            return float(along(r, wbest)[0] / r)
    coarse = float(np.max(vals))
    fine = _refine_max(fun, rho, vals)
    val = max(fine, limit)
    return _dv(val, "fourier", max(fine - coarse, 1e-12 * val), limit=limit, argmax=float(rho[int(np.argmax(vals))]))


# ---------------------------------------------------------------------------
# interpolation bound


@dataclass(frozen=True)
class BoundCheck:
    lhs: float
    rhs: float
    holds: bool
    d1: float
    e_neg: float
    r_opt: float
    split: tuple = ()

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.holds))


def split_bound(n: int, alpha: float, d1: float, e_neg: float, R) -> np.ndarray:
    """Two-term bound ``A d1^2 R^(2-alpha)/(2-alpha) + B E_-/R^2``."""
    k = metric_constants(n, alpha)
    R = np.asarray(R, dtype=float)
    return k.A * d1 ** 2 * R ** (2 - alpha) / (2 - alpha) + k.B * e_neg / R ** 2


def optimized_bound(n: int, alpha: float, d1: float, e_neg: float) -> float:
    k = metric_constants(n, alpha)
    return k.D * d1 ** (4 / (4 - alpha)) * e_neg ** ((2 - alpha) / (4 - alpha))


def interpolation_bound(f, g, alpha: float, R=None, fg: FourierGrid | None = None, rtol: float = 1e-6) -> BoundCheck:
    """Check ``E_alpha <= D d_1^(4/(4-alpha)) E_-^((2-alpha)/(4-alpha))``.

    All three quantities come from the Fourier backends on a common grid.
    ``R`` (scalar or sequence) selects radii for the unoptimized bound.
    """
    alpha = check_alpha(alpha)
    n = f.dim
    if not admissible(n, alpha):
        raise OrderNotAdmissible(f"n - 2 + alpha = {n - 2 + alpha:g} must be positive")
    fs, gs = spectral_pair(f, g)
    if fg is None and not isinstance(fs, GridDensityND):
        fg = default_grid_for(fs, gs)
    lhs = energy_alpha_fourier(fs, gs, alpha, fg).value
    e_neg = energy_negative_order(fs, gs, alpha, backend="fourier", fg=fg).value
    d1 = d1_metric(fs, gs, fg if not isinstance(fs, GridDensityND) else None).value
    rhs = optimized_bound(n, alpha, d1, e_neg)
    k = metric_constants(n, alpha)
    r_opt = (2 * k.B * e_neg / (k.A * d1 ** 2)) ** (1 / (4 - alpha)) if d1 > 0 else math.inf
    split = ()
    if R is not None:
        Rs = np.atleast_1d(np.asarray(R, dtype=float))
        split = tuple(zip(Rs.tolist(), split_bound(n, alpha, d1, e_neg, Rs).tolist()))
    holds = lhs <= rhs * (1 + rtol) + 1e-300
    return BoundCheck(lhs, rhs, bool(holds), d1, e_neg, r_opt, split)
