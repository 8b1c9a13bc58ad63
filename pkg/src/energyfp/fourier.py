"""Radial Fourier quadrature and characteristic-function differences.

Fourier transforms follow ``f^(xi) = int exp(-i xi.x) f(x) dx``.  Grid
densities are treated as piecewise constant over their cells, so their
transform carries the factor ``prod_k sinc(xi_k h / 2)`` and decays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .density import (
    DiracMixture,
    GaussianMixture,
    GaussianND,
    GridDensity1D,
    GridDensityND,
    SampleCloud,
)
from .errors import DimensionMismatch, GridMismatch, ValidationError


@lru_cache(maxsize=None)
def _gauss_legendre(m: int):
    return np.polynomial.legendre.leggauss(m)


def _panel_rule(edges: np.ndarray, order: int):
    x, w = _gauss_legendre(order)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (a + b) + 0.5 * (b - a) * x[None, :]
    weights = 0.5 * (b - a) * w[None, :]
    return nodes.ravel(), weights.ravel()


@dataclass(frozen=True)
class FourierGrid:
    """Composite Gauss--Legendre rule on ``(0, xi_max]``.

    Panels are graded geometrically towards 0 (removable or integrable
    singularities of the radial integrands live there), uniform of width
    ``scale`` in the oscillatory band, and doubling up to ``xi_max``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    xi_max: float
    scale: float

    @classmethod
    def build(
        cls,
        xi_max: float,
        scale: float,
        n_geometric: int = 40,
        geo_order: int = 8,
        n_uniform: int = 256,
        uni_order: int = 6,
        tail_order: int = 24,
    ) -> "FourierGrid":
        if not (xi_max > 0 and scale > 0):
            raise ValidationError("xi_max and scale must be positive")
        scale = min(scale, xi_max)
        geo = scale * 0.5 ** np.arange(n_geometric, -1, -1)
        parts = [_panel_rule(np.concatenate(([0.0], geo)), geo_order)]
        top = min(xi_max, scale * (n_uniform + 1))
        n_uni = int(round((top - scale) / scale))
        if n_uni > 0:
            parts.append(_panel_rule(np.linspace(scale, top, n_uni + 1), uni_order))
        edges = [top]
        while edges[-1] < xi_max * (1 - 1e-12):
            edges.append(min(2 * edges[-1], xi_max))
        if len(edges) > 1:
            parts.append(_panel_rule(np.array(edges), tail_order))
        nodes = np.concatenate([p[0] for p in parts])
        weights = np.concatenate([p[1] for p in parts])
        nodes.setflags(write=False)
        weights.setflags(write=False)
        return cls(nodes, weights, float(edges[-1] if len(edges) > 1 else top), float(scale))

    @property
    def size(self) -> int:
        return self.nodes.size

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self.weights, values))


def default_grid_for(f, g=None, xi_factor: float = 40.0) -> FourierGrid:
    """Default rule: ``xi_max = 40/h`` for grids, Gaussian-scale cutoffs otherwise."""
    if isinstance(f, GridDensity1D):
        width = f.grid.x_max - f.grid.x_min
        return FourierGrid.build(xi_factor / f.grid.h, 2 * math.pi / width)
    if isinstance(f, GridDensityND):
        width = f.grid.x_max - f.grid.x_min
        return FourierGrid.build(12.0 / f.grid.h, 2 * math.pi / width, n_uniform=48, uni_order=6, n_geometric=30, geo_order=6, tail_order=16)
    mix = [GaussianMixture.from_state(s) for s in (f, g) if s is not None]
    v = np.concatenate([m.v for m in mix])
    means = np.concatenate([m.m for m in mix])
    spread = float(np.max(np.linalg.norm(means[:, None, :] - means[None, :, :], axis=-1))) if len(means) > 1 else 0.0
    vpos = v[v > 0]
    sd_min = math.sqrt(vpos.min()) if vpos.size else 1.0
    sd_max = math.sqrt(v.max()) if v.max() > 0 else 1.0
    length = max(spread + sd_max, sd_max, 1e-300)
    scale = min(1.0 / sd_max, 2 * math.pi / length) / 2
    if not vpos.size or vpos.size < v.size:
        xi_max = 400.0 / max(length, 1e-12)
    else:
        xi_max = 9.0 / sd_min
    return FourierGrid.build(xi_max, min(scale, xi_max / 8), n_uniform=64, uni_order=8, geo_order=10)


# ---------------------------------------------------------------------------
# characteristic-function differences


def _as_spectral(d):
    if isinstance(d, (GridDensity1D, GridDensityND)):
        return d
    if isinstance(d, (GaussianND, DiracMixture, GaussianMixture)):
        return GaussianMixture.from_state(d)
    if isinstance(d, SampleCloud):
        return GaussianMixture(tuple(d.weights), tuple(map(tuple, d.points)), (0.0,) * len(d))
    raise ValidationError(f"no Fourier representation for {type(d).__name__}")


def spectral_pair(f, g):
    """Normalize a pair of measures to a common spectral representation."""
    f, g = _as_spectral(f), _as_spectral(g)
    grid_types = (GridDensity1D, GridDensityND)
    if isinstance(f, grid_types) or isinstance(g, grid_types):
        if type(f) is not type(g):
            raise GridMismatch("grid densities can only be paired with grid densities")
        if not f.grid.same_as(g.grid) or f.dim != g.dim:
            raise GridMismatch("densities live on different grids")
    elif f.dim != g.dim:
        raise DimensionMismatch(f"dimensions differ: {f.dim} vs {g.dim}")
    return f, g


def grid_char_diff_1d(f: GridDensity1D, g: GridDensity1D, xi: np.ndarray, chunk: int = 512) -> np.ndarray:
    """``f^ - g^`` at frequencies ``xi`` for cell-constant densities."""
    h = f.grid.h
    x = f.grid.centers - 0.5 * (f.grid.x_min + f.grid.x_max)
    d = (f.values - g.values) * h
    xi = np.asarray(xi, dtype=float)
    out = np.empty(xi.shape, dtype=complex)
    flat = xi.ravel()
    res = out.ravel()
    for s in range(0, flat.size, chunk):
        ph = np.outer(flat[s:s + chunk], x)
        res[s:s + chunk] = np.cos(ph) @ d - 1j * (np.sin(ph) @ d)
    shift = np.exp(-1j * xi * 0.5 * (f.grid.x_min + f.grid.x_max))
    return out * np.sinc(xi * h / (2 * math.pi)) * shift


def grid_axis_factors(grid, xi: np.ndarray) -> np.ndarray:
    """Matrix ``E[k, i] = h sinc(xi_k h/2) exp(-i xi_k x_i)`` for one axis."""
    x = grid.centers
    return grid.h * np.sinc(xi * grid.h / (2 * math.pi))[:, None] * np.exp(-1j * np.outer(xi, x))


def mixture_components(f: GaussianMixture, g: GaussianMixture):
    """Signed weights, means and variances of ``f - g``."""
    c = np.concatenate([f.w, -g.w])
    m = np.concatenate([f.m, g.m])
    v = np.concatenate([f.v, g.v])
    return c, m, v


def mixture_char_diff(f: GaussianMixture, g: GaussianMixture, xi: np.ndarray) -> np.ndarray:
    """``f^ - g^`` at points ``xi`` of shape ``(P, n)``."""
    c, m, v = mixture_components(f, g)
    xi = np.atleast_2d(xi)
    r2 = np.sum(xi * xi, axis=1)
    phase = xi @ m.T
    # signed weights sum to 0, so subtract 1 from each exponential: no cancellation near 0
    a = -0.5 * v[None, :] * r2[:, None]
    em1 = np.expm1(a) * np.exp(-1j * phase) - 2 * np.sin(phase / 2) ** 2 - 1j * np.sin(phase)
    return em1 @ c


def one_minus_bessel_average(n: int, z: np.ndarray) -> np.ndarray:
    """``1 - j_n(z)`` where ``j_n`` is the sphere average of ``cos(z omega_1)``.

    ``j_n(z) = Gamma(n/2) (2/z)^(n/2-1) J_{n/2-1}(z)``; small arguments use the
    power series so that the difference keeps full relative accuracy.
    """
    z = np.abs(np.asarray(z, dtype=float))
    nu = n / 2.0 - 1.0
    out = np.empty_like(z)
    small = z < 1.0
    zs = z[small]
    q = zs * zs / 4.0
    term = np.ones_like(zs)
    acc = np.zeros_like(zs)
    for k in range(1, 12):
        term = term * (-q) / (k * (nu + k))
        acc -= term
    out[small] = acc
    zl = z[~small]
    if n == 1:
        out[~small] = 2.0 * np.sin(zl / 2) ** 2
    elif n == 3:
        out[~small] = 1.0 - np.sin(zl) / zl
    else:
        out[~small] = 1.0 - math.gamma(nu + 1) * (2.0 / zl) ** nu * special.jv(nu, zl)
    return out


def mixture_radial_spectrum(f: GaussianMixture, g: GaussianMixture, rho: np.ndarray) -> np.ndarray:
    """Sphere average of ``|f^ - g^|^2`` at radius ``rho`` (closed form).

    Uses ``S = (sum_k c_k (E_k - 1))^2 - sum_kl c_k c_l E_k E_l (1 - j_n(rho d_kl))``
    with ``E_k = exp(-v_k rho^2 / 2)``; valid because the signed weights sum to 0.
    """
    c, m, v = mixture_components(f, g)
    n = m.shape[1]
    rho = np.asarray(rho, dtype=float)
    E = np.exp(-0.5 * np.outer(rho * rho, v))
    Em1 = np.expm1(-0.5 * np.outer(rho * rho, v))
    first = (Em1 @ c) ** 2
    dist = np.linalg.norm(m[:, None, :] - m[None, :, :], axis=-1)
    iu, ju = np.triu_indices(len(c), k=1)
    second = np.zeros_like(rho)
    for a, b in zip(iu, ju):
        if dist[a, b] == 0.0:
            continue
        second += 2 * c[a] * c[b] * E[:, a] * E[:, b] * one_minus_bessel_average(n, rho * dist[a, b])
    return np.maximum(first - second, 0.0)


def radial_spectrum(f, g, rho: np.ndarray) -> np.ndarray:
    """Angular average of ``|f^ - g^|^2`` on the sphere of radius ``rho``."""
    f, g = spectral_pair(f, g)
    if isinstance(f, GaussianMixture):
        return mixture_radial_spectrum(f, g, rho)
    if isinstance(f, GridDensity1D):
        return np.abs(grid_char_diff_1d(f, g, rho)) ** 2
    raise ValidationError("radial reduction is not available for nD grid densities; use tensor quadrature")


# ---------------------------------------------------------------------------
# tail bounds for the neglected |xi| > xi_max region


def gaussian_power_tail(q: float, xi: float, v: float) -> float:
    """Upper bound of ``int_xi^inf rho^q exp(-v rho^2) d rho``."""
    if v <= 0:
        if q >= -1:
            return math.inf
        return xi ** (q + 1) / (-q - 1)
    a = (q + 1) / 2
    if a > 0:
        return 0.5 * v ** (-a) * math.exp(special.gammaln(a)) * special.gammaincc(a, v * xi * xi)
    return xi ** q * 0.5 * math.sqrt(math.pi / v) * special.erfc(math.sqrt(v) * xi)


def spectrum_tail_bound(f, g, q: float, xi_max: float) -> float:
    """Bound of ``int_{xi_max}^inf S(rho) rho^q d rho`` (S the angular-average spectrum)."""
    if isinstance(f, GaussianMixture):
        c, _, v = mixture_components(f, g)
        vmin = float(v.min())
        amp = float(np.sum(np.abs(c))) ** 2
        return amp * gaussian_power_tail(q, xi_max, vmin)
    h = f.grid.h
    n = f.dim
    # |sinc(t)| <= 1/|t| on the dominant axis, |xi_k| >= |xi|/sqrt(n)
    if xi_max * h / math.sqrt(n) < 2.0:
        return math.inf
    if q >= 1:
        return math.inf
    const = 16.0 * n / (h * h)
    return const * xi_max ** (q - 1) / (1 - q)


# ---------------------------------------------------------------------------
# angular quadrature for nD tensor-free evaluation


def sphere_directions(n: int, count: int) -> np.ndarray:
    """Deterministic direction set covering a half-sphere (``|f^|`` is even)."""
    if n == 1:
        return np.array([[1.0]])
    if n == 2:
        th = np.pi * np.arange(count) / count
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    if n == 3:
        i = np.arange(count) + 0.5
        z = i / count
        phi = np.pi * (1 + 5 ** 0.5) * i
        r = np.sqrt(1 - z * z)
        return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    raise ValidationError("direction sets are provided for n <= 3")
