"""Representations of probability measures: grids, closed forms and samples.

Three families are used throughout the package:

* :class:`GridDensity1D` / :class:`GridDensityND` -- cell values of a density on
  a uniform grid, interpreted as piecewise constant over each cell.
* :class:`AnalyticDensity` subclasses -- closed-form densities (Gaussian,
  Barenblatt, inverse Gamma, Beta-type opinion profile, uniform, exponential,
  isotropic Gaussian mixtures) and finite Dirac mixtures.
* :class:`SampleCloud` -- weighted point sets in R^n.

All objects are immutable once built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate, optimize, special, stats

from .errors import MomentDiverges, TailMassTooLarge, ValidationError

MASS_TOL = 1e-8
TAIL_TOL = 1e-6
WEIGHT_TOL = 1e-12

_GL5_NODES, _GL5_WEIGHTS = np.polynomial.legendre.leggauss(5)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class Grid1D:
    """Uniform partition of ``[x_min, x_max]`` into ``n_cells`` cells."""

    x_min: float
    x_max: float
    n_cells: int

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise ValidationError("grid bounds must be finite")
        if not self.x_min < self.x_max:
            raise ValidationError(f"x_min={self.x_min} must be < x_max={self.x_max}")
        if int(self.n_cells) != self.n_cells or self.n_cells < 8:
            raise ValidationError(f"n_cells={self.n_cells} must be an integer >= 8")
        object.__setattr__(self, "n_cells", int(self.n_cells))

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def edges(self) -> np.ndarray:
        return self.x_min + self.h * np.arange(self.n_cells + 1)

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + self.h * (np.arange(self.n_cells) + 0.5)

    @property
    def right_edges(self) -> np.ndarray:
        return self.edges[1:]

    def same_as(self, other: "Grid1D", rtol: float = 1e-12) -> bool:
        scale = max(abs(self.x_min), abs(self.x_max), 1.0)
        return (
            self.n_cells == other.n_cells
            and abs(self.x_min - other.x_min) <= rtol * scale
            and abs(self.x_max - other.x_max) <= rtol * scale
        )

    def scaled(self, c: float) -> "Grid1D":
        return Grid1D(c * self.x_min, c * self.x_max, self.n_cells)


def _check_values(values: np.ndarray, neg_tol: float = 1e-12) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise ValidationError("density values must be finite")
    if values.size and values.min() < -neg_tol:
        raise ValidationError(f"density has negative value {values.min():.3e}")
    return values


@dataclass(frozen=True)
class GridDensity1D:
    """Cell values ``f_i`` of a probability density on a :class:`Grid1D`."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        if v.shape != (self.grid.n_cells,):
            raise ValidationError(
                f"expected {self.grid.n_cells} values, got shape {v.shape}"
            )
        _check_values(v)
        object.__setattr__(self, "values", v)
        m = self.mass
        if abs(m - 1.0) > MASS_TOL:
            raise ValidationError(f"mass {m:.12g} differs from 1 by more than {MASS_TOL}")

    @classmethod
    def from_values(cls, grid: Grid1D, values, normalize: bool = True) -> "GridDensity1D":
        v = np.array(values, dtype=float)
        _check_values(v)
        v = np.clip(v, 0.0, None)
        if normalize:
            total = grid.h * v.sum()
            if not total > 0:
                raise ValidationError("density has zero mass")
            v = v / total
        return cls(grid, v)

    @property
    def dim(self) -> int:
        return 1

    @property
    def h(self) -> float:
        return self.grid.h

    @property
    def mass(self) -> float:
        return float(self.grid.h * math.fsum(self.values))

    @property
    def probabilities(self) -> np.ndarray:
        return self.grid.h * self.values

    def mean(self) -> float:
        return float(math.fsum(self.probabilities * self.grid.centers))

    def moment(self, s: float) -> float:
        return moment(self, s)

    def scaled(self, c: float) -> "GridDensity1D":
        """Density of ``c X`` for ``c > 0``: ``f_c(x) = f(x / c) / c``."""
        return GridDensity1D(self.grid.scaled(c), self.values / c)

    def to_cloud(self) -> "SampleCloud":
        """Point masses at the cell centers carrying the cell probabilities."""
        return SampleCloud(self.grid.centers[:, None], self.probabilities / self.probabilities.sum())


@dataclass(frozen=True)
class GridDensityND:
    """Density on the tensor grid ``grid^n`` (same partition on every axis)."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        n = v.ndim
        if n < 1 or any(s != self.grid.n_cells for s in v.shape):
            raise ValidationError(f"values must have shape ({self.grid.n_cells},)*n")
        _check_values(v)
        object.__setattr__(self, "values", v)
        if abs(self.mass - 1.0) > MASS_TOL:
            raise ValidationError(f"mass {self.mass:.12g} differs from 1")

    @classmethod
    def from_values(cls, grid: Grid1D, values, normalize: bool = True) -> "GridDensityND":
        v = np.clip(np.array(values, dtype=float), 0.0, None)
        if normalize:
            v = v / (grid.h ** v.ndim * v.sum())
        return cls(grid, v)

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def h(self) -> float:
        return self.grid.h

    @property
    def mass(self) -> float:
        return float(self.grid.h ** self.dim * math.fsum(self.values.ravel()))

    def mean(self) -> np.ndarray:
        c = self.grid.centers
        p = self.values * self.grid.h ** self.dim
        out = []
        for axis in range(self.dim):
            marg = p.sum(axis=tuple(a for a in range(self.dim) if a != axis))
            out.append(float(np.dot(marg, c)))
        return np.array(out)


@dataclass(frozen=True)
class CdfCurve:
    """Distribution function sampled at the right edges of the grid cells.

    The value at the left boundary ``x_min`` is taken to be 0.
    """

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        if v.shape != (self.grid.n_cells,):
            raise ValidationError("CDF must have one value per cell")
        if np.any(np.diff(v) < -1e-14) or v.min() < -1e-14 or v.max() > 1 + 1e-12:
            raise ValidationError("CDF values must be nondecreasing within [0, 1]")
        if v[-1] < 1 - MASS_TOL:
            raise ValidationError(f"CDF ends at {v[-1]:.12g} < 1")
        object.__setattr__(self, "values", v)

    @property
    def nodes(self) -> np.ndarray:
        """Edge abscissae including the left boundary."""
        return self.grid.edges

    @property
    def node_values(self) -> np.ndarray:
        return np.concatenate(([0.0], self.values))

    def __call__(self, x) -> np.ndarray:
        """Piecewise-linear interpolation (exact for cell-constant densities)."""
        return np.interp(x, self.nodes, self.node_values, left=0.0, right=1.0)


def cdf_from_density(f: GridDensity1D) -> CdfCurve:
    F = np.cumsum(f.probabilities)
    F = np.minimum(np.maximum.accumulate(F), 1.0)
    return CdfCurve(f.grid, F)


def _trapezoid(y: np.ndarray, x: np.ndarray) -> float:
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


def mean_from_cdf(F: CdfCurve) -> float:
    """``E X = -int_{-inf}^0 F dx + int_0^inf (1 - F) dx`` by the trapezoid rule.

    Outside the window ``F`` is 0 on the left and 1 on the right, so the
    integrals reduce to the window; the abscissa 0 is inserted as a node when
    it falls inside it.
    """
    x, y = F.nodes, F.node_values
    if x[0] < 0.0 < x[-1]:
        k = np.searchsorted(x, 0.0)
        y0 = np.interp(0.0, x, y)
        if x[k] == 0.0:
            x, y = x, y
        else:
            x = np.insert(x, k, 0.0)
            y = np.insert(y, k, y0)
        neg = x <= 0.0
        pos = x >= 0.0
        return -_trapezoid(y[neg], x[neg]) + _trapezoid(1.0 - y[pos], x[pos])
    if x[0] >= 0.0:
        # F = 0 on [0, x_min]
        return x[0] + _trapezoid(1.0 - y, x)
    # window entirely on the negative half-line, F = 1 on [x_max, 0]
    return -_trapezoid(y, x) + x[-1]


# ---------------------------------------------------------------------------
# samples


@dataclass(frozen=True)
class SampleCloud:
    """Weighted point set in R^n; ``points`` has shape ``(N, n)``."""

    points: np.ndarray
    weights: np.ndarray = None

    def __post_init__(self):
        p = np.array(self.points, dtype=float)
        if p.ndim == 1:
            p = p[:, None]
        if p.ndim != 2 or p.shape[0] == 0:
            raise ValidationError("points must be a non-empty (N, n) array")
        if not np.all(np.isfinite(p)):
            raise ValidationError("points must be finite")
        w = np.full(p.shape[0], 1.0 / p.shape[0]) if self.weights is None else np.array(self.weights, dtype=float)
        if w.shape != (p.shape[0],):
            raise ValidationError("one weight per point required")
        if w.min() < 0 or abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise ValidationError(f"weights must be nonnegative and sum to 1 (sum={w.sum():.15g})")
        object.__setattr__(self, "points", _frozen(p))
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def mean(self) -> np.ndarray:
        return self.weights @ self.points

    def scaled(self, c: float) -> "SampleCloud":
        return SampleCloud(c * self.points, self.weights)


# ---------------------------------------------------------------------------
# closed-form densities


class AnalyticDensity:
    """Closed-form probability density.

    Subclasses provide ``logpdf`` (and a ``cdf`` in one dimension); cell
    averages default to 5-point Gauss--Legendre per cell.
    """

    dim = 1
    kind = "analytic"

    def logpdf(self, x):
        raise NotImplementedError

    def pdf(self, x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.exp(self.logpdf(np.asarray(x, dtype=float)))

    def support(self) -> tuple[float, float]:
        return (-math.inf, math.inf)

    def cdf(self, x):
        raise NotImplementedError

    def mass_outside(self, a: float, b: float) -> float:
        return float(self.cdf(a) + (1.0 - self.cdf(b)))

    def center(self):
        """Center of symmetry, or ``None`` when the density is not symmetric."""
        return None

    def moment(self, s: float) -> float:
        lo, hi = self.support()
        val, _ = integrate.quad(lambda x: abs(x) ** s * float(self.pdf(x)), lo, hi, limit=400)
        return val

    def mean(self) -> float:
        lo, hi = self.support()
        val, _ = integrate.quad(lambda x: x * float(self.pdf(x)), lo, hi, limit=400)
        return val

    def ppf(self, u):
        raise NotImplementedError

    def cell_averages(self, edges: np.ndarray) -> np.ndarray:
        a, b = edges[:-1], edges[1:]
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        x = mid[:, None] + half[:, None] * _GL5_NODES[None, :]
        return 0.5 * (self.pdf(x) @ _GL5_WEIGHTS)

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class GaussianND(AnalyticDensity):
    """Isotropic Gaussian ``N(mean, var * I)`` in R^n."""

    mean_vec: tuple
    var: float
    kind = "gaussian"

    def __post_init__(self):
        m = tuple(float(v) for v in np.atleast_1d(self.mean_vec))
        if not self.var > 0:
            raise ValidationError(f"variance must be positive, got {self.var}")
        object.__setattr__(self, "mean_vec", m)

    @property
    def dim(self) -> int:
        return len(self.mean_vec)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.dim == 1:
            r2 = (x - self.mean_vec[0]) ** 2
        else:
            r2 = np.sum((x - np.asarray(self.mean_vec)) ** 2, axis=-1)
        return -0.5 * r2 / self.var - 0.5 * self.dim * math.log(2 * math.pi * self.var)

    def cdf(self, x):
        self._require_1d()
        return special.ndtr((np.asarray(x) - self.mean_vec[0]) / math.sqrt(self.var))

    def ppf(self, u):
        self._require_1d()
        return self.mean_vec[0] + math.sqrt(self.var) * special.ndtri(u)

    def mass_outside(self, a, b):
        self._require_1d()
        sd = math.sqrt(self.var)
        m = self.mean_vec[0]
        return float(special.ndtr((a - m) / sd) + special.ndtr(-(b - m) / sd))

    def cell_averages(self, edges):
        # exact: differences of the error function, lower tail taken from the
        # side where no cancellation occurs
        sd = math.sqrt(self.var)
        z = (np.asarray(edges) - self.mean_vec[0]) / sd
        lo = special.ndtr(z)
        hi = special.ndtr(-z)
        diff = np.where(z[1:] <= 0, lo[1:] - lo[:-1], hi[:-1] - hi[1:])
        return diff / np.diff(edges)

    def center(self):
        return self.mean_vec[0] if self.dim == 1 else np.array(self.mean_vec)

    def mean(self):
        return self.mean_vec[0] if self.dim == 1 else np.array(self.mean_vec)

    def moment(self, s: float) -> float:
        n = self.dim
        m2 = float(np.dot(self.mean_vec, self.mean_vec))
        if m2 == 0.0:
            return (2 * self.var) ** (s / 2) * math.exp(special.gammaln((n + s) / 2) - special.gammaln(n / 2))
        if n == 1:
            return super().moment(s)
        dist = stats.ncx2(df=n, nc=m2 / self.var)
        return float(dist.expect(lambda y: (self.var * y) ** (s / 2)))

    def _require_1d(self):
        if self.dim != 1:
            raise ValidationError("operation only defined for one-dimensional Gaussians")

    def to_json(self):
        return {"kind": "gaussian", "mean": list(self.mean_vec), "var": self.var}


def barenblatt_mass(p: float, C: float) -> float:
    """Mass of ``(k (C^2 - x^2))_+^{1/(p-1)}``, ``k = (p-1)/(2p)``, by quadrature."""
    q = 1.0 / (p - 1.0)
    k = (p - 1.0) / (2.0 * p)
    val, _ = integrate.quad(lambda x: (k * (C * C - x * x)) ** q, -C, C, epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


@dataclass(frozen=True)
class Barenblatt(AnalyticDensity):
    """Compactly supported equilibrium of ``f_t = (f^p)_xx + (x f)_x``.

    ``f(x) = (k (C^2 - x^2))_+^{1/(p-1)}`` with ``k = (p-1)/(2p)`` so that the
    zero-flux balance ``(f^p)' + x f = 0`` holds on the support ``[-C, C]``;
    ``C`` is fixed by unit mass through root finding.
    """

    p: float
    C: float = field(init=False, default=float("nan"))
    kind = "barenblatt"

    def __post_init__(self):
        if not self.p > 1:
            raise ValidationError(f"Barenblatt exponent p must be > 1, got {self.p}")
        C = optimize.brentq(lambda c: barenblatt_mass(self.p, c) - 1.0, 1e-3, 1e3, xtol=1e-12, rtol=1e-14)
        object.__setattr__(self, "C", C)

    @property
    def k(self) -> float:
        return (self.p - 1.0) / (2.0 * self.p)

    @property
    def q(self) -> float:
        return 1.0 / (self.p - 1.0)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        base = np.clip(self.k * (self.C ** 2 - x * x), 0.0, None)
        return base ** self.q

    def logpdf(self, x):
        with np.errstate(divide="ignore"):
            return np.log(self.pdf(x))

    def support(self):
        return (-self.C, self.C)

    def cdf(self, x):
        y = np.clip(np.asarray(x, dtype=float) / self.C, -1.0, 1.0)
        half = 0.5 * special.betainc(0.5, self.q + 1.0, y * y)
        return 0.5 + np.sign(y) * half

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        t = np.abs(2.0 * u - 1.0)
        y = np.sqrt(special.betaincinv(0.5, self.q + 1.0, t))
        return self.C * np.sign(u - 0.5) * y

    def mass_outside(self, a, b):
        return float(self.cdf(a) + 1.0 - self.cdf(b))

    def center(self):
        return 0.0

    def mean(self):
        return 0.0

    def moment(self, s):
        q = self.q
        return float(self.k ** q * self.C ** (2 * q + 1 + s) * special.beta((s + 1) / 2, q + 1))

    def cell_averages(self, edges):
        # exact via the closed-form CDF: the profile has a kink at +-C
        return np.diff(self.cdf(np.asarray(edges))) / np.diff(edges)

    def to_json(self):
        return {"kind": "barenblatt", "p": self.p}


@dataclass(frozen=True)
class InverseGamma(AnalyticDensity):
    """Wealth equilibrium ``(mu-1)^mu / Gamma(mu) * exp(-(mu-1)/w) / w^(1+mu)``; mean 1."""

    mu: float
    kind = "invgamma"

    def __post_init__(self):
        if not self.mu > 1:
            raise ValidationError(f"inverse Gamma exponent mu must be > 1, got {self.mu}")

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        mu = self.mu
        with np.errstate(divide="ignore", invalid="ignore"):
            out = mu * math.log(mu - 1) - special.gammaln(mu) - (mu - 1) / x - (1 + mu) * np.log(x)
        return np.where(x > 0, out, -np.inf)

    def support(self):
        return (0.0, math.inf)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(x > 0, special.gammaincc(self.mu, (self.mu - 1) / np.where(x > 0, x, 1.0)), 0.0)

    def ppf(self, u):
        return (self.mu - 1) / special.gammainccinv(self.mu, np.asarray(u, dtype=float))

    def mass_outside(self, a, b):
        left = float(self.cdf(a)) if a > 0 else 0.0
        right = float(special.gammainc(self.mu, (self.mu - 1) / b)) if b > 0 else 1.0
        return left + right

    def mean(self):
        return 1.0

    def moment(self, s):
        if s >= self.mu:
            raise MomentDiverges(f"moment of order {s} diverges for inverse Gamma with mu={self.mu}")
        return float((self.mu - 1) ** s * math.exp(special.gammaln(self.mu - s) - special.gammaln(self.mu)))

    def to_json(self):
        return {"kind": "invgamma", "mu": self.mu}


@dataclass(frozen=True)
class BetaOpinion(AnalyticDensity):
    """Opinion equilibrium ``C (1-x)^(-1+(1-m)/lam) (1+x)^(-1+(1+m)/lam)`` on (-1, 1)."""

    m: float
    lam: float
    kind = "beta"

    def __post_init__(self):
        if not -1 < self.m < 1:
            raise ValidationError(f"mean opinion m must lie in (-1, 1), got {self.m}")
        if not self.lam > 0:
            raise ValidationError(f"lambda must be positive, got {self.lam}")

    @property
    def exponents(self) -> tuple[float, float]:
        """Exponents of ``(1 - x)`` and ``(1 + x)``."""
        return (-1 + (1 - self.m) / self.lam, -1 + (1 + self.m) / self.lam)

    @property
    def _beta_params(self) -> tuple[float, float]:
        # (1 + x)/2 ~ Beta(a, b)
        return ((1 + self.m) / self.lam, (1 - self.m) / self.lam)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        ea, eb = self.exponents
        a, b = self._beta_params
        inside = (x > -1) & (x < 1)
        xs = np.where(inside, x, 0.0)
        out = ea * np.log1p(-xs) + eb * np.log1p(xs) - (a + b - 1) * math.log(2) - special.betaln(a, b)
        return np.where(inside, out, -np.inf)

    def support(self):
        return (-1.0, 1.0)

    def cdf(self, x):
        a, b = self._beta_params
        return special.betainc(a, b, np.clip((np.asarray(x, dtype=float) + 1) / 2, 0, 1))

    def ppf(self, u):
        a, b = self._beta_params
        return 2 * special.betaincinv(a, b, np.asarray(u, dtype=float)) - 1

    def mass_outside(self, a, b):
        return float(self.cdf(a) + 1 - self.cdf(b))

    def center(self):
        ea, eb = self.exponents
        return 0.0 if ea == eb else None

    def mean(self):
        return self.m

    def moment(self, s):
        a, b = self._beta_params
        val, _ = integrate.quad(
            lambda y: abs(2 * y - 1) ** s * stats.beta.pdf(y, a, b), 0, 1, points=[0.5], limit=400
        )
        return val

    def cell_averages(self, edges):
        # endpoint singularities for large lambda: use the exact CDF there
        avg = super().cell_averages(edges)
        exact = np.diff(self.cdf(edges)) / np.diff(edges)
        ea, eb = self.exponents
        if ea < 0 or eb < 0:
            return exact
        return avg

    def to_json(self):
        return {"kind": "beta", "m": self.m, "lambda": self.lam}


@dataclass(frozen=True)
class Uniform(AnalyticDensity):
    a: float
    b: float
    kind = "uniform"

    def __post_init__(self):
        if not self.a < self.b:
            raise ValidationError("uniform requires a < b")

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.a) & (x <= self.b), -math.log(self.b - self.a), -np.inf)

    def support(self):
        return (self.a, self.b)

    def cdf(self, x):
        return np.clip((np.asarray(x, dtype=float) - self.a) / (self.b - self.a), 0.0, 1.0)

    def ppf(self, u):
        return self.a + (self.b - self.a) * np.asarray(u, dtype=float)

    def cell_averages(self, edges):
        return np.diff(self.cdf(edges)) / np.diff(edges)

    def center(self):
        return 0.5 * (self.a + self.b)

    def mean(self):
        return 0.5 * (self.a + self.b)

    def moment(self, s):
        F = lambda x: np.sign(x) * abs(x) ** (s + 1) / (s + 1)
        return float((F(self.b) - F(self.a)) / (self.b - self.a))

    def to_json(self):
        return {"kind": "uniform", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class Exponential(AnalyticDensity):
    rate: float = 1.0
    kind = "exponential"

    def __post_init__(self):
        if not self.rate > 0:
            raise ValidationError("exponential rate must be positive")

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, math.log(self.rate) - self.rate * x, -np.inf)

    def support(self):
        return (0.0, math.inf)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, -np.expm1(-self.rate * np.clip(x, 0, None)), 0.0)

    def ppf(self, u):
        return -np.log1p(-np.asarray(u, dtype=float)) / self.rate

    def cell_averages(self, edges):
        return np.diff(self.cdf(edges)) / np.diff(edges)

    def mean(self):
        return 1.0 / self.rate

    def moment(self, s):
        return math.gamma(s + 1) / self.rate ** s

    def to_json(self):
        return {"kind": "exponential", "rate": self.rate}


@dataclass(frozen=True)
class DiracMixture(AnalyticDensity):
    """Finite mixture of point masses; never rasterized."""

    locations: tuple
    weights: tuple
    kind = "dirac"

    def __post_init__(self):
        loc = np.array(self.locations, dtype=float)
        if loc.ndim == 1:
            loc = loc[:, None]
        w = np.array(self.weights, dtype=float)
        if loc.shape[0] != w.shape[0] or w.size == 0:
            raise ValidationError("one weight per location required")
        if np.any(w <= 0) or abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise ValidationError("Dirac weights must be positive and sum to 1")
        object.__setattr__(self, "locations", tuple(map(tuple, loc)))
        object.__setattr__(self, "weights", tuple(w))

    @property
    def dim(self) -> int:
        return len(self.locations[0])

    @property
    def points(self) -> np.ndarray:
        return np.array(self.locations)

    def to_cloud(self) -> SampleCloud:
        return SampleCloud(self.points, np.array(self.weights))

    def cdf(self, x):
        pts = self.points[:, 0]
        x = np.asarray(x, dtype=float)
        return np.sum(np.array(self.weights)[:, None] * (pts[:, None] <= x.ravel()[None, :]), axis=0).reshape(x.shape)

    def mass_outside(self, a, b):
        pts = self.points[:, 0]
        return float(np.sum(np.array(self.weights)[(pts < a) | (pts > b)]))

    def mean(self):
        m = np.array(self.weights) @ self.points
        return float(m[0]) if self.dim == 1 else m

    def moment(self, s):
        r = np.linalg.norm(self.points, axis=1)
        return float(np.dot(self.weights, r ** s))

    def cell_averages(self, edges):
        raise ValidationError("point masses are represented as DiracMixture/SampleCloud, never rasterized")

    def to_json(self):
        return {"kind": "dirac", "locations": [list(p) for p in self.locations], "weights": list(self.weights)}


@dataclass(frozen=True)
class GaussianMixture(AnalyticDensity):
    """Finite mixture of isotropic Gaussians ``sum_k w_k N(m_k, v_k I)``.

    ``v_k = 0`` is allowed and denotes a point mass, which lets heat-flow and
    Fokker--Planck evolutions of Dirac data stay in one representation.
    """

    weights: tuple
    means: tuple
    variances: tuple
    kind = "gaussian_mixture"

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        m = np.array(self.means, dtype=float)
        if m.ndim == 1:
            m = m[:, None]
        v = np.array(self.variances, dtype=float)
        if not (w.shape[0] == m.shape[0] == v.shape[0]) or w.size == 0:
            raise ValidationError("mixture components are inconsistent")
        if np.any(w <= 0) or abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise ValidationError("mixture weights must be positive and sum to 1")
        if np.any(v < 0) or not np.all(np.isfinite(m)):
            raise ValidationError("variances must be >= 0 and means finite")
        object.__setattr__(self, "weights", tuple(w))
        object.__setattr__(self, "means", tuple(map(tuple, m)))
        object.__setattr__(self, "variances", tuple(v))

    @classmethod
    def from_state(cls, state) -> "GaussianMixture":
        if isinstance(state, GaussianMixture):
            return state
        if isinstance(state, GaussianND):
            return cls((1.0,), (state.mean_vec,), (state.var,))
        if isinstance(state, DiracMixture):
            return cls(state.weights, state.locations, (0.0,) * len(state.weights))
        raise ValidationError(f"cannot convert {type(state).__name__} to a Gaussian mixture")

    @property
    def dim(self) -> int:
        return len(self.means[0])

    @property
    def w(self) -> np.ndarray:
        return np.array(self.weights)

    @property
    def m(self) -> np.ndarray:
        return np.array(self.means)

    @property
    def v(self) -> np.ndarray:
        return np.array(self.variances)

    @property
    def has_atoms(self) -> bool:
        return bool(np.any(self.v == 0))

    def logpdf(self, x):
        if self.has_atoms:
            raise ValidationError("mixture contains point masses")
        x = np.asarray(x, dtype=float)
        comps = [GaussianND(mk, vk).logpdf(x) for mk, vk in zip(self.means, self.variances)]
        return special.logsumexp(np.stack(comps), axis=0, b=self.w[:, None] if np.ndim(comps[0]) else self.w)

    def mean(self):
        mu = self.w @ self.m
        return float(mu[0]) if self.dim == 1 else mu

    def cell_averages(self, edges):
        if self.has_atoms or self.dim != 1:
            raise ValidationError("only one-dimensional mixtures without atoms can be rasterized")
        return sum(wk * GaussianND(mk, vk).cell_averages(edges) for wk, mk, vk in zip(self.weights, self.means, self.variances))

    def mass_outside(self, a, b):
        return float(sum(wk * GaussianND(mk, vk).mass_outside(a, b) for wk, mk, vk in zip(self.weights, self.means, self.variances)))

    def cdf(self, x):
        return sum(wk * GaussianND(mk, vk).cdf(x) for wk, mk, vk in zip(self.weights, self.means, self.variances))

    def to_json(self):
        return {
            "kind": "gaussian_mixture",
            "weights": list(self.weights),
            "means": [list(m) for m in self.means],
            "variances": list(self.variances),
        }


def analytic_from_json(d: dict) -> AnalyticDensity:
    kind = d.get("kind")
    if kind == "gaussian":
        return GaussianND(tuple(np.atleast_1d(d["mean"])), d["var"])
    if kind == "barenblatt":
        return Barenblatt(d["p"])
    if kind == "invgamma":
        return InverseGamma(d["mu"])
    if kind == "beta":
        return BetaOpinion(d["m"], d["lambda"])
    if kind == "uniform":
        return Uniform(d["a"], d["b"])
    if kind == "exponential":
        return Exponential(d.get("rate", 1.0))
    if kind == "dirac":
        return DiracMixture(tuple(map(tuple, d["locations"])), tuple(d["weights"]))
    if kind == "gaussian_mixture":
        return GaussianMixture(tuple(d["weights"]), tuple(map(tuple, d["means"])), tuple(d["variances"]))
    raise ValidationError(f"unknown analytic density kind {kind!r}")


# ---------------------------------------------------------------------------
# conversions


def rasterize(a: AnalyticDensity, g: Grid1D, max_tail: float = TAIL_TOL) -> GridDensity1D:
    """Cell-averaged density of ``a`` on ``g``, renormalized to unit mass.

    Raises :class:`TailMassTooLarge` when more than ``max_tail`` of the mass
    lies outside the window.
    """
    if a.dim != 1:
        raise ValidationError("rasterize expects a one-dimensional density; use rasterize_nd")
    if isinstance(a, DiracMixture) or getattr(a, "has_atoms", False):
        raise ValidationError("point masses are represented as DiracMixture/SampleCloud, never rasterized")
    lo, hi = a.support()
    if hi <= g.x_min or lo >= g.x_max:
        raise ValidationError("support of the density does not intersect the grid window")
    tail = a.mass_outside(g.x_min, g.x_max)
    if tail > max_tail:
        raise TailMassTooLarge(
            f"window [{g.x_min}, {g.x_max}] clips mass {tail:.3e} > {max_tail:.1e}"
        )
    vals = np.nan_to_num(a.cell_averages(g.edges), nan=0.0, posinf=0.0)
    return GridDensity1D.from_values(g, vals, normalize=True)


def rasterize_nd(a: AnalyticDensity, g: Grid1D, n: int | None = None, max_tail: float = TAIL_TOL) -> GridDensityND:
    """Cell averages of an isotropic Gaussian (mixture) on ``g^n``; separable per component."""
    mix = GaussianMixture.from_state(a)
    n = mix.dim if n is None else n
    if mix.dim != n:
        raise ValidationError("dimension mismatch")
    if mix.has_atoms:
        raise ValidationError("point masses are never rasterized")
    total = np.zeros((g.n_cells,) * n)
    tail = 0.0
    for wk, mk, vk in zip(mix.weights, mix.means, mix.variances):
        factors = []
        inside = 1.0
        for axis in range(n):
            comp = GaussianND((mk[axis],), vk)
            factors.append(comp.cell_averages(g.edges))
            inside *= 1.0 - comp.mass_outside(g.x_min, g.x_max)
        tail += wk * (1.0 - inside)
        prod = factors[0]
        for fac in factors[1:]:
            prod = np.multiply.outer(prod, fac)
        total = total + wk * prod
    if tail > max_tail:
        raise TailMassTooLarge(f"window clips mass {tail:.3e} > {max_tail:.1e}")
    return GridDensityND.from_values(g, total)


def quantile_cloud(a: AnalyticDensity, n_points: int, window: tuple[float, float] | None = None) -> SampleCloud:
    """Equal-weight cloud at the mid-quantiles ``(i + 1/2)/N``.

    With ``window`` the quantiles are those of the density truncated to it.
    """
    u = (np.arange(n_points) + 0.5) / n_points
    if window is not None:
        lo, hi = float(a.cdf(window[0])), float(a.cdf(window[1]))
        u = lo + u * (hi - lo)
    return SampleCloud(np.asarray(a.ppf(u), dtype=float)[:, None])


def moment(d, s: float) -> float:
    """Absolute moment ``m_s = int |x|^s dF`` of any supported representation."""
    if not s > 0:
        raise ValidationError("moment order must be positive")
    if isinstance(d, AnalyticDensity):
        return d.moment(s)
    if isinstance(d, GridDensity1D):
        # exact for the cell-constant density
        e = d.grid.edges
        F = np.sign(e) * np.abs(e) ** (s + 1) / (s + 1)
        return float(math.fsum(d.values * np.diff(F)))
    if isinstance(d, SampleCloud):
        r = np.linalg.norm(d.points, axis=1)
        return float(math.fsum(d.weights * r ** s))
    raise ValidationError(f"unsupported representation {type(d).__name__}")


def is_symmetric(f: GridDensity1D, tol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(f.values - f.values[::-1])) <= tol)
