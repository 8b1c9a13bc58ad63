"""Finite-volume solvers for one-dimensional Fokker--Planck equations.

All four models share the conservative form

    df/dt = d/dx J,    J = D(x, f) df/dx + B(x) f

with zero flux through every boundary face, so mass is conserved exactly.

Linear models (constant diffusion, wealth, opinion)
    Scharfetter--Gummel (exponentially fitted) fluxes
    ``J = (D/h) [Ber(w) f_{i+1} - Ber(-w) f_i]`` with ``w`` read off the
    equilibrium ``M``: ``w = log(M_{i+1}/M_i)``.  The rasterized equilibrium is
    then an exact discrete steady state.  The resulting linear ODE system is
    integrated exactly with a matrix exponential, so the time step only sets
    the output spacing.

Porous medium
    ``J = f dxi/dx`` with pressure ``xi = p/(p-1) f^(p-1) + V``; explicit
    upwind transport of ``f`` with face velocity ``-(xi_{i+1} - xi_i)/h`` and
    minmod-limited (MUSCL) face values.
    The discrete potential ``V`` equals ``x^2/2`` off the support of the
    Barenblatt profile and is balanced on it, so the cell-averaged Barenblatt
    is an exact fixed point.  The step is limited by a CFL condition.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numba
import numpy as np
from scipy import linalg

from .density import (
    AnalyticDensity,
    Barenblatt,
    BetaOpinion,
    GaussianND,
    Grid1D,
    GridDensity1D,
    InverseGamma,
    rasterize,
)
from .errors import NegativeDensityBeyondTolerance, StabilityViolation, ValidationError

NEG_TOL = 1e-12
PROPAGATOR_CACHE = 8


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise ValidationError(f"{name}={value} must be positive")
    return value


# ---------------------------------------------------------------------------
# models


@dataclass(frozen=True)
class ConstantDiffusion:
    """``df/dt = d/dx [sigma df/dx + x f]``."""

    sigma: float = 1.0
    name = "constant_diffusion"
    linear = True

    def __post_init__(self):
        _positive("sigma", self.sigma)

    def D(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.sigma)

    def B(self, x):
        return np.asarray(x, dtype=float)

    def steady_state(self) -> AnalyticDensity:
        return GaussianND((0.0,), self.sigma)

    def default_window(self) -> tuple[float, float]:
        L = 8.0 * max(1.0, math.sqrt(self.sigma))
        return (-L, L)

    max_tail = 1e-6


@dataclass(frozen=True)
class PorousMedium:
    """``df/dt = d/dx [d/dx f^p + x f]``."""

    p: float = 2.0
    name = "porous_medium"
    linear = False
    max_tail = 1e-6

    def __post_init__(self):
        if not (math.isfinite(self.p) and self.p > 1):
            raise ValidationError(f"p={self.p} must be > 1")

    def D(self, x, f):
        return self.p * np.maximum(f, 0.0) ** (self.p - 1)

    def B(self, x):
        return np.asarray(x, dtype=float)

    def steady_state(self) -> AnalyticDensity:
        return Barenblatt(self.p)

    def default_window(self) -> tuple[float, float]:
        L = max(2.0, 1.25 * Barenblatt(self.p).C)
        return (-L, L)


@dataclass(frozen=True)
class Wealth:
    """``df/dt = sigma/2 d2/dx2 (x^2 f) + lambda d/dx ((x - 1) f)`` on ``(0, L]``."""

    sigma: float = 1.0
    lam: float = 1.0
    name = "wealth"
    linear = True
    # the Pareto tail of the equilibrium is clipped by any finite window
    max_tail = 1e-3

    def __post_init__(self):
        _positive("sigma", self.sigma)
        _positive("lambda", self.lam)

    @property
    def mu(self) -> float:
        return 1.0 + 2.0 * self.lam / self.sigma

    def D(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * self.sigma * x * x

    def B(self, x):
        x = np.asarray(x, dtype=float)
        return self.sigma * x + self.lam * (x - 1.0)

    def steady_state(self) -> AnalyticDensity:
        return InverseGamma(self.mu)

    def default_window(self) -> tuple[float, float]:
        return (0.0, 40.0)


@dataclass(frozen=True)
class Opinion:
    """``df/dt = lambda/2 d2/dx2 ((1 - x^2) f) + d/dx ((x - m) f)`` on ``(-1, 1)``."""

    lam: float = 1.0
    m: float = 0.0
    name = "opinion"
    linear = True
    max_tail = 1e-6

    def __post_init__(self):
        _positive("lambda", self.lam)
        if not (math.isfinite(self.m) and -1.0 < self.m < 1.0):
            raise ValidationError(f"m={self.m} must lie in (-1, 1)")

    def D(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * self.lam * (1.0 - x * x)

    def B(self, x):
        x = np.asarray(x, dtype=float)
        return (1.0 - self.lam) * x - self.m

    def steady_state(self) -> AnalyticDensity:
        return BetaOpinion(self.m, self.lam)

    def default_window(self) -> tuple[float, float]:
        return (-1.0, 1.0)


MODELS = {
    "constant_diffusion": ConstantDiffusion,
    "porous_medium": PorousMedium,
    "wealth": Wealth,
    "opinion": Opinion,
}


def model_from_dict(d: dict):
    d = dict(d)
    kind = d.pop("model", None) or d.pop("kind", None)
    if kind not in MODELS:
        raise ValidationError(f"unknown model {kind!r}; expected one of {sorted(MODELS)}")
    if "lambda" in d:
        d["lam"] = d.pop("lambda")
    try:
        return MODELS[kind](**d)
    except TypeError as exc:
        raise ValidationError(f"bad parameters for {kind}: {exc}") from None


def model_to_dict(model) -> dict:
    d = asdict(model)
    if "lam" in d:
        d["lambda"] = d.pop("lam")
    return {"model": model.name, **d}


def steady_state(model) -> AnalyticDensity:
    """Closed-form equilibrium of ``model``."""
    return model.steady_state()


# ---------------------------------------------------------------------------
# configuration and results


@dataclass(frozen=True)
class SolverConfig:
    """Time stepping parameters.

    ``dt=None`` picks the largest stable step for the porous-medium scheme
    (times ``safety``) and ``0.05`` for the exactly integrated linear models.
    """

    dt: float | None = None
    t_final: float = 1.0
    stride: int = 1
    n_cells: int = 1024
    window: tuple | None = None
    safety: float = 0.5
    scheme: str = "exponential-fitting"
    boundary: str = "no-flux"

    def __post_init__(self):
        if self.dt is not None:
            _positive("dt", self.dt)
        if not (self.t_final >= 0 and math.isfinite(self.t_final)):
            raise ValidationError(f"t_final={self.t_final} must be >= 0")
        if int(self.stride) != self.stride or self.stride < 1:
            raise ValidationError("stride must be a positive integer")
        if int(self.n_cells) != self.n_cells or self.n_cells < 8:
            raise ValidationError("n_cells must be an integer >= 8")
        if not 0 < self.safety <= 1:
            raise ValidationError("safety must lie in (0, 1]")
        if self.boundary != "no-flux":
            raise ValidationError("only no-flux boundaries are implemented")

    def grid_for(self, model) -> Grid1D:
        lo, hi = self.window if self.window is not None else model.default_window()
        return Grid1D(float(lo), float(hi), int(self.n_cells))


@dataclass(frozen=True)
class Snapshot:
    t: float
    density: GridDensity1D
    mass: float
    mean: float
    min_value: float

    @classmethod
    def of(cls, t: float, values: np.ndarray, grid: Grid1D) -> "Snapshot":
        mass = float(grid.h * math.fsum(values))
        mean = float(grid.h * math.fsum(values * grid.centers))
        return cls(float(t), GridDensity1D(grid, values), mass, mean, float(values.min()))


# ---------------------------------------------------------------------------
# discretization


def bernoulli(w: np.ndarray) -> np.ndarray:
    """``w / (exp(w) - 1)`` with the removable singularity at 0 filled in."""
    w = np.asarray(w, dtype=float)
    out = np.ones_like(w)
    nz = np.abs(w) > 1e-12
    with np.errstate(over="ignore"):
        out[nz] = w[nz] / np.expm1(w[nz])
    small = ~nz
    out[small] = 1.0 - 0.5 * w[small]
    return out


@dataclass
class Discretization:
    """Grid, discrete equilibrium and the model operator on that grid."""

    model: object
    grid: Grid1D
    equilibrium: GridDensity1D
    generator: np.ndarray | None = None
    potential: np.ndarray | None = None
    _propagators: dict = field(default_factory=dict, repr=False)

    def propagator(self, dt: float) -> np.ndarray:
        key = round(dt, 14)
        if key not in self._propagators:
            if len(self._propagators) >= PROPAGATOR_CACHE:
                self._propagators.pop(next(iter(self._propagators)))
            self._propagators[key] = linalg.expm(dt * self.generator)
        return self._propagators[key]


def _log_equilibrium(model, grid: Grid1D, M: np.ndarray) -> np.ndarray:
    logM = np.empty_like(M)
    pos = M > 0
    logM[pos] = np.log(M[pos])
    if not np.all(pos):
        # cells where the cell average underflows: use the point value
        logM[~pos] = model.steady_state().logpdf(grid.centers[~pos])
    if not np.all(np.isfinite(logM)):
        raise ValidationError("equilibrium vanishes on part of the window; shrink the window")
    return logM


def linear_generator(model, grid: Grid1D, M: np.ndarray) -> np.ndarray:
    """Matrix ``A`` with ``df/dt = A f``; ``A M = 0`` up to rounding."""
    N, h = grid.n_cells, grid.h
    logM = _log_equilibrium(model, grid, M)
    xf = grid.edges[1:-1]
    Df = model.D(xf)
    w = logM[1:] - logM[:-1]
    right = Df / h * bernoulli(w)     # coefficient of f_{i+1} in J_{i+1/2}
    left = Df / h * bernoulli(-w)     # coefficient of f_i
    A = np.zeros((N, N))
    i = np.arange(N - 1)
    # cell i gains J_{i+1/2}/h, cell i+1 loses it
    A[i, i + 1] += right / h
    A[i, i] -= left / h
    A[i + 1, i + 1] -= right / h
    A[i + 1, i] += left / h
    return A


def balanced_potential(model: PorousMedium, grid: Grid1D, fbar: np.ndarray) -> np.ndarray:
    """``V`` with ``p/(p-1) fbar^(p-1) + V = C^2/2`` on the support of ``fbar``."""
    p = model.p
    C = Barenblatt(p).C
    V = 0.5 * grid.centers ** 2
    on = fbar > 0
    V[on] = 0.5 * C * C - p / (p - 1) * fbar[on] ** (p - 1)
    return V


@lru_cache(maxsize=64)
def discretize(model, grid: Grid1D) -> Discretization:
    eq = rasterize(model.steady_state(), grid, max_tail=model.max_tail)
    if model.linear:
        return Discretization(model, grid, eq, generator=linear_generator(model, grid, eq.values))
    return Discretization(model, grid, eq, potential=balanced_potential(model, grid, eq.values))


def discrete_equilibrium(model, grid: Grid1D) -> GridDensity1D:
    """Steady state of the discrete scheme (the rasterized analytic equilibrium)."""
    return discretize(model, grid).equilibrium


# ---------------------------------------------------------------------------
# porous medium explicit step


def _pm_rate_bound(model: PorousMedium, fmax: float) -> float:
    p = model.p
    return max(p, p / (p - 1)) * fmax ** (p - 1)


def pm_stable_dt(model: PorousMedium, grid: Grid1D, fmax: float, safety: float = 0.5) -> float:
    """Largest step allowed by the explicit scheme: ``safety h^2 / (2 D_max)``."""
    return safety * grid.h ** 2 / (2.0 * _pm_rate_bound(model, fmax))


def _pm_step(f: np.ndarray, V: np.ndarray, p: float, h: float, dt: float) -> np.ndarray:
    return _pm_advance(f, V, p, h, dt, 1)


@numba.njit(cache=True)
def _minmod(a, b):
    if a * b <= 0.0:
        return 0.0
    return a if abs(a) < abs(b) else b


@numba.njit(cache=True)
def _pm_run(f, V, p, h, dt, n_steps):
    """``n_steps`` explicit steps in place; returns the largest CFL number seen.

    Face values are upwinded from a minmod-limited linear reconstruction, so
    the scheme is second order in space where ``f`` is smooth.  The CFL number
    is the largest fraction of a cell's mass leaving it in one step.
    """
    n = f.size
    kappa = p / (p - 1.0)
    xi = np.empty(n)
    slope = np.zeros(n)
    flux = np.empty(n - 1)
    out = np.empty(n)
    cfl_max = 0.0
    for _ in range(n_steps):
        for i in range(n):
            xi[i] = kappa * f[i] ** (p - 1.0) + V[i]
        for i in range(1, n - 1):
            slope[i] = _minmod(f[i] - f[i - 1], f[i + 1] - f[i])
        out[:] = 0.0
        for i in range(n - 1):
            u = (xi[i] - xi[i + 1]) / h
            if u > 0.0:
                flux[i] = u * (f[i] + 0.5 * slope[i])
                out[i] += flux[i]
            else:
                flux[i] = u * (f[i + 1] - 0.5 * slope[i + 1])
                out[i + 1] -= flux[i]
        cfl = 0.0
        for i in range(n):
            if out[i] > 0.0:
                r = out[i] / f[i]
                if r > cfl:
                    cfl = r
        cfl *= dt / h
        if cfl > cfl_max:
            cfl_max = cfl
        if cfl > 1.0 + 1e-12:
            return cfl_max
        for i in range(n - 1):
            f[i] -= dt / h * flux[i]
            f[i + 1] += dt / h * flux[i]
    return cfl_max


def _pm_advance(f: np.ndarray, V: np.ndarray, p: float, h: float, dt: float, n_steps: int) -> np.ndarray:
    g = np.array(f, dtype=float)
    if n_steps <= 0:
        return g
    cfl = _pm_run(g, np.asarray(V, dtype=float), float(p), float(h), float(dt), int(n_steps))
    if cfl > 1.0 + 1e-12:
        raise StabilityViolation(f"CFL number {cfl:.3f} > 1 for dt={dt:.3e}, h={h:.3e}")
    return g


# ---------------------------------------------------------------------------
# public stepping API


def _check_input(model, f: GridDensity1D, grid: Grid1D):
    if not f.grid.same_as(grid):
        raise ValidationError(
            f"initial density lives on [{f.grid.x_min}, {f.grid.x_max}] with {f.grid.n_cells} cells; "
            f"the solver grid is [{grid.x_min}, {grid.x_max}] with {grid.n_cells} cells"
        )


def _check_negative(values: np.ndarray, t: float):
    vmin = float(values.min())
    if vmin < -NEG_TOL:
        raise NegativeDensityBeyondTolerance(f"density reached {vmin:.3e} at t={t:.4g}")


def resolve_dt(model, f: GridDensity1D, cfg: SolverConfig) -> float:
    if model.linear:
        return cfg.dt if cfg.dt is not None else 0.05
    disc = discretize(model, f.grid)
    fmax = max(float(f.values.max()), float(disc.equilibrium.values.max()))
    limit = pm_stable_dt(model, f.grid, fmax, 1.0)
    if cfg.dt is None:
        return cfg.safety * limit
    if cfg.dt > limit:
        raise StabilityViolation(
            f"dt={cfg.dt:.3e} exceeds the stability bound h^2/(2 D_max)={limit:.3e}"
        )
    return cfg.dt


def step(model, f: GridDensity1D, cfg: SolverConfig) -> GridDensity1D:
    """Advance ``f`` by one time step ``cfg.dt``."""
    grid = f.grid
    disc = discretize(model, grid)
    dt = resolve_dt(model, f, cfg)
    if model.linear:
        g = disc.propagator(dt) @ f.values
    else:
        g = _pm_step(f.values, disc.potential, model.p, grid.h, dt)
    _check_negative(g, dt)
    return GridDensity1D(grid, g)


def evolve(model, f0: GridDensity1D, cfg: SolverConfig, times=None) -> list[Snapshot]:
    """Snapshots at ``t = k * stride * dt`` up to ``t_final`` (or at ``times``).

    Linear models are integrated exactly, so requested ``times`` are hit
    exactly; porous-medium times are rounded to the explicit step grid.
    """
    grid = f0.grid
    _check_input(model, f0, cfg.grid_for(model))
    disc = discretize(model, grid)
    dt = resolve_dt(model, f0, cfg)
    if times is None:
        n_steps = int(round(cfg.t_final / dt))
        marks = list(range(0, n_steps + 1, cfg.stride))
    else:
        times = np.asarray(times, dtype=float)
        if np.any(np.diff(times) <= 0) or times.min() < 0:
            raise ValidationError("sample times must be nonnegative and increasing")
        marks = [int(round(t / dt)) for t in times]
        if not model.linear and len(set(marks)) != len(marks):
            raise ValidationError("sample times closer than the time step")
    f = np.array(f0.values)
    out = []
    k = 0
    if model.linear and times is not None:
        # exact integration: requested times are hit exactly
        t_prev = 0.0
        for tk in times:
            if tk > t_prev:
                f = disc.propagator(tk - t_prev) @ f
            t_prev = tk
            _check_negative(f, tk)
            out.append(Snapshot.of(float(tk), f, grid))
        return out
    if model.linear:
        P = disc.propagator(dt)
        for mark in marks:
            while k < mark:
                f = P @ f
                k += 1
            _check_negative(f, k * dt)
            out.append(Snapshot.of(k * dt, f, grid))
        return out
    V, p, h = disc.potential, model.p, grid.h
    for mark in marks:
        f = _pm_advance(f, V, p, h, dt, mark - k)
        k = mark
        _check_negative(f, k * dt)
        out.append(Snapshot.of(k * dt, f, grid))
    return out
