"""Closed-form evolutions in R^n and the decay checks built on them.

The three linear flows act on isotropic Gaussians and point masses by an
affine map of the parameters,

    m -> a m,   v -> a^2 v + s,

with ``(a, s) = (e^-t, 0)`` for the drift equation ``f_t = div(x f)``,
``(1, 2t)`` for the heat equation ``f_t = Lap f`` and ``(e^-t, 1 - e^-2t)``
for the Fokker--Planck equation ``f_t = Lap f + div(x f)``.  Mixtures map
component-wise, so a point mass under heat or Fokker--Planck flow becomes a
Gaussian component.

Energy distances between such states use the radial Fourier backend (the
characteristic functions are explicit) and exact pair sums for point masses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .density import DiracMixture, GaussianMixture, GaussianND
from .errors import DimensionMismatch, OrderNotAdmissible, ValidationError
from .fourier import FourierGrid, default_grid_for
from .metrics import (
    admissible,
    check_alpha,
    d1_metric,
    energy_alpha_fourier,
    energy_alpha_pairwise,
    energy_negative_order,
    metric_constants,
)
from .traces import DecayTrace

GaussianState = GaussianND

FLOW_KINDS = ("drift", "heat", "fullfp")


@dataclass(frozen=True)
class LinearFlow:
    """One of the linear flows; ``n=None`` accepts states of any dimension."""

    kind: str
    n: int | None = None

    def __post_init__(self):
        if self.kind not in FLOW_KINDS:
            raise ValidationError(f"unknown flow {self.kind!r}; expected one of {FLOW_KINDS}")
        if self.n is not None and self.n < 1:
            raise ValidationError(f"dimension n={self.n} must be >= 1")

    def params(self, t: float) -> tuple[float, float]:
        """``(a, s)`` of the parameter map after time ``t`` (any sign)."""
        if self.kind == "drift":
            return math.exp(-t), 0.0
        if self.kind == "heat":
            return 1.0, 2.0 * t
        return math.exp(-t), -math.expm1(-2.0 * t)


def Drift(n: int | None = None) -> LinearFlow:
    return LinearFlow("drift", n)


def Heat(n: int | None = None) -> LinearFlow:
    return LinearFlow("heat", n)


def FullFP(n: int | None = None) -> LinearFlow:
    return LinearFlow("fullfp", n)


def _apply(flow: LinearFlow, state, t: float):
    if flow.n is not None and state.dim != flow.n:
        raise DimensionMismatch(f"state has dimension {state.dim}, flow expects {flow.n}")
    a, s = flow.params(t)
    if isinstance(state, GaussianND):
        return GaussianND(tuple(a * np.asarray(state.mean_vec)), a * a * state.var + s)
    if isinstance(state, DiracMixture):
        if s == 0.0:
            return DiracMixture(a * state.points, state.weights)
        return GaussianMixture(state.weights, a * state.points, (s,) * len(state.weights))
    if isinstance(state, GaussianMixture):
        return GaussianMixture(state.weights, a * state.m, a * a * state.v + s)
    raise ValidationError(f"no closed-form evolution for {type(state).__name__}")


def evolve_exact(flow: LinearFlow, state, t: float):
    """State after time ``t >= 0`` under ``flow``."""
    if not t >= 0:
        raise ValidationError(f"time t={t} must be nonnegative")
    return _apply(flow, state, float(t))


def _atoms_only(s) -> bool:
    return isinstance(s, DiracMixture) or (isinstance(s, GaussianMixture) and bool(np.all(s.v == 0)))


def energy_between(f, g, alpha: float, fg: FourierGrid | None = None):
    """``E_alpha`` between two exact states (pair sums for point masses)."""
    if _atoms_only(f) and _atoms_only(g):
        to_dirac = lambda s: s if isinstance(s, DiracMixture) else DiracMixture(s.m, s.weights)
        return energy_alpha_pairwise(to_dirac(f), to_dirac(g), alpha)
    return energy_alpha_fourier(f, g, alpha, fg)


def _times(times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0 or np.any(t < 0) or np.any(np.diff(t) <= 0):
        raise ValidationError("times must be a nonempty increasing sequence of nonnegative values")
    return t


def drift_decay_check(alpha: float, f0, g0, times, run_id: str = "drift") -> DecayTrace:
    """``E_alpha`` along the drift equation, annotated with ``e^(-alpha t) E_alpha(0)``."""
    alpha = check_alpha(alpha)
    t = _times(times)
    flow = Drift()
    e0 = energy_between(f0, g0, alpha).value
    vals, errs = [], []
    for tk in t:
        d = energy_between(evolve_exact(flow, f0, tk), evolve_exact(flow, g0, tk), alpha)
        vals.append(d.value)
        errs.append(d.error)
    return DecayTrace(
        "energy", t, vals, errs, alpha=alpha, n=f0.dim, form="exact", run_id=run_id,
        columns={"predicted": e0 * np.exp(-alpha * t)},
        meta={"flow": "drift", "law": "exp(-alpha t)"},
    )


def _check_admissible(n: int, alpha: float):
    if not admissible(n, alpha):
        raise OrderNotAdmissible(f"n - 2 + alpha = {n - 2 + alpha:g} must be positive")


def fp_decay_check(alpha: float, f0, times, rel_step: float = 1e-3, run_id: str = "fullfp") -> DecayTrace:
    """``E_alpha(f(t), f_inf)`` along the Fokker--Planck flow with the identity check.

    At each sample the derivative is a central difference with step
    ``rel_step * t`` (both evaluations on the quadrature grid of time ``t``),
    and ``rhs = -2 alpha (n-2+alpha) E_-(f(t), f_inf) - alpha E_alpha``.
    """
    alpha = check_alpha(alpha)
    n = f0.dim
    _check_admissible(n, alpha)
    t = _times(times)
    flow = FullFP()
    finf = GaussianND((0.0,) * n, 1.0)
    B = metric_constants(n, alpha).B
    vals, errs, ddt, rhs, eneg = [], [], [], [], []
    for tk in t:
        ft = _apply(flow, f0, tk)
        fg = default_grid_for(ft, finf)
        e = energy_alpha_fourier(ft, finf, alpha, fg)
        em = energy_negative_order(ft, finf, alpha, backend="fourier", fg=fg)
        dt = rel_step * tk if tk > 0 else rel_step * 1e-3
        ep = energy_alpha_fourier(_apply(flow, f0, tk + dt), finf, alpha, fg).details["raw"]
        en = energy_alpha_fourier(_apply(flow, f0, tk - dt), finf, alpha, fg).details["raw"]
        vals.append(e.value)
        errs.append(e.error)
        ddt.append((ep - en) / (2 * dt))
        eneg.append(em.value)
        rhs.append(-2 * B * em.value - alpha * e.value)
    vals = np.array(vals)
    return DecayTrace(
        "energy", t, vals, errs, alpha=alpha, n=n, form="fourier", run_id=run_id,
        columns={"dEdt": ddt, "rhs": rhs, "e_neg": eneg, "bound": vals[0] * np.exp(-alpha * (t - t[0]))},
        meta={"flow": "fullfp", "identity": "dE/dt = -2 alpha (n-2+alpha) E_- - alpha E"},
    )


def heat_constant(n: int, alpha: float, d1_0: float) -> float:
    """``C = 2 alpha (n-2+alpha) [D d_1(0)^(4/(4-alpha))]^(-(4-alpha)/(2-alpha))``."""
    k = metric_constants(n, alpha)
    return 2 * k.B * (k.D * d1_0 ** (4 / (4 - alpha))) ** (-(4 - alpha) / (2 - alpha))


def heat_envelope(e0: float, C: float, alpha: float, t) -> np.ndarray:
    """Solution of ``y' = -C y^((4-alpha)/(2-alpha))`` from ``y(0) = e0``."""
    t = np.asarray(t, dtype=float)
    if e0 <= 0:
        return np.zeros_like(t)
    beta = 2 / (2 - alpha)
    return (e0 ** (-beta) + beta * C * t) ** (-1 / beta)


def heat_decay_check(alpha: float, f0, g0, times, rtol: float = 1e-6, run_id: str = "heat") -> DecayTrace:
    """``E_alpha`` between two heat-flow solutions against the polynomial envelope.

    ``meta`` reports ``dominated`` (trace below envelope at every sample) and
    ``d1_monotone`` (``d_1`` non-increasing across samples).
    """
    alpha = check_alpha(alpha)
    n = f0.dim
    _check_admissible(n, alpha)
    t = _times(times)
    flow = Heat()
    e0 = energy_between(f0, g0, alpha).value
    d10 = d1_metric(f0, g0).value
    C = heat_constant(n, alpha, d10) if d10 > 0 else math.inf
    env = heat_envelope(e0, C, alpha, t)
    vals, errs, d1s, d1e = [], [], [], []
    for tk in t:
        ft, gt = evolve_exact(flow, f0, tk), evolve_exact(flow, g0, tk)
        e = energy_between(ft, gt, alpha)
        d = d1_metric(ft, gt)
        vals.append(e.value)
        errs.append(e.error)
        d1s.append(d.value)
        d1e.append(d.error)
    vals, errs, d1s, d1e = map(np.array, (vals, errs, d1s, d1e))
    dominated = bool(np.all(vals <= env * (1 + rtol) + errs))
    slack = d1e[1:] + d1e[:-1] + 1e-12 * d1s[:-1]
    monotone = bool(np.all(d1s[1:] <= d1s[:-1] + slack)) and d1s[0] <= d10 * (1 + 1e-9) + d1e[0]
    return DecayTrace(
        "energy", t, vals, errs, alpha=alpha, n=n, form="fourier", run_id=run_id,
        columns={"envelope": env, "d1": d1s},
        meta={"flow": "heat", "C": C, "e0": e0, "d1_0": d10, "dominated": dominated, "d1_monotone": monotone},
    )
