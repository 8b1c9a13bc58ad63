"""Decay experiments: run an evolution, measure a metric, fit and check rates.

An experiment descriptor is a plain dict.  One-dimensional PDE runs::

    {"model": {"model": "opinion", "lambda": 2, "m": 0.3},
     "initial": {"kind": "gaussian", "mean": [0], "var": 0.05},
     "metric": "cramer", "times": [0, 0.5, ...], "n_cells": 1024}

Exact runs in R^n replace ``model`` by ``flow`` (drift, heat or fullfp) and
compare ``initial`` with ``other`` (default: the flow's equilibrium for
``fullfp``).  ``initial`` may also be the string ``"equilibrium"``.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import fp1d
from .density import GaussianND, analytic_from_json, cdf_from_density, rasterize
from .errors import IncompatiblePrediction, InsufficientPoints, ValidationError
from .exact import LinearFlow, energy_between, evolve_exact
from .metrics import cramer_cdf, d1_metric, energy_alpha_grid
from .traces import TRACE_COLUMNS, DecayTrace, spec_hash

DEFAULT_TOL = {"pde": 0.1, "exact": 0.02}
# solver noise in the CDF; the metric's own estimate is added on top
SOLVER_CDF_NOISE = 1e-10


@dataclass(frozen=True)
class RateFit:
    kind: str
    slope: float
    intercept: float
    window: tuple
    rms: float
    n_points: int

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "slope": self.slope,
            "intercept": self.intercept,
            "window": list(self.window),
            "rms": self.rms,
            "n_points": self.n_points,
        }


def fit_rate(trace: DecayTrace, kind: str = "exponential", t_min: float | None = None,
             t_max: float | None = None, floor_factor: float = 10.0, min_points: int = 5) -> RateFit:
    """Least-squares fit of ``log value`` against ``t`` or ``log t``.

    Samples below ``floor_factor`` times their error estimate are dropped, as
    are samples outside ``[t_min, t_max]``.
    """
    if kind not in ("exponential", "power"):
        raise ValidationError(f"unknown fit kind {kind!r}")
    t, v, e = trace.t, trace.value, trace.err
    keep = (v > floor_factor * e) & (v > 0)
    if t_min is not None:
        keep &= t >= t_min
    if t_max is not None:
        keep &= t <= t_max
    if kind == "power":
        keep &= t > 0
    if keep.sum() < min_points:
        raise InsufficientPoints(f"{int(keep.sum())} usable points, need {min_points}")
    x = t[keep] if kind == "exponential" else np.log(t[keep])
    y = np.log(v[keep])
    A = np.stack([x, np.ones_like(x)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    rms = float(np.sqrt(np.mean((A @ [slope, intercept] - y) ** 2)))
    return RateFit(kind, float(slope), float(intercept), (float(t[keep][0]), float(t[keep][-1])), rms, int(keep.sum()))


@dataclass(frozen=True)
class Prediction:
    """Either a rate claim ``slope <= -rate`` or an envelope curve."""

    rate: float | None = None
    envelope: np.ndarray | None = None
    kind: str = "exponential"

    def __post_init__(self):
        if (self.rate is None) == (self.envelope is None):
            raise ValidationError("give exactly one of rate or envelope")


@dataclass(frozen=True)
class PredictionReport:
    passed: bool
    margin: float
    claim: str
    fit: RateFit | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "margin": self.margin,
            "claim": self.claim,
            "fit": self.fit.to_dict() if self.fit else None,
            **self.details,
        }


def check_prediction(trace: DecayTrace, prediction, tol: float | None = None, fit: RateFit | None = None,
                     exact: bool = False, **fit_kw) -> PredictionReport:
    """Compare a trace with a predicted rate or envelope.

    Rates: pass iff the fitted slope is ``<= -rate (1 - tol)``; the margin is
    ``-slope / rate - (1 - tol)``.  Envelopes: pass iff ``value <= envelope
    (1 + tol)`` everywhere; the margin is the smallest relative headroom.
    ``prediction`` may be a bare number (a rate).
    """
    if not isinstance(prediction, Prediction):
        if np.ndim(prediction) == 0:
            prediction = Prediction(rate=float(prediction))
        else:
            prediction = Prediction(envelope=np.asarray(prediction, dtype=float))
    if tol is None:
        tol = DEFAULT_TOL["exact" if exact else "pde"]
    if prediction.rate is not None:
        if prediction.rate <= 0:
            raise IncompatiblePrediction("predicted rates must be positive")
        if fit is None:
            fit_kw.setdefault("t_min", 1.0 / prediction.rate if prediction.kind == "exponential" else None)
            fit = fit_rate(trace, prediction.kind, **fit_kw)
        elif fit.kind != prediction.kind:
            raise IncompatiblePrediction(f"{fit.kind} fit cannot check a {prediction.kind} rate")
        ratio = -fit.slope / prediction.rate
        margin = ratio - (1 - tol)
        return PredictionReport(margin >= 0, float(margin), f"slope <= -{prediction.rate:g} (tol {tol:g})", fit,
                                {"slope": fit.slope, "rate": prediction.rate})
    env = prediction.envelope
    if env.shape != trace.t.shape:
        raise IncompatiblePrediction("envelope must be sampled at the trace times")
    scale = np.where(env > 0, env, 1.0)
    head = (env * (1 + tol) + trace.err - trace.value) / scale
    margin = float(head.min())
    return PredictionReport(margin >= 0, margin, f"value <= envelope (tol {tol:g})", None,
                            {"worst_index": int(np.argmin(head))})


# ---------------------------------------------------------------------------
# experiments


def _initial_1d(spec, model, grid):
    init = spec.get("initial", "equilibrium")
    if init == "equilibrium":
        return fp1d.discrete_equilibrium(model, grid)
    a = analytic_from_json(init)
    return rasterize(a, grid, max_tail=spec.get("max_tail", model.max_tail))


def _metric_1d(name, f, target, alpha):
    if name == "cramer":
        d = cramer_cdf(cdf_from_density(f), cdf_from_density(target))
        width = f.grid.x_max - f.grid.x_min
        return d.value, d.error + width * SOLVER_CDF_NOISE ** 2
    if name == "energy":
        d = energy_alpha_grid(f, target, alpha)
        return d.value, d.error
    if name == "d1":
        d = d1_metric(f, target)
        return d.value, d.error
    raise ValidationError(f"unknown metric {name!r}; expected cramer, energy or d1")


def _run_pde(spec, run_id, times):
    model = fp1d.model_from_dict(spec["model"])
    cfg = fp1d.SolverConfig(
        dt=spec.get("dt"), t_final=float(times[-1]), n_cells=int(spec.get("n_cells", 1024)),
        window=tuple(spec["window"]) if spec.get("window") else None, safety=float(spec.get("safety", 0.5)),
    )
    grid = cfg.grid_for(model)
    f0 = _initial_1d(spec, model, grid)
    target = fp1d.discrete_equilibrium(model, grid)
    metric = spec.get("metric", "cramer")
    alpha = float(spec.get("alpha", 1.0))
    snaps = fp1d.evolve(model, f0, cfg, times=times)
    vals, errs = zip(*(_metric_1d(metric, s.density, target, alpha) for s in snaps))
    t = np.array([s.t for s in snaps])
    return DecayTrace(
        metric, t, vals, errs, alpha=alpha if metric == "energy" else None, n=1,
        form="cdf" if metric == "cramer" else "", run_id=run_id,
        columns={"mass": [s.mass for s in snaps], "mean": [s.mean for s in snaps]},
        meta={"model": fp1d.model_to_dict(model), "n_cells": cfg.n_cells, "spec_hash": spec_hash(spec)},
    )


def _run_exact(spec, run_id, times):
    flow = LinearFlow(spec["flow"])
    init = spec.get("initial")
    if init is None:
        raise ValidationError("exact experiments need an initial state")
    f0 = analytic_from_json(init)
    other = spec.get("other", "equilibrium")
    if other == "equilibrium":
        if flow.kind != "fullfp":
            raise ValidationError("only the Fokker--Planck flow has an equilibrium; give 'other'")
        g0 = GaussianND((0.0,) * f0.dim, 1.0)
        moving = False
    else:
        g0 = analytic_from_json(other)
        moving = True
    metric = spec.get("metric", "energy")
    alpha = float(spec.get("alpha", 1.0))
    vals, errs = [], []
    for tk in times:
        ft = evolve_exact(flow, f0, tk)
        gt = evolve_exact(flow, g0, tk) if moving else g0
        if metric == "energy":
            d = energy_between(ft, gt, alpha)
        elif metric == "d1":
            d = d1_metric(ft, gt)
        else:
            raise ValidationError(f"metric {metric!r} is not available for exact runs")
        vals.append(d.value)
        errs.append(d.error)
    return DecayTrace(
        metric, times, vals, errs, alpha=alpha if metric == "energy" else None, n=f0.dim, form="exact",
        run_id=run_id, meta={"flow": flow.kind, "spec_hash": spec_hash(spec)},
    )


def run_experiment(spec: dict) -> DecayTrace:
    """Deterministic trace for an experiment descriptor."""
    if not isinstance(spec, dict):
        raise ValidationError("experiment spec must be a mapping")
    times = np.asarray(spec.get("times", np.linspace(0.0, 6.0, 25)), dtype=float)
    if times.ndim != 1 or times.size < 2 or np.any(np.diff(times) <= 0) or times[0] < 0:
        raise ValidationError("times must be increasing, nonnegative, with at least two samples")
    run_id = str(spec.get("run_id") or spec_hash(spec))
    if "model" in spec:
        return _run_pde(spec, run_id, times)
    if "flow" in spec:
        return _run_exact(spec, run_id, times)
    raise ValidationError("experiment spec needs 'model' or 'flow'")


def run_experiments(specs, threads: int = 1) -> list[DecayTrace]:
    """Independent experiments with at most ``threads`` in flight; order preserved."""
    if threads <= 1:
        return [run_experiment(s) for s in specs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run_experiment, specs))


def predicted_rate(model) -> float:
    """Rate guaranteed for the Cramér distance by the model's decay identity."""
    if isinstance(model, dict):
        model = fp1d.model_from_dict(model)
    return model.lam if isinstance(model, fp1d.Wealth) else 1.0


# ---------------------------------------------------------------------------
# output


def write_traces_csv(traces, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for tr in traces:
            w.writerows(tr.rows())


def read_traces_csv(path) -> list[DecayTrace]:
    groups: dict = {}
    with open(path, newline="") as fh:
        r = csv.DictReader(fh)
        if tuple(r.fieldnames or ()) != TRACE_COLUMNS:
            raise ValidationError(f"expected columns {TRACE_COLUMNS}")
        for row in r:
            key = (row["run_id"], row["metric"], row["alpha"])
            groups.setdefault(key, []).append((float(row["t"]), float(row["value"]), float(row["err"])))
    out = []
    for (rid, metric, alpha), rows in groups.items():
        t, v, e = map(np.array, zip(*rows))
        out.append(DecayTrace(metric, t, v, e, alpha=float(alpha) if alpha else None, run_id=rid))
    return out


def report(spec, checks: dict) -> dict:
    """Report document: spec hash, fits and pass/fail per named prediction."""
    return {
        "schema": "decay-report/1",
        "spec_hash": spec_hash(spec),
        "checks": {k: v.to_dict() for k, v in checks.items()},
        "passed": all(v.passed for v in checks.values()),
    }

