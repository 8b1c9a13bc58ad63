"""The acceptance suite: twelve numbered criteria plus a whole-suite timing.

Each criterion returns a :class:`CriterionResult` with a margin (positive
means headroom; for tolerance checks it is ``1 - worst / tol``).  ``quick``
mode scales resolutions by ``QUICK["resolution"]``, sample counts by
``QUICK["samples"]`` and tolerances by ``QUICK["tolerance"]``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import fp1d
from .density import (
    BetaOpinion,
    DiracMixture,
    Exponential,
    GaussianMixture,
    GaussianND,
    Grid1D,
    InverseGamma,
    Uniform,
    cdf_from_density,
    quantile_cloud,
    rasterize,
)
from .exact import drift_decay_check, fp_decay_check, heat_decay_check
from .lab import check_prediction, fit_rate, predicted_rate, run_experiment
from .metrics import (
    cramer_cdf,
    cramer_expectation,
    cramer_fourier,
    energy_alpha_grid,
    energy_negative_order,
    gini,
    interpolation_bound,
    split_bound,
)

QUICK = {"resolution": 0.5, "samples": 0.3, "tolerance": 2.0}
SUITE_BUDGET = 600.0


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    margin: float
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d} {self.name}: margin {self.margin:+.3g} ({self.seconds:.1f}s)"

    def to_dict(self) -> dict:
        return {
            "number": self.number,
            "name": self.name,
            "passed": self.passed,
            "margin": self.margin,
            "seconds": self.seconds,
            "details": self.details,
        }


@dataclass(frozen=True)
class Settings:
    quick: bool = False
    threads: int = 1

    def cells(self, n: int) -> int:
        return max(64, int(n * QUICK["resolution"])) if self.quick else n

    def count(self, n: int) -> int:
        return max(2, int(math.ceil(n * QUICK["samples"]))) if self.quick else n

    def tol(self, t: float) -> float:
        return t * QUICK["tolerance"] if self.quick else t


def _margin(worst: float, tol: float) -> float:
    return 1.0 - worst / tol


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


# ---------------------------------------------------------------------------
# 1, 2: one-dimensional forms


def equivalence_pairs():
    """Ten pairs with the window and tail allowance each is compared on.

    A 400-point quantile cloud carries a quantization bias of order
    ``(length of its range) / (12 N^2)`` plus a tail term beyond the extreme
    quantiles, about 1e-5 here; pairs are chosen with Cramér distances large
    enough (>= 0.02) for that to stay below the 1e-3 comparison.
    """
    g12 = (-12.0, 12.0)
    ig = (0.0, 12.0)
    return [
        (GaussianND((0.0,), 1.0), GaussianND((1.0,), 1.0), g12, 1e-6),
        (GaussianND((0.0,), 1.0), GaussianND((0.0,), 4.0), g12, 1e-6),
        (GaussianND((0.0,), 1.0), GaussianND((0.5,), 2.0), g12, 1e-6),
        (Uniform(0.0, 1.0), Uniform(0.2, 1.5), (-0.5, 2.0), 1e-6),
        (Uniform(-1.0, 1.0), GaussianND((0.0,), 0.3), (-4.0, 4.0), 1e-6),
        (BetaOpinion(0.0, 0.5), BetaOpinion(0.3, 0.5), (-1.0, 1.0), 1e-6),
        (BetaOpinion(-0.5, 0.25), BetaOpinion(0.2, 1.5), (-1.0, 1.0), 1e-6),
        (InverseGamma(2.0), InverseGamma(10.0), ig, 1e-2),
        (InverseGamma(3.0), InverseGamma(12.0), ig, 1e-2),
        (InverseGamma(4.0), GaussianND((1.0,), 0.1), (-1.0, 12.0), 1e-2),
    ]


def criterion_equivalence(s: Settings) -> CriterionResult:
    tol_forms, tol_energy = s.tol(1e-3), s.tol(1e-4)
    n_cells, n_points = s.cells(4096), 400
    worst_forms = worst_energy = 0.0
    rows = []
    for a, b, window, tail in equivalence_pairs():
        grid = Grid1D(window[0], window[1], n_cells)
        f, g = rasterize(a, grid, max_tail=tail), rasterize(b, grid, max_tail=tail)
        c_cdf = cramer_cdf(cdf_from_density(f), cdf_from_density(g)).value
        c_fou = cramer_fourier(f, g).value
        c_exp = cramer_expectation(quantile_cloud(a, n_points, window), quantile_cloud(b, n_points, window), s.threads).value
        e1 = energy_alpha_grid(f, g, 1.0).value
        forms = max(_rel(c_cdf, c_fou), _rel(c_cdf, c_exp), _rel(c_fou, c_exp))
        energy = _rel(e1, 2 * c_cdf)
        worst_forms = max(worst_forms, forms)
        worst_energy = max(worst_energy, energy)
        rows.append({"pair": [a.to_json(), b.to_json()], "cdf": c_cdf, "fourier": c_fou, "expectation": c_exp,
                     "energy": e1, "forms_rel": forms, "energy_rel": energy})
    margin = min(_margin(worst_forms, tol_forms), _margin(worst_energy, tol_energy))
    return CriterionResult(1, "Cramér forms agree; E_1 = 2 x Cramér", margin >= 0, margin,
                           details={"worst_forms": worst_forms, "worst_energy": worst_energy, "pairs": rows})


def criterion_gini(s: Settings) -> CriterionResult:
    n = s.cells(4096)
    cases = [
        ("uniform[0,1]", rasterize(Uniform(0.0, 1.0), Grid1D(0.0, 1.0, n)), 1 / 3, 1e-6),
        ("exponential", rasterize(Exponential(1.0), Grid1D(0.0, 30.0, n)), 0.5, 1e-4),
        ("uniform[1,3]", rasterize(Uniform(1.0, 3.0), Grid1D(0.0, 4.0, n)), None, None),
        ("invgamma(3) on (0,40]", rasterize(InverseGamma(3.0), Grid1D(0.0, 40.0, n), max_tail=1e-2), None, None),
        ("exponential quantile cloud", quantile_cloud(Exponential(2.0), 400), None, None),
        ("two atoms", DiracMixture(((1.0,), (3.0,)), (0.5, 0.5)), None, None),
    ]
    tol_forms = s.tol(1e-6)
    worst_forms, margin_oracle = 0.0, math.inf
    rows = []
    for name, X, oracle, tol in cases:
        d = gini(X)
        disc = d.details["discrepancy"]
        worst_forms = max(worst_forms, disc)
        row = {"case": name, "value": d.value, "cdf_form": d.details["cdf_form"], "discrepancy": disc}
        if oracle is not None:
            err = abs(d.value - oracle)
            margin_oracle = min(margin_oracle, _margin(err, s.tol(tol)))
            row["oracle"] = oracle
        rows.append(row)
    margin = min(_margin(worst_forms, tol_forms), margin_oracle)
    return CriterionResult(2, "Gini expectation and CDF forms", margin >= 0, margin,
                           details={"worst_discrepancy": worst_forms, "cases": rows})


# ---------------------------------------------------------------------------
# 3-7: one-dimensional solvers


def stationarity_models():
    return [
        fp1d.ConstantDiffusion(1.0),
        fp1d.PorousMedium(2.0),
        fp1d.PorousMedium(1.5),
        fp1d.Wealth(1.0, 1.0),
        fp1d.Opinion(0.5, 0.0),
    ]


def criterion_stationarity(s: Settings) -> CriterionResult:
    tol = 1e-5
    times = np.linspace(0.0, 2.0, 5)
    worst = 0.0
    rows = []
    for model in stationarity_models():
        cfg = fp1d.SolverConfig(t_final=2.0, n_cells=s.cells(1024))
        grid = cfg.grid_for(model)
        f0 = rasterize(model.steady_state(), grid, max_tail=model.max_tail)
        snaps = fp1d.evolve(model, f0, cfg, times=times)
        drift = max(float(np.max(np.abs(sn.density.values - f0.values))) for sn in snaps)
        mass = max(abs(sn.mass - 1.0) for sn in snaps)
        worst = max(worst, drift)
        rows.append({"model": fp1d.model_to_dict(model), "max_drift": drift, "max_mass_error": mass})
    margin = _margin(worst, tol)
    return CriterionResult(3, "steady states are discrete fixed points", margin >= 0, margin,
                           details={"worst_drift": worst, "models": rows})


def _decay_runs(number: int, name: str, specs, tol: float) -> CriterionResult:
    margin = math.inf
    rows = []
    for spec in specs:
        tr = run_experiment(spec)
        rep = check_prediction(tr, predicted_rate(spec["model"]), tol=tol)
        margin = min(margin, rep.margin)
        rows.append({"model": spec["model"], "initial": spec.get("initial"), **rep.to_dict()})
    return CriterionResult(number, name, margin >= 0, margin, details={"runs": rows})


def _times(t_end: float, s: Settings) -> list:
    return list(np.linspace(0.0, t_end, s.count(25) if not s.quick else 13))


def criterion_constant_diffusion(s: Settings) -> CriterionResult:
    inits = [
        {"kind": "gaussian", "mean": [2.0], "var": 1.0},
        {"kind": "uniform", "a": -1.0, "b": 1.0},
        {"kind": "gaussian_mixture", "weights": [0.5, 0.5], "means": [[-2.0], [2.0]], "variances": [0.5, 0.5]},
    ]
    specs = [{"model": {"model": "constant_diffusion", "sigma": 1.0}, "initial": i, "times": _times(6.0, s),
              "n_cells": s.cells(1024), "run_id": f"cd-{k}"} for k, i in enumerate(inits)]
    return _decay_runs(4, "Cramér decay, constant diffusion", specs, s.tol(0.05))


def criterion_porous(s: Settings) -> CriterionResult:
    specs = [{"model": {"model": "porous_medium", "p": p}, "initial": {"kind": "gaussian", "mean": [0.3], "var": 0.1},
              "times": _times(6.0, s), "n_cells": s.cells(512), "run_id": f"pm-{p}"} for p in (1.5, 2.0)]
    return _decay_runs(5, "Cramér decay, porous medium", specs, s.tol(0.1))


def criterion_wealth(s: Settings) -> CriterionResult:
    specs = []
    for sigma, lam in ((1.0, 1.0), (1.0, 2.0), (2.0, 1.0)):
        mu = 1 + 2 * lam / sigma
        specs.append({"model": {"model": "wealth", "sigma": sigma, "lambda": lam},
                      "initial": {"kind": "invgamma", "mu": mu + 2}, "times": _times(6.0 / lam, s),
                      "n_cells": s.cells(1024), "run_id": f"wealth-{sigma}-{lam}"})
    return _decay_runs(6, "Cramér decay, wealth model", specs, s.tol(0.1))


OPINION_SWEEP = [(lam, m) for lam in (0.25, 0.5, 1.0, 2.0, 4.0) for m in (-0.8, 0.0, 0.5)]


def criterion_opinion(s: Settings) -> CriterionResult:
    specs = [{"model": {"model": "opinion", "lambda": lam, "m": m},
              "initial": {"kind": "gaussian", "mean": [0.0], "var": 0.03}, "times": _times(6.0, s),
              "n_cells": s.cells(1024), "run_id": f"opinion-{lam}-{m}"} for lam, m in OPINION_SWEEP]
    return _decay_runs(7, "Cramér decay, opinion sweep", specs, s.tol(0.1))


# ---------------------------------------------------------------------------
# 8-12: exact flows and bounds


def criterion_drift(s: Settings) -> CriterionResult:
    tol_points, tol_gauss = s.tol(1e-3), s.tol(0.02)
    times = np.linspace(0.0, 3.0, 13)
    worst_p = worst_g = 0.0
    ordered = True
    rows = []
    for n in (1, 2, 3):
        e1 = (1.0,) + (0.0,) * (n - 1)
        slopes = []
        for alpha in (0.5, 1.0, 1.5):
            tp = drift_decay_check(alpha, DiracMixture(((0.0,) * n,), (1.0,)), DiracMixture((e1,), (1.0,)), times)
            tg = drift_decay_check(alpha, GaussianND((0.0,) * n, 1.0), GaussianND(e1, 1.0), times)
            sp = fit_rate(tp).slope
            sg = fit_rate(tg).slope
            worst_p = max(worst_p, abs(sp + alpha))
            worst_g = max(worst_g, abs(sg / -alpha - 1))
            slopes.append(sg)
            rows.append({"n": n, "alpha": alpha, "slope_points": sp, "slope_gaussian": sg})
        ordered &= bool(slopes[0] > slopes[1] > slopes[2])
    margin = min(_margin(worst_p, tol_points), _margin(worst_g, tol_gauss))
    return CriterionResult(8, "drift decay at rate alpha", margin >= 0 and ordered, margin,
                           details={"worst_points": worst_p, "worst_gaussian_rel": worst_g, "ordered": ordered, "fits": rows})


def criterion_fullfp(s: Settings) -> CriterionResult:
    tol = s.tol(0.05)
    times = np.linspace(0.2, 3.0, s.count(8))
    worst = 0.0
    rows = []
    for n in (2, 3):
        starts = [GaussianND((1.0,) + (0.0,) * (n - 1), 1.0), GaussianND((0.0,) * n, 2.0), GaussianND((0.3,) * n, 0.5)]
        for alpha in (0.5, 1.0, 1.5):
            for f0 in starts:
                tr = fp_decay_check(alpha, f0, times)
                rel = np.abs(tr.columns["dEdt"] - tr.columns["rhs"]) / np.abs(tr.columns["rhs"])
                worst = max(worst, float(rel.max()))
                rows.append({"n": n, "alpha": alpha, "f0": f0.to_json(), "max_rel": float(rel.max())})
    margin = _margin(worst, tol)
    return CriterionResult(9, "Fokker--Planck energy identity", margin >= 0, margin,
                           details={"worst_rel": worst, "runs": rows})


def random_bounded_pair(rng: np.random.Generator, n: int):
    """Two Gaussian mixtures with 1-3 components, moderate means and variances."""
    def one():
        k = int(rng.integers(1, 4))
        w = rng.uniform(0.2, 1.0, k)
        return GaussianMixture(tuple(w / w.sum()), tuple(map(tuple, rng.uniform(-1.0, 1.0, (k, n)))),
                               tuple(rng.uniform(0.3, 1.5, k)))
    return one(), one()


def criterion_negative_order(s: Settings) -> CriterionResult:
    rng = np.random.default_rng(20240610)
    tol = s.tol(1e-2)
    floor = -1e-10
    worst_rel, lowest = 0.0, math.inf
    rows = []
    for k in range(s.count(50)):
        n = 2 if k % 2 == 0 else 3
        alpha = (0.5, 1.0, 1.5)[k % 3]
        f, g = random_bounded_pair(rng, n)
        pw = energy_negative_order(f, g, alpha, backend="pairwise")
        fo = energy_negative_order(f, g, alpha, backend="fourier")
        raw = pw.details["raw"]
        rel = _rel(pw.value, fo.value)
        lowest = min(lowest, raw, fo.details["raw"])
        worst_rel = max(worst_rel, rel)
        rows.append({"n": n, "alpha": alpha, "pairwise": raw, "fourier": fo.value, "rel": rel})
    nonneg = lowest >= floor
    margin = _margin(worst_rel, tol)
    return CriterionResult(10, "negative-order distance: sign and backends", nonneg and margin >= 0, margin,
                           details={"lowest_raw": lowest, "worst_rel": worst_rel, "pairs": rows})


def _random_gaussian_pair(rng, n):
    return (GaussianND(tuple(rng.uniform(-1, 1, n)), float(rng.uniform(0.5, 2.0))),
            GaussianND(tuple(rng.uniform(-1, 1, n)), float(rng.uniform(0.5, 2.0))))


def criterion_interpolation(s: Settings) -> CriterionResult:
    rng = np.random.default_rng(11)
    worst_ratio, worst_split = 0.0, math.inf
    holds_all = True
    cases = 0
    for n in (2, 3):
        for alpha in (0.5, 1.0, 1.5):
            for _ in range(s.count(20)):
                f, g = _random_gaussian_pair(rng, n)
                bc = interpolation_bound(f, g, alpha)
                cases += 1
                holds_all &= bc.holds
                worst_ratio = max(worst_ratio, bc.lhs / bc.rhs)
                R = bc.r_opt * np.logspace(-1, 1, 20)
                split = split_bound(n, alpha, bc.d1, bc.e_neg, R)
                worst_split = min(worst_split, float(np.min(split / bc.rhs)) - 1.0)
    dominates = worst_split >= -1e-9
    margin = 1.0 - worst_ratio
    return CriterionResult(11, "interpolation bound and split bound", holds_all and dominates, margin,
                           details={"worst_lhs_over_rhs": worst_ratio, "min_split_excess": worst_split,
                                    "holds_all": bool(holds_all), "pairs": cases, "radii_per_pair": 20})


def criterion_heat(s: Settings) -> CriterionResult:
    rng = np.random.default_rng(12)
    times = [0.5, 1.0, 2.0, 4.0, 8.0]
    worst_ratio = 0.0
    dominated, monotone, pairs = True, True, 0
    for n in (2, 3):
        for alpha in (0.5, 1.0, 1.5):
            for _ in range(s.count(10)):
                f, g = _random_gaussian_pair(rng, n)
                tr = heat_decay_check(alpha, f, g, times)
                pairs += 1
                dominated &= tr.meta["dominated"]
                monotone &= tr.meta["d1_monotone"]
                worst_ratio = max(worst_ratio, float(np.max(tr.value / tr.columns["envelope"])))
    margin = 1.0 - worst_ratio
    return CriterionResult(12, "heat-flow polynomial envelope", dominated and monotone and margin >= 0, margin,
                           details={"worst_value_over_envelope": worst_ratio, "dominated_all": bool(dominated),
                                    "d1_monotone_all": bool(monotone), "pairs": pairs, "times": times})


CRITERIA = [
    (1, ("equivalence", "cramer", "forms"), criterion_equivalence),
    (2, ("gini",), criterion_gini),
    (3, ("stationarity", "solvers"), criterion_stationarity),
    (4, ("cramer-decay", "constant-diffusion", "solvers", "decay"), criterion_constant_diffusion),
    (5, ("porous", "porous-medium", "solvers", "decay"), criterion_porous),
    (6, ("wealth", "solvers", "decay"), criterion_wealth),
    (7, ("opinion", "solvers", "decay"), criterion_opinion),
    (8, ("drift", "exact"), criterion_drift),
    (9, ("fullfp", "fp-identity", "exact"), criterion_fullfp),
    (10, ("negative-order", "bounds"), criterion_negative_order),
    (11, ("interpolation", "bounds"), criterion_interpolation),
    (12, ("heat", "exact", "bounds"), criterion_heat),
]


def select(only=None) -> list:
    """Criteria matching any of the comma-separated numbers or tags in ``only``."""
    if not only:
        return list(CRITERIA)
    keys = {k.strip().lower() for k in (only.split(",") if isinstance(only, str) else only) if str(k).strip()}
    chosen = [c for c in CRITERIA if str(c[0]) in keys or keys & set(c[1])]
    if not chosen:
        known = sorted({t for c in CRITERIA for t in c[1]})
        raise ValueError(f"no criterion matches {sorted(keys)}; known tags: {', '.join(known)}")
    return chosen


def run_suite(only=None, quick: bool = False, threads: int = 1, echo=None) -> dict:
    """Run the selected criteria; ``echo`` receives one line per criterion."""
    s = Settings(quick=quick, threads=threads)
    results = []
    start = time.perf_counter()
    for number, tags, fn in select(only):
        t0 = time.perf_counter()
        try:
            res = fn(s)
        except Exception as exc:  # a crash is a failed criterion, not a failed suite run
            res = CriterionResult(number, fn.__name__.replace("criterion_", ""), False, -math.inf,
                                  details={"error": f"{type(exc).__name__}: {exc}"})
        res.seconds = time.perf_counter() - t0
        results.append(res)
        if echo:
            echo(res.line())
    total = time.perf_counter() - start
    return {
        "schema": "suite-report/1",
        "quick": quick,
        "only": only,
        "seconds": total,
        "within_budget": total < SUITE_BUDGET,
        "criteria": [r.to_dict() for r in results],
        "passed": all(r.passed for r in results),
    }
