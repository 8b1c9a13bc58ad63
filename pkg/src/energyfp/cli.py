"""Command-line front end: ``energyfp metric | evolve | suite``.

Exit codes: 0 success, 1 failed suite criterion, 2 invalid input,
3 runtime failure (stability violation, negative density, ...).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, fp1d, io, metrics
from .density import (
    AnalyticDensity,
    Barenblatt,
    BetaOpinion,
    DiracMixture,
    Exponential,
    GaussianMixture,
    GaussianND,
    Grid1D,
    GridDensity1D,
    InverseGamma,
    SampleCloud,
    Uniform,
    analytic_from_json,
    cdf_from_density,
    rasterize,
)
from .errors import EnergyFPError, ValidationError
from .exact import LinearFlow, evolve_exact
from .suite import run_suite
from .traces import spec_hash

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2, 3
DEFAULT_CELLS = 4096
WINDOW_TAIL = 1e-10


# ---------------------------------------------------------------------------
# density sources


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()] if text else []
    except ValueError:
        raise ValidationError(f"{what}: cannot parse numbers from {text!r}") from None


def _vector(text: str) -> tuple:
    return tuple(float(v) for v in text.split(";"))


def parse_analytic(text: str) -> AnalyticDensity:
    """Mini-language: ``gaussian:m,v`` (``m`` may be ``m1;m2;...``), ``dirac:x[;x2...]``,
    ``invgamma:mu``, ``beta:m,lambda``, ``barenblatt:p``, ``uniform:a,b``,
    ``exponential:rate``."""
    name, _, rest = text.partition(":")
    name = name.strip().lower()
    try:
        if name == "gaussian":
            m, v = rest.split(",")
            return GaussianND(_vector(m), float(v))
        if name == "dirac":
            pts = [(float(p),) for p in rest.split(";")]
            return DiracMixture(tuple(pts), tuple([1.0 / len(pts)] * len(pts)))
        args = _floats(rest, name)
        if name == "invgamma":
            return InverseGamma(*args)
        if name == "beta":
            return BetaOpinion(*args)
        if name == "barenblatt":
            return Barenblatt(*args)
        if name == "uniform":
            return Uniform(*args)
        if name == "exponential":
            return Exponential(*args)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad density spec {text!r}: {exc}") from None
    raise ValidationError(
        f"unknown density {name!r}; use gaussian:m,v dirac:x invgamma:mu beta:m,lambda barenblatt:p uniform:a,b exponential:rate"
    )


def load_source(text: str):
    """A mini-language spec, a density/sample CSV or an analytic JSON file."""
    p = Path(text)
    if text.endswith(".csv"):
        if not p.exists():
            raise ValidationError(f"no such file: {text}")
        with open(p) as fh:
            header = fh.readline().strip()
        return io.read_density_csv(p) if header == "x,f" else io.read_samples_csv(p)
    if text.endswith(".json"):
        if not p.exists():
            raise ValidationError(f"no such file: {text}")
        try:
            return analytic_from_json(json.loads(p.read_text()))
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ValidationError(f"{text}: bad analytic density document ({exc})") from None
    return parse_analytic(text)


def _extent(a) -> tuple[float, float]:
    lo, hi = a.support()
    if isinstance(a, GaussianMixture):
        sd = math.sqrt(max(a.v.max(), 1e-300))
        m = a.m[:, 0]
        return max(lo, m.min() - 7 * sd), min(hi, m.max() + 7 * sd)
    qlo = lo if math.isfinite(lo) else float(a.ppf(WINDOW_TAIL))
    qhi = hi if math.isfinite(hi) else float(a.ppf(1 - WINDOW_TAIL))
    return qlo, qhi


def auto_grid(sources, n_cells: int) -> Grid1D:
    """Union of the sources' ranges (tail mass 1e-10 cut from unbounded sides)."""
    ranges = [_extent(a) for a in sources]
    lo, hi = min(r[0] for r in ranges), max(r[1] for r in ranges)
    return Grid1D(lo, hi, n_cells)


def _grid_of(args, sources) -> Grid1D:
    if args.grid:
        lo, hi, n = _floats(args.grid, "--grid")
        return Grid1D(lo, hi, int(n))
    return auto_grid(sources, args.cells)


def _is_points(x) -> bool:
    return isinstance(x, (DiracMixture, SampleCloud))


def _to_grid_pair(args, a, b):
    """Bring two 1D sources onto one grid (rasterizing analytic ones)."""
    grids = [x.grid for x in (a, b) if isinstance(x, GridDensity1D)]
    analytic = [x for x in (a, b) if isinstance(x, AnalyticDensity)]
    grid = grids[0] if grids else _grid_of(args, analytic)
    conv = [x if isinstance(x, GridDensity1D) else rasterize(x, grid, max_tail=args.max_tail) for x in (a, b)]
    return conv[0], conv[1]


# ---------------------------------------------------------------------------
# metric


def _row(kind, dv) -> dict:
    return {"metric": kind, "form": dv.form, "value": dv.value, "error": dv.error}


def _metric_rows(args) -> list[dict]:
    kind = args.kind
    a = load_source(args.a)
    if kind == "gini":
        if isinstance(a, AnalyticDensity) and not _is_points(a):
            a = rasterize(a, _grid_of(args, [a]), max_tail=args.max_tail)
        d = metrics.gini(a)
        return [{"metric": "gini", "form": "expectation", "value": d.details["expectation_form"], "error": d.error},
                {"metric": "gini", "form": "cdf", "value": d.details["cdf_form"], "error": d.error}]
    if args.b is None:
        raise ValidationError(f"--b is required for --kind {kind}")
    b = load_source(args.b)
    if a.dim != b.dim:
        raise ValidationError(f"sources have different dimensions ({a.dim} vs {b.dim})")
    points = _is_points(a) or _is_points(b)
    if points and not (_is_points(a) and _is_points(b)):
        raise ValidationError("point masses and samples can only be compared with other point masses or samples")
    alpha = args.alpha
    one_d = a.dim == 1
    rows = []
    if kind == "cramer":
        if not one_d:
            raise ValidationError("the Cramér distance needs one-dimensional sources")
        if points:
            rows.append(_row(kind, metrics.cramer_steps(a, b)))
            rows.append(_row(kind, metrics.cramer_expectation(a, b, args.threads)))
        else:
            f, g = _to_grid_pair(args, a, b)
            rows.append(_row(kind, metrics.cramer_cdf(cdf_from_density(f), cdf_from_density(g))))
            rows.append(_row(kind, metrics.cramer_fourier(f, g)))
    elif kind == "energy":
        if alpha is None:
            raise ValidationError("--alpha is required for the energy distance")
        if points:
            rows.append(_row(kind, metrics.energy_alpha_pairwise(a, b, alpha, args.threads)))
        elif one_d:
            f, g = _to_grid_pair(args, a, b)
            rows.append(_row(kind, metrics.energy_alpha_grid(f, g, alpha)))
            rows.append(_row(kind, metrics.energy_alpha_fourier(f, g, alpha)))
        else:
            rows.append(_row(kind, metrics.energy_alpha_fourier(a, b, alpha)))
    elif kind == "negative":
        if alpha is None:
            raise ValidationError("--alpha is required for the negative-order distance")
        if points:
            raise ValidationError("the negative-order distance needs bounded densities, not point masses")
        if one_d:
            a, b = _to_grid_pair(args, a, b)
        for backend in ("pairwise", "fourier"):
            rows.append(_row(kind, metrics.energy_negative_order(a, b, alpha, backend=backend)))
    elif kind == "d1":
        if one_d and not points:
            a, b = _to_grid_pair(args, a, b)
        rows.append(_row(kind, metrics.d1_metric(a, b)))
    elif kind == "bound":
        if alpha is None:
            raise ValidationError("--alpha is required for the interpolation bound")
        bc = metrics.interpolation_bound(a, b, alpha)
        rows.append({"metric": "bound", "form": "lhs", "value": bc.lhs, "error": 0.0})
        rows.append({"metric": "bound", "form": "rhs", "value": bc.rhs, "error": 0.0, "holds": bc.holds})
    return rows


def cmd_metric(args) -> int:
    rows = _metric_rows(args)
    if args.json:
        print(json.dumps({"rows": rows}, indent=2))
    else:
        print("metric,form,value,error")
        for r in rows:
            print(f"{r['metric']},{r['form']},{r['value']!r},{r['error']!r}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "metric.json").write_text(json.dumps({"args": _args_doc(args), "rows": rows}, indent=2))
    return EXIT_OK


# ---------------------------------------------------------------------------
# evolve


CONFIG_KEYS = {"model", "flow", "initial", "solver", "times", "out", "threads"}
SOLVER_KEYS = {"dt", "t_final", "n_cells", "window", "safety", "stride", "scheme", "boundary"}


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def load_config(path: str | None) -> dict:
    if not path:
        return {}
    p = Path(path)
    if not p.exists():
        raise ValidationError(f"no such config file: {path}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: the config must be a JSON object")
    return doc


def validate_config(cfg: dict) -> dict:
    unknown = set(cfg) - CONFIG_KEYS
    if unknown:
        raise ValidationError(f"unknown config keys: {', '.join(sorted(unknown))}")
    solver = cfg.get("solver", {})
    if not isinstance(solver, dict):
        raise ValidationError("'solver' must be a mapping")
    bad = set(solver) - SOLVER_KEYS
    if bad:
        raise ValidationError(f"unknown solver keys: {', '.join(sorted(bad))}")
    if ("model" in cfg) == ("flow" in cfg):
        raise ValidationError("the config needs exactly one of 'model' (1D solver) or 'flow' (exact nD)")
    return cfg


def merged_config(args) -> dict:
    cfg = load_config(args.config)
    if args.model:
        model = {"model": args.model}
        if isinstance(cfg.get("model"), dict) and cfg["model"].get("model", cfg["model"].get("kind")) == args.model:
            model = dict(cfg["model"])
        cfg["model"] = model
    if args.flow:
        cfg["flow"] = {"kind": args.flow}
    for item in args.param or []:
        key, eq, val = item.partition("=")
        if not eq:
            raise ValidationError(f"--param expects key=value, got {item!r}")
        target = "model" if "model" in cfg else "flow"
        if target not in cfg:
            raise ValidationError("--param needs a model or flow")
        if isinstance(cfg[target], str):
            cfg[target] = {"kind": cfg[target]}
        cfg[target][key.strip()] = _parse_value(val)
    if args.initial:
        cfg["initial"] = args.initial
    solver = dict(cfg.get("solver", {}))
    for key in ("dt", "t_final", "n_cells", "safety", "stride"):
        v = getattr(args, key)
        if v is not None:
            solver[key] = v
    if args.window:
        solver["window"] = _floats(args.window, "--window")
    if solver:
        cfg["solver"] = solver
    if args.times:
        cfg["times"] = _floats(args.times, "--times")
    return validate_config(cfg)


def _initial_state(spec):
    if isinstance(spec, dict):
        try:
            return analytic_from_json(spec)
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad initial density document ({exc})") from None
    return load_source(str(spec))


def _sample_times(cfg, t_final):
    times = cfg.get("times")
    if times is None:
        return np.linspace(0.0, t_final, 11)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or np.any(times < 0) or np.any(np.diff(times) <= 0):
        raise ValidationError("times must be a nonempty increasing list of nonnegative numbers")
    return times


def _evolve_1d(cfg: dict, out: Path) -> dict:
    model = fp1d.model_from_dict(cfg["model"])
    solver = cfg.get("solver", {})
    try:
        scfg = fp1d.SolverConfig(**{k: (tuple(v) if k == "window" else v) for k, v in solver.items()})
    except TypeError as exc:
        raise ValidationError(f"bad solver settings: {exc}") from None
    grid = scfg.grid_for(model)
    init = cfg.get("initial", "equilibrium")
    if init == "equilibrium":
        f0 = rasterize(model.steady_state(), grid, max_tail=model.max_tail)
    else:
        src = _initial_state(init)
        if isinstance(src, GridDensity1D):
            if not src.grid.same_as(grid):
                raise ValidationError("the initial density CSV does not match the solver grid")
            f0 = src
        else:
            f0 = rasterize(src, grid, max_tail=model.max_tail)
    times = _sample_times(cfg, scfg.t_final)
    snaps = fp1d.evolve(model, f0, scfg, times=times)
    drift = max(float(np.max(np.abs(s.density.values - f0.values))) for s in snaps)
    manifest = {
        "kind": "solver-1d",
        "model": fp1d.model_to_dict(model),
        "config": cfg,
        "config_hash": spec_hash(cfg),
        "grid": {"x_min": grid.x_min, "x_max": grid.x_max, "n_cells": grid.n_cells},
        "max_change_from_initial": drift,
    }
    return io.write_snapshots(snaps, out, manifest)


def _evolve_exact(cfg: dict, out: Path) -> dict:
    flow_doc = cfg["flow"]
    if isinstance(flow_doc, str):
        flow_doc = {"kind": flow_doc}
    flow = LinearFlow(flow_doc.get("kind"), flow_doc.get("n"))
    if "initial" not in cfg:
        raise ValidationError("exact evolutions need an initial state")
    state = _initial_state(cfg["initial"])
    if not isinstance(state, (GaussianND, DiracMixture, GaussianMixture)):
        raise ValidationError("exact evolutions accept Gaussian, Gaussian-mixture or point-mass states")
    times = _sample_times(cfg, float(cfg.get("solver", {}).get("t_final", 1.0)))
    states = [{"t": float(t), "state": evolve_exact(flow, state, t).to_json()} for t in times]
    out.mkdir(parents=True, exist_ok=True)
    doc = {
        "schema": io.MANIFEST_SCHEMA,
        "kind": "exact",
        "flow": {"kind": flow.kind, "n": flow.n},
        "config": cfg,
        "config_hash": spec_hash(cfg),
        "states": states,
        "files": [],
    }
    (out / "manifest.json").write_text(json.dumps(doc, indent=2))
    return doc


def cmd_evolve(args) -> int:
    cfg = merged_config(args)
    out = Path(args.out or cfg.get("out") or "run")
    doc = _evolve_1d(cfg, out) if "model" in cfg else _evolve_exact(cfg, out)
    summary = {"out": str(out), "config_hash": doc["config_hash"]}
    if "max_mass_drift" in doc:
        summary["max_mass_drift"] = doc["max_mass_drift"]
        summary["max_change_from_initial"] = doc["max_change_from_initial"]
    print(json.dumps(summary))
    return EXIT_OK


# ---------------------------------------------------------------------------
# suite


def cmd_suite(args) -> int:
    try:
        report = run_suite(only=args.only, quick=args.quick, threads=args.threads,
                           echo=lambda line: print(line, flush=True))
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    n_pass = sum(c["passed"] for c in report["criteria"])
    print(f"{n_pass}/{len(report['criteria'])} criteria passed in {report['seconds']:.1f}s")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(json.dumps(report, indent=2, default=float))
    return EXIT_OK if report["passed"] else EXIT_FAILED


# ---------------------------------------------------------------------------


def _args_doc(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="energyfp", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--threads", type=int, default=1, help="worker threads for pair sums (default 1)")

    m = sub.add_parser("metric", help="evaluate a distance or index")
    m.add_argument("--kind", required=True, choices=["cramer", "energy", "negative", "d1", "gini", "bound"])
    m.add_argument("--a", required=True, help="density: mini-language spec, x,f CSV, sample CSV or JSON")
    m.add_argument("--b", help="second density (all kinds except gini)")
    m.add_argument("--alpha", type=float, help="order in (0, 2)")
    m.add_argument("--grid", help="lo,hi,n_cells for rasterizing analytic 1D densities")
    m.add_argument("--cells", type=int, default=DEFAULT_CELLS, help=f"cells of the automatic grid (default {DEFAULT_CELLS})")
    m.add_argument("--max-tail", type=float, default=1e-6, dest="max_tail", help="mass a grid may clip (default 1e-6)")
    m.add_argument("--json", action="store_true", help="JSON instead of CSV on stdout")
    common(m)
    m.set_defaults(func=cmd_metric)

    e = sub.add_parser("evolve", help="run a 1D solver or an exact nD flow")
    e.add_argument("--config", help="JSON run configuration; flags override it")
    e.add_argument("--model", choices=sorted(fp1d.MODELS))
    e.add_argument("--flow", choices=["drift", "heat", "fullfp"])
    e.add_argument("--param", action="append", metavar="KEY=VALUE", help="model or flow parameter (repeatable)")
    e.add_argument("--initial", help="initial density (spec, CSV, JSON) or 'equilibrium'")
    e.add_argument("--t-final", type=float, dest="t_final")
    e.add_argument("--dt", type=float)
    e.add_argument("--n-cells", type=int, dest="n_cells")
    e.add_argument("--window", help="lo,hi")
    e.add_argument("--safety", type=float)
    e.add_argument("--stride", type=int)
    e.add_argument("--times", help="comma-separated sample times")
    common(e)
    e.set_defaults(func=cmd_evolve)

    s = sub.add_parser("suite", help="run the acceptance criteria")
    s.add_argument("--only", help="comma-separated criterion numbers or tags (e.g. drift, opinion)")
    s.add_argument("--quick", action="store_true", help="reduced resolutions and looser tolerances")
    common(s)
    s.set_defaults(func=cmd_suite)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except EnergyFPError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (OSError, FloatingPointError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
