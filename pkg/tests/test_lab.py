from __future__ import annotations

import json

import numpy as np
import pytest

from energyfp.density import DiracMixture, GaussianND, quantile_cloud
from energyfp.errors import IncompatiblePrediction, InsufficientPoints, ValidationError
from energyfp.exact import drift_decay_check
from energyfp.lab import (
    Prediction,
    check_prediction,
    fit_rate,
    predicted_rate,
    read_traces_csv,
    report,
    run_experiment,
    run_experiments,
    write_traces_csv,
)
from energyfp.metrics import energy_alpha_pairwise
from energyfp.traces import DecayTrace

T6 = list(np.linspace(0, 6, 25))


def gauss_json(m, v):
    return {"kind": "gaussian", "mean": [m], "var": v}


def test_trace_invariants():
    with pytest.raises(ValidationError):
        DecayTrace("cramer", [0, 0], [1, 1], [0, 0])
    with pytest.raises(ValidationError):
        DecayTrace("cramer", [0, 1], [1, -1], [0, 0])
    tr = DecayTrace("cramer", [0, 1], [1, 0.5], [0, 0])
    with pytest.raises(ValueError):
        tr.value[0] = 3.0


def test_fit_synthetic_exponential():
    t = np.linspace(0, 4, 20)
    tr = DecayTrace("synthetic", t, 7 * np.exp(-3 * t), np.zeros_like(t))
    fit = fit_rate(tr)
    assert fit.slope == pytest.approx(-3, abs=1e-10)
    assert fit.intercept == pytest.approx(np.log(7), abs=1e-10)
    assert fit.rms < 1e-10


def test_fit_power_law():
    t = np.linspace(1, 50, 30)
    tr = DecayTrace("synthetic", t, 2 * t ** -0.75, np.zeros_like(t))
    assert fit_rate(tr, "power").slope == pytest.approx(-0.75, abs=1e-12)


def test_fit_drops_noise_floor_and_needs_points():
    t = np.linspace(0, 10, 11)
    v = np.exp(-t)
    tr = DecayTrace("synthetic", t, v, np.full_like(t, 1e-3))
    fit = fit_rate(tr)
    assert fit.window[1] <= 4.0 and fit.n_points == 5
    with pytest.raises(InsufficientPoints):
        fit_rate(tr, t_min=2.0)


def test_fit_exact_drift_trace():
    tr = drift_decay_check(1.0, DiracMixture(((0.0,),), (1.0,)), DiracMixture(((2.0,),), (1.0,)), T6)
    assert fit_rate(tr).slope == pytest.approx(-1, abs=1e-3)


def test_drift_rate_check_alpha_three_halves():
    tr = drift_decay_check(1.5, DiracMixture(((0.0, 0.0),), (1.0,)), DiracMixture(((1.0, 1.0),), (1.0,)), T6)
    rep = check_prediction(tr, 1.5, exact=True)
    assert rep.passed
    assert abs(-rep.fit.slope / 1.5 - 1) < 0.02


def test_drift_rate_ordering_in_alpha():
    f0, g0 = GaussianND((0.0, 0.0), 1.0), GaussianND((1.0, 0.0), 1.0)
    slopes = []
    for alpha in (0.5, 1.0, 1.5):
        s = fit_rate(drift_decay_check(alpha, f0, g0, T6)).slope
        assert s == pytest.approx(-alpha, rel=0.02)
        slopes.append(s)
    assert slopes[0] > slopes[1] > slopes[2]


def test_prediction_validation():
    t = np.linspace(0, 4, 20)
    tr = DecayTrace("synthetic", t, np.exp(-t), np.zeros_like(t))
    with pytest.raises(IncompatiblePrediction):
        check_prediction(tr, -1.0)
    with pytest.raises(IncompatiblePrediction):
        check_prediction(tr, Prediction(rate=1.0), fit=fit_rate(tr, "power", t_min=0.5))
    with pytest.raises(IncompatiblePrediction):
        check_prediction(tr, np.ones(3))
    env = check_prediction(tr, 1.1 * np.exp(-t))
    assert env.passed and env.margin > 0
    assert not check_prediction(tr, 0.5 * np.exp(-t)).passed
    assert not check_prediction(tr, 2.0).passed


# experiments


def test_constant_diffusion_trace_decreases():
    spec = {"model": {"model": "constant_diffusion", "sigma": 1.0}, "initial": gauss_json(2.0, 1.0),
            "metric": "cramer", "times": T6}
    tr = run_experiment(spec)
    assert np.all(np.diff(tr.value) < 0)
    rep = check_prediction(tr, predicted_rate(spec["model"]))
    assert rep.passed and rep.fit.slope <= -1.0
    # cross-check at half resolution
    coarse = run_experiment({**spec, "n_cells": 512})
    assert np.allclose(coarse.value[:8], tr.value[:8], rtol=1e-2)


def test_opinion_trace_decreases():
    spec = {"model": {"model": "opinion", "lambda": 2.0, "m": 0.3}, "initial": gauss_json(-0.3, 0.01),
            "metric": "cramer", "times": T6}
    tr = run_experiment(spec)
    v = tr.value[tr.value > 10 * tr.err]
    assert np.all(np.diff(v) < 0)


@pytest.mark.parametrize("model", [
    {"model": "constant_diffusion", "sigma": 1.5},
    {"model": "wealth", "sigma": 1.0, "lambda": 1.0},
    {"model": "opinion", "lambda": 0.5, "m": 0.0},
    {"model": "porous_medium", "p": 2.0},
])
def test_equilibrium_trace_vanishes(model):
    tr = run_experiment({"model": model, "initial": "equilibrium", "times": [0, 0.5, 1.0], "n_cells": 256})
    assert np.all(tr.value < 1e-12)


def test_wealth_rate():
    spec = {"model": {"model": "wealth", "sigma": 1.0, "lambda": 2.0},
            "initial": {"kind": "invgamma", "mu": 7.0}, "times": list(np.linspace(0, 3, 19))}
    tr = run_experiment(spec)
    assert predicted_rate(spec["model"]) == 2.0
    assert fit_rate(tr, t_min=0.5).slope <= -2 * 0.9


def test_porous_medium_rate():
    spec = {"model": {"model": "porous_medium", "p": 2.0}, "initial": gauss_json(0.3, 0.1),
            "times": T6, "n_cells": 256}
    rep = check_prediction(run_experiment(spec), 1.0)
    assert rep.passed


def test_exact_experiment_spec():
    spec = {"flow": "fullfp", "initial": {"kind": "gaussian", "mean": [1.0, 0.0], "var": 1.0},
            "alpha": 1.0, "times": [0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0]}
    tr = run_experiment(spec)
    assert tr.n == 2 and tr.form == "exact"
    assert check_prediction(tr, 1.0, exact=True).passed
    with pytest.raises(ValidationError):
        run_experiment({"flow": "heat", "initial": spec["initial"]})


def test_spec_errors():
    with pytest.raises(ValidationError):
        run_experiment({"times": [0, 1]})
    with pytest.raises(ValidationError):
        run_experiment({"model": {"model": "opinion"}, "times": [1, 0]})


def test_determinism_and_threads():
    specs = [
        {"model": {"model": "opinion", "lambda": lam, "m": 0.0}, "initial": gauss_json(0.2, 0.01),
         "times": [0, 0.5, 1.0], "n_cells": 128}
        for lam in (0.5, 1.0, 2.0)
    ]
    a = run_experiments(specs, threads=1)
    b = run_experiments(specs, threads=1)
    c = run_experiments(specs, threads=3)
    for x, y, z in zip(a, b, c):
        assert np.array_equal(x.value, y.value)
        assert np.allclose(x.value, z.value, rtol=1e-12, atol=0)
    X, Y = quantile_cloud(GaussianND((0.0,), 1.0), 700), quantile_cloud(GaussianND((0.5,), 2.0), 600)
    e1 = energy_alpha_pairwise(X, Y, 0.7, threads=1).value
    e4 = energy_alpha_pairwise(X, Y, 0.7, threads=4).value
    assert e1 == pytest.approx(e4, rel=1e-12)


def test_trace_csv_and_report_round_trip(tmp_path):
    tr = drift_decay_check(0.5, DiracMixture(((0.0,),), (1.0,)), DiracMixture(((1.0,),), (1.0,)), T6,
                           run_id="d05")
    path = tmp_path / "traces.csv"
    write_traces_csv([tr], path)
    assert path.read_text().splitlines()[0] == "run_id,t,metric,alpha,value,err"
    (back,) = read_traces_csv(path)
    assert back.run_id == "d05" and back.alpha == 0.5
    assert np.array_equal(back.value, tr.value) and np.array_equal(back.t, tr.t)
    doc = report({"flow": "drift"}, {"rate": check_prediction(tr, 0.5, exact=True)})
    text = json.dumps(doc)
    assert json.loads(text)["passed"] is True
    assert doc["spec_hash"] == report({"flow": "drift"}, {})["spec_hash"]
