"""Acceptance criteria, checked against the raw numbers in the suite report.

The ``suite`` command runs once (in a subprocess, so its wall time and exit
code are measured as a user would see them).  Each test below re-derives its
verdict from the report details at the stated tolerance and prints one
PASS/FAIL line.
"""

from __future__ import annotations

import json
import subprocess
import sys
import time

import pytest

BUDGET_SECONDS = 600


@pytest.fixture(scope="module")
def suite_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("suite")
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "energyfp", "suite", "--out", str(out)],
                          capture_output=True, text=True)
    wall = time.perf_counter() - t0
    report = json.loads((out / "report.json").read_text()) if (out / "report.json").exists() else None
    return {"code": proc.returncode, "wall": wall, "report": report, "stdout": proc.stdout, "stderr": proc.stderr}


@pytest.fixture(scope="module")
def criteria(suite_run):
    assert suite_run["report"] is not None, suite_run["stderr"]
    return {c["number"]: c for c in suite_run["report"]["criteria"]}


def verdict(capsys, number, ok, summary):
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {summary}")
    assert ok, summary


def slopes(c):
    return [r["fit"]["slope"] for r in c["details"]["runs"]]


def test_criterion_01_equivalence(criteria, capsys):
    c = criteria[1]
    d = c["details"]
    forms = max(p["forms_rel"] for p in d["pairs"])
    energy = max(p["energy_rel"] for p in d["pairs"])
    ok = len(d["pairs"]) == 10 and forms < 1e-3 and energy < 1e-4 and c["seconds"] < 30
    verdict(capsys, 1, ok, f"10 pairs, forms rel {forms:.2e} < 1e-3, E_1 vs 2 Cramér rel {energy:.2e} < 1e-4, "
                           f"{c['seconds']:.1f}s < 30s")


def test_criterion_02_gini(criteria, capsys):
    cases = {x["case"]: x for x in criteria[2]["details"]["cases"]}
    disc = max(x["discrepancy"] for x in cases.values())
    u = abs(cases["uniform[0,1]"]["value"] - 1 / 3)
    e = abs(cases["exponential"]["value"] - 0.5)
    ok = disc < 1e-6 and u < 1e-6 and e < 1e-4
    verdict(capsys, 2, ok, f"forms differ by {disc:.1e} < 1e-6, uniform off by {u:.1e} < 1e-6, "
                           f"exponential off by {e:.1e} < 1e-4")


def test_criterion_03_stationarity(criteria, capsys):
    c = criteria[3]
    models = {m["model"]["model"] for m in c["details"]["models"]}
    worst = max(m["max_drift"] for m in c["details"]["models"])
    ok = models == {"constant_diffusion", "porous_medium", "wealth", "opinion"} and worst < 1e-5 and c["seconds"] < 60
    verdict(capsys, 3, ok, f"{len(models)} models, max-norm drift {worst:.1e} < 1e-5 over [0,2], "
                           f"{c['seconds']:.1f}s < 60s")


def test_criterion_04_constant_diffusion(criteria, capsys):
    c = criteria[4]
    s = slopes(c)
    ok = len(s) == 3 and max(s) <= -1.0 * (1 - 0.05) and c["seconds"] < 60
    verdict(capsys, 4, ok, f"slopes {', '.join(f'{x:.2f}' for x in s)} <= -0.95, {c['seconds']:.1f}s < 60s")


def test_criterion_05_porous_medium(criteria, capsys):
    runs = criteria[5]["details"]["runs"]
    ps = sorted(r["model"]["p"] for r in runs)
    s = slopes(criteria[5])
    ok = ps == [1.5, 2.0] and max(s) <= -1.0 * (1 - 0.1)
    verdict(capsys, 5, ok, f"p in {ps}, slopes {', '.join(f'{x:.2f}' for x in s)} <= -0.9")


def test_criterion_06_wealth(criteria, capsys):
    runs = criteria[6]["details"]["runs"]
    pairs = sorted((r["model"]["sigma"], r["model"]["lambda"]) for r in runs)
    ok = pairs == [(1.0, 1.0), (1.0, 2.0), (2.0, 1.0)] and all(
        r["fit"]["slope"] <= -r["model"]["lambda"] * (1 - 0.1) for r in runs)
    text = ", ".join(f"(s={r['model']['sigma']:g}, l={r['model']['lambda']:g}) {r['fit']['slope']:.2f}" for r in runs)
    verdict(capsys, 6, ok, f"slope <= -0.9 lambda: {text}")


def test_criterion_07_opinion(criteria, capsys):
    runs = criteria[7]["details"]["runs"]
    grid = {(r["model"]["lambda"], r["model"]["m"]) for r in runs}
    expected = {(lam, m) for lam in (0.25, 0.5, 1.0, 2.0, 4.0) for m in (-0.8, 0.0, 0.5)}
    bad = [r for r in runs if r["fit"]["slope"] > -1.0 * (1 - 0.1)]
    ok = grid == expected and not bad
    verdict(capsys, 7, ok, f"{len(runs)} sweep points, all slopes <= -0.9 (steepest-shallowest "
                           f"{min(slopes(criteria[7])):.2f}..{max(slopes(criteria[7])):.2f})")


def test_criterion_08_drift(criteria, capsys):
    c = criteria[8]
    fits = c["details"]["fits"]
    pts = max(abs(f["slope_points"] + f["alpha"]) for f in fits)
    gau = max(abs(f["slope_gaussian"] / -f["alpha"] - 1) for f in fits)
    combos = {(f["n"], f["alpha"]) for f in fits}
    ok = (combos == {(n, a) for n in (1, 2, 3) for a in (0.5, 1.0, 1.5)} and pts < 1e-3 and gau < 0.02
          and c["details"]["ordered"] and c["seconds"] < 10)
    verdict(capsys, 8, ok, f"point-mass slope error {pts:.1e} < 1e-3, Gaussian rel {gau:.1e} < 2%, "
                           f"ordered in alpha, {c['seconds']:.1f}s < 10s")


def test_criterion_09_fp_identity(criteria, capsys):
    runs = criteria[9]["details"]["runs"]
    worst = max(r["max_rel"] for r in runs)
    combos = {(r["n"], r["alpha"]) for r in runs}
    ok = combos == {(n, a) for n in (2, 3) for a in (0.5, 1.0, 1.5)} and worst < 0.05
    verdict(capsys, 9, ok, f"{len(runs)} runs, worst |dE/dt - rhs|/|rhs| = {worst:.1e} < 5e-2 on [0.2, 3]")


def test_criterion_10_negative_order(criteria, capsys):
    d = criteria[10]["details"]
    ok = len(d["pairs"]) == 50 and d["lowest_raw"] >= -1e-10 and d["worst_rel"] < 1e-2
    verdict(capsys, 10, ok, f"50 pairs, lowest value {d['lowest_raw']:.2e} >= -1e-10, "
                            f"backends agree to {d['worst_rel']:.1e} < 1e-2")


def test_criterion_11_interpolation(criteria, capsys):
    d = criteria[11]["details"]
    ok = (d["pairs"] == 120 and d["holds_all"] and d["worst_lhs_over_rhs"] <= 1 + 1e-6
          and d["min_split_excess"] >= -1e-9)
    verdict(capsys, 11, ok, f"120 pairs, worst lhs/rhs {d['worst_lhs_over_rhs']:.3f} <= 1, "
                            f"split bound excess >= {d['min_split_excess']:.2e}")


def test_criterion_12_heat_envelope(criteria, capsys):
    d = criteria[12]["details"]
    ok = (d["pairs"] == 60 and d["times"] == [0.5, 1.0, 2.0, 4.0, 8.0] and d["dominated_all"]
          and d["d1_monotone_all"] and d["worst_value_over_envelope"] <= 1.0)
    verdict(capsys, 12, ok, f"60 pairs, worst trace/envelope {d['worst_value_over_envelope']:.3f} <= 1, "
                            f"d_1 non-increasing: {d['d1_monotone_all']}")


def test_criterion_13_full_suite(suite_run, capsys):
    report = suite_run["report"]
    n = len(report["criteria"]) if report else 0
    ok = suite_run["code"] == 0 and suite_run["wall"] < BUDGET_SECONDS and n >= 12 and report["passed"]
    verdict(capsys, 13, ok, f"`energyfp suite` exit {suite_run['code']}, {n} criteria, "
                            f"{suite_run['wall']:.0f}s < {BUDGET_SECONDS}s")
