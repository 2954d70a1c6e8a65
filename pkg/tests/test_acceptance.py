"""Acceptance criteria, each at its stated tolerance and time budget.

Every test records one ``PASS``/``FAIL`` line; the lines are printed as they
happen (visible with ``-s``) and again in the terminal summary.
"""

import copy
import time
from pathlib import Path

import numpy as np
import pytest

from fluidlaws.cli.schema import parse_scenario, tomllib
from fluidlaws.cli.workflows import WORKFLOWS, Workbench
from fluidlaws.jetcheck import FAIL_TOL, PASS_TOL, gap_violations, negative_pairings, oneform_suite, positive_pairings, run_suite
from fluidlaws.manifold import geometry, interior_sample, make_chart

SCENARIOS = Path(__file__).resolve().parents[1] / "src" / "fluidlaws" / "cli" / "scenarios"
RESULTS = []


def bundled(name):
    return tomllib.loads((SCENARIOS / f"{name}.toml").read_text())


def report(number, title, ok, detail, seconds, budget):
    ok = bool(ok) and seconds <= budget
    line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail} ({seconds:.1f}s of {budget:.0f}s)"
    RESULTS.append(line)
    print(line)
    return ok


def failed(checks):
    return [c.name for c in checks if not c.passed]


# ---- 1-3: jet space


def test_criterion_1_positive_suite():
    t0 = time.perf_counter()
    res = run_suite(positive_pairings(2), count=1000, seed=0)
    dt = time.perf_counter() - t0
    worst = max(r.max_residual for r in res)
    charts = {r.pairing.chart.name for r in res}
    ok = all(r.passed for r in res) and {"flat_torus", "torus_of_revolution"} <= charts and not gap_violations(res)
    assert report(1, "conserved pairings vanish", ok, f"{len(res)} pairings, max residual {worst:.2e} <= {PASS_TOL:g}", dt, 120)


def test_criterion_2_negative_suite():
    t0 = time.perf_counter()
    res = run_suite(negative_pairings(), count=1000, seed=0)
    dt = time.perf_counter() - t0
    least = min(r.max_residual for r in res)
    labels = " ".join(r.pairing.label for r in res)
    covered = all(k in labels for k in ("gamma=1.7", "gamma=2.3", "NonIsentropicEnergy/Polytropic", "non-Killing"))
    ok = len(res) >= 12 and all(r.passed for r in res) and covered and not gap_violations(res)
    assert report(2, "forbidden pairings detected", ok, f"{len(res)} pairings, min max-residual {least:.2e} >= {FAIL_TOL:g}", dt, 60)


def test_criterion_3_vorticity_suite():
    t0 = time.perf_counter()
    res = oneform_suite(count=1000, seed=0)
    dt = time.perf_counter() - t0
    baro = max(r.max_residual for r in res if r.expect == "conserved")
    gen = min(r.max_residual for r in res if r.expect == "forbidden")
    ok = all(r.passed for r in res) and {r.n for r in res} == {2, 3}
    assert report(3, "vorticity transport", ok, f"barotropic {baro:.2e}, general {gen:.2e}", dt, 120)


# ---- 4-5: shared smooth barotropic run on the flat torus


@pytest.fixture(scope="module")
def flat_run():
    cfg = bundled("mass_torus")
    cfg.update(name="acceptance_flat", tasks=["verify-densities", "verify-circulation"])
    cfg["grid"] = {"shape": [128, 128], "refine": [2]}
    cfg["solver"] = {"dt": 1e-3, "t_end": 1.0, "snapshot_every": 2}
    cfg["densities"] = {
        "mass": {"variant": "Mass"},
        "entropy": {"variant": "VolumetricEntropy", "f": {"kind": "exp", "amp": 1.0, "rate": 1.0}},
        "energy": {"variant": "Energy"},
        "momentum": {"variant": "Momentum", "zeta": {"kind": "translation", "axis": 0}},
    }
    cfg["markers"]["curves"] = copy.deepcopy(bundled("circulation_barotropic")["markers"]["curves"])
    t0 = time.perf_counter()
    wb = Workbench(parse_scenario(cfg), threads=2)
    wb.runs()
    return wb, time.perf_counter() - t0


def test_criterion_4_transported_integrals(flat_run):
    wb, sim = flat_run
    t0 = time.perf_counter()
    res = WORKFLOWS["verify-densities"](wb)
    dt = sim + time.perf_counter() - t0
    by = {c.name: c for c in res.checks}
    drift = max(c.value for n, c in by.items() if n.split("@")[0] in ("mass", "entropy") and "drift" in n)
    bal = {n: c.value for n, c in by.items() if n.split("@")[0] in ("energy", "momentum") and "balance" in n}
    ratios = {n: c.value for n, c in by.items() if "ratio" in n}
    detail = f"drift {drift:.2e}, balance max {max(bal.values()):.2e}, ratios " + ", ".join(f"{v:.2f}" for v in ratios.values())
    ok = res.passed and drift <= 1e-4 and max(bal.values()) <= 5e-3 and len(ratios) >= 2 and min(ratios.values()) >= 3.5
    assert report(4, "mass/entropy drift, energy/momentum balance", ok, detail, dt, 600), failed(res.checks)


def test_criterion_5_circulation(flat_run):
    wb, sim = flat_run
    t0 = time.perf_counter()
    res = WORKFLOWS["verify-circulation"](wb)
    dt = sim + time.perf_counter() - t0
    closed = max(c.value for c in res.checks if c.name.startswith("loop") and "drift" in c.name)
    order = min(c.value for c in res.checks if c.name.startswith("chord") and "order" in c.name)
    ok = res.passed and closed <= 5e-3 and order >= 1.9
    assert report(5, "circulation", ok, f"closed drift {closed:.2e}, open-curve order {order:.3f}", dt, 300), failed(res.checks)


# ---- 6: curved chart


def test_criterion_6_curved_momentum():
    cfg = bundled("mass_torus")
    cfg.update(name="acceptance_curved", tasks=["verify-densities"])
    cfg["chart"] = {"name": "M2"}
    cfg["grid"] = {"shape": [64, 64], "refine": [2]}
    cfg["eos"] = bundled("hamiltonian_torus")["eos"]
    cfg["solver"] = {"dt": 1e-3, "t_end": 1.0, "snapshot_every": 2}
    cfg["densities"] = {"axial_momentum": {"variant": "Momentum", "zeta": {"kind": "axial", "axis": 1}}}
    cfg["checks"] = {"min_ratio": 2.0}
    t0 = time.perf_counter()
    wb = Workbench(parse_scenario(cfg), threads=2)
    res = WORKFLOWS["verify-densities"](wb)
    dt = time.perf_counter() - t0
    fine = [c for c in res.checks if "balance" in c.name and "128" in c.name]
    ratio = [c for c in res.checks if "ratio" in c.name]
    ok = res.passed and len(fine) == 1 and fine[0].value <= 5e-3 and ratio and ratio[0].value >= 2.0
    detail = f"balance@128 {fine[0].value:.2e}, ratio {ratio[0].value:.2f}" if fine and ratio else "missing checks"
    assert report(6, "axial momentum on the torus of revolution", ok, detail, dt, 600), failed(res.checks)


# ---- 7: Hamiltonian structure


def test_criterion_7_hamiltonian():
    cfg = bundled("hamiltonian_torus")
    t0 = time.perf_counter()
    wb = Workbench(parse_scenario(cfg), threads=2)
    res = WORKFLOWS["verify-hamiltonian"](wb)
    dt = time.perf_counter() - t0
    cas = [c for c in res.checks if c.name.startswith("casimir")]
    flow = [c.value for c in res.checks if c.name.startswith("flow:ratio")]
    sym = [c.value for c in res.checks if c.name.startswith("symmetry:energy:ratio")]
    ok = res.passed and cas and all(c.value == 0.0 for c in cas) and min(flow) >= 3.5 and min(sym) >= 3.5
    detail = f"casimirs exactly 0 ({len(cas)} checks), flow ratios {[round(v, 2) for v in flow]}, time-translation ratios {[round(v, 2) for v in sym]}"
    assert report(7, "Hamiltonian form, Casimirs, time translation", ok, detail, dt, 300), failed(res.checks)


# ---- 8: geometry kernel


def test_criterion_8_geometry():
    t0 = time.perf_counter()
    failures = []
    for chart in ({"name": "M1"}, {"name": "M1", "params": {"n": 3}}, {"name": "M2"}, {"name": "M3"}, {"name": "M3", "params": {"n": 3}}, {"name": "M4"}):
        wb = Workbench(parse_scenario({"name": "acceptance_geometry", "tasks": ["geometry-report"], "chart": chart}))
        res = WORKFLOWS["geometry-report"](wb)
        failures += [f"{chart['name']}:{n}" for n in failed(res.checks)]
    sphere = make_chart("M3", n=2)
    x = interior_sample(sphere, 200, np.random.default_rng(0), margin=0.05)
    R = geometry(sphere, x, curvature=True).scalar_curv
    err = float(np.max(np.abs(R - 2.0)))
    dt = time.perf_counter() - t0
    ok = not failures and err <= 1e-6
    assert report(8, "geometry identities", ok, f"{len(failures)} failed checks, sphere |R - 2| {err:.1e}", dt, 30), failures
