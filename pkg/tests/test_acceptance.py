"""End-to-end acceptance checks.  Each test prints one PASS/FAIL line and
then asserts, so the full list is visible even when some criteria fail."""

import json
import math
import time

import numpy as np

from irgvoter.chains import bound_audit, build_generator, catalog, coalescence_time, consensus_time
from irgvoter.cli import run
from irgvoter.dynamics import CoalConfig, VoterConfig, batch
from irgvoter.experiments import (branches, parse_grid, scaling_experiment, theoretical_exponent,
                                  thresholds)
from irgvoter.graphgen import GraphSpec, sample_graph
from irgvoter.gwcoupling import cluster_size_thinned, gw_tail_statistics
from irgvoter.rng import RngStream
from irgvoter.structure import components, find_simple_double_star, structure_report

THETAS = (-1, 0, 0.5, 1, 2)
DYNAMICS = ("classical", "discursive")


def sup_cdf_distance(a, b):
    grid = np.union1d(a, b)
    fa = np.searchsorted(np.sort(a), grid, side="right") / len(a)
    fb = np.searchsorted(np.sort(b), grid, side="right") / len(b)
    return float(np.abs(fa - fb).max())


def test_criterion_01_duality(verdict):
    t0 = time.perf_counter()
    worst, cases = 0.0, 0
    for g in catalog().values():
        for dyn in DYNAMICS:
            for theta in THETAS:
                rm = build_generator(g, dynamics=dyn, theta=theta)
                tc, tu = coalescence_time(rm), consensus_time(rm, "unique")
                worst = max(worst, abs(tu - tc) / tc)
                cases += 1
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9 and dt < 10
    assert verdict(1, ok, f"duality on {cases} cases, max rel err {worst:.1e}, {dt:.1f} s (< 10 s)")


def test_criterion_02_sandwich(verdict):
    bad, cases = [], 0
    slack = 1e-12  # floating point only; K2 attains the lower bound
    for name, g in catalog().items():
        for dyn in DYNAMICS:
            for theta in THETAS:
                rm = build_generator(g, dynamics=dyn, theta=theta)
                tc = coalescence_time(rm)
                for u in (0.1, 0.3, 0.5):
                    tu = consensus_time(rm, "bernoulli", u)
                    cases += 1
                    if not (2 * u * (1 - u) * tc <= tu * (1 + slack) and tu <= tc * (1 + slack)):
                        bad.append((name, dyn, theta, u))
    assert verdict(2, not bad, f"sandwich on {cases} cases, {len(bad)} violations"), bad[:5]


def test_criterion_03_bound_audit(verdict):
    t0 = time.perf_counter()
    failed = []
    for name, g in catalog().items():
        for dyn in DYNAMICS:
            for theta in THETAS:
                rep = bound_audit(build_generator(g, dynamics=dyn, theta=theta))
                failed += [(name, dyn, theta, c.name) for c in rep.failures()]
    p3 = bound_audit(build_generator(catalog(0)["P3"])).get("commute_le_path_resistance")
    dt = time.perf_counter() - t0
    eq = p3.equality and math.isclose(p3.lhs, 8, rel_tol=1e-12) and math.isclose(p3.rhs, 8, rel_tol=1e-12)
    ok = not failed and eq and dt < 30
    assert verdict(3, ok, f"{len(failed)} failed checks; P3 commute {p3.lhs:.12g} = {p3.rhs:.12g} "
                          f"(equality {p3.equality}); {dt:.1f} s (< 30 s)"), failed[:5]


def test_criterion_04_mc_exact(verdict):
    t0 = time.perf_counter()
    reps = 10**5
    cat = catalog(0)
    rows = []
    for k, name in enumerate(("K2", "P3", "K13")):
        g = cat[name]
        rm = build_generator(g)
        jobs = [("voter", VoterConfig("classical", 0.0, "unique"), consensus_time(rm, "unique")),
                ("coalescing", CoalConfig("classical", 0.0), coalescence_time(rm))]
        for j, (kind, cfg, exact) in enumerate(jobs):
            st = batch(g, cfg, reps, RngStream(4000 + 10 * k + j, kind))
            rows.append((name, kind, st.mean, exact, abs(st.mean - exact) / st.stderr))
    dt = time.perf_counter() - t0
    worst = max(r[4] for r in rows)
    ok = worst < 3 and dt < 60
    detail = ", ".join(f"{n}/{k} {z:.2f}se" for n, k, _, _, z in rows)
    assert verdict(4, ok, f"max {worst:.2f} se ({detail}); {dt:.1f} s (< 60 s)"), rows


def _scaling(dynamics, target):
    t0 = time.perf_counter()
    res = scaling_experiment(GraphSpec(512, 0.1, 0.4), dynamics, 0.0, parse_grid("512:16384:x2"), 200,
                             RngStream(1, "scaling"), target=target)
    return res, time.perf_counter() - t0


def test_criterion_05_exponent_recovery(verdict):
    cl, t1 = _scaling("classical", None)
    ds, t2 = _scaling("discursive", 0.40)
    ok_c = abs(cl.slope - 1 / 3) <= 0.15 and t1 < 900
    ok_d = abs(ds.slope - 0.40) <= 0.15 and t2 < 900
    assert verdict(5, ok_c and ok_d,
                   f"classical slope {cl.slope:.3f} vs 1/3 +- 0.15 [{cl.ci_low:.3f}, {cl.ci_high:.3f}] "
                   f"{t1:.0f} s; discursive slope {ds.slope:.3f} vs 0.40 +- 0.15 "
                   f"[{ds.ci_low:.3f}, {ds.ci_high:.3f}] {t2:.0f} s")


def test_criterion_06_exponent_properties(verdict):
    t0 = time.perf_counter()
    gammas = np.linspace(0.02, 0.48, 24)
    grid = np.round(np.arange(-2.0, 3.0 + 1e-9, 0.01), 10)
    gaps = []
    for g in gammas:
        for dyn in DYNAMICS:
            for scope in ("global", "component1"):
                pieces = branches(g, dyn, scope)
                for (_, hi, f), (_, _, f2) in zip(pieces, pieces[1:]):
                    gaps.append(abs(f(hi) - f2(hi)))
                    gaps.append(abs(theoretical_exponent(g, hi, dyn, scope) - f(hi)))
                assert thresholds(g, dyn, scope) == sorted(thresholds(g, dyn, scope))
    cont = max(gaps) <= 1e-12
    c = [theoretical_exponent(1 / 3, t, "classical") for t in grid]
    d = [theoretical_exponent(1 / 3, t, "discursive") for t in grid]
    nonmono = np.any(np.diff(c) > 0) and np.any(np.diff(c) < 0)
    mono = bool(np.all(np.diff(d) <= 1e-15))
    dominance = all(theoretical_exponent(g, t, dyn) >= theoretical_exponent(g, t, dyn, "component1") - 1e-15
                    for g in gammas for t in grid[::5] for dyn in DYNAMICS)
    dt = time.perf_counter() - t0
    ok = cont and nonmono and mono and dominance and dt < 5
    assert verdict(6, ok, f"continuity gap {max(gaps):.1e}, classical non-monotone {nonmono}, "
                          f"discursive monotone {mono}, global >= component1 {dominance}; {dt:.1f} s (< 5 s)")


def test_criterion_07_coupling(verdict):
    t0 = time.perf_counter()
    spec = GraphSpec(300, 0.1, 0.3, "mnr")
    reps = 10**4
    direct = np.array([len(components(sample_graph(spec, RngStream(7, "direct", r))).of(1))
                       for r in range(reps)])
    thinned = np.array([cluster_size_thinned(1, spec, RngStream(7, "thin", r)) for r in range(reps)])
    dist = sup_cdf_distance(direct, thinned)
    dt = time.perf_counter() - t0
    assert verdict(7, dist < 0.05 and dt < 120,
                   f"sup CDF distance {dist:.4f} (< 0.05), means {direct.mean():.3f} / {thinned.mean():.3f}; "
                   f"{dt:.1f} s (< 120 s)")


def test_criterion_08_gw_tail(verdict):
    t0 = time.perf_counter()
    rep = gw_tail_statistics(GraphSpec(1000, 0.1, 0.4), 1.01, 10**5, RngStream(8, "tail"))
    dt = time.perf_counter() - t0
    ok = abs(rep.slope - (1 - 1 / 0.4)) <= 0.2 and dt < 60
    assert verdict(8, ok, f"CCDF slope {rep.slope:.3f} vs {1 - 1 / 0.4:.3f} +- 0.2 "
                          f"(CI {rep.slope_ci[0]:.3f}, {rep.slope_ci[1]:.3f}); {dt:.1f} s (< 60 s)")


def test_criterion_09_structure(verdict):
    t0 = time.perf_counter()
    n = 10**5
    spec = GraphSpec(n, 0.1, 0.4)
    trees, ratios = [], []
    for seed in range(1, 21):
        g = sample_graph(spec, RngStream(seed, "graph"))
        rep = structure_report(g, spec, min_size=10**9, exact_diameter=False)
        trees.append(rep.all_big_trees)
        ratios.append(g.degree(1) / n ** spec.gamma)
    ds_spec = GraphSpec(n, 0.05, 0.45)
    stars = [find_simple_double_star(sample_graph(ds_spec, RngStream(seed, "graph")), ds_spec) is not None
             for seed in range(1, 21)]
    dt = time.perf_counter() - t0
    ok_t = np.mean(trees) >= 0.95
    ok_d = all(0.2 <= r <= 5 for r in ratios)
    ok_s = np.mean(stars) >= 0.9
    ok = ok_t and ok_d and ok_s and dt < 600
    assert verdict(9, ok, f"big components trees in {np.mean(trees):.2f} of seeds (>= 0.95) {ok_t}; "
                          f"d(1)/N^gamma in [{min(ratios):.3f}, {max(ratios):.3f}] vs [0.2, 5] {ok_d}; "
                          f"simple double star in {np.mean(stars):.2f} of seeds (>= 0.9) {ok_s}; "
                          f"{dt:.0f} s (< 600 s)")


def test_criterion_10_determinism(verdict, tmp_path, monkeypatch):
    monkeypatch.setenv("IRGVOTER_OUTPUT_DIR", str(tmp_path))
    argv = ["scaling", "--dynamics", "classical", "--theta", "0", "--gamma", "0.4", "--beta", "0.1",
            "--grid", "128:1024:x2", "--reps", "50", "--seed", "1", "--n-boot", "200"]
    codes = [run(argv + ["--out", "first"]), run(argv + ["--out", "second"])]
    same = all((tmp_path / f"first{s}").read_bytes() == (tmp_path / f"second{s}").read_bytes()
               for s in (".csv", ".json"))
    doc = json.loads((tmp_path / "first.json").read_text())
    ok = codes == [0, 0] and same
    assert verdict(10, ok, f"two scaling runs byte-identical (csv, json): {same}; "
                           f"slope {doc['result']['slope']:.4f}")
