"""Acceptance suite: one test per criterion, one printed PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion lines
as they complete. The statistical criteria run hundreds of simulations; the
whole module takes on the order of 10-20 minutes on two cores.
"""

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from morphogen import cli
from morphogen.engine import EngineConfig, Scenario, run
from morphogen.explorer import SweepPlan, alpha_grid, scheme_difference_map, sweep
from morphogen.metrics import MoranConfig, area_sums, moran_index
from morphogen.network import RoadNetwork, network_distance
from morphogen.optimizer import AssignmentRecord, ZoningScenario, optimize, pareto_front
from morphogen.segregation import SegregationConfig

JOBS = min(2, os.cpu_count() or 1)


def report(criterion: int, ok: bool, detail: str) -> None:
    print(f"[criterion {criterion:2d}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"criterion {criterion}: {detail}"


# -- criterion 1: sweep cardinality and corner-sweep runtime ---------------

def test_criterion_01_sweep_cardinality():
    tiny = EngineConfig(alpha=(1, 0, 0, 0), steps=3, n_per_step=5)
    small_scenario = Scenario(size=16, center_count=3, a_max=2)
    n_02 = len(sweep(SweepPlan(base_config=tiny, step=0.2, replicates=1, jobs=JOBS),
                     small_scenario))
    n_05 = len(sweep(SweepPlan(base_config=tiny, step=0.5, replicates=1, jobs=JOBS),
                     small_scenario))
    t0 = time.monotonic()
    reference = EngineConfig(alpha=(1, 0, 0, 0), steps=30, n_per_step=15, theta2=5.0, rho=5.0)
    n_10 = len(sweep(SweepPlan(base_config=reference, step=1.0, replicates=5, jobs=JOBS),
                     Scenario(size=56)))
    corner_elapsed = time.monotonic() - t0
    ok = (n_02, n_05, n_10) == (1295, 80, 15) and corner_elapsed < 300
    report(1, ok, f"records step0.2={n_02} step0.5={n_05} step1.0={n_10}, "
                  f"corner sweep {corner_elapsed:.1f}s (bound 300s)")


# -- criteria 2 + 11: metric ranges and the isolation-distance contract ----

def _randomized_run(seed_int):
    rng = np.random.default_rng(seed_int)
    size = int(rng.choice([28, 56]))
    alpha = tuple(rng.uniform(0.0, 1.0, size=4))
    if sum(alpha) <= 0:
        alpha = (1.0, 0.0, 0.0, 0.0)
    config = EngineConfig(
        alpha=alpha,
        steps=int(rng.integers(10, 31)),
        n_per_step=int(rng.integers(1, 21)),
        seed=int(rng.integers(0, 2**63)),
    )
    result = run(Scenario(size=size), config)
    worst_d2 = max(result.max_road_distance_per_step)
    return result.metrics, result.metric_errors, worst_d2, config.theta2


def test_criterion_02_and_11_metric_ranges_and_theta2():
    n_runs = 1000
    with ProcessPoolExecutor(max_workers=JOBS) as ex:
        outcomes = list(ex.map(_randomized_run, range(n_runs), chunksize=25))
    range_violations = []
    theta_violations = []
    errors = 0
    for metrics, errs, worst_d2, theta2 in outcomes:
        errors += len(errs)
        if "D" in metrics and not 0.0 <= metrics["D"] <= 1.0:
            range_violations.append(("D", metrics["D"]))
        if "I" in metrics and not -1.0 <= metrics["I"] <= 1.0:
            range_violations.append(("I", metrics["I"]))
        if "S" in metrics and not metrics["S"] >= 1.0:
            range_violations.append(("S", metrics["S"]))
        if "A" in metrics and not 0.0 <= metrics["A"] <= 1.0:
            range_violations.append(("A", metrics["A"]))
        if worst_d2 > theta2 + 1e-9:
            theta_violations.append(worst_d2)
    report(2, not range_violations,
           f"{n_runs} randomized runs, range violations={len(range_violations)} "
           f"(excluded-metric events={errors})")
    report(11, not theta_violations,
           f"post-step max road distance <= theta2 in all {n_runs} runs, "
           f"violations={len(theta_violations)}")


# -- criterion 3: Moran brute-force oracle ----------------------------------

def _brute_moran(counts, centroids):
    n = len(counts)
    mean = sum(counts) / n
    num = wsum = den = 0.0
    for mu in range(n):
        den += (counts[mu] - mean) ** 2
        for nu in range(n):
            if mu != nu:
                d = float(np.hypot(*(centroids[mu] - centroids[nu])))
                num += (counts[mu] - mean) * (counts[nu] - mean) / d
                wsum += 1.0 / d
    return (n / wsum) * num / den


def test_criterion_03_moran_oracle():
    from morphogen.grid import Lattice
    from morphogen.engine import SimulationState

    rng = np.random.default_rng(303)
    checked = 0
    worst = 0.0
    while checked < 100:
        m = int(rng.choice([2, 4, 7]))
        n = m * int(rng.integers(2, 6))
        occ = rng.random((n, n)) < rng.uniform(0.05, 0.7)
        counts = area_sums(occ.astype(float), m)
        if np.ptp(counts) == 0:
            continue
        side = n / m
        centroids = np.array([[(i + 0.5) * side, (j + 0.5) * side]
                              for i in range(m) for j in range(m)])
        expected = _brute_moran(counts, centroids)
        state = SimulationState(lattice=Lattice(n, occ), network=None)
        got = moran_index(state, MoranConfig(m))
        worst = max(worst, abs(got - expected))
        checked += 1
    report(3, worst <= 1e-12, f"100 random patterns, max |diff| = {worst:.2e} (bound 1e-12)")


# -- criterion 4: shortest-path oracle --------------------------------------

def _floyd_warshall_d3(nodes, edges, point, center_nodes):
    best = (np.inf, None, None)
    for ei, (u, v) in enumerate(edges):
        a, b = np.asarray(nodes[u], float), np.asarray(nodes[v], float)
        d = b - a
        denom = float(d @ d)
        t = 0.0 if denom == 0 else float(np.clip((np.asarray(point) - a) @ d / denom, 0, 1))
        foot = a + t * d
        dist = float(np.linalg.norm(np.asarray(point) - foot))
        if dist < best[0]:
            best = (dist, ei, t)
    offset, ei, t = best
    u, v = edges[ei]
    pts = [np.asarray(p, float) for p in nodes]
    foot = pts[u] + t * (pts[v] - pts[u])
    pts.append(foot)
    fi = len(pts) - 1
    all_edges = [e for k, e in enumerate(edges) if k != ei] + [(u, fi), (fi, v)]
    n = len(pts)
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    for a, b in all_edges:
        w = float(np.linalg.norm(pts[a] - pts[b]))
        dist[a, b] = min(dist[a, b], w)
        dist[b, a] = min(dist[b, a], w)
    for k in range(n):
        dist = np.minimum(dist, dist[:, k:k + 1] + dist[k:k + 1, :])
    return offset + min(dist[fi, c] for c in center_nodes)


def test_criterion_04_shortest_path_oracle():
    rng = np.random.default_rng(404)
    worst = 0.0
    for _ in range(100):
        n_nodes = int(rng.integers(2, 11))
        nodes = [(float(x), float(y)) for x, y in rng.uniform(0, 20, size=(n_nodes, 2))]
        edges = [(i, int(rng.integers(i))) for i in range(1, n_nodes)]
        for _ in range(int(rng.integers(0, 3))):
            u, v = (int(x) for x in rng.integers(0, n_nodes, size=2))
            if u != v and (u, v) not in edges and (v, u) not in edges:
                edges.append((u, v))
        k = int(rng.integers(1, n_nodes + 1))
        center_nodes = [int(c) for c in rng.choice(n_nodes, size=k, replace=False)]
        net = RoadNetwork(nodes=nodes, edges=edges,
                          centers=[(c, 1) for c in center_nodes])
        point = tuple(rng.uniform(-2, 22, size=2))
        expected = _floyd_warshall_d3(nodes, edges, point, center_nodes)
        worst = max(worst, abs(network_distance(point, net) - expected))
    report(4, worst <= 1e-9, f"100 random graphs, max |diff| = {worst:.2e} (bound 1e-9)")


# -- criterion 5: Pareto brute-force oracle ---------------------------------

def _record(h, a):
    return AssignmentRecord(assignment=(0, 1), h_values=[h], a_values=[a], mean_h=h,
                            mean_a=a, std_h=0.0, std_a=0.0, heterogeneity=0.0, valid=True)


def test_criterion_05_pareto_oracle():
    rng = np.random.default_rng(505)
    mismatches = 0
    for _ in range(100):
        pts = rng.random((200, 2))
        recs = [_record(float(h), float(a)) for h, a in pts]
        pareto_front(recs)
        for i, r in enumerate(recs):
            dominated = any(
                (pts[j, 0] <= pts[i, 0] and pts[j, 1] <= pts[i, 1]
                 and (pts[j, 0] < pts[i, 0] or pts[j, 1] < pts[i, 1]))
                for j in range(200) if j != i
            )
            if r.pareto == dominated:
                mismatches += 1
    report(5, mismatches == 0, f"100 sets x 200 points, flag mismatches = {mismatches}")


# -- criterion 6: sensitivity of D at the density corner --------------------

def _density_corner_run(seed):
    config = EngineConfig(alpha=(1, 0, 0, 0), steps=30, n_per_step=15, seed=int(seed))
    return run(Scenario(size=56), config).metrics["D"]


def test_criterion_06_density_sensitivity():
    t0 = time.monotonic()
    with ProcessPoolExecutor(max_workers=JOBS) as ex:
        values = np.array(list(ex.map(_density_corner_run, range(100), chunksize=10)))
    elapsed = time.monotonic() - t0
    cv = float(values.std(ddof=1) / values.mean())
    ok = cv <= 0.2 and elapsed < 600
    report(6, ok, f"D over 100 runs: mean={values.mean():.4f} cv={cv:.4f} "
                  f"(bound 0.2), {elapsed:.1f}s (bound 600s)")


# -- criterion 7: morphology-class separation -------------------------------

def _moran_under(alpha, seed):
    config = EngineConfig(alpha=alpha, steps=30, n_per_step=15, seed=int(seed))
    return run(Scenario(size=56), config).metrics.get("I")


def test_criterion_07_morphology_class_separation():
    density = [_moran_under((1, 0, 0, 0), 7000 + s) for s in range(20)]
    road = [_moran_under((0, 1, 0, 0), 7100 + s) for s in range(20)]
    density = [v for v in density if v is not None]
    road = [v for v in road if v is not None]
    t, p = stats.ttest_ind(density, road, equal_var=False, alternative="greater")
    ok = p < 0.05
    report(7, ok,
           f"mean I density-only={np.mean(density):.4f}, road-only={np.mean(road):.4f}, "
           f"one-sided Welch p={p:.3g} (needs p<0.05 for density > road)")


# -- criterion 8: update-scheme robustness at corners ------------------------

def test_criterion_08_corner_scheme_robustness():
    base = EngineConfig(alpha=(1, 0, 0, 0), steps=6, n_per_step=15)
    scenario = Scenario(size=28)
    corners = alpha_grid(1.0)
    rng = np.random.default_rng(808)
    interior = [tuple(rng.uniform(0.01, 0.99, size=4)) for _ in range(20)]
    corner_recs = scheme_difference_map(corners, scenario, base, n_parallel=20,
                                        replicates=20, base_seed=81, jobs=JOBS)
    interior_recs = scheme_difference_map(interior, scenario, base, n_parallel=20,
                                          replicates=20, base_seed=82, jobs=JOBS)
    corner_mean = float(np.mean([r.mean_size for r in corner_recs]))
    interior_mean = float(np.mean([r.mean_size for r in interior_recs]))
    ok = corner_mean < interior_mean
    report(8, ok, f"mean |delta| corners={corner_mean:.1f} vs interior={interior_mean:.1f} "
                  f"(needs corners strictly smaller)")


# -- criterion 9: zoning pipeline --------------------------------------------

def _zoning_scenario_28():
    # nine assignable block centers on a 3x3 arrangement of avenues, plus a
    # fixed transport hub on the edge of the district
    coords = [5.0, 14.0, 23.0]
    nodes = [(x, y) for x in coords for y in coords]
    nodes.append((14.0, 1.0))  # hub
    edges = [(0, 1), (1, 2), (3, 4), (4, 5), (6, 7), (7, 8),
             (0, 3), (3, 6), (1, 4), (4, 7), (2, 5), (5, 8),
             (3, 9)]
    return ZoningScenario(
        size=28,
        network_nodes=nodes,
        network_edges=edges,
        assignable_nodes=list(range(9)),
        fixed_centers=[(9, 3)],
        engine_template=EngineConfig(alpha=(0.7, 0, 0, 1), steps=15, n_per_step=15),
        segregation=SegregationConfig(agent_density=0.15, tolerance=0.6, max_sweeps=500),
        moran_areas=7,
    )


def test_criterion_09_zoning_pipeline():
    t0 = time.monotonic()
    records = optimize(_zoning_scenario_28(), replicates=1, base_seed=9, jobs=JOBS)
    elapsed = time.monotonic() - t0
    front = [r for r in records if r.pareto]
    rest = [r for r in records if r.valid and not r.pareto]
    median_rest = float(np.median([r.heterogeneity for r in rest]))
    min_front = min(r.heterogeneity for r in front) if front else float("nan")
    ok = (len(records) == 510 and elapsed < 900 and len(front) > 0
          and all(r.heterogeneity >= median_rest for r in front))
    report(9, ok, f"510 evaluations in {elapsed:.1f}s (bound 900s), front size={len(front)}, "
                  f"min front lambda={min_front:.3f} vs median rest={median_rest:.3f}")


# -- criterion 10: byte-level determinism of every command -------------------

def _scenario_file(tmp_path):
    doc = {
        "size": 12,
        "random_centers": {"count": 3, "a_max": 2},
        "engine": {"alpha": [0.5, 0.5, 0.0, 0.0], "steps": 3, "n_per_step": 5, "seed": 11},
    }
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def _zoning_file(tmp_path):
    xs = (2.0, 6.0, 10.0)
    nodes = [[x, y] for x in xs for y in xs]
    edges = [[0, 1], [1, 2], [3, 4], [4, 5], [6, 7], [7, 8],
             [0, 3], [3, 6], [1, 4], [4, 7], [2, 5], [5, 8]]
    centers = [{"x": nodes[i][0], "y": nodes[i][1], "activity": 1, "assignable": True}
               for i in (0, 2, 6)]
    doc = {
        "size": 12,
        "centers": centers,
        "network": {"nodes": nodes, "edges": edges},
        "engine": {"alpha": [0.7, 0, 0, 1], "steps": 3, "n_per_step": 6, "seed": 5},
        "segregation": {"agent_density": 0.15, "tolerance": 0.5, "max_sweeps": 40},
        "optimize": {"replicates": 1},
    }
    path = tmp_path / "zoning.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def test_criterion_10_command_determinism(tmp_path):
    sc = _scenario_file(tmp_path)
    zc = _zoning_file(tmp_path)
    commands = [
        (["run", sc, "--seed", "42"], ("result.json", "pattern.pgm", "network.json")),
        (["sweep", sc, "--step", "1.0", "--replicates", "2"],
         ("sweep.csv", "runs.csv", "histograms.csv")),
        (["diffmap", sc, "--step", "1.0", "--n-parallel", "5", "--replicates", "2"],
         ("diffmap.csv",)),
        (["optimize", zc], ("assignments.csv",)),
    ]
    mismatches = []
    for k, (argv, outputs) in enumerate(commands):
        dirs = [tmp_path / f"{k}_{i}" for i in range(2)]
        for d in dirs:
            code = cli.main(argv + ["--out-dir", str(d)])
            assert code == 0, f"{argv} exited {code}"
        for name in outputs:
            if (dirs[0] / name).read_bytes() != (dirs[1] / name).read_bytes():
                mismatches.append(f"{argv[0]}:{name}")
    report(10, not mismatches, f"repeated all four commands, byte mismatches={mismatches}")
