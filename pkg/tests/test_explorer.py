import numpy as np
import pytest

from morphogen.engine import EngineConfig, Scenario
from morphogen.explorer import (
    SweepPlan,
    alpha_grid,
    replicate_stats,
    required_trials,
    run_seed,
    scheme_difference_map,
    sweep,
)


def test_alpha_grid_cardinality():
    assert len(alpha_grid(0.2)) == 6**4 - 1 == 1295
    assert len(alpha_grid(0.5)) == 3**4 - 1 == 80
    assert len(alpha_grid(1.0)) == 2**4 - 1 == 15


def test_alpha_grid_cardinality_formula():
    for step in (0.25, 0.1, 1 / 3):
        m = round(1 / step)
        assert len(alpha_grid(step)) == (m + 1) ** 4 - 1


def test_alpha_grid_lexicographic_and_excludes_origin():
    grid = alpha_grid(0.5)
    assert grid[0] == (0.0, 0.0, 0.0, 0.5)
    assert grid[-1] == (1.0, 1.0, 1.0, 1.0)
    assert (0.0, 0.0, 0.0, 0.0) not in grid
    assert grid == sorted(grid)


def test_alpha_grid_step_must_divide_one():
    with pytest.raises(ValueError):
        alpha_grid(0.3)


def test_run_seed_stable_and_distinct():
    assert run_seed(0, 1, 2) == run_seed(0, 1, 2)
    seeds = {run_seed(0, p, r) for p in range(10) for r in range(5)}
    assert len(seeds) == 50


def test_replicate_stats_constant_and_two_point():
    mean, std, count, _ = replicate_stats([3.7, 3.7, 3.7])
    assert mean == pytest.approx(3.7)
    assert std == 0.0
    assert count == 3
    mean, std, count, (hist, edges) = replicate_stats([0.0, 1.0])
    assert mean == pytest.approx(0.5)
    assert std == pytest.approx(np.sqrt(0.5))  # n-1 denominator
    assert count == 2
    assert len(hist) == 20 and len(edges) == 21


def test_replicate_stats_rejects_empty_and_nonfinite():
    with pytest.raises(ValueError):
        replicate_stats([])
    with pytest.raises(ValueError):
        replicate_stats([1.0, float("nan")])


def test_required_trials_paper_values():
    assert required_trials(0.1, 0.05) == 62
    assert required_trials(0.1, 0.17) == 6
    assert required_trials(0.0, 0.05) == 1


def tiny_plan(**kw):
    base = EngineConfig(alpha=(1, 0, 0, 0), steps=2, n_per_step=4)
    defaults = dict(base_config=base, step=1.0, replicates=2, base_seed=7, jobs=1)
    defaults.update(kw)
    return SweepPlan(**defaults)


def test_sweep_emits_one_record_per_grid_point():
    records = sweep(tiny_plan(), Scenario(size=12))
    assert len(records) == 15
    assert [r.alpha for r in records] == alpha_grid(1.0)
    for r in records:
        assert len(r.seeds) == 2
        assert len(r.runs) == 2


def test_sweep_aggregates_self_consistent():
    records = sweep(tiny_plan(), Scenario(size=12))
    for rec in records:
        for m, vals in rec.values.items():
            assert rec.means[m] == pytest.approx(float(np.mean(vals)), abs=1e-12)
            expected_std = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
            assert rec.stds[m] == pytest.approx(expected_std, abs=1e-12)


def test_sweep_deterministic_across_calls_and_jobs():
    a = sweep(tiny_plan(jobs=1), Scenario(size=12))
    b = sweep(tiny_plan(jobs=2), Scenario(size=12))
    for ra, rb in zip(a, b):
        assert ra.alpha == rb.alpha and ra.seeds == rb.seeds
        assert ra.means == rb.means and ra.values == rb.values


def test_diffmap_degenerate_single_cell_scheme():
    base = EngineConfig(alpha=(1, 0, 0, 0), steps=4, n_per_step=1)
    records = scheme_difference_map(
        [(1, 0, 0, 0), (0, 1, 0, 0)], Scenario(size=12), base,
        n_parallel=1, replicates=2, base_seed=3,
    )
    for rec in records:
        assert rec.sizes == [0, 0]
        assert rec.mean_size == 0.0
        assert (rec.d_proj, rec.i_proj) == (0.0, 0.0)


def test_diffmap_records_replicate_sizes_and_significance():
    base = EngineConfig(alpha=(1, 0, 0, 0), steps=2, n_per_step=5)
    records = scheme_difference_map(
        alpha_grid(1.0)[:4], Scenario(size=12), base,
        n_parallel=10, replicates=3, base_seed=1,
    )
    assert len(records) == 4
    for rec in records:
        assert len(rec.sizes) == 3
        assert rec.significance >= 0.0
    # significance: neighbor count within 0.05 of (D,I) times mean size
    pts = np.array([[r.d_proj, r.i_proj] for r in records])
    for i, rec in enumerate(records):
        neighbors = int((np.linalg.norm(pts - pts[i], axis=1) <= 0.05).sum()) - 1
        assert rec.significance == pytest.approx(neighbors * rec.mean_size)


def test_diffmap_deterministic():
    base = EngineConfig(alpha=(1, 0, 0, 0), steps=2, n_per_step=5)
    args = ([(1, 0, 0, 0), (0.5, 0.5, 0, 0)], Scenario(size=10), base)
    a = scheme_difference_map(*args, n_parallel=5, replicates=2, base_seed=11)
    b = scheme_difference_map(*args, n_parallel=5, replicates=2, base_seed=11)
    for ra, rb in zip(a, b):
        assert ra.sizes == rb.sizes
        assert (ra.d_proj, ra.i_proj, ra.significance) == (rb.d_proj, rb.i_proj, rb.significance)
