"""Weight-hypercube exploration: sweeps, replicate statistics, scheme maps.

The sweep enumerates the 4D weight grid {0, step, ..., 1}^4 minus the
origin in lexicographic order and runs a fixed number of replicates per
point. Every cell of the design gets an independent, reproducible seed
derived from (base seed, point index, replicate index), which makes the
whole sweep embarrassingly parallel and byte-stable regardless of worker
count. Per-run metric failures are excluded from aggregates and counted.

The scheme difference map contrasts the sequential update (one cell per
re-evaluation) against a parallel one (n_parallel cells per re-evaluation)
at equal total construction, projecting each point's mean difference
pattern into the (D, I) plane.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .engine import EngineConfig, Scenario, run, symmetric_difference
from .metrics import UndefinedMetricError, default_moran_areas, weighted_density, weighted_moran

SWEEP_METRICS = ("D", "I", "S", "A", "lambda")

#: Radius in the (D, I) plane within which difference-map points count as
#: neighbors for the significance score.
NEIGHBOR_RADIUS = 0.05


def alpha_grid(step: float) -> list[tuple[float, float, float, float]]:
    """All grid points of {0, step, 2*step, ..., 1}^4 except the origin,
    lexicographic. The step must divide 1 exactly (as a rational)."""
    if not 0 < step <= 1:
        raise ValueError(f"step must be in (0, 1], got {step}")
    m = round(1.0 / step)
    if abs(m * step - 1.0) > 1e-9:
        raise ValueError(f"step {step} does not divide 1")
    levels = [k / m for k in range(m + 1)]
    return [a for a in itertools.product(levels, repeat=4) if any(x > 0 for x in a)]


def run_seed(base_seed: int, point_index: int, replicate: int) -> int:
    """Stable 64-bit seed for one cell of a replicated design."""
    ss = np.random.SeedSequence([int(base_seed), int(point_index), int(replicate)])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class SweepPlan:
    base_config: EngineConfig
    step: float = 0.2
    replicates: int = 5
    base_seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        alpha_grid(self.step)  # validates divisibility
        if self.replicates < 1:
            raise ValueError(f"replicates must be >= 1, got {self.replicates}")


@dataclass
class SweepRecord:
    alpha: tuple[float, float, float, float]
    seeds: list[int]
    runs: list[dict] = field(default_factory=list)  # per-replicate metric dicts
    values: dict[str, list[float]] = field(default_factory=dict)
    means: dict[str, float] = field(default_factory=dict)
    stds: dict[str, float] = field(default_factory=dict)
    excluded: dict[str, int] = field(default_factory=dict)


def replicate_stats(values):
    """Sample mean, sample std (n-1 denominator, 0 for a single value),
    count, and a fixed-width 20-bin histogram over the observed range."""
    vals = np.asarray(list(values), dtype=float)
    if len(vals) == 0 or not np.all(np.isfinite(vals)):
        raise ValueError("replicate statistics need at least one finite value")
    mean = float(vals.mean())
    spread = float(vals.max() - vals.min())
    if spread <= max(1.0, float(np.abs(vals).max())) * 1e-12:
        # constant list: exact zero std, unit-width histogram around it
        std = 0.0
        counts, edges = np.histogram(vals, bins=20, range=(mean - 0.5, mean + 0.5))
    else:
        std = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
        counts, edges = np.histogram(vals, bins=20)
    return mean, std, len(vals), (counts, edges)


def required_trials(sigma: float, ci_length: float) -> int:
    """Trials needed for a 95% confidence interval of the given length on a
    normal mean of spread sigma: ceil((2 * sigma * 1.96 / length)^2), at
    least 1 (rounding is always up)."""
    if ci_length <= 0:
        raise ValueError(f"ci_length must be > 0, got {ci_length}")
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    return max(1, int(np.ceil((2.0 * sigma * 1.96 / ci_length) ** 2)))


def _run_sweep_cell(task):
    scenario, config = task
    result = run(scenario, config)
    return result.metrics, result.metric_errors


def _parallel_map(fn, tasks, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, tasks, chunksize=max(1, len(tasks) // (jobs * 4))))


def sweep(plan: SweepPlan, scenario: Scenario) -> list[SweepRecord]:
    """Run the full design and aggregate replicate metrics per point."""
    points = alpha_grid(plan.step)
    tasks = []
    for pi, alpha in enumerate(points):
        for rep in range(plan.replicates):
            seed = run_seed(plan.base_seed, pi, rep)
            tasks.append((scenario, replace(plan.base_config, alpha=alpha, seed=seed)))
    outcomes = _parallel_map(_run_sweep_cell, tasks, plan.jobs)

    records = []
    k = 0
    for pi, alpha in enumerate(points):
        rec = SweepRecord(alpha=alpha, seeds=[run_seed(plan.base_seed, pi, r) for r in range(plan.replicates)])
        per_metric: dict[str, list[float]] = {m: [] for m in SWEEP_METRICS}
        excluded = {m: 0 for m in SWEEP_METRICS}
        for _ in range(plan.replicates):
            values, errors = outcomes[k]
            k += 1
            rec.runs.append(values)
            for m in SWEEP_METRICS:
                if m in values:
                    per_metric[m].append(values[m])
                elif m in errors:
                    excluded[m] += 1
        for m, vals in per_metric.items():
            if vals:
                mean, std, _, _ = replicate_stats(vals)
                rec.values[m] = vals
                rec.means[m] = mean
                rec.stds[m] = std
            if excluded[m]:
                rec.excluded[m] = excluded[m]
        records.append(rec)
    return records


@dataclass
class DiffRecord:
    """One weight point of the scheme difference map: per-replicate pattern
    sizes, the (D, I) projection of the mean difference pattern, and the
    significance score (local neighbor density times mean size)."""

    alpha: tuple[float, float, float, float]
    sizes: list[int]
    mean_size: float
    d_proj: float
    i_proj: float
    significance: float = 0.0


def _run_diff_cell(task):
    scenario, base_config, alpha, seed, n_parallel = task
    seq_config = replace(base_config, alpha=alpha, seed=seed, n_per_step=1,
                         steps=base_config.steps * n_parallel)
    par_config = replace(base_config, alpha=alpha, seed=seed, n_per_step=n_parallel,
                         steps=base_config.steps)
    seq = run(scenario, seq_config)
    par = run(scenario, par_config)
    delta, size = symmetric_difference(seq, par)
    return delta.astype(float), size


def scheme_difference_map(
    alpha_points,
    scenario: Scenario,
    base_config: EngineConfig,
    n_parallel: int = 20,
    replicates: int = 3,
    base_seed: int = 0,
    jobs: int = 1,
) -> list[DiffRecord]:
    """Sequential-vs-parallel sensitivity over the given weight points.

    Both schemes rebuild the same total number of cells from the same seed
    (the sequential run takes n_parallel times more, single-cell steps), so
    the difference pattern isolates the update granularity. Points whose
    mean pattern has no defined projection (for example an empty pattern)
    land at the origin.
    """
    if n_parallel < 1:
        raise ValueError(f"n_parallel must be >= 1, got {n_parallel}")
    alpha_points = [tuple(a) for a in alpha_points]
    tasks = []
    for pi, alpha in enumerate(alpha_points):
        for rep in range(replicates):
            tasks.append((scenario, base_config, alpha, run_seed(base_seed, pi, rep), n_parallel))
    outcomes = _parallel_map(_run_diff_cell, tasks, jobs)

    m_areas = default_moran_areas(scenario.size)
    records = []
    k = 0
    for alpha in alpha_points:
        fields = []
        sizes = []
        for _ in range(replicates):
            delta, size = outcomes[k]
            k += 1
            fields.append(delta)
            sizes.append(size)
        mean_field = np.mean(fields, axis=0)
        try:
            d_proj = weighted_density(mean_field, base_config.rho, base_config.density_norm_p)
            i_proj = weighted_moran(mean_field, m_areas)
        except UndefinedMetricError:
            d_proj, i_proj = 0.0, 0.0
        records.append(DiffRecord(alpha=alpha, sizes=sizes, mean_size=float(np.mean(sizes)),
                                  d_proj=d_proj, i_proj=i_proj))

    pts = np.array([[r.d_proj, r.i_proj] for r in records])
    for i, rec in enumerate(records):
        d = np.linalg.norm(pts - pts[i], axis=1)
        neighbor_count = int((d <= NEIGHBOR_RADIUS).sum()) - 1
        rec.significance = neighbor_count * rec.mean_size
    return records
