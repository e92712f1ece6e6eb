"""Exhaustive zoning search: assign two activities to fixed centers and
extract the (H, A) Pareto front.

Every non-uniform binary assignment over the assignable centers is
simulated (replicated with independent seeds), scored by mean segregation H
and mean accessibility A (both minimized), and annotated with the purely
geometric heterogeneity index of the resulting center activities. Centers
with a fixed extra activity (a transport hub, say) stay constant across
assignments; they always enter the heterogeneity index and by default also
the activity-access field.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .engine import EngineConfig, Scenario, run
from .explorer import _parallel_map, run_seed
from .metrics import activity_heterogeneity
from .segregation import SegregationConfig


@dataclass
class ZoningScenario:
    size: int
    network_nodes: list[tuple[float, float]]
    network_edges: list[tuple[int, int]]
    assignable_nodes: list[int]
    fixed_centers: list[tuple[int, int]] = field(default_factory=list)
    engine_template: EngineConfig = None
    segregation: SegregationConfig = field(default_factory=SegregationConfig)
    include_fixed_in_access: bool = True
    moran_areas: int | None = None

    def __post_init__(self):
        if len(self.assignable_nodes) < 2:
            raise ValueError("need at least two assignable centers")
        if self.engine_template is None:
            # medium density influence, dominant activity access
            self.engine_template = EngineConfig(alpha=(0.7, 0.0, 0.0, 1.0))

    def center_list(self, assignment, for_access: bool):
        """((x,y), activity) for an assignment; bits 0/1 map to activities
        1/2. Fixed centers always count for heterogeneity, and for access
        unless include_fixed_in_access is off."""
        centers = [
            (self.network_nodes[n], bit + 1)
            for n, bit in zip(self.assignable_nodes, assignment)
        ]
        if not for_access or self.include_fixed_in_access:
            centers.extend((self.network_nodes[n], a) for n, a in self.fixed_centers)
        return centers


def enumerate_assignments(center_count: int) -> list[tuple[int, ...]]:
    """All 2^c - 2 non-uniform binary assignments, lexicographic order."""
    if center_count < 2:
        raise ValueError(f"need at least 2 centers, got {center_count}")
    out = []
    for k in range(1, 2**center_count - 1):
        bits = tuple((k >> (center_count - 1 - i)) & 1 for i in range(center_count))
        out.append(bits)
    return out


@dataclass
class AssignmentRecord:
    assignment: tuple[int, ...]
    h_values: list[float]
    a_values: list[float]
    mean_h: float | None
    mean_a: float | None
    std_h: float
    std_a: float
    heterogeneity: float
    valid: bool
    pareto: bool | None = None

    @property
    def bits(self) -> str:
        return "".join(str(b) for b in self.assignment)


def _evaluate_task(task):
    zoning, assignment, seeds = task
    return evaluate_assignment(assignment, zoning, seeds=seeds)


def evaluate_assignment(
    assignment,
    zoning: ZoningScenario,
    replicates: int = 5,
    base_seed: int = 0,
    assignment_index: int = 0,
    seeds: list[int] | None = None,
) -> AssignmentRecord:
    """Simulate one assignment `replicates` times and average (H, A).

    The heterogeneity index depends only on the assignment and the center
    geometry, never on the simulation. Replicates whose H or A could not be
    evaluated are dropped; a record with no valid replicate is flagged
    invalid.
    """
    assignment = tuple(int(b) for b in assignment)
    if seeds is None:
        seeds = [run_seed(base_seed, assignment_index, r) for r in range(replicates)]
    scenario = Scenario(
        size=zoning.size,
        centers=zoning.center_list(assignment, for_access=True),
        network_nodes=zoning.network_nodes,
        network_edges=zoning.network_edges,
    )
    h_values: list[float] = []
    a_values: list[float] = []
    for seed in seeds:
        config = replace(zoning.engine_template, seed=seed)
        result = run(
            scenario,
            config,
            compute_h=True,
            segregation_config=zoning.segregation,
            moran_areas=zoning.moran_areas,
        )
        if "H" in result.metrics and "A" in result.metrics:
            h_values.append(result.metrics["H"])
            a_values.append(result.metrics["A"])

    lam_centers = zoning.center_list(assignment, for_access=False)
    a_max = max(a for _, a in lam_centers)
    lam = activity_heterogeneity(lam_centers, a_max)

    valid = len(h_values) > 0
    return AssignmentRecord(
        assignment=assignment,
        h_values=h_values,
        a_values=a_values,
        mean_h=float(np.mean(h_values)) if valid else None,
        mean_a=float(np.mean(a_values)) if valid else None,
        std_h=float(np.std(h_values, ddof=1)) if len(h_values) > 1 else 0.0,
        std_a=float(np.std(a_values, ddof=1)) if len(a_values) > 1 else 0.0,
        heterogeneity=lam,
        valid=valid,
    )


def _dominates(p, q) -> bool:
    """Weak dominance with at least one strict inequality (minimization)."""
    return p[0] <= q[0] and p[1] <= q[1] and (p[0] < q[0] or p[1] < q[1])


def pareto_front(records: list[AssignmentRecord]) -> list[AssignmentRecord]:
    """Flag non-dominated records in simultaneous (H, A) minimization.

    Duplicate points are all front members (a tie dominates nothing).
    Invalid records are never front members. Flags are set in place and the
    list is returned for convenience.
    """
    valid = [r for r in records if r.valid]
    if not valid:
        raise ValueError("pareto front needs at least one valid record")
    pts = [(r.mean_h, r.mean_a) for r in valid]
    # self-comparison is harmless: dominance requires a strict inequality
    for r, p in zip(valid, pts):
        r.pareto = not any(_dominates(q, p) for q in pts)
    for r in records:
        if not r.valid:
            r.pareto = False
    return records


class ParetoAccumulator:
    """Streaming front extraction; matches the batch computation."""

    def __init__(self):
        self._front: list[tuple[tuple[float, float], object]] = []

    def add(self, point, key=None) -> None:
        point = (float(point[0]), float(point[1]))
        if any(_dominates(p, point) for p, _ in self._front):
            return
        self._front = [(p, k) for p, k in self._front if not _dominates(point, p)]
        self._front.append((point, key))

    def front_keys(self) -> set:
        return {k for _, k in self._front}

    def front_points(self) -> list[tuple[float, float]]:
        return [p for p, _ in self._front]


def optimize(
    zoning: ZoningScenario,
    replicates: int = 5,
    base_seed: int = 0,
    jobs: int = 1,
) -> list[AssignmentRecord]:
    """Evaluate every assignment and flag the Pareto front."""
    assignments = enumerate_assignments(len(zoning.assignable_nodes))
    tasks = []
    for idx, assignment in enumerate(assignments):
        seeds = [run_seed(base_seed, idx, r) for r in range(replicates)]
        tasks.append((zoning, assignment, seeds))
    records = _parallel_map(_evaluate_task, tasks, jobs)
    return pareto_front(records)
