"""Residential dynamics on a built pattern and its segregation index.

A Schelling-type model restricted to built cells: mobile agents of k types
occupy a fraction of the built cells; an agent is satisfied when the share
of like-typed agents among its occupied neighbors (built cells within a
circular radius, itself excluded) reaches its tolerance. Unsatisfied agents
relocate to a random satisfying vacancy, or to a random vacancy when none
satisfies, so sparse patterns cannot deadlock. The run stops at the first
sweep with no moves (a frozen state) or after max_sweeps.

The segregation index H scores the frozen state: the spatial
autocorrelation of the per-area type balance (type-1 minus type-2 count)
over areas that contain agents, clipped to [0, 1]. Perfectly mixed areas
give 0; strongly separated one-type regions approach 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Lattice
from .metrics import MoranConfig, UndefinedMetricError, _area_centroids, area_sums, moran_value


@dataclass
class SegregationConfig:
    """Defaults sit in the clustered-frozen-state regime: agent densities
    0.1..0.2 with tolerances 0.4..0.8."""

    agent_density: float = 0.15
    tolerance: float = 0.6
    type_count: int = 2
    max_sweeps: int = 500
    seed: int | None = None
    radius: float | None = None  # None: caller supplies (engine uses rho)

    def __post_init__(self):
        if not 0 < self.agent_density < 1:
            raise ValueError(f"agent_density must be in (0,1), got {self.agent_density}")
        if not 0 <= self.tolerance <= 1:
            raise ValueError(f"tolerance must be in [0,1], got {self.tolerance}")
        if self.type_count < 2:
            raise ValueError(f"type_count must be >= 2, got {self.type_count}")
        if self.max_sweeps < 1:
            raise ValueError(f"max_sweeps must be >= 1, got {self.max_sweeps}")


@dataclass
class ResidentialState:
    """occupant[i, j] is 0 for no agent, else the agent's type id; nonzero
    entries appear only on built cells and per-type counts are conserved
    across moves."""

    occupant: np.ndarray
    sweeps: int
    frozen: bool
    moves: int


def _neighbor_lists(cells: np.ndarray, radius: float) -> list[np.ndarray]:
    """Indices of other built cells within centroid distance radius."""
    d2 = ((cells[:, None, :] - cells[None, :, :]) ** 2).sum(axis=2)
    mask = d2 <= radius * radius + 1e-12
    np.fill_diagonal(mask, False)
    return [np.nonzero(row)[0] for row in mask]


def run_schelling(
    pattern: Lattice,
    config: SegregationConfig,
    rng: np.random.Generator | None = None,
    radius: float | None = None,
) -> ResidentialState:
    """Run the residential dynamics to a frozen state (or max_sweeps).

    Agents are seeded uniformly at random on built cells at agent_density
    with equiprobable types. Deterministic for a fixed rng / config seed.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    r = radius if radius is not None else config.radius
    if r is None:
        r = 5.0
    ii, jj = np.nonzero(pattern.occupancy)
    n_cells = len(ii)
    n_agents = int(round(config.agent_density * n_cells))
    if n_agents < 1:
        raise ValueError(f"agent density {config.agent_density} yields no agents on {n_cells} cells")
    if n_agents >= n_cells:
        raise ValueError("no vacant built cells left for relocation")

    cells = np.column_stack([ii + 0.5, jj + 0.5]).astype(float)
    neighbors = _neighbor_lists(cells, r)

    occupant = np.zeros(n_cells, dtype=np.int8)
    seats = rng.choice(n_cells, size=n_agents, replace=False)
    occupant[seats] = rng.integers(1, config.type_count + 1, size=n_agents)

    # counts[t-1, c]: occupied neighbors of cell c having type t
    counts = np.zeros((config.type_count, n_cells), dtype=np.int32)
    for c in np.nonzero(occupant)[0]:
        counts[occupant[c] - 1, neighbors[c]] += 1
    totals = counts.sum(axis=0)

    def place(c, t, sign):
        counts[t - 1, neighbors[c]] += sign
        totals[neighbors[c]] += sign
        occupant[c] = t if sign > 0 else 0

    tol = config.tolerance
    sweeps = 0
    total_moves = 0
    frozen = False
    for _ in range(config.max_sweeps):
        sweeps += 1
        moves = 0
        for c in np.nonzero(occupant)[0]:
            t = int(occupant[c])
            if t == 0:
                continue
            if totals[c] == 0 or counts[t - 1, c] / totals[c] >= tol:
                continue
            place(c, t, -1)
            vacant = occupant == 0
            vacant[c] = False
            like_frac = np.where(totals > 0, counts[t - 1] / np.maximum(totals, 1), 1.0)
            satisfying = vacant & (like_frac >= tol)
            pool = np.nonzero(satisfying)[0]
            if len(pool) == 0:
                pool = np.nonzero(vacant)[0]
            if len(pool) == 0:
                place(c, t, +1)  # nowhere to go; stay put
                continue
            target = int(pool[rng.integers(len(pool))])
            place(target, t, +1)
            moves += 1
        total_moves += moves
        if moves == 0:
            frozen = True
            break

    grid = np.zeros_like(pattern.occupancy, dtype=np.int8)
    grid[ii, jj] = occupant
    return ResidentialState(occupant=grid, sweeps=sweeps, frozen=frozen, moves=total_moves)


def segregation_index(
    state: ResidentialState, pattern: Lattice, moran_config: MoranConfig
) -> float:
    """Autocorrelation of the per-area type balance over agent-occupied
    areas, clipped to [0, 1]. Zero variance (perfectly mixed at area scale)
    and single-area placements give 0."""
    occ = state.occupant
    if int((occ > 0).sum()) < 2:
        raise ValueError("segregation index needs at least two agents")
    if np.any((occ > 0) & ~pattern.occupancy):
        raise ValueError("agents found on unbuilt cells")
    m = moran_config.areas_per_side
    balance = area_sums((occ == 1).astype(float) - (occ == 2).astype(float), m)
    populated = area_sums((occ > 0).astype(float), m) > 0
    if populated.sum() < 2:
        return 0.0
    values = balance[populated]
    centroids = _area_centroids(pattern.size, m)[populated]
    try:
        index = moran_value(values, centroids)
    except UndefinedMetricError:
        return 0.0
    return float(np.clip(index, 0.0, 1.0))
