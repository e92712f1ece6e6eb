"""Three-phase growth loop coupling the lattice and the road network.

Each step: (a) refresh the scoring fields over the lattice, (b) build the
n_per_step best-valued empty cells (ties at the cutoff broken uniformly at
random), (c) branch a road to every new cell more isolated than theta2.
Under the sequential scheme (n_per_step = 1) fields are re-evaluated after
every placement; a parallel scheme places a batch between re-evaluations.

A run is deterministic for a fixed seed: all randomness flows through one
numpy Generator, covering scenario randomization, tie-breaking and any
downstream residential dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import (
    ExplicativeFields,
    Lattice,
    WeightVector,
    density_field,
    land_value_field,
)
from .network import (
    RoadNetwork,
    connect_cell,
    distance_fields,
    init_random_network,
    nearest_road,
    project_points,
)


@dataclass
class EngineConfig:
    """All growth parameters.

    alpha weighs (density, road distance, center distance, activity access).
    theta2 is the maximum isolation distance: a newly built cell farther than
    this from the nearest road triggers an orthogonal branch. The four norm
    exponents parameterize activity access and the D/S/A metrics.
    """

    alpha: tuple[float, float, float, float]
    n_per_step: int = 15
    theta2: float = 5.0
    rho: float = 5.0
    activity_norm_p: float = 3.0
    density_norm_p: float = 3.0
    speed_norm_p: float = 3.0
    access_norm_p: float = 3.0
    steps: int = 30
    seed: int = 0

    def __post_init__(self):
        self.alpha = tuple(float(a) for a in self.alpha)
        if len(self.alpha) != 4 or any(a < 0 for a in self.alpha):
            raise ValueError(f"alpha must be 4 non-negative weights, got {self.alpha}")
        if all(a == 0 for a in self.alpha):
            raise ValueError("alpha must have at least one positive weight")
        if self.n_per_step < 1:
            raise ValueError(f"n_per_step must be >= 1, got {self.n_per_step}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.theta2 <= 0:
            raise ValueError(f"theta2 must be > 0, got {self.theta2}")
        if self.rho <= 0:
            raise ValueError(f"rho must be > 0, got {self.rho}")
        for p in (self.activity_norm_p, self.density_norm_p, self.speed_norm_p, self.access_norm_p):
            if p < 1:
                raise ValueError(f"norm exponents must be >= 1, got {p}")

    @property
    def weights(self) -> WeightVector:
        return WeightVector(self.alpha)


@dataclass
class Scenario:
    """Initial-state description consumed by run().

    Either explicit (centers plus a node/edge list containing them) or
    randomized per run seed: center positions uniform in the world, center
    activities uniform in 1..a_max redrawn until every activity is covered,
    and a percolated random network over the centers plus extra nodes
    (default twice the center count).
    """

    size: int
    centers: list[tuple[tuple[float, float], int]] | None = None
    network_nodes: list[tuple[float, float]] | None = None
    network_edges: list[tuple[int, int]] | None = None
    center_count: int = 4
    a_max: int = 2
    extra_node_count: int | None = None

    def build_state(self, rng: np.random.Generator) -> "SimulationState":
        if self.centers is not None and self.network_nodes is not None:
            network = self._explicit_network()
        else:
            centers = self.centers if self.centers is not None else self._draw_centers(rng)
            extra = self.extra_node_count
            if extra is None:
                extra = 2 * len(centers)
            network = init_random_network(centers, extra, float(self.size), rng)
        return SimulationState(lattice=Lattice.empty(self.size), network=network)

    def _draw_centers(self, rng):
        pos = rng.uniform(0.0, float(self.size), size=(self.center_count, 2))
        while True:
            acts = rng.integers(1, self.a_max + 1, size=self.center_count)
            if len(set(acts.tolist())) == self.a_max:
                break
        return [((float(x), float(y)), int(a)) for (x, y), a in zip(pos, acts)]

    def _explicit_network(self) -> RoadNetwork:
        nodes = [tuple(map(float, p)) for p in self.network_nodes]
        pts = np.asarray(nodes)
        center_list = []
        for (x, y), a in self.centers:
            d = np.linalg.norm(pts - np.array([x, y]), axis=1)
            idx = int(np.argmin(d))
            if d[idx] > 1e-9:
                raise ValueError(f"center ({x},{y}) does not coincide with any network node")
            center_list.append((idx, a))
        return RoadNetwork(nodes=nodes, edges=list(self.network_edges or []), centers=center_list)


@dataclass
class SimulationState:
    lattice: Lattice
    network: RoadNetwork
    fields: ExplicativeFields | None = None
    step_index: int = 0
    last_built: list[tuple[int, int]] = field(default_factory=list)


@dataclass
class SimulationResult:
    """Final state plus run provenance: metric values (None where a metric
    was undefined, with the reason in metric_errors), the per-step log of
    built cells in placement order, and the post-branching maximum road
    distance over built cells per step (the theta2 contract diagnostic)."""

    state: SimulationState
    config: EngineConfig
    seed: int
    metrics: dict[str, float] = field(default_factory=dict)
    metric_errors: dict[str, str] = field(default_factory=dict)
    built_log: list[list[tuple[int, int]]] = field(default_factory=list)
    max_road_distance_per_step: list[float] = field(default_factory=list)


def compute_fields(
    state: SimulationState,
    config: EngineConfig,
    need_road: bool,
    need_center: bool,
    need_access: bool,
    cache: dict | None = None,
) -> ExplicativeFields:
    """Phase (a): refresh scoring fields. Distance fields depend only on the
    network, so they are reused from `cache` while the network version is
    unchanged; density is recomputed every step."""
    dens = density_field(state.lattice, config.rho)
    fields = ExplicativeFields(density=dens)
    if not (need_road or need_center or need_access):
        return fields
    key = (state.network.version, need_access)
    dist = None
    if cache is not None:
        cached = cache.get("dist")
        if cached is not None and cached[0] == key:
            dist = cached[1]
    if dist is None:
        dist = distance_fields(
            state.lattice.size, state.network, config.activity_norm_p, with_activities=need_access
        )
        if cache is not None:
            cache["dist"] = (key, dist)
    fields.road_distance = dist.road_distance
    fields.access_edge = dist.access_edge
    fields.access_t = dist.access_t
    fields.center_distance = dist.center_distance
    fields.realizing_center = dist.realizing_center
    fields.center_distance_by_activity = dist.center_distance_by_activity
    fields.activity_access = dist.activity_access
    return fields


def _select_cells(v, occupancy, n, rng):
    """Phase (b): all empty cells strictly above the value cutoff, then
    uniform sampling without replacement among cells tied at the cutoff."""
    empty_i, empty_j = np.nonzero(~occupancy)
    values = v[empty_i, empty_j]
    m = len(values)
    if m <= n:
        order = np.argsort(-values, kind="stable")
        return [(int(empty_i[k]), int(empty_j[k])) for k in order]
    order = np.argsort(-values, kind="stable")
    cutoff = values[order[n - 1]]
    strict = order[values[order] > cutoff]
    tied = order[values[order] == cutoff]
    picked = rng.choice(len(tied), size=n - len(strict), replace=False)
    chosen = np.concatenate([strict, tied[picked]])
    return [(int(empty_i[k]), int(empty_j[k])) for k in chosen]


def step(
    state: SimulationState,
    config: EngineConfig,
    rng: np.random.Generator,
    cache: dict | None = None,
) -> SimulationState:
    """Advance one step in place; returns the state for chaining.

    If fewer empty cells remain than n_per_step, all of them are built.
    After phase (c) every built cell is within theta2 of a road.
    """
    if state.step_index >= config.steps:
        raise RuntimeError(f"step_index {state.step_index} already at steps={config.steps}")
    a1, a2, a3, a4 = config.alpha
    fields = compute_fields(
        state, config, need_road=a2 > 0, need_center=a3 > 0, need_access=a4 > 0, cache=cache
    )
    state.fields = fields
    v = land_value_field(state.lattice, fields, config.weights)
    new_cells = _select_cells(v, state.lattice.occupancy, config.n_per_step, rng)
    for cell in new_cells:
        state.lattice.build(cell)
    state.last_built = new_cells
    # Phase (c): road distance is re-measured per branch decision, since a
    # branch created for one cell can bring a later cell under theta2.
    for i, j in new_cells:
        centroid = (i + 0.5, j + 0.5)
        access = nearest_road(centroid, state.network)
        if access.offset > config.theta2:
            connect_cell(centroid, state.network)
    state.step_index += 1
    return state


def _max_built_road_distance(state: SimulationState) -> float:
    ii, jj = np.nonzero(state.lattice.occupancy)
    if len(ii) == 0:
        return 0.0
    pts = np.column_stack([ii + 0.5, jj + 0.5])
    offset, _, _ = project_points(pts, state.network)
    return float(offset.max())


def validate_scenario_state(state: SimulationState, config: EngineConfig) -> None:
    """Configuration errors surfaced before stepping."""
    net = state.network
    if not net.edges:
        raise ValueError("scenario network has no edges; road distances are undefined")
    if not net.is_connected():
        raise ValueError("scenario network is not connected")
    _, _, a3, a4 = config.alpha
    if (a3 > 0 or a4 > 0) and not net.centers:
        raise ValueError("center-distance weights require at least one center")
    if a4 > 0:
        missing = net.missing_activities()
        if missing:
            raise ValueError(f"activity access weighted but activities {missing} have no center")


def run(
    scenario: Scenario,
    config: EngineConfig,
    compute_h: bool = False,
    segregation_config=None,
    moran_areas: int | None = None,
) -> SimulationResult:
    """Run the growth loop for config.steps steps (or until the lattice
    fills), then evaluate the metric suite on the final state.

    Undefined metrics (for example spatial autocorrelation of a uniform
    pattern) are recorded as errors, never as sentinel numbers. When
    compute_h is set, the residential dynamics run on the final pattern
    using the same random stream, so the whole result is seed-reproducible.
    """
    from . import metrics as metrics_mod

    rng = np.random.default_rng(config.seed)
    state = scenario.build_state(rng)
    validate_scenario_state(state, config)

    cache: dict = {}
    result = SimulationResult(state=state, config=config, seed=config.seed)
    size2 = state.lattice.size**2
    for _ in range(config.steps):
        if state.lattice.built_count >= size2:
            break
        step(state, config, rng, cache=cache)
        result.built_log.append(list(state.last_built))
        result.max_road_distance_per_step.append(_max_built_road_distance(state))

    refresh_fields(state, config)
    values, errors = metrics_mod.collect_metrics(state, config, moran_areas=moran_areas)
    result.metrics.update(values)
    result.metric_errors.update(errors)

    if compute_h:
        from .segregation import SegregationConfig, run_schelling, segregation_index

        seg = segregation_config or SegregationConfig()
        radius = seg.radius if seg.radius is not None else config.rho
        try:
            res_state = run_schelling(state.lattice, seg, rng, radius=radius)
            m = moran_areas or metrics_mod.default_moran_areas(state.lattice.size)
            result.metrics["H"] = segregation_index(
                res_state, state.lattice, metrics_mod.MoranConfig(m)
            )
        except ValueError as exc:
            result.metric_errors["H"] = str(exc)
    return result


def refresh_fields(state: SimulationState, config: EngineConfig) -> None:
    """Recompute every field on the current state (used for final metrics
    and for states rebuilt from serialized results)."""
    has_centers = bool(state.network.centers)
    state.fields = compute_fields(
        state,
        config,
        need_road=bool(state.network.edges),
        need_center=has_centers,
        need_access=has_centers and not state.network.missing_activities(),
    )


def symmetric_difference(a: SimulationResult, b: SimulationResult):
    """Cells built in exactly one of two runs: (boolean field, count)."""
    occ_a = a.state.lattice.occupancy
    occ_b = b.state.lattice.occupancy
    if occ_a.shape != occ_b.shape:
        raise ValueError(f"lattice sizes differ: {occ_a.shape} vs {occ_b.shape}")
    delta = occ_a ^ occ_b
    return delta, int(delta.sum())


def replay_built_log(size: int, built_log: list[list[tuple[int, int]]]) -> Lattice:
    """Reconstruct a lattice by replaying a per-step built-cell log."""
    lattice = Lattice.empty(size)
    for cells in built_log:
        for cell in cells:
            lattice.build(cell)
    return lattice
