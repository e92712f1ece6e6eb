"""Urban growth on a cell lattice coupled to an evolving road network,
with a metric suite, sweep harness and bi-objective zoning optimizer."""

from .engine import EngineConfig, Scenario, SimulationResult, SimulationState, run, step, symmetric_difference
from .explorer import SweepPlan, alpha_grid, replicate_stats, required_trials, scheme_difference_map, sweep
from .grid import ExplicativeFields, Lattice, WeightVector, eligible_cells, land_value_field, local_density
from .metrics import (
    MoranConfig,
    UndefinedMetricError,
    activity_heterogeneity,
    global_accessibility,
    integrated_density,
    moran_index,
    relative_speed,
)
from .network import (
    AccessPoint,
    RoadNetwork,
    activity_accessibility,
    connect_cell,
    init_random_network,
    nearest_road,
    network_distance,
)
from .optimizer import ZoningScenario, enumerate_assignments, evaluate_assignment, optimize, pareto_front
from .segregation import ResidentialState, SegregationConfig, run_schelling, segregation_index

__all__ = [name for name in dir() if not name.startswith("_")]
