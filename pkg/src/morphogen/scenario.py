"""Scenario and result file formats.

Scenarios are JSON documents validated against a strict schema (unknown
keys are rejected) before anything runs. A scenario gives the world size,
the centers (explicit, or a random-initialization block), the road network
(explicit nodes/edges, or a percolation parameter), and optional engine /
segregation / sweep / diffmap / optimize blocks.

Results are JSON with the metric vector, a config echo, the seed, the
per-step built-cell log (enough to replay the pattern exactly) and the
final network; the occupancy raster is exported as an ASCII portable
graymap with built = 0 and empty = 255.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import jsonschema
import numpy as np

from .engine import EngineConfig, Scenario, SimulationResult, SimulationState
from .grid import Lattice
from .network import RoadNetwork
from .segregation import SegregationConfig

_NUM = {"type": "number"}
_INT = {"type": "integer"}

SCENARIO_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["size"],
    "properties": {
        "size": {"type": "integer", "minimum": 1},
        "centers": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["x", "y", "activity"],
                "properties": {
                    "x": _NUM,
                    "y": _NUM,
                    "activity": {"type": "integer", "minimum": 1},
                    "assignable": {"type": "boolean"},
                },
            },
        },
        "random_centers": {
            "type": "object",
            "additionalProperties": False,
            "required": ["count"],
            "properties": {
                "count": {"type": "integer", "minimum": 1},
                "a_max": {"type": "integer", "minimum": 1},
            },
        },
        "network": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "nodes": {"type": "array", "items": {"type": "array", "items": _NUM,
                                                     "minItems": 2, "maxItems": 2}},
                "edges": {"type": "array", "items": {"type": "array", "items": _INT,
                                                     "minItems": 2, "maxItems": 2}},
                "extra_node_count": {"type": "integer", "minimum": 0},
            },
        },
        "engine": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "alpha": {"type": "array", "items": _NUM, "minItems": 4, "maxItems": 4},
                "n_per_step": {"type": "integer", "minimum": 1},
                "theta2": _NUM,
                "rho": _NUM,
                "activity_norm_p": _NUM,
                "density_norm_p": _NUM,
                "speed_norm_p": _NUM,
                "access_norm_p": _NUM,
                "steps": {"type": "integer", "minimum": 1},
                "seed": _INT,
            },
        },
        "segregation": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "agent_density": _NUM,
                "tolerance": _NUM,
                "type_count": {"type": "integer", "minimum": 2},
                "max_sweeps": {"type": "integer", "minimum": 1},
                "radius": _NUM,
                "seed": _INT,
            },
        },
        "moran_areas": {"type": "integer", "minimum": 2},
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "step": _NUM,
                "replicates": {"type": "integer", "minimum": 1},
            },
        },
        "diffmap": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "step": _NUM,
                "n_parallel": {"type": "integer", "minimum": 1},
                "replicates": {"type": "integer", "minimum": 1},
            },
        },
        "optimize": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "replicates": {"type": "integer", "minimum": 1},
                "include_fixed_in_access": {"type": "boolean"},
            },
        },
    },
}


class ScenarioError(ValueError):
    """Scenario document failed schema or consistency validation."""


@dataclass
class LoadedScenario:
    """Parsed scenario bundle: the initial-state description plus all the
    configuration blocks the commands draw from."""

    scenario: Scenario
    engine: EngineConfig
    segregation: SegregationConfig
    moran_areas: int | None
    assignable_centers: list[int]  # indices into scenario.centers
    fixed_centers: list[int]
    sweep: dict
    diffmap: dict
    optimize: dict


def validate_document(doc: dict) -> None:
    try:
        jsonschema.validate(doc, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ScenarioError(f"{exc.json_path}: {exc.message}") from exc
    if ("centers" in doc) == ("random_centers" in doc):
        raise ScenarioError("$: exactly one of 'centers' and 'random_centers' is required")
    net = doc.get("network", {})
    if ("nodes" in net) != ("edges" in net):
        raise ScenarioError("$.network: 'nodes' and 'edges' must be given together")
    if "nodes" in net and "extra_node_count" in net:
        raise ScenarioError("$.network: explicit nodes/edges exclude 'extra_node_count'")
    if "nodes" in net and "random_centers" in doc:
        raise ScenarioError("$.network: explicit networks need explicit centers")


def parse_scenario(doc: dict) -> LoadedScenario:
    validate_document(doc)
    size = doc["size"]
    net = doc.get("network", {})
    assignable: list[int] = []
    fixed: list[int] = []

    if "centers" in doc:
        centers = [((c["x"], c["y"]), c["activity"]) for c in doc["centers"]]
        for idx, c in enumerate(doc["centers"]):
            (assignable if c.get("assignable") else fixed).append(idx)
        scenario = Scenario(
            size=size,
            centers=centers,
            network_nodes=[tuple(p) for p in net["nodes"]] if "nodes" in net else None,
            network_edges=[tuple(e) for e in net["edges"]] if "edges" in net else None,
            extra_node_count=net.get("extra_node_count"),
        )
    else:
        rc = doc["random_centers"]
        scenario = Scenario(
            size=size,
            center_count=rc["count"],
            a_max=rc.get("a_max", 2),
            extra_node_count=net.get("extra_node_count"),
        )

    eng = dict(doc.get("engine", {}))
    eng.setdefault("alpha", (1.0, 0.0, 0.0, 0.0))
    try:
        engine = EngineConfig(**eng)
        segregation = SegregationConfig(**doc.get("segregation", {}))
    except (TypeError, ValueError) as exc:
        raise ScenarioError(str(exc)) from exc

    return LoadedScenario(
        scenario=scenario,
        engine=engine,
        segregation=segregation,
        moran_areas=doc.get("moran_areas"),
        assignable_centers=assignable,
        fixed_centers=fixed,
        sweep=doc.get("sweep", {}),
        diffmap=doc.get("diffmap", {}),
        optimize=doc.get("optimize", {}),
    )


def load_scenario(path) -> LoadedScenario:
    with open(path, encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"invalid JSON: {exc}") from exc
    return parse_scenario(doc)


# -- serialization ---------------------------------------------------------

def network_to_json(network: RoadNetwork) -> dict:
    return {
        "nodes": [[x, y] for x, y in network.nodes],
        "edges": [[u, v] for u, v in network.edges],
        "centers": [{"node": n, "activity": a} for n, a in network.centers],
    }


def network_from_json(data: dict) -> RoadNetwork:
    return RoadNetwork(
        nodes=[tuple(p) for p in data["nodes"]],
        edges=[tuple(e) for e in data["edges"]],
        centers=[(c["node"], c["activity"]) for c in data["centers"]],
    )


def result_to_json(result: SimulationResult, moran_areas: int | None = None) -> dict:
    return {
        "size": result.state.lattice.size,
        "seed": result.seed,
        "config": asdict(result.config),
        "moran_areas": moran_areas,
        "metrics": result.metrics,
        "metric_errors": result.metric_errors,
        "built_per_step": [len(cells) for cells in result.built_log],
        "built_cells": [[i, j] for cells in result.built_log for i, j in cells],
        "max_road_distance_per_step": result.max_road_distance_per_step,
        "network": network_to_json(result.state.network),
    }


def state_from_result(data: dict) -> tuple[SimulationState, EngineConfig]:
    """Rebuild the final state (pattern + network) and config from a result
    document; callers refresh fields before recomputing metrics."""
    lattice = Lattice.empty(data["size"])
    for i, j in data["built_cells"]:
        lattice.build((i, j))
    network = network_from_json(data["network"])
    config = EngineConfig(**{**data["config"], "alpha": tuple(data["config"]["alpha"])})
    return SimulationState(lattice=lattice, network=network), config


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_pgm(path, lattice: Lattice) -> None:
    """ASCII portable graymap: built cells 0 (black), empty 255 (white)."""
    values = np.where(lattice.occupancy, 0, 255)
    lines = ["P2", f"{lattice.size} {lattice.size}", "255"]
    lines.extend(" ".join(str(v) for v in row) for row in values)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_pgm(path) -> np.ndarray:
    tokens = Path(path).read_text(encoding="utf-8").split()
    if tokens[0] != "P2":
        raise ValueError(f"not an ASCII graymap: {tokens[0]}")
    w, h, _maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    data = np.array(tokens[4:], dtype=int).reshape(h, w)
    return data
