"""Planar Euclidean road graph: distance queries, branching, random init.

Nodes are 2D points in cell-side units; edges are straight segments whose
weight is the Euclidean distance between endpoints. A subset of nodes are
"centers", each carrying an integer activity in 1..a_max.

Distance semantics: a query point accesses the network at the nearest point
of any segment (its access point); the road distance is that offset, and the
center distance adds the shortest along-network path from the access point,
splitting its edge as a temporary node. Activity accessibility aggregates
per-activity center distances with a p-norm (a difficulty: lower is better).

Mutations (connect_cell) require exclusive access; read-only queries are
pure. Derived arrays (endpoints, lengths, node-to-center distance tables)
are cached and invalidated by a version counter bumped on every mutation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

# Branch feet landing this close to an existing endpoint reuse the node, and
# branches this short are suppressed: avoids zero-length edges.
SNAP_EPS = 1e-9


@dataclass
class RoadNetwork:
    nodes: list[tuple[float, float]]
    edges: list[tuple[int, int]]
    centers: list[tuple[int, int]]  # (node index, activity), kept sorted by node

    def __post_init__(self):
        self.nodes = [(float(x), float(y)) for x, y in self.nodes]
        self.edges = [(int(u), int(v)) for u, v in self.edges]
        self.centers = sorted((int(n), int(a)) for n, a in self.centers)
        for u, v in self.edges:
            if not (0 <= u < len(self.nodes) and 0 <= v < len(self.nodes)):
                raise ValueError(f"edge ({u},{v}) references a missing node")
        for n, a in self.centers:
            if not 0 <= n < len(self.nodes):
                raise ValueError(f"center node {n} missing")
            if a < 1:
                raise ValueError(f"activity must be >= 1, got {a}")
        self._version = 0
        self._cache: dict = {}

    # -- derived arrays, cached per mutation version ----------------------

    def _cached(self, key, build):
        entry = self._cache.get(key)
        if entry is not None and entry[0] == self._version:
            return entry[1]
        value = build()
        self._cache[key] = (self._version, value)
        return value

    @property
    def version(self) -> int:
        return self._version

    def node_array(self) -> np.ndarray:
        return self._cached("nodes", lambda: np.asarray(self.nodes, dtype=float))

    def edge_endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        def build():
            pts = self.node_array()
            e = np.asarray(self.edges, dtype=int)
            return pts[e[:, 0]], pts[e[:, 1]]

        return self._cached("endpoints", build)

    def edge_lengths(self) -> np.ndarray:
        def build():
            a, b = self.edge_endpoints()
            return np.linalg.norm(b - a, axis=1)

        return self._cached("lengths", build)

    def total_length(self) -> float:
        return float(self.edge_lengths().sum()) if self.edges else 0.0

    def adjacency(self) -> csr_matrix:
        def build():
            n = len(self.nodes)
            if not self.edges:
                return csr_matrix((n, n))
            e = np.asarray(self.edges, dtype=int)
            w = self.edge_lengths()
            rows = np.concatenate([e[:, 0], e[:, 1]])
            cols = np.concatenate([e[:, 1], e[:, 0]])
            data = np.concatenate([w, w])
            return csr_matrix((data, (rows, cols)), shape=(n, n))

        return self._cached("adjacency", build)

    def is_connected(self) -> bool:
        if len(self.nodes) <= 1:
            return True
        n_comp, _ = connected_components(self.adjacency(), directed=False)
        return n_comp == 1

    @property
    def a_max(self) -> int:
        if not self.centers:
            raise ValueError("network has no centers")
        return max(a for _, a in self.centers)

    def center_nodes(self, activity: int | None = None) -> list[int]:
        """Center node indices (ascending), optionally for one activity."""
        if activity is None:
            return [n for n, _ in self.centers]
        return [n for n, a in self.centers if a == activity]

    def missing_activities(self) -> list[int]:
        present = {a for _, a in self.centers}
        return [a for a in range(1, self.a_max + 1) if a not in present]

    def node_center_distances(self, activity: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Per node: shortest path length to the nearest qualifying center,
        and the node index of the center realizing it (first in node order
        on ties)."""
        key = ("nodedist", activity)

        def build():
            sources = self.center_nodes(activity)
            if not sources:
                raise ValueError(f"no center with activity {activity}")
            dist = dijkstra(self.adjacency(), directed=False, indices=sources)
            best = np.argmin(dist, axis=0)
            return dist[best, np.arange(dist.shape[1])], np.asarray(sources)[best]

        return self._cached(key, build)

    def _mutated(self) -> None:
        self._version += 1


@dataclass
class AccessPoint:
    """Nearest-network projection of a point: the edge hit, the parameter t
    along it, the foot coordinates, and the offset (the road-distance leg)."""

    edge: int
    t: float
    point: tuple[float, float]
    offset: float


def project_points(points: np.ndarray, network: RoadNetwork):
    """Vectorized nearest-segment projection for many query points.

    Returns (offset, edge index, t) arrays; ties go to the lowest edge index.
    """
    if not network.edges:
        raise RuntimeError("network has no edges")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    a, b = network.edge_endpoints()
    d = b - a  # (E, 2)
    len2 = np.maximum((d * d).sum(axis=1), SNAP_EPS**2)
    # t with shape (P, E)
    t = np.clip(((pts[:, None, :] - a[None, :, :]) * d[None, :, :]).sum(axis=2) / len2, 0.0, 1.0)
    feet = a[None, :, :] + t[:, :, None] * d[None, :, :]
    dist = np.linalg.norm(pts[:, None, :] - feet, axis=2)
    edge_idx = np.argmin(dist, axis=1)
    rows = np.arange(len(pts))
    return dist[rows, edge_idx], edge_idx, t[rows, edge_idx]


def nearest_road(point, network: RoadNetwork) -> AccessPoint:
    """Access point minimizing point-to-segment distance over all edges."""
    offset, edge_idx, t = project_points(np.asarray(point, dtype=float), network)
    e = int(edge_idx[0])
    tt = float(t[0])
    a, b = network.edge_endpoints()
    foot = a[e] + tt * (b[e] - a[e])
    return AccessPoint(edge=e, t=tt, point=(float(foot[0]), float(foot[1])), offset=float(offset[0]))


def _access_path_lengths(
    network: RoadNetwork, access: AccessPoint, activity: int | None
) -> float:
    """Shortest path from an access foot to the nearest qualifying center.

    The foot is an interior point of its edge, so any network path leaves it
    through one of the edge endpoints; the edge split is therefore exact."""
    u, v = network.edges[access.edge]
    length = float(network.edge_lengths()[access.edge])
    dist, _ = network.node_center_distances(activity)
    return min(dist[u] + access.t * length, dist[v] + (1.0 - access.t) * length)


def network_distance(point, network: RoadNetwork, activity: int | None = None) -> float:
    """Offset to the nearest road plus along-network path to the nearest
    center (of the given activity, if specified)."""
    if not network.edges:
        raise RuntimeError("network has no edges")
    if not network.center_nodes(activity):
        raise ValueError(f"no center with activity {activity}")
    if not network.is_connected():
        raise RuntimeError("network is not connected")
    access = nearest_road(point, network)
    return access.offset + _access_path_lengths(network, access, activity)


def activity_accessibility(point, network: RoadNetwork, p: float) -> float:
    """p-norm over activities of the per-activity center distance:
    ((1/a_max) * sum_a dist(point; a)^p)^(1/p). Requires every activity
    1..a_max to be represented by at least one center."""
    if p < 1:
        raise ValueError(f"norm exponent must be >= 1, got {p}")
    missing = network.missing_activities()
    if missing:
        raise ValueError(f"activities without a center: {missing}")
    a_max = network.a_max
    vals = [network_distance(point, network, activity=a) for a in range(1, a_max + 1)]
    return float((np.mean(np.power(vals, p))) ** (1.0 / p))


def connect_cell(centroid, network: RoadNetwork) -> None:
    """Branch the network orthogonally from the nearest edge to `centroid`.

    The nearest edge is split at the perpendicular foot (two collinear
    sub-edges replace it) and a new edge joins the foot to a new node at the
    centroid, growing total length by exactly the centroid's road distance.
    Feet within SNAP_EPS of an existing endpoint reuse that node; centroids
    already on the network are a no-op.
    """
    if not network.edges:
        raise RuntimeError("network has no edges")
    access = nearest_road(centroid, network)
    if access.offset <= SNAP_EPS:
        return
    u, v = network.edges[access.edge]
    pts = network.node_array()
    foot = np.asarray(access.point)
    if np.linalg.norm(foot - pts[u]) <= SNAP_EPS:
        foot_node = u
    elif np.linalg.norm(foot - pts[v]) <= SNAP_EPS:
        foot_node = v
    else:
        foot_node = len(network.nodes)
        network.nodes.append((float(foot[0]), float(foot[1])))
        network.edges[access.edge] = (u, foot_node)
        network.edges.append((foot_node, v))
    cell_node = len(network.nodes)
    network.nodes.append((float(centroid[0]), float(centroid[1])))
    network.edges.append((foot_node, cell_node))
    network._mutated()


def init_random_network(
    centers: list[tuple[tuple[float, float], int]],
    extra_node_count: int,
    world_size: float,
    rng: np.random.Generator,
) -> RoadNetwork:
    """Random percolated initial network.

    Centers become the first nodes; extra nodes are placed uniformly in the
    world. Links are then added over a growing radius (one cell-side per
    round): within each round, cross-component pairs within the radius are
    connected shortest-first until none remain, so isolated clusters form
    and then percolate into a single component. Deterministic for a fixed
    rng state; only node placement consumes randomness.
    """
    if not centers:
        raise ValueError("at least one center is required")
    if extra_node_count < 0:
        raise ValueError("extra_node_count must be >= 0")
    nodes = [tuple(map(float, pt)) for pt, _ in centers]
    if extra_node_count:
        extra = rng.uniform(0.0, world_size, size=(extra_node_count, 2))
        nodes.extend((float(x), float(y)) for x, y in extra)
    center_list = [(i, int(a)) for i, (_, a) in enumerate(centers)]

    n = len(nodes)
    pts = np.asarray(nodes)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    pair_dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    edges: list[tuple[int, int]] = []
    radius = 1.0
    while len({find(i) for i in range(n)}) > 1:
        candidates = sorted(
            (pair_dist[i, j], i, j)
            for i in range(n)
            for j in range(i + 1, n)
            if pair_dist[i, j] <= radius and find(i) != find(j)
        )
        for dist, i, j in candidates:
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[ri] = rj
                edges.append((i, j))
        radius += 1.0
    return RoadNetwork(nodes=nodes, edges=edges, centers=center_list)


@dataclass
class DistanceFields:
    """Road/center distance fields over all lattice cells, plus the access
    bookkeeping needed to derive them and the detour metric."""

    road_distance: np.ndarray
    access_edge: np.ndarray
    access_t: np.ndarray
    center_distance: np.ndarray
    realizing_center: np.ndarray
    center_distance_by_activity: np.ndarray | None
    activity_access: np.ndarray | None


def distance_fields(
    size: int,
    network: RoadNetwork,
    activity_norm_p: float,
    with_activities: bool = True,
) -> DistanceFields:
    """Compute road distance, center distance and (optionally) activity
    accessibility for every cell centroid in one vectorized pass.

    Exactness note: the per-cell center distance is offset + min over the
    access edge's two endpoints of (distance along the edge to that endpoint
    + that endpoint's shortest path to a center), which equals splitting the
    edge at the foot.
    """
    from .grid import cell_centroids

    pts = cell_centroids(size)
    offset, edge_idx, t = project_points(pts, network)
    e = np.asarray(network.edges, dtype=int)
    u, v = e[edge_idx, 0], e[edge_idx, 1]
    seg_len = network.edge_lengths()[edge_idx]

    def cell_distance(activity):
        dist, realizing = network.node_center_distances(activity)
        via_u = dist[u] + t * seg_len
        via_v = dist[v] + (1.0 - t) * seg_len
        take_u = via_u <= via_v
        best = offset + np.where(take_u, via_u, via_v)
        real = np.where(take_u, realizing[u], realizing[v])
        return best, real

    d_center, realizing = cell_distance(None)
    shape = (size, size)
    fields = DistanceFields(
        road_distance=offset.reshape(shape),
        access_edge=edge_idx.reshape(shape),
        access_t=t.reshape(shape),
        center_distance=d_center.reshape(shape),
        realizing_center=realizing.reshape(shape),
        center_distance_by_activity=None,
        activity_access=None,
    )
    if with_activities:
        missing = network.missing_activities()
        if missing:
            raise ValueError(f"activities without a center: {missing}")
        a_max = network.a_max
        per_act = np.empty((a_max, size, size))
        for a in range(1, a_max + 1):
            d_a, _ = cell_distance(a)
            per_act[a - 1] = d_a.reshape(shape)
        p = activity_norm_p
        fields.center_distance_by_activity = per_act
        fields.activity_access = (np.mean(per_act**p, axis=0)) ** (1.0 / p)
    return fields
