"""Evaluation functions over a simulation state.

Four layout/performance measures plus an activity-mix index:

    D  integrated density: p-norm of local densities over built cells, [0,1]
    I  spatial autocorrelation (Moran) of area-aggregated built counts with
       inverse centroid-distance weights, [-1,1]; near 1 = monocentric,
       near 0 = random, negative = checkered
    S  relative speed: p-norm of network-to-straight-line distance ratios
       over built cells, >= 1; higher = more detours
    A  global accessibility: p-norm of activity access over its built-cell
       maximum, (0,1]; lower is better
    lambda  inverse-distance-weighted fraction of center pairs with
       differing activities, scaled by the activity count

All operations are pure functions of their inputs and raise
UndefinedMetricError (never a sentinel value) when a metric does not exist
for the given state, so sweep statistics can exclude rather than pollute.
D, S and A read the per-cell fields off the state; refresh them first
(engine.refresh_fields) if the state was rebuilt or mutated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .grid import disk_kernel


class UndefinedMetricError(ValueError):
    """The metric is mathematically undefined for this input."""


@dataclass
class MoranConfig:
    """Side count M of the square-area partition used by the Moran index.
    Must satisfy 1 < M < N with N divisible by M."""

    areas_per_side: int


def default_moran_areas(size: int) -> int:
    """Divisor of the lattice size closest to size/8 (larger on ties),
    restricted to 1 < M < size. Gives M=7 for the 56-cell reference world."""
    divisors = [m for m in range(2, size) if size % m == 0]
    if not divisors:
        raise ValueError(f"lattice size {size} admits no valid area partition")
    target = size / 8.0
    return min(divisors, key=lambda m: (abs(m - target), -m))


def _area_centroids(size: int, m: int) -> np.ndarray:
    side = size / m
    idx = (np.arange(m) + 0.5) * side
    xx, yy = np.meshgrid(idx, idx, indexing="ij")
    return np.column_stack([xx.ravel(), yy.ravel()])


def area_sums(values: np.ndarray, m: int) -> np.ndarray:
    """Sum a (N, N) field over an m x m partition of square areas."""
    n = values.shape[0]
    if n % m != 0:
        raise ValueError(f"lattice size {n} is not divisible by area count {m}")
    side = n // m
    return values.reshape(m, side, m, side).sum(axis=(1, 3)).ravel()


def moran_value(values: np.ndarray, centroids: np.ndarray) -> float:
    """Core autocorrelation formula for per-area values with weights
    1/d between area centroids (diagonal excluded):

        (n / sum(w)) * sum_{u!=v} w_uv (x_u - mean)(x_v - mean)
                     / sum_u (x_u - mean)^2
    """
    x = np.asarray(values, dtype=float)
    n = len(x)
    if n < 2:
        raise UndefinedMetricError("autocorrelation needs at least two areas")
    dev = x - x.mean()
    var = float((dev**2).sum())
    if var <= 0:
        raise UndefinedMetricError("area values have zero variance")
    d = np.linalg.norm(centroids[:, None, :] - centroids[None, :, :], axis=2)
    with np.errstate(divide="ignore"):
        w = 1.0 / d
    np.fill_diagonal(w, 0.0)
    cov = float(dev @ w @ dev)
    return float((n / w.sum()) * cov / var)


def moran_index(state, moran_config: MoranConfig) -> float:
    """Moran index of area-aggregated built-cell counts."""
    lattice = state.lattice if hasattr(state, "lattice") else state
    m = moran_config.areas_per_side
    if not 1 < m < lattice.size:
        raise ValueError(f"area count must satisfy 1 < M < N, got M={m}, N={lattice.size}")
    counts = area_sums(lattice.occupancy.astype(float), m)
    return moran_value(counts, _area_centroids(lattice.size, m))


def _built_values(state, field_name: str) -> np.ndarray:
    if state.fields is None or getattr(state.fields, field_name) is None:
        raise ValueError(f"state has no computed {field_name} field; refresh fields first")
    occ = state.lattice.occupancy
    if not occ.any():
        raise UndefinedMetricError("no built cells")
    return getattr(state.fields, field_name)[occ]


def integrated_density(state, p: float) -> float:
    """p-norm of local densities over built cells."""
    vals = _built_values(state, "density")
    return float(np.mean(vals**p) ** (1.0 / p))


def relative_speed(state, p: float) -> float:
    """p-norm over built cells of center_distance / straight-line distance
    to the realizing center. Cells coincident with a center contribute
    ratio 1 by convention; the triangle inequality guarantees every true
    ratio >= 1, so float noise below 1 is clamped."""
    d_net = _built_values(state, "center_distance")
    realizing = _built_values(state, "realizing_center").astype(int)
    ii, jj = np.nonzero(state.lattice.occupancy)
    centroids = np.column_stack([ii + 0.5, jj + 0.5])
    center_pts = state.network.node_array()[realizing]
    e = np.linalg.norm(centroids - center_pts, axis=1)
    ratio = np.where(e > 0, d_net / np.maximum(e, 1e-300), 1.0)
    ratio = np.maximum(ratio, 1.0)
    return float(np.mean(ratio**p) ** (1.0 / p))


def global_accessibility(state, p: float) -> float:
    """p-norm over built cells of activity access normalized by its maximum
    over built cells. Zero everywhere (all built cells on centers) gives 0."""
    vals = _built_values(state, "activity_access")
    vmax = float(vals.max())
    if vmax <= 0:
        return 0.0
    return float(np.mean((vals / vmax) ** p) ** (1.0 / p))


def activity_heterogeneity(centers: list[tuple[tuple[float, float], int]], a_max: int) -> float:
    """Inverse-distance-weighted share of center pairs with differing
    activities, scaled by a_max. Invariant under uniform rescaling of the
    center coordinates."""
    if len(centers) < 2:
        raise ValueError("heterogeneity needs at least two centers")
    pts = np.asarray([p for p, _ in centers], dtype=float)
    acts = np.asarray([a for _, a in centers])
    d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    off = ~np.eye(len(centers), dtype=bool)
    if np.any(d[off] <= 0):
        raise ValueError("coincident centers make inverse distances undefined")
    inv = np.zeros_like(d)
    inv[off] = 1.0 / d[off]
    differ = acts[:, None] != acts[None, :]
    return float(a_max * (inv * differ).sum() / inv.sum())


# -- weighted-pattern projection (update-scheme difference maps) ----------

def weighted_density(weight_field: np.ndarray, rho: float, p: float) -> float:
    """Integrated density generalized to a real-valued occupancy weight in
    [0,1]: reduces to the built-cell form when the weights are 0/1."""
    w = np.asarray(weight_field, dtype=float)
    total = w.sum()
    if total <= 0:
        raise UndefinedMetricError("empty weight pattern")
    kernel = disk_kernel(rho)
    dens = ndimage.correlate(w, kernel, mode="constant", cval=0.0)
    counts = ndimage.correlate(np.ones_like(w), kernel, mode="constant", cval=0.0)
    dens = dens / counts
    return float(((w * dens**p).sum() / total) ** (1.0 / p))


def weighted_moran(weight_field: np.ndarray, m: int) -> float:
    """Moran index of area sums of a real-valued occupancy weight."""
    w = np.asarray(weight_field, dtype=float)
    if w.sum() <= 0:
        raise UndefinedMetricError("empty weight pattern")
    return moran_value(area_sums(w, m), _area_centroids(w.shape[0], m))


@dataclass
class MetricVector:
    D: float | None = None
    I: float | None = None
    S: float | None = None
    A: float | None = None
    H: float | None = None

    def as_dict(self) -> dict[str, float]:
        return {k: v for k, v in self.__dict__.items() if v is not None}


def collect_metrics(state, config, moran_areas: int | None = None):
    """Evaluate D, I, S, A on a state, catching per-metric undefined errors.

    Returns (values, errors): every metric lands in exactly one of the two.
    S and A are skipped with a recorded reason when the network has no
    centers or incomplete activity coverage.
    """
    values: dict[str, float] = {}
    errors: dict[str, str] = {}

    def attempt(name, fn):
        try:
            values[name] = fn()
        except (UndefinedMetricError, ValueError) as exc:
            errors[name] = str(exc)

    m = moran_areas or default_moran_areas(state.lattice.size)
    attempt("D", lambda: integrated_density(state, config.density_norm_p))
    attempt("I", lambda: moran_index(state, MoranConfig(m)))
    attempt("S", lambda: relative_speed(state, config.speed_norm_p))
    attempt("A", lambda: global_accessibility(state, config.access_norm_p))
    try:
        centers = [(state.network.nodes[n], a) for n, a in state.network.centers]
        if len(centers) >= 2:
            values["lambda"] = activity_heterogeneity(centers, state.network.a_max)
    except ValueError as exc:
        errors["lambda"] = str(exc)
    return values, errors
