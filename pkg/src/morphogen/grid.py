"""Cell lattice: occupancy state, local density and land-value scoring.

The world is a square grid of N x N cells. Cell (i, j) (0-based) has its
centroid at (i + 0.5, j + 0.5) in cell-side units; all geometry against the
road network uses centroids. A cell is either empty or built, and built
cells never revert.

Per-cell scoring fields ("explicative" fields) live in ExplicativeFields:

    density          built fraction in a circular neighborhood (radius rho)
    road_distance    Euclidean distance to the nearest road segment
    center_distance  road_distance plus along-network path to nearest center
    activity_access  p-norm of per-activity center distances (a difficulty:
                     lower is better)

Land value combines these via normalized complements weighted by a 4-vector
alpha; the growth engine builds where land value is highest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

#: Order of the four weighted components in WeightVector / ExplicativeFields.
COMPONENTS = ("density", "road_distance", "center_distance", "activity_access")


@dataclass
class Lattice:
    """Square occupancy grid. occupancy[i, j] is True for built cells."""

    size: int
    occupancy: np.ndarray

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"lattice size must be >= 1, got {self.size}")
        self.occupancy = np.asarray(self.occupancy, dtype=bool)
        if self.occupancy.shape != (self.size, self.size):
            raise ValueError(
                f"occupancy shape {self.occupancy.shape} does not match size {self.size}"
            )

    @classmethod
    def empty(cls, size: int) -> "Lattice":
        return cls(size, np.zeros((size, size), dtype=bool))

    @property
    def built_count(self) -> int:
        return int(self.occupancy.sum())

    def in_bounds(self, cell) -> bool:
        i, j = cell
        return 0 <= i < self.size and 0 <= j < self.size

    def build(self, cell) -> None:
        """Mark a cell built. Building is monotone: cells never revert."""
        if not self.in_bounds(cell):
            raise ValueError(f"cell {cell} out of bounds for size {self.size}")
        self.occupancy[cell[0], cell[1]] = True

    def copy(self) -> "Lattice":
        return Lattice(self.size, self.occupancy.copy())


def cell_centroids(size: int) -> np.ndarray:
    """(size*size, 2) array of cell centroids in row-major cell order."""
    idx = np.arange(size, dtype=float) + 0.5
    xx, yy = np.meshgrid(idx, idx, indexing="ij")
    return np.column_stack([xx.ravel(), yy.ravel()])


def disk_kernel(rho: float) -> np.ndarray:
    """Binary kernel of integer offsets with Euclidean norm <= rho.

    Centroid-to-centroid offsets between cells are integer vectors, so disk
    membership reduces to di^2 + dj^2 <= rho^2. The center cell is included.
    """
    if rho <= 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    r = int(np.floor(rho))
    di = np.arange(-r, r + 1)
    dist2 = di[:, None] ** 2 + di[None, :] ** 2
    return (dist2 <= rho * rho + 1e-12).astype(float)


def density_field(lattice: Lattice, rho: float) -> np.ndarray:
    """Built fraction within the centroid disk of radius rho, per cell.

    Boundary disks are clipped to the lattice (no wraparound): the
    denominator counts only in-bounds cells of the disk.
    """
    kernel = disk_kernel(rho)
    occ = lattice.occupancy.astype(float)
    built = ndimage.correlate(occ, kernel, mode="constant", cval=0.0)
    total = ndimage.correlate(np.ones_like(occ), kernel, mode="constant", cval=0.0)
    return built / total


def local_density(lattice: Lattice, cell, rho: float) -> float:
    """Density at one cell: built cells in the disk (center included) over
    all in-bounds cells in the disk."""
    if not lattice.in_bounds(cell):
        raise ValueError(f"cell {cell} out of bounds for size {lattice.size}")
    if rho <= 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    ci, cj = cell
    r = int(np.floor(rho))
    n = lattice.size
    i_lo, i_hi = max(0, ci - r), min(n, ci + r + 1)
    j_lo, j_hi = max(0, cj - r), min(n, cj + r + 1)
    ii, jj = np.mgrid[i_lo:i_hi, j_lo:j_hi]
    inside = (ii - ci) ** 2 + (jj - cj) ** 2 <= rho * rho + 1e-12
    total = int(inside.sum())
    built = int((lattice.occupancy[i_lo:i_hi, j_lo:j_hi] & inside).sum())
    return built / total


def eligible_cells(lattice: Lattice) -> list[tuple[int, int]]:
    """All empty cells, row-major order."""
    ii, jj = np.nonzero(~lattice.occupancy)
    return list(zip(ii.tolist(), jj.tolist()))


@dataclass
class WeightVector:
    """Weights alpha_k in [0,1] for (density, road_distance, center_distance,
    activity_access), in that order. Not all four may be zero when scoring."""

    alpha: tuple[float, float, float, float]

    def __post_init__(self):
        self.alpha = tuple(float(a) for a in self.alpha)
        if len(self.alpha) != 4:
            raise ValueError("weight vector needs exactly 4 components")
        if any(a < 0 for a in self.alpha):
            raise ValueError(f"weights must be non-negative, got {self.alpha}")

    @property
    def active(self) -> tuple[bool, ...]:
        return tuple(a > 0 for a in self.alpha)


@dataclass
class ExplicativeFields:
    """Per-cell scoring fields, all shaped (N, N). Distance fields are None
    when the step that produced them did not need road geometry.

    access_edge / access_t / realizing_center are bookkeeping from the road
    distance computation: the nearest edge and its parameter per cell, and
    the center node realizing center_distance (needed for detour metrics).
    """

    density: np.ndarray
    road_distance: np.ndarray | None = None
    center_distance: np.ndarray | None = None
    activity_access: np.ndarray | None = None
    center_distance_by_activity: np.ndarray | None = None  # (a_max, N, N)
    access_edge: np.ndarray | None = None
    access_t: np.ndarray | None = None
    realizing_center: np.ndarray | None = None

    def component(self, name: str) -> np.ndarray | None:
        return getattr(self, name)


def land_value_field(
    lattice: Lattice, fields: ExplicativeFields, weights: WeightVector
) -> np.ndarray:
    """Weighted sum of normalized field complements, in [0, 1] per cell.

    Each active component k contributes (max_k - f_k) / (max_k - min_k) with
    min/max taken over all lattice cells at the current step; a spatially
    constant field contributes 1 everywhere (keeps values in [0,1] and leaves
    the cell ordering unchanged). The total is divided by sum(alpha), so the
    result is invariant under positive rescaling of the weight vector.
    """
    total_weight = sum(weights.alpha)
    if total_weight <= 0:
        raise ValueError("at least one weight must be positive")
    n = lattice.size
    v = np.zeros((n, n))
    for name, alpha in zip(COMPONENTS, weights.alpha):
        if alpha == 0:
            continue
        f = fields.component(name)
        if f is None:
            raise ValueError(f"weighted component {name!r} has no computed field")
        lo, hi = float(f.min()), float(f.max())
        if hi - lo <= 0:
            term = np.ones((n, n))
        else:
            term = (hi - f) / (hi - lo)
        v += alpha * term
    return v / total_weight
