"""Ground coordinates, drone poses and the square-cell grid layout."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GroundPoint:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite ground point ({self.x}, {self.y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)


def normalize_heading(angle: float) -> float:
    """Wrap an angle in radians onto [0, 2*pi)."""
    wrapped = math.fmod(angle, TWO_PI)
    if wrapped < 0.0:
        wrapped += TWO_PI
    # fmod of a value just below 0 can round back up to 2*pi
    return 0.0 if wrapped >= TWO_PI else wrapped


@dataclass(frozen=True)
class DronePose:
    ground: GroundPoint
    height: float
    heading: float = 0.0

    def __post_init__(self):
        if not self.height > 0:
            raise ValueError(f"drone height must be positive, got {self.height}")
        object.__setattr__(self, "heading", normalize_heading(self.heading))


def ground_distance(a: GroundPoint, b: GroundPoint) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def euclidean_distance(r, h):
    """3D drone-user distance from ground distance ``r`` and drone height ``h``.

    Broadcasts over numpy arrays.
    """
    return np.hypot(r, h)


@dataclass(frozen=True)
class CellGrid:
    """A ``side_count`` x ``side_count`` grid of square cells.

    Cell ``row * side_count + col`` spans
    ``[col*l, (col+1)*l] x [row*l, (row+1)*l]`` in grid-global meters.
    """

    side_count: int
    edge_length: float
    centers: tuple[GroundPoint, ...] = field(repr=False)
    inner_cell_ids: tuple[int, ...]

    @property
    def n_cells(self) -> int:
        return self.side_count * self.side_count

    def centers_array(self) -> np.ndarray:
        return np.array([[c.x, c.y] for c in self.centers], dtype=float)

    def bounds(self, cell_id: int) -> tuple[float, float, float, float]:
        """(xmin, ymin, xmax, ymax) of one cell."""
        row, col = divmod(cell_id, self.side_count)
        l = self.edge_length
        return (col * l, row * l, (col + 1) * l, (row + 1) * l)

    def bounds_array(self) -> np.ndarray:
        return np.array([self.bounds(i) for i in range(self.n_cells)], dtype=float)

    def cell_of(self, point: GroundPoint) -> int | None:
        """Cell containing ``point``; None outside the grid.

        Shared edges belong to the cell on the upper/right side, except on the
        outer boundary where the last row/column keeps them.
        """
        k, l = self.side_count, self.edge_length
        if not (0.0 <= point.x <= k * l and 0.0 <= point.y <= k * l):
            return None
        col = min(int(point.x // l), k - 1)
        row = min(int(point.y // l), k - 1)
        return row * k + col

    def center_distances(self) -> np.ndarray:
        c = self.centers_array()
        return np.hypot(c[:, None, 0] - c[None, :, 0], c[:, None, 1] - c[None, :, 1])


def build_grid(side_count: int, edge_length: float) -> CellGrid:
    if side_count < 1 or side_count % 2 == 0:
        raise ValueError(f"side_count must be a positive odd integer, got {side_count}")
    if not edge_length > 0:
        raise ValueError(f"edge_length must be positive, got {edge_length}")
    k = side_count
    centers = tuple(
        GroundPoint((col + 0.5) * edge_length, (row + 0.5) * edge_length)
        for row in range(k)
        for col in range(k)
    )
    if k >= 5:
        # two boundary tiers are excluded on every side
        keep = range(2, k - 2)
        inner = tuple(row * k + col for row in keep for col in keep)
    else:
        inner = tuple(range(k * k))
    return CellGrid(k, float(edge_length), centers, inner)
