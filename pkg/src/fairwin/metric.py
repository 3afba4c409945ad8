"""Colored points, Euclidean distances and fair-center feasibility."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist


class ConfigError(ValueError):
    """Invalid parameters or inputs that violate a documented precondition."""


class ColoredPoint:
    """A stream element: coordinates, a color id and a unique arrival time.

    Coordinates are stored as a read-only float64 vector. Equality compares
    all three fields; hashing uses (arrival, color) since arrivals are unique
    within a stream.
    """

    __slots__ = ("coords", "color", "arrival")

    def __init__(self, coords, color: int, arrival: int = 0):
        arr = np.array(coords, dtype=np.float64).reshape(-1)
        if arr.size == 0:
            raise ConfigError("a point needs at least one coordinate")
        if not np.all(np.isfinite(arr)):
            raise ConfigError(f"non-finite coordinates: {coords!r}")
        if color < 0:
            raise ConfigError(f"negative color {color}")
        if arrival < 0:
            raise ConfigError(f"negative arrival {arrival}")
        arr.setflags(write=False)
        self.coords = arr
        self.color = int(color)
        self.arrival = int(arrival)

    @property
    def dim(self) -> int:
        return self.coords.shape[0]

    def __eq__(self, other):
        if not isinstance(other, ColoredPoint):
            return NotImplemented
        return (
            self.arrival == other.arrival
            and self.color == other.color
            and np.array_equal(self.coords, other.coords)
        )

    def __hash__(self):
        return hash((self.arrival, self.color))

    def __repr__(self):
        xs = ", ".join(f"{x:g}" for x in self.coords[:4])
        if self.dim > 4:
            xs += ", ..."
        return f"ColoredPoint(({xs}), color={self.color}, t={self.arrival})"


@dataclass(frozen=True)
class PartitionConstraint:
    """Per-color capacities of a partition matroid; rank ``k`` is their sum."""

    caps: tuple

    def __post_init__(self):
        caps = tuple(int(c) for c in self.caps)
        if len(caps) < 1:
            raise ConfigError("at least one color is required")
        if any(c < 1 for c in caps):
            raise ConfigError(f"every capacity must be >= 1, got {caps}")
        object.__setattr__(self, "caps", caps)

    @property
    def k(self) -> int:
        return sum(self.caps)

    @property
    def n_colors(self) -> int:
        return len(self.caps)

    def check_color(self, color: int) -> None:
        if not 0 <= color < len(self.caps):
            raise ConfigError(f"color {color} outside [0, {len(self.caps)})")


@dataclass
class Solution:
    """Chosen centers and the radius they achieve on the evaluated point set.

    ``gamma`` is set by sketch queries to the guess the coreset came from.
    """

    centers: list
    radius: float
    gamma: Optional[float] = field(default=None, compare=False)


def distance(a: ColoredPoint, b: ColoredPoint) -> float:
    if a.coords.shape != b.coords.shape:
        raise ConfigError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return math.dist(a.coords, b.coords)


def coords_matrix(points: Sequence[ColoredPoint]) -> np.ndarray:
    if not points:
        return np.empty((0, 0))
    dims = {p.dim for p in points}
    if len(dims) != 1:
        raise ConfigError(f"mixed dimensions {sorted(dims)}")
    return np.stack([p.coords for p in points])


def dist_to_set(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Distance of every row of ``x`` to its nearest row of ``centers``."""
    if centers.shape[0] == 0:
        return np.full(x.shape[0], np.inf)
    out = np.empty(x.shape[0])
    # Row chunks bound the temporary distance matrix to ~4M entries.
    step = max(1, 4_000_000 // centers.shape[0])
    for s in range(0, x.shape[0], step):
        out[s:s + step] = cdist(x[s:s + step], centers).min(axis=1)
    return out


def radius_of(points: Iterable[ColoredPoint], centers: Iterable[ColoredPoint]) -> float:
    points = list(points)
    centers = list(centers)
    if not centers:
        raise ConfigError("no centers")
    if not points:
        raise ConfigError("no points")
    return float(dist_to_set(coords_matrix(points), coords_matrix(centers)).max())


def color_counts(points: Iterable[ColoredPoint]) -> Counter:
    return Counter(p.color for p in points)


def is_feasible(centers: Iterable[ColoredPoint], c: PartitionConstraint) -> bool:
    for color, count in color_counts(centers).items():
        if color >= c.n_colors or count > c.caps[color]:
            return False
    return True
