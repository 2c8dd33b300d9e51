"""Uniform-grid spatial index for rectangular range queries.

Corpora here are small (tens of thousands of points), so a flat grid with
per-point containment re-checks is exact, fast, and much simpler than a tree.
The default cell size of 0.01 degrees is about 1.1 km, a good fit for the
5 km query ranges this system serves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .geo import GeoPoint, GeoRect, GeoTextualObject, contains

DEFAULT_CELL_SIZE_DEG = 0.01


@dataclass
class GridIndex:
    """Immutable after build; unrestricted concurrent reads."""

    cell_size: float = DEFAULT_CELL_SIZE_DEG
    cells: dict[tuple[int, int], list[tuple[str, GeoPoint]]] = field(default_factory=dict)
    size: int = 0

    def cell_of(self, p: GeoPoint) -> tuple[int, int]:
        return (math.floor(p.lat / self.cell_size), math.floor(p.lon / self.cell_size))


def build(objects, cell_size: float = DEFAULT_CELL_SIZE_DEG) -> GridIndex:
    """Index every object's location; each point lands in exactly one cell."""
    if cell_size <= 0:
        raise ValueError("cell_size must be positive")
    index = GridIndex(cell_size=cell_size)
    for obj in objects:
        key = index.cell_of(obj.location)
        index.cells.setdefault(key, []).append((obj.id, obj.location))
        index.size += 1
    return index


def range_query(index: GridIndex, rect: GeoRect) -> set[str]:
    """Exactly the ids whose locations fall inside rect (boundary inclusive)."""
    size = index.cell_size
    lo_i = math.floor(rect.min_lat / size)
    hi_i = math.floor(rect.max_lat / size)
    lo_j = math.floor(rect.min_lon / size)
    hi_j = math.floor(rect.max_lon / size)
    hits: set[str] = set()
    for i in range(lo_i, hi_i + 1):
        for j in range(lo_j, hi_j + 1):
            bucket = index.cells.get((i, j))
            if not bucket:
                continue
            for obj_id, point in bucket:
                if contains(rect, point):
                    hits.add(obj_id)
    return hits
