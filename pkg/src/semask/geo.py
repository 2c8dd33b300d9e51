"""Domain types for geo-textual objects and queries, plus geodesic helpers.

All types here are immutable after construction and safe to share across
threads. Distances use a spherical Earth model, which is accurate to well
under 0.1% at the few-kilometre scale this system operates on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EARTH_RADIUS_KM = 6371.0088
# Meridian arc length of one degree on the spherical model (2*pi*R / 360).
KM_PER_DEGREE = 111.195

WEEKDAYS = (
    "Monday",
    "Tuesday",
    "Wednesday",
    "Thursday",
    "Friday",
    "Saturday",
    "Sunday",
)

# cos(lat) below this is treated as polar degeneracy for east-west extents
_MIN_COS_LAT = 1e-9


@dataclass(frozen=True)
class GeoPoint:
    """A WGS84-style coordinate pair in degrees."""

    lat: float
    lon: float

    def __post_init__(self) -> None:
        if not (-90.0 <= self.lat <= 90.0):
            raise ValueError(f"latitude {self.lat} outside [-90, 90]")
        if not (-180.0 <= self.lon <= 180.0):
            raise ValueError(f"longitude {self.lon} outside [-180, 180]")


@dataclass(frozen=True)
class GeoRect:
    """Axis-aligned lat/lon rectangle. Antimeridian-crossing rects are rejected."""

    min_lat: float
    max_lat: float
    min_lon: float
    max_lon: float

    def __post_init__(self) -> None:
        if not (-90.0 <= self.min_lat <= self.max_lat <= 90.0):
            raise ValueError(
                f"latitude span [{self.min_lat}, {self.max_lat}] invalid or out of range"
            )
        if not (-180.0 <= self.min_lon <= self.max_lon <= 180.0):
            raise ValueError(
                f"longitude span [{self.min_lon}, {self.max_lon}] invalid, out of range, "
                "or crosses the antimeridian"
            )

    @property
    def center(self) -> GeoPoint:
        return GeoPoint(
            (self.min_lat + self.max_lat) / 2.0, (self.min_lon + self.max_lon) / 2.0
        )


# --- Attribute values -------------------------------------------------------
#
# Attribute maps are string -> one of the four value kinds below. The JSON
# encoding is type-directed and round-trips without tags: string -> Text,
# number -> Number, array -> Category, object -> Hours.


@dataclass(frozen=True)
class Text:
    value: str


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Category:
    values: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise ValueError("Category requires at least one value")


@dataclass(frozen=True)
class Hours:
    """Opening hours, day name -> 'H:M-H:M' string."""

    by_day: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        for day, _ in self.by_day:
            if day not in WEEKDAYS:
                raise ValueError(f"unknown day name {day!r}")


AttributeValue = Text | Number | Category | Hours


def attribute_to_json(value: AttributeValue):
    """Plain-JSON form of an attribute value (see encoding note above)."""
    if isinstance(value, Text):
        return value.value
    if isinstance(value, Number):
        return value.value
    if isinstance(value, Category):
        return list(value.values)
    if isinstance(value, Hours):
        return dict(value.by_day)
    raise TypeError(f"not an attribute value: {value!r}")


def attribute_from_json(raw) -> AttributeValue:
    if isinstance(raw, str):
        return Text(raw)
    if isinstance(raw, bool):
        raise ValueError(f"boolean is not a valid attribute value: {raw!r}")
    if isinstance(raw, (int, float)):
        return Number(float(raw))
    if isinstance(raw, list):
        return Category(tuple(str(v) for v in raw))
    if isinstance(raw, dict):
        return Hours(tuple((str(k), str(v)) for k, v in raw.items()))
    raise ValueError(f"cannot decode attribute value: {raw!r}")


@dataclass(frozen=True, eq=False)
class GeoTextualObject:
    """A point of interest: location plus an ordered, typed attribute map.

    ``attributes`` keeps insertion order; it always contains at least one
    textual value (the object name is mirrored into it so downstream
    serializations carry the name).
    """

    id: str
    name: str
    location: GeoPoint
    attributes: dict[str, AttributeValue]
    tips: tuple[str, ...] = ()
    tip_summary: str | None = None
    embedding: np.ndarray | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("object id must be non-empty")
        if not any(isinstance(v, Text) for v in self.attributes.values()):
            raise ValueError(f"object {self.id!r} has no textual attribute value")

    def with_fields(self, **changes) -> GeoTextualObject:
        """Functional update; unnamed fields are carried over."""
        current = {
            "id": self.id,
            "name": self.name,
            "location": self.location,
            "attributes": self.attributes,
            "tips": self.tips,
            "tip_summary": self.tip_summary,
            "embedding": self.embedding,
        }
        current.update(changes)
        return GeoTextualObject(**current)


@dataclass(frozen=True)
class Query:
    """A rectangular range plus a free-text constraint and result size k."""

    range: GeoRect
    text: str
    k: int = 10

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("query text must be non-empty")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")

    @property
    def token_count(self) -> int:
        """Whitespace-token count of the query text."""
        return len(self.text.split())


# --- Operations -------------------------------------------------------------


def haversine_km(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in km on the spherical Earth model."""
    lat1, lon1 = math.radians(a.lat), math.radians(a.lon)
    lat2, lon2 = math.radians(b.lat), math.radians(b.lon)
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = math.sin(dlat / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def rect_from_center(center: GeoPoint, width_km: float, height_km: float) -> GeoRect:
    """Rect whose edge midpoints are width/2 (E-W) and height/2 (N-S) km from center.

    Uses the km-to-degree linearization: the latitude span is
    ``height_km / KM_PER_DEGREE`` and the longitude span is
    ``width_km / (KM_PER_DEGREE * cos(lat))``.

    Raises ValueError when the center is too close to a pole for the
    requested width, or when the rect would leave valid lat/lon bounds.
    """
    if width_km < 0 or height_km < 0:
        raise ValueError("width_km and height_km must be non-negative")
    lat_half = (height_km / 2.0) / KM_PER_DEGREE
    if width_km > 0:
        cos_lat = math.cos(math.radians(center.lat))
        if cos_lat <= _MIN_COS_LAT:
            raise ValueError(
                f"center latitude {center.lat} too close to a pole for width {width_km} km"
            )
        lon_half = (width_km / 2.0) / (KM_PER_DEGREE * cos_lat)
    else:
        lon_half = 0.0
    bounds = (
        center.lat - lat_half,
        center.lat + lat_half,
        center.lon - lon_half,
        center.lon + lon_half,
    )
    if bounds[0] < -90.0 or bounds[1] > 90.0 or bounds[2] < -180.0 or bounds[3] > 180.0:
        raise ValueError(
            f"rect {bounds} exceeds valid lat/lon bounds for center ({center.lat}, {center.lon})"
        )
    return GeoRect(*bounds)


def contains(rect: GeoRect, p: GeoPoint) -> bool:
    """Boundary-inclusive containment on all four edges."""
    return (
        rect.min_lat <= p.lat <= rect.max_lat and rect.min_lon <= p.lon <= rect.max_lon
    )
