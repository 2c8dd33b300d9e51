"""Corpus ingestion: record parsing, address completion, tip summarization,
and synthetic corpus generation for offline testing.

Input is JSONL with one business record per line, tips pre-joined onto the
business. Parsing is strict: a record with a missing or ill-typed field is
rejected with its line number, never silently repaired.
"""

from __future__ import annotations

import json
import logging
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Protocol

import httpx
import numpy as np

from .geo import (
    AttributeValue,
    Category,
    GeoPoint,
    GeoRect,
    GeoTextualObject,
    Hours,
    Number,
    Text,
    attribute_from_json,
    attribute_to_json,
    contains,
)
from .providers.base import ChatMessage, ChatProvider, ProviderError
from .textutil import render_quoted_list

logger = logging.getLogger(__name__)

MANDATORY_FIELDS = ("business_id", "name", "latitude", "longitude")

# Attribute insertion order in parsed objects follows the sample-record row
# order (name first, then address fields, numeric fields, categories, hours).
_TEXT_FIELDS = ("address", "city", "state")
_NUMBER_FIELDS = ("stars", "tip_count", "is_open")

ENRICHMENT_KEYS = ("city", "county", "suburb", "neighborhood")


class ParseError(ValueError):
    def __init__(self, message: str, line_no: int | None = None):
        prefix = f"line {line_no}: " if line_no is not None else ""
        super().__init__(prefix + message)
        self.line_no = line_no


class GeocodeError(Exception):
    """Reverse geocoding failed; callers must continue without enrichment."""


@dataclass(frozen=True)
class AddressEnrichment:
    city: str | None = None
    county: str | None = None
    suburb: str | None = None
    neighborhood: str | None = None

    def as_dict(self) -> dict[str, str]:
        full = {
            "city": self.city,
            "county": self.county,
            "suburb": self.suburb,
            "neighborhood": self.neighborhood,
        }
        return {k: v for k, v in full.items() if v}


class ReverseGeocoder(Protocol):
    def lookup(self, point: GeoPoint) -> AddressEnrichment: ...


class StaticReverseGeocoder:
    """Offline geocoder backed by a bounding-box -> names lookup table."""

    def __init__(self, table: list[tuple[GeoRect, AddressEnrichment]]):
        self.table = list(table)

    def lookup(self, point: GeoPoint) -> AddressEnrichment:
        for rect, enrichment in self.table:
            if contains(rect, point):
                if not enrichment.as_dict():
                    raise GeocodeError("lookup table entry has no names")
                return enrichment
        raise GeocodeError(f"no table entry covers ({point.lat}, {point.lon})")


class HttpReverseGeocoder:
    """Nominatim-style ``GET {base_url}/reverse?lat=&lon=&format=jsonv2``."""

    def __init__(self, base_url: str, timeout_s: float = 10.0,
                 transport: httpx.BaseTransport | None = None):
        self._client = httpx.Client(base_url=base_url, timeout=timeout_s, transport=transport)

    def lookup(self, point: GeoPoint) -> AddressEnrichment:
        try:
            response = self._client.get(
                "/reverse", params={"lat": point.lat, "lon": point.lon, "format": "jsonv2"}
            )
            response.raise_for_status()
            address = response.json().get("address", {})
        except (httpx.HTTPError, ValueError) as exc:
            raise GeocodeError(f"reverse geocoding failed: {exc}") from exc
        enrichment = AddressEnrichment(
            city=address.get("city") or address.get("town") or None,
            county=address.get("county") or None,
            suburb=address.get("suburb") or None,
            neighborhood=address.get("neighbourhood") or address.get("neighborhood") or None,
        )
        if not enrichment.as_dict():
            raise GeocodeError("geocoder returned no usable address components")
        return enrichment


# --- record parsing ---------------------------------------------------------


def parse_record(line: str, line_no: int | None = None) -> GeoTextualObject:
    """Parse one JSONL business record into a GeoTextualObject."""
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}", line_no) from exc
    if not isinstance(raw, dict):
        raise ParseError("record is not a JSON object", line_no)

    for name in MANDATORY_FIELDS:
        if name not in raw:
            raise ParseError(f"missing mandatory field {name!r}", line_no)
    if not isinstance(raw["business_id"], str) or not raw["business_id"]:
        raise ParseError("field 'business_id' must be a non-empty string", line_no)
    if not isinstance(raw["name"], str) or not raw["name"]:
        raise ParseError("field 'name' must be a non-empty string", line_no)
    for name in ("latitude", "longitude"):
        if isinstance(raw[name], bool) or not isinstance(raw[name], (int, float)):
            raise ParseError(f"field {name!r} must be a number", line_no)
    try:
        location = GeoPoint(float(raw["latitude"]), float(raw["longitude"]))
    except ValueError as exc:
        raise ParseError(str(exc), line_no) from exc

    attributes: dict[str, AttributeValue] = {"name": Text(raw["name"])}
    for name in _TEXT_FIELDS:
        if name in raw:
            if not isinstance(raw[name], str):
                raise ParseError(f"field {name!r} must be a string", line_no)
            attributes[name] = Text(raw[name])
    for name in _NUMBER_FIELDS:
        if name in raw:
            if isinstance(raw[name], bool) or not isinstance(raw[name], (int, float)):
                raise ParseError(f"field {name!r} must be a number", line_no)
            attributes[name] = Number(float(raw[name]))
    if "categories" in raw:
        if not isinstance(raw["categories"], str):
            raise ParseError("field 'categories' must be a comma-separated string", line_no)
        parts = tuple(p.strip() for p in raw["categories"].split(",") if p.strip())
        if parts:
            attributes["categories"] = Category(parts)
    if "hours" in raw:
        if not isinstance(raw["hours"], dict):
            raise ParseError("field 'hours' must be an object", line_no)
        try:
            attributes["hours"] = Hours(
                tuple((str(k), str(v)) for k, v in raw["hours"].items())
            )
        except ValueError as exc:
            raise ParseError(f"field 'hours': {exc}", line_no) from exc

    tips: tuple[str, ...] = ()
    if "tips" in raw:
        if not isinstance(raw["tips"], list) or not all(isinstance(t, str) for t in raw["tips"]):
            raise ParseError("field 'tips' must be a list of strings", line_no)
        tips = tuple(raw["tips"])

    return GeoTextualObject(
        id=raw["business_id"],
        name=raw["name"],
        location=location,
        attributes=attributes,
        tips=tips,
    )


@dataclass
class IngestReport:
    parsed: int = 0
    rejected: int = 0
    summarized: int = 0
    failures: list[dict] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(
            {
                "parsed": self.parsed,
                "rejected": self.rejected,
                "summarized": self.summarized,
                "failures": self.failures,
            },
            indent=2,
        )


def ingest_lines(lines: Iterable[str]) -> tuple[list[GeoTextualObject], IngestReport]:
    """Parse a JSONL stream; collects failures instead of aborting."""
    objects: list[GeoTextualObject] = []
    report = IngestReport()
    seen: set[str] = set()
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = parse_record(line, line_no)
            if obj.id in seen:
                raise ParseError(f"duplicate id {obj.id!r}", line_no)
            seen.add(obj.id)
        except ParseError as exc:
            report.rejected += 1
            report.failures.append({"line": line_no, "error": str(exc)})
            continue
        objects.append(obj)
        report.parsed += 1
    return objects, report


# --- corpus serialization ----------------------------------------------------
#
# Corpus files are JSONL, one object per line, stable field order:
#   id, name, lat, lon, attributes, tips, tip_summary (when present),
#   embedding (when present).


def object_to_json(obj: GeoTextualObject) -> dict:
    record: dict = {
        "id": obj.id,
        "name": obj.name,
        "lat": obj.location.lat,
        "lon": obj.location.lon,
        "attributes": {k: attribute_to_json(v) for k, v in obj.attributes.items()},
        "tips": list(obj.tips),
    }
    if obj.tip_summary is not None:
        record["tip_summary"] = obj.tip_summary
    if obj.embedding is not None:
        record["embedding"] = [float(x) for x in obj.embedding]
    return record


def object_from_json(record: dict) -> GeoTextualObject:
    embedding = record.get("embedding")
    return GeoTextualObject(
        id=record["id"],
        name=record["name"],
        location=GeoPoint(record["lat"], record["lon"]),
        attributes={k: attribute_from_json(v) for k, v in record["attributes"].items()},
        tips=tuple(record.get("tips", ())),
        tip_summary=record.get("tip_summary"),
        embedding=np.asarray(embedding, dtype=np.float32) if embedding is not None else None,
    )


def write_corpus(objects: Iterable[GeoTextualObject], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for obj in objects:
            fh.write(json.dumps(object_to_json(obj), ensure_ascii=False) + "\n")


def read_corpus(path: str) -> list[GeoTextualObject]:
    objects = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                objects.append(object_from_json(json.loads(line)))
    return objects


# --- address completion -------------------------------------------------------


def complete_address(obj: GeoTextualObject, geocoder: ReverseGeocoder) -> GeoTextualObject:
    """Fill missing city/county/suburb/neighborhood attributes from coordinates.

    Existing non-empty values are never overwritten. On geocoder failure the
    object is returned unchanged and a warning is logged; ingestion never
    aborts over enrichment.
    """
    try:
        enrichment = geocoder.lookup(obj.location)
    except GeocodeError as exc:
        logger.warning("address completion skipped for %s: %s", obj.id, exc)
        return obj
    names = enrichment.as_dict()
    attributes = dict(obj.attributes)
    changed = False
    for key in ENRICHMENT_KEYS:
        if key not in names:
            continue
        current = attributes.get(key)
        if isinstance(current, Text) and current.value.strip():
            continue
        attributes[key] = Text(names[key])
        changed = True
    if not changed:
        return obj
    return obj.with_fields(attributes=attributes)


# --- tip summarization ---------------------------------------------------------


def _load_prompt(name: str) -> str:
    return resources.files("semask").joinpath(f"prompts/{name}").read_text("utf-8")


def render_summarize_prompt(tips: Iterable[str]) -> str:
    """Summarization prompt with the tips as a quoted, comma-separated list."""
    template = _load_prompt("summarize_tips.txt")
    return template.replace("{tips}", render_quoted_list(tuple(tips)))


def summarize_tips(
    obj: GeoTextualObject,
    llm: ChatProvider,
    max_retries: int = 3,
    backoff_s: float = 0.25,
) -> GeoTextualObject:
    """Summarize an object's tips; returns the object with tip_summary set.

    Objects without tips are returned unchanged without any provider call.
    Provider errors are retried with exponential backoff and then propagate.
    """
    if not obj.tips:
        return obj
    prompt = render_summarize_prompt(obj.tips)
    last_error: Exception | None = None
    for attempt in range(max_retries + 1):
        if attempt > 0:
            time.sleep(backoff_s * (2 ** (attempt - 1)))
        try:
            summary = llm.chat([ChatMessage("user", prompt)])
            return obj.with_fields(tip_summary=summary)
        except ProviderError as exc:
            last_error = exc
            logger.warning("summarization attempt %d failed for %s: %s", attempt + 1, obj.id, exc)
    assert last_error is not None
    raise last_error


def summarize_corpus(
    objects: list[GeoTextualObject],
    llm: ChatProvider,
    parallelism: int = 4,
    max_retries: int = 3,
    backoff_s: float = 0.25,
) -> tuple[list[GeoTextualObject], IngestReport]:
    """Summarize every object with tips, ``parallelism`` calls in flight.

    Objects that already carry a summary are left alone. Objects whose
    provider calls fail after retries keep no summary and land in the report.
    """
    report = IngestReport(parsed=len(objects))

    def work(obj: GeoTextualObject) -> GeoTextualObject:
        if obj.tip_summary is not None or not obj.tips:
            return obj
        try:
            return summarize_tips(obj, llm, max_retries=max_retries, backoff_s=backoff_s)
        except ProviderError as exc:
            report.failures.append({"id": obj.id, "error": str(exc)})
            return obj

    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        result = list(pool.map(work, objects))
    report.summarized = sum(
        1 for before, after in zip(objects, result)
        if after.tip_summary is not None and before.tip_summary is None
    )
    return result, report


# --- embedding preparation -----------------------------------------------------


def embedding_input(obj: GeoTextualObject) -> str:
    """Text an object is embedded from: name, address, categories, hours, and
    tip summary. Raw tips stay out; the summary stands in for them."""
    parts: list[str] = [obj.name]
    address = obj.attributes.get("address")
    if isinstance(address, Text) and address.value:
        parts.append(address.value)
    categories = obj.attributes.get("categories")
    if isinstance(categories, Category):
        parts.append(", ".join(categories.values))
    hours = obj.attributes.get("hours")
    if isinstance(hours, Hours):
        parts.append("; ".join(f"{day} {span}" for day, span in hours.by_day))
    if obj.tip_summary:
        parts.append(obj.tip_summary)
    return ". ".join(parts)


def embed_corpus(objects: list[GeoTextualObject], embedder) -> list[GeoTextualObject]:
    """Attach embeddings to objects that lack one."""
    out = []
    for obj in objects:
        if obj.embedding is None:
            out.append(obj.with_fields(embedding=embedder.embed(embedding_input(obj))))
        else:
            out.append(obj)
    return out


# --- synthetic corpus -----------------------------------------------------------


@dataclass(frozen=True)
class CategoryProfile:
    """Vocabulary bundle one synthetic object is drawn from."""

    label: str
    name_words: tuple[str, ...]
    categories: tuple[str, ...]
    tip_phrases: tuple[str, ...]


DEFAULT_PROFILES: tuple[CategoryProfile, ...] = (
    CategoryProfile(
        "cafe",
        ("Brew", "Roast", "Bean", "Morning", "Velvet"),
        ("Coffee & Tea", "Cafes", "Breakfast & Brunch"),
        (
            "The espresso here is rich and smooth",
            "Great flat white and friendly baristas",
            "Cozy spot for a morning latte and pastry",
            "Cold brew is strong without being bitter",
            "Best cappuccino foam in the neighborhood",
            "Quiet corner tables perfect for reading",
            "Fresh croissants every morning",
            "The pour over menu rotates weekly",
        ),
    ),
    CategoryProfile(
        "bar",
        ("Tap", "Barrel", "Draft", "Stadium", "Corner"),
        ("Bars", "Sports Bars", "American (Traditional)"),
        (
            "Perfect bar to watch football with friends",
            "The chicken wings are crispy and delicious",
            "Huge screens for every game night",
            "Cold beer on tap and a loud crowd",
            "Happy hour specials on draft pints",
            "Their buffalo chicken sliders are addictive",
            "Great spot for game day and greasy food",
            "Pool tables in the back and darts too",
        ),
    ),
    CategoryProfile(
        "auto repair",
        ("Gear", "Piston", "Torque", "Rapid", "Summit"),
        ("Auto Repair", "Oil Change Stations", "Tires"),
        (
            "They fixed my brakes the same day",
            "Honest mechanics with fair prices",
            "Quick oil change and tire rotation",
            "Diagnosed the engine noise in minutes",
            "Replaced my alternator under warranty",
            "Trustworthy shop for transmission work",
            "They explain repairs without upselling",
            "Got my car aligned while I waited",
        ),
    ),
    CategoryProfile(
        "sushi restaurant",
        ("Sakura", "Koi", "Umami", "Ginza", "Wave"),
        ("Sushi Bars", "Japanese", "Seafood"),
        (
            "Incredible variety of sushi rolls and nigiri",
            "The omakase is worth every penny",
            "Fresh sashimi sliced right at the counter",
            "Creative rolls with a generous fish cut",
            "Their spicy tuna roll is outstanding",
            "Authentic Japanese flavors and warm sake",
            "The chef's selection never disappoints",
            "Light tempura and delicate miso soup",
        ),
    ),
    CategoryProfile(
        "pizzeria",
        ("Crust", "Stone", "Brick", "Napoli", "Slice"),
        ("Pizza", "Italian", "Fast Food"),
        (
            "Wood fired crust with perfect char",
            "The margherita pizza tastes like Naples",
            "Generous toppings and gooey mozzarella",
            "Late night slices that hit the spot",
            "Their garlic knots are legendary",
            "Thin crust done right, crispy edges",
            "Family sized pies at a fair price",
            "The pepperoni cups crisp up beautifully",
        ),
    ),
    CategoryProfile(
        "gym",
        ("Iron", "Flex", "Pulse", "Apex", "Core"),
        ("Gyms", "Fitness & Instruction", "Trainers"),
        (
            "Clean equipment and plenty of squat racks",
            "Trainers actually correct your form",
            "Never too crowded even at peak hours",
            "Great spin classes every morning",
            "The free weights area is huge",
            "Showers and lockers always spotless",
            "Month to month membership, no pressure",
            "Friendly front desk and good music",
        ),
    ),
    CategoryProfile(
        "bookstore",
        ("Chapter", "Folio", "Inkwell", "Dusty", "Quill"),
        ("Bookstores", "Shopping", "Used, Vintage & Consignment"),
        (
            "Wonderful curated shelf of local authors",
            "Rare first editions hiding in the back",
            "Staff picks are always worth reading",
            "Cozy reading nooks and a resident cat",
            "Trade in your used paperbacks for credit",
            "Excellent poetry and philosophy sections",
            "They order anything within two days",
            "Author signings almost every month",
        ),
    ),
    CategoryProfile(
        "ice cream shop",
        ("Scoop", "Frost", "Swirl", "Polar", "Sundae"),
        ("Ice Cream & Frozen Yogurt", "Desserts", "Fast Food"),
        (
            "Amazing ice cream, so creamy",
            "The waffle cones are made fresh daily",
            "Unusual flavors like honey lavender",
            "Kids love the rainbow sprinkles bar",
            "Generous scoops for the price",
            "Their milkshakes are thick and rich",
            "Dairy free sorbet actually tastes great",
            "Line moves fast even on hot days",
        ),
    ),
    CategoryProfile(
        "taco joint",
        ("Cactus", "Salsa", "Adobe", "Fuego", "Lime"),
        ("Mexican", "Tacos", "Food Trucks"),
        (
            "Al pastor tacos with fresh pineapple",
            "Handmade tortillas pressed to order",
            "The salsa verde has a real kick",
            "Carnitas are juicy and well seasoned",
            "Best street corn outside of Mexico",
            "Three tacos and a drink for cheap",
            "Their breakfast burritos sell out fast",
            "Horchata is sweet and refreshing",
        ),
    ),
    CategoryProfile(
        "hair salon",
        ("Shear", "Mane", "Luster", "Blush", "Strand"),
        ("Hair Salons", "Beauty & Spas", "Barbers"),
        (
            "My stylist listened and nailed the cut",
            "Color came out exactly as the photo",
            "Relaxing scalp massage with every wash",
            "They fit me in for a same day trim",
            "Fair prices for balayage this good",
            "The blowout lasted through the weekend",
            "Clean stations and friendly chatter",
            "Easy online booking and no waiting",
        ),
    ),
)

_STREETS = ("Main St", "2nd Ave N", "Oak Blvd", "Riverside Dr", "Elm St", "Market St")

_DEFAULT_HOURS = (
    ("Monday", "9:0-17:0"),
    ("Tuesday", "9:0-17:0"),
    ("Wednesday", "9:0-17:0"),
    ("Thursday", "9:0-17:0"),
    ("Friday", "9:0-19:0"),
    ("Saturday", "10:0-16:0"),
    ("Sunday", "10:0-14:0"),
)


def generate_synthetic_corpus(
    seed: int,
    n: int,
    bbox: GeoRect,
    profiles: tuple[CategoryProfile, ...] = DEFAULT_PROFILES,
) -> list[GeoTextualObject]:
    """Deterministic synthetic corpus: locations uniform in bbox, each object
    drawn from one category profile's vocabulary."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if not profiles:
        raise ValueError("at least one profile required")
    rng = random.Random(seed)
    objects: list[GeoTextualObject] = []
    for i in range(n):
        profile = profiles[rng.randrange(len(profiles))]
        lat = rng.uniform(bbox.min_lat, bbox.max_lat)
        lon = rng.uniform(bbox.min_lon, bbox.max_lon)
        name = f"{rng.choice(profile.name_words)} {profile.label.title()} #{i:04d}"
        tip_count = rng.randint(2, 6)
        tips = tuple(rng.sample(profile.tip_phrases, min(tip_count, len(profile.tip_phrases))))
        attributes: dict[str, AttributeValue] = {
            "name": Text(name),
            "address": Text(f"{rng.randint(1, 999)} {rng.choice(_STREETS)}"),
            "stars": Number(rng.randint(2, 10) / 2.0),
            "tip_count": Number(float(len(tips))),
            "is_open": Number(1.0 if rng.random() < 0.9 else 0.0),
            "categories": Category(profile.categories),
            "hours": Hours(_DEFAULT_HOURS),
        }
        objects.append(
            GeoTextualObject(
                id=f"synth-{i:05d}",
                name=name,
                location=GeoPoint(lat, lon),
                attributes=attributes,
                tips=tips,
            )
        )
    return objects
