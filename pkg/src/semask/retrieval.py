"""The filtering-and-refinement query pipeline.

A query is answered in two stages. Filtering is cheap: the spatial grid
produces the ids inside the query range, then the vector index shortlists the
k most embedding-similar among them. Refinement is expensive: the shortlist's
raw attributes go to a chat model that filters and re-ranks them, returning a
name-keyed dictionary of reasons. When the model output is unusable the
answer degrades to plain embedding order instead of failing.
"""

from __future__ import annotations

import ast
import json
import logging
import re
import time
from dataclasses import dataclass, field
from importlib import resources

from .geo import GeoTextualObject, Query, attribute_to_json
from .grid import GridIndex, build as build_grid, range_query
from .hnsw import HnswIndex, HnswParams
from .ingest import embedding_input
from .providers.base import ChatMessage, ChatProvider, EmbeddingProvider, ProviderError

logger = logging.getLogger(__name__)

FALLBACK_REASON = "embedding-similarity fallback"

_PLACEHOLDER_RE = re.compile(r"\{(information|query)\}")


class RefinementParseError(ValueError):
    """No usable dictionary could be extracted from the model output."""


@dataclass(frozen=True)
class Candidate:
    """A shortlisted object as presented to the refinement model."""

    id: str
    name: str
    similarity: float
    serialized_attributes: str  # JSON object text, corpus field order


@dataclass(frozen=True)
class Recommendation:
    id: str
    name: str
    reason: str
    rank: int  # 0 = highest priority


@dataclass(frozen=True)
class QueryAnswer:
    recommended: tuple[Recommendation, ...]
    filtered_out: tuple[Candidate, ...]
    degraded: bool = False
    timings_ms: dict = field(default_factory=dict)


@dataclass
class SearchIndexes:
    """Read-only bundle the pipeline queries against."""

    objects: dict[str, GeoTextualObject]
    grid: GridIndex
    vectors: HnswIndex

    @classmethod
    def build(
        cls,
        corpus: list[GeoTextualObject],
        embedder: EmbeddingProvider,
        hnsw_params: HnswParams | None = None,
        vectors: HnswIndex | None = None,
    ) -> "SearchIndexes":
        """Index a corpus; objects without stored embeddings are embedded here.

        Pass ``vectors`` to reuse a persisted index instead of rebuilding.
        """
        objects: dict[str, GeoTextualObject] = {}
        for obj in corpus:
            if obj.id in objects:
                raise ValueError(f"duplicate object id {obj.id!r}")
            objects[obj.id] = obj
        grid = build_grid(corpus)
        if vectors is None:
            vectors = HnswIndex(embedder.dim, hnsw_params)
            for obj in corpus:
                vec = obj.embedding
                if vec is None:
                    vec = embedder.embed(embedding_input(obj))
                vectors.insert(obj.id, vec)
        return cls(objects=objects, grid=grid, vectors=vectors)


def serialize_candidate(obj: GeoTextualObject) -> str:
    """JSON text of the object's attributes (corpus field order), with the
    tip summary appended; embeddings never appear here."""
    payload = {k: attribute_to_json(v) for k, v in obj.attributes.items()}
    if obj.tip_summary is not None:
        payload["tip_summary"] = obj.tip_summary
    return json.dumps(payload, ensure_ascii=False)


def filter_stage(
    query: Query, indexes: SearchIndexes, embedder: EmbeddingProvider
) -> list[Candidate]:
    """Spatial range filter, then embedding top-k over the allowed set."""
    allowed = range_query(indexes.grid, query.range)
    if not allowed:
        return []
    query_vector = embedder.embed(query.text)
    hits = indexes.vectors.knn(query_vector, query.k, allowed)
    candidates = []
    for hit in hits:
        obj = indexes.objects[hit.id]
        candidates.append(
            Candidate(
                id=obj.id,
                name=obj.name,
                similarity=hit.similarity,
                serialized_attributes=serialize_candidate(obj),
            )
        )
    return candidates


def _load_template() -> str:
    return resources.files("semask").joinpath("prompts/refine_results.txt").read_text("utf-8")


def build_refinement_prompt(query: Query, candidates: list[Candidate]) -> str:
    """Render the refinement prompt; byte-deterministic for fixed inputs."""
    if not candidates:
        raise ValueError("refinement prompt requires at least one candidate")
    information = "[" + ", ".join(c.serialized_attributes for c in candidates) + "]"
    substitutions = {"information": information, "query": query.text}
    # Single-pass substitution: candidate text containing a placeholder
    # must not be re-substituted.
    return _PLACEHOLDER_RE.sub(lambda m: substitutions[m.group(1)], _load_template())


def _first_object_block(text: str) -> str | None:
    """The first balanced top-level {...} block, honoring quoted strings."""
    start = text.find("{")
    if start < 0:
        return None
    depth = 0
    quote: str | None = None
    escaped = False
    for i in range(start, len(text)):
        c = text[i]
        if quote is not None:
            if escaped:
                escaped = False
            elif c == "\\":
                escaped = True
            elif c == quote:
                quote = None
            continue
        if c in "'\"":
            quote = c
        elif c == "{":
            depth += 1
        elif c == "}":
            depth -= 1
            if depth == 0:
                return text[start : i + 1]
    return None


def _parse_object(block: str) -> dict | None:
    try:
        parsed = json.loads(block)
        return parsed if isinstance(parsed, dict) else None
    except (json.JSONDecodeError, RecursionError):
        pass
    try:
        # Python-dict-literal fallback: single quotes and trailing commas.
        # literal_eval raises TypeError on unhashable literals like {{...}}.
        parsed = ast.literal_eval(block)
        return parsed if isinstance(parsed, dict) else None
    except (ValueError, TypeError, SyntaxError, MemoryError, RecursionError):
        return None


def _normalize_name(name: str) -> str:
    return " ".join(name.split()).lower()


def parse_refinement_response(
    text: str, candidates: list[Candidate]
) -> tuple[list[tuple[str, str]], list[str]]:
    """Extract the model's name->reason dictionary and map names to candidates.

    Names match case-insensitively after whitespace normalization; each name
    binds the first still-unmatched candidate with that name (deterministic
    under duplicate names). Names matching no candidate are returned as
    ``unmatched_names`` and excluded from the ranking.

    Raises RefinementParseError when no dictionary can be extracted.
    """
    block = _first_object_block(text)
    if block is None:
        raise RefinementParseError("no object block found in response")
    parsed = _parse_object(block)
    if parsed is None:
        raise RefinementParseError("object block is neither JSON nor a dict literal")

    remaining = list(candidates)
    ordered: list[tuple[str, str]] = []
    unmatched: list[str] = []
    for key, value in parsed.items():
        name = _normalize_name(str(key))
        reason = value if isinstance(value, str) else json.dumps(value, ensure_ascii=False, default=str)
        for pos, candidate in enumerate(remaining):
            if _normalize_name(candidate.name) == name:
                ordered.append((candidate.id, reason))
                del remaining[pos]
                break
        else:
            unmatched.append(str(key))
    return ordered, unmatched


def answer_query(
    query: Query,
    indexes: SearchIndexes,
    embedder: EmbeddingProvider,
    chat: ChatProvider,
) -> QueryAnswer:
    """Run the full pipeline; degrades to embedding order on refinement failure."""
    t0 = time.perf_counter()
    candidates = filter_stage(query, indexes, embedder)
    filter_ms = (time.perf_counter() - t0) * 1000.0
    if not candidates:
        _log_query(query, filter_ms, 0.0, degraded=False, recommended=0)
        return QueryAnswer((), (), degraded=False, timings_ms={"filter": filter_ms, "refine": 0.0})

    t1 = time.perf_counter()
    degraded_cause: str | None = None
    ordered: list[tuple[str, str]] = []
    try:
        prompt = build_refinement_prompt(query, candidates)
        response = chat.chat([ChatMessage("user", prompt)])
        ordered, unmatched = parse_refinement_response(response, candidates)
        if unmatched:
            logger.warning("refinement named %d unknown locations: %r", len(unmatched), unmatched)
    except ProviderError as exc:
        degraded_cause = f"chat provider failed: {exc}"
    except RefinementParseError as exc:
        degraded_cause = f"unusable refinement output: {exc}"
    refine_ms = (time.perf_counter() - t1) * 1000.0

    if degraded_cause is not None:
        logger.warning("degrading to embedding order: %s", degraded_cause)
        recommended = tuple(
            Recommendation(c.id, c.name, FALLBACK_REASON, rank)
            for rank, c in enumerate(candidates)
        )
        _log_query(query, filter_ms, refine_ms, degraded=True, recommended=len(recommended))
        return QueryAnswer(
            recommended, (), degraded=True, timings_ms={"filter": filter_ms, "refine": refine_ms}
        )

    by_id = {c.id: c for c in candidates}
    recommended = tuple(
        Recommendation(obj_id, by_id[obj_id].name, reason, rank)
        for rank, (obj_id, reason) in enumerate(ordered)
    )
    kept = {r.id for r in recommended}
    filtered_out = tuple(c for c in candidates if c.id not in kept)
    _log_query(query, filter_ms, refine_ms, degraded=False, recommended=len(recommended))
    return QueryAnswer(
        recommended,
        filtered_out,
        degraded=False,
        timings_ms={"filter": filter_ms, "refine": refine_ms},
    )


def _log_query(query: Query, filter_ms: float, refine_ms: float, degraded: bool, recommended: int) -> None:
    logger.info(
        "query answered %s",
        json.dumps(
            {
                "text": query.text,
                "k": query.k,
                "filter_ms": round(filter_ms, 3),
                "refine_ms": round(refine_ms, 3),
                "degraded": degraded,
                "recommended": recommended,
            }
        ),
    )
