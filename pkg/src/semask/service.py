"""HTTP query service exposing the pipeline to clients.

Endpoints:
    POST /api/query        run a query (region name or explicit rect + text)
    GET  /api/regions      the region catalog, file order
    GET  /api/objects/{id} full object detail, attributes in corpus order
    GET  /api/health       readiness and corpus size

Errors use a JSON envelope {"code": ..., "message": ...}. The service starts
in offline mode with deterministic mock providers when no API key is
configured, which keeps demos and CI runs free of secrets.
"""

from __future__ import annotations

import json
import logging
import os
from contextlib import asynccontextmanager
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .geo import GeoRect, GeoTextualObject, Query
from .hnsw import HnswIndex
from .ingest import embed_corpus, object_to_json, read_corpus
from .providers import (
    LocalDeterministicEmbedder,
    MockRefinementChat,
    ProviderConfig,
    RemoteChat,
    RemoteEmbedder,
)
from .retrieval import SearchIndexes, answer_query

logger = logging.getLogger(__name__)

DEFAULT_K = 10


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


@dataclass
class ServiceSettings:
    corpus_path: str
    regions_path: str | None = None
    index_path: str | None = None
    providers: str = "auto"  # auto | mock | remote
    embed_dim: int = 256
    cors_origins: list[str] = field(default_factory=list)
    static_dir: str | None = None


@dataclass
class ServiceState:
    ready: bool = False
    corpus_size: int = 0
    indexes: SearchIndexes | None = None
    embedder: object = None
    chat: object = None
    regions: list[tuple[str, GeoRect]] = field(default_factory=list)


def load_regions(path: str) -> list[tuple[str, GeoRect]]:
    """Region catalog: JSON array of {name, rect}; rects validated on load."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    regions = []
    for entry in payload:
        rect = GeoRect(
            entry["rect"]["min_lat"],
            entry["rect"]["max_lat"],
            entry["rect"]["min_lon"],
            entry["rect"]["max_lon"],
        )
        regions.append((str(entry["name"]), rect))
    return regions


def _pick_providers(settings: ServiceSettings):
    mode = settings.providers
    if mode == "auto":
        mode = "remote" if os.environ.get("SEMASK_API_KEY") else "mock"
    if mode == "remote":
        config = ProviderConfig.from_env()
        if config.api_key is None:
            logger.warning("no API key configured; starting in offline mode with mock providers")
            mode = "mock"
        else:
            return RemoteEmbedder(config), RemoteChat(config)
    if mode != "mock":
        raise ValueError(f"unknown providers mode {settings.providers!r}")
    return LocalDeterministicEmbedder(settings.embed_dim), MockRefinementChat()


def initialize_state(settings: ServiceSettings) -> ServiceState:
    embedder, chat = _pick_providers(settings)
    corpus = read_corpus(settings.corpus_path)
    corpus = embed_corpus(corpus, embedder)
    vectors = HnswIndex.load(settings.index_path) if settings.index_path else None
    indexes = SearchIndexes.build(corpus, embedder, vectors=vectors)
    regions = load_regions(settings.regions_path) if settings.regions_path else []
    logger.info("service ready: %d objects, %d regions", len(corpus), len(regions))
    return ServiceState(
        ready=True,
        corpus_size=len(corpus),
        indexes=indexes,
        embedder=embedder,
        chat=chat,
        regions=regions,
    )


def _rect_payload(rect: GeoRect) -> dict:
    return {
        "min_lat": rect.min_lat,
        "max_lat": rect.max_lat,
        "min_lon": rect.min_lon,
        "max_lon": rect.max_lon,
    }


def create_app(settings: ServiceSettings) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        app.state.service = initialize_state(settings)
        yield

    app = FastAPI(title="semask", lifespan=lifespan)
    app.state.service = ServiceState()  # replaced at startup

    if settings.cors_origins:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=settings.cors_origins,
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.exception_handler(ApiError)
    async def api_error_handler(request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    def state() -> ServiceState:
        svc: ServiceState = app.state.service
        if not svc.ready:
            raise ApiError(503, "not_ready", "service is still initializing")
        return svc

    @app.get("/api/health")
    async def health():
        svc: ServiceState = app.state.service
        return {
            "status": "ok" if svc.ready else "initializing",
            "corpus_size": svc.corpus_size,
            "index_ready": svc.ready,
        }

    @app.get("/api/regions")
    async def regions():
        svc = state()
        return [{"name": name, "rect": _rect_payload(rect)} for name, rect in svc.regions]

    @app.get("/api/objects/{object_id}")
    async def object_detail(object_id: str):
        svc = state()
        obj = svc.indexes.objects.get(object_id)
        if obj is None:
            raise ApiError(404, "unknown_object", f"no object with id {object_id!r}")
        payload = object_to_json(obj)
        payload.pop("embedding", None)
        return payload

    @app.post("/api/query")
    async def query(request: Request):
        svc = state()
        try:
            body = await request.json()
        except Exception:
            raise ApiError(400, "invalid_request", "body must be a JSON object")
        if not isinstance(body, dict):
            raise ApiError(400, "invalid_request", "body must be a JSON object")

        region_name = body.get("region_name")
        rect_raw = body.get("rect")
        if (region_name is None) == (rect_raw is None):
            raise ApiError(
                400, "invalid_request", "provide exactly one of 'region_name' or 'rect'"
            )
        if region_name is not None:
            match = next((rect for name, rect in svc.regions if name == region_name), None)
            if match is None:
                raise ApiError(400, "unknown_region", f"no region named {region_name!r}")
            rect = match
        else:
            if not isinstance(rect_raw, dict):
                raise ApiError(400, "invalid_request", "'rect' must be an object")
            try:
                rect = GeoRect(
                    float(rect_raw["min_lat"]),
                    float(rect_raw["max_lat"]),
                    float(rect_raw["min_lon"]),
                    float(rect_raw["max_lon"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ApiError(400, "invalid_request", f"invalid rect: {exc}")

        text = body.get("text")
        if not isinstance(text, str) or not text.strip():
            raise ApiError(400, "invalid_request", "'text' must be a non-empty string")
        k = body.get("k", DEFAULT_K)
        if not isinstance(k, int) or isinstance(k, bool) or k < 1:
            raise ApiError(400, "invalid_request", "'k' must be a positive integer")

        answer = answer_query(Query(rect, text, k=k), svc.indexes, svc.embedder, svc.chat)
        objects = svc.indexes.objects
        return {
            "recommended": [
                {
                    "id": r.id,
                    "name": r.name,
                    "lat": objects[r.id].location.lat,
                    "lon": objects[r.id].location.lon,
                    "rank": r.rank,
                    "reason": r.reason,
                }
                for r in answer.recommended
            ],
            "filtered_out": [
                {
                    "id": c.id,
                    "name": c.name,
                    "lat": objects[c.id].location.lat,
                    "lon": objects[c.id].location.lon,
                    "similarity": c.similarity,
                }
                for c in answer.filtered_out
            ],
            "degraded": answer.degraded,
            "timings_ms": {
                "filter": round(answer.timings_ms.get("filter", 0.0), 3),
                "refine": round(answer.timings_ms.get("refine", 0.0), 3),
            },
        }

    if settings.static_dir and os.path.isdir(settings.static_dir):
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=settings.static_dir, html=True), name="webapp")

    return app
