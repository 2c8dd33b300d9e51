"""Command-line entry points: ingest, summarize, synth, index, bench,
genqueries, and serve."""

from __future__ import annotations

import json
import logging
import sys

import click

from .evaluation import (
    BenchSystem,
    generate_query_drafts,
    load_queryset,
    run_benchmark,
)
from .geo import GeoRect
from .hnsw import HnswIndex, HnswParams
from .ingest import (
    HttpReverseGeocoder,
    complete_address,
    embed_corpus,
    generate_synthetic_corpus,
    ingest_lines,
    read_corpus,
    summarize_corpus,
    write_corpus,
)
from .providers import (
    FixedChat,
    LocalDeterministicEmbedder,
    MockRefinementChat,
    MockSummarizerChat,
    ProviderConfig,
    RemoteChat,
    RemoteEmbedder,
)
from .retrieval import SearchIndexes

logger = logging.getLogger(__name__)


def _embedder(provider: str, dim: int):
    if provider == "mock":
        return LocalDeterministicEmbedder(dim)
    if provider == "remote":
        return RemoteEmbedder(ProviderConfig.from_env())
    raise click.BadParameter(f"unknown embedding provider {provider!r}")


def _chat(provider: str, default_mock):
    if provider == "mock":
        return default_mock
    if provider == "remote":
        return RemoteChat(ProviderConfig.from_env())
    raise click.BadParameter(f"unknown chat provider {provider!r}")


def _parse_bbox(raw: str) -> GeoRect:
    try:
        lat1, lon1, lat2, lon2 = (float(part) for part in raw.split(","))
    except ValueError:
        raise click.BadParameter("bbox must be 'lat1,lon1,lat2,lon2'")
    return GeoRect(min(lat1, lat2), max(lat1, lat2), min(lon1, lon2), max(lon1, lon2))


@click.group()
@click.option("--verbose", is_flag=True, help="Enable debug logging.")
def main(verbose: bool) -> None:
    """Semantics-aware spatial keyword search toolkit."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
    )


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--geocoder", type=click.Choice(["none", "remote"]), default="none",
              help="Optionally complete addresses via reverse geocoding.")
@click.option("--geocoder-url", default="https://nominatim.openstreetmap.org")
@click.option("--report", "report_path", type=click.Path(), default=None)
def ingest(in_path: str, out_path: str, geocoder: str, geocoder_url: str,
           report_path: str | None) -> None:
    """Parse a JSONL business file into a corpus file."""
    with open(in_path, "r", encoding="utf-8") as fh:
        objects, report = ingest_lines(fh)
    if geocoder == "remote":
        client = HttpReverseGeocoder(geocoder_url)
        objects = [complete_address(obj, client) for obj in objects]
    write_corpus(objects, out_path)
    click.echo(f"parsed {report.parsed}, rejected {report.rejected} -> {out_path}")
    if report_path:
        with open(report_path, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--provider", default="mock", help="mock | remote")
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Defaults to rewriting the corpus in place.")
@click.option("--parallelism", default=4, show_default=True)
@click.option("--report", "report_path", type=click.Path(), default=None)
def summarize(corpus_path: str, provider: str, out_path: str | None,
              parallelism: int, report_path: str | None) -> None:
    """Summarize each object's tips into a tip summary."""
    chat = _chat(provider, MockSummarizerChat())
    objects = read_corpus(corpus_path)
    objects, report = summarize_corpus(objects, chat, parallelism=parallelism)
    write_corpus(objects, out_path or corpus_path)
    click.echo(f"summarized {report.summarized} objects ({len(report.failures)} failures)")
    if report_path:
        with open(report_path, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())


@main.command()
@click.option("--seed", required=True, type=int)
@click.option("--n", required=True, type=int)
@click.option("--bbox", required=True, help="lat1,lon1,lat2,lon2")
@click.option("--out", "out_path", required=True, type=click.Path())
def synth(seed: int, n: int, bbox: str, out_path: str) -> None:
    """Generate a deterministic synthetic corpus."""
    objects = generate_synthetic_corpus(seed, n, _parse_bbox(bbox))
    write_corpus(objects, out_path)
    click.echo(f"wrote {len(objects)} synthetic objects -> {out_path}")


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--provider", default="mock", help="mock | remote")
@click.option("--dim", default=256, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--ef-construction", default=200, show_default=True)
@click.option("--m", default=16, show_default=True)
def index(corpus_path: str, out_path: str, provider: str, dim: int, seed: int,
          ef_construction: int, m: int) -> None:
    """Build and persist the vector index for a corpus."""
    embedder = _embedder(provider, dim)
    objects = embed_corpus(read_corpus(corpus_path), embedder)
    hnsw = HnswIndex(embedder.dim, HnswParams(M=m, ef_construction=ef_construction, rng_seed=seed))
    for obj in objects:
        hnsw.insert(obj.id, obj.embedding)
    hnsw.save(out_path)
    click.echo(f"indexed {len(objects)} vectors (dim {embedder.dim}) -> {out_path}")


@main.command()
@click.option("--method", required=True, type=click.Choice(["tfidf", "lda", "embedding", "semask"]))
@click.option("--queryset", "queryset_path", required=True, type=click.Path(exists=True))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--k", default=10, show_default=True)
@click.option("--report", "report_path", type=click.Path(), default=None)
@click.option("--provider", default="mock", help="mock | remote (chat + embeddings)")
@click.option("--dim", default=256, show_default=True)
@click.option("--lda-topics", default=50, show_default=True)
@click.option("--lda-iterations", default=500, show_default=True)
@click.option("--lda-seed", default=0, show_default=True)
def bench(method: str, queryset_path: str, corpus_path: str, k: int,
          report_path: str | None, provider: str, dim: int,
          lda_topics: int, lda_iterations: int, lda_seed: int) -> None:
    """Run one method over a query set and report F1@k per city.

    The single --corpus backs every city named in the query set.
    """
    embedder = _embedder(provider, dim)
    chat = _chat(provider, MockRefinementChat())
    corpus = embed_corpus(read_corpus(corpus_path), embedder)
    indexes = SearchIndexes.build(corpus, embedder)
    system = BenchSystem(
        indexes=indexes,
        embedder=embedder,
        chat=chat,
        lda_options={"n_topics": lda_topics, "iterations": lda_iterations, "rng_seed": lda_seed},
    )
    by_id = {obj.id: obj for obj in corpus}
    queries = load_queryset(queryset_path)
    cities = {lq.city for lq in queries}
    for lq in queries:  # containment check against the single corpus
        for obj_id in lq.relevant_ids:
            if obj_id not in by_id:
                raise click.ClickException(f"relevant id {obj_id!r} not in corpus")
    report = run_benchmark(method, queries, {city: system for city in cities}, k=k)
    for city, entry in report.per_city.items():
        click.echo(f"{city}: F1@{k} = {entry['f1']:.4f} over {len(entry['queries'])} queries")
    click.echo(f"average F1@{k} ({method}) = {report.average_f1:.4f}")
    click.echo(report.footnote)
    if report_path:
        with open(report_path, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, ensure_ascii=False, indent=2)


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--n", default=100, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--provider", default="mock", help="mock | remote")
@click.option("--city", default="unknown")
def genqueries(corpus_path: str, n: int, seed: int, out_path: str,
               provider: str, city: str) -> None:
    """Draft labeled queries for sampled targets; humans review the drafts."""
    chat = _chat(provider, FixedChat("Where should I go for something like this?"))
    corpus = read_corpus(corpus_path)
    drafts = generate_query_drafts(corpus, n, seed, chat, city=city)
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(drafts, fh, ensure_ascii=False, indent=2)
    click.echo(f"wrote {len(drafts)} draft queries -> {out_path} (pending review)")


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--index", "index_path", type=click.Path(exists=True), default=None)
@click.option("--regions", "regions_path", type=click.Path(exists=True), default=None)
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--providers", default="auto", help="auto | mock | remote")
@click.option("--dim", default=256, show_default=True)
@click.option("--cors-origin", "cors_origins", multiple=True)
@click.option("--static-dir", type=click.Path(), default=None,
              help="Serve a built webapp from this directory.")
def serve(corpus_path: str, index_path: str | None, regions_path: str | None,
          port: int, host: str, providers: str, dim: int,
          cors_origins: tuple[str, ...], static_dir: str | None) -> None:
    """Start the HTTP query service."""
    import uvicorn

    from .service import ServiceSettings, create_app

    settings = ServiceSettings(
        corpus_path=corpus_path,
        index_path=index_path,
        regions_path=regions_path,
        providers=providers,
        embed_dim=dim,
        cors_origins=list(cors_origins),
        static_dir=static_dir,
    )
    uvicorn.run(create_app(settings), host=host, port=port)


if __name__ == "__main__":
    main()
