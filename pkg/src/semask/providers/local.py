"""Deterministic local providers.

These are pure functions of their inputs (no clock, no randomness, no
network), which makes the whole pipeline testable offline. Each mock
documents the exact rule it follows so tests can assert against it.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

import numpy as np

from ..textutil import fnv1a_64, parse_quoted_list, tokenize
from .base import ChatMessage, DEFAULT_EMBED_DIM


@lru_cache(maxsize=1)
def load_stopwords() -> frozenset[str]:
    """The 50 most common English function words, shipped as package data."""
    text = resources.files("semask").joinpath("data/stopwords.txt").read_text("utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


def deterministic_embed(text: str, dim: int = DEFAULT_EMBED_DIM) -> np.ndarray:
    """Hashed bag-of-tokens embedding.

    Lowercase, split on non-alphanumerics; each token is hashed with 64-bit
    FNV-1a; bucket = hash mod dim; sign is +1 when bit 63 is clear, else -1;
    signs accumulate per token occurrence; the result is L2-normalized.
    Empty or whitespace-only text maps to the all-zeros vector.
    """
    if dim < 8:
        raise ValueError(f"embedding dimension must be >= 8, got {dim}")
    acc = np.zeros(dim, dtype=np.float64)
    for token in tokenize(text):
        h = fnv1a_64(token.encode("utf-8"))
        sign = 1.0 if (h >> 63) & 1 == 0 else -1.0
        acc[h % dim] += sign
    norm = np.linalg.norm(acc)
    if norm == 0.0:
        return np.zeros(dim, dtype=np.float32)
    return (acc / norm).astype(np.float32)


class LocalDeterministicEmbedder:
    """Offline stand-in for a remote text-embedding model."""

    def __init__(self, dim: int = DEFAULT_EMBED_DIM):
        if dim < 8:
            raise ValueError(f"embedding dimension must be >= 8, got {dim}")
        self.dim = dim

    def embed(self, text: str) -> np.ndarray:
        return deterministic_embed(text, self.dim)


class EchoChat:
    """Returns the content of the last message verbatim."""

    def chat(self, messages: list[ChatMessage]) -> str:
        if not messages:
            raise ValueError("at least one message required")
        return messages[-1].content


class FixedChat:
    """Returns a fixed response regardless of input."""

    def __init__(self, response: str):
        self.response = response

    def chat(self, messages: list[ChatMessage]) -> str:
        if not messages:
            raise ValueError("at least one message required")
        return self.response


class MockSummarizerChat:
    """Deterministic tip summarizer.

    Rule: parse the quoted tip list after the final "Now it is your turn:"
    marker, count non-stopword tokens across all tips, and emit one line
    "They have <a>, <b> and <c>." naming the top three tokens by
    (count desc, token asc). The framing words are all stopwords, so every
    content word in the output comes from the tips themselves.
    """

    MARKER = "Now it is your turn:"

    def chat(self, messages: list[ChatMessage]) -> str:
        prompt = "\n".join(m.content for m in messages)
        idx = prompt.rfind(self.MARKER)
        if idx < 0:
            return "No reviews provided."
        tail = prompt[idx + len(self.MARKER):].strip()
        try:
            tips = parse_quoted_list(tail)
        except ValueError:
            return "No reviews provided."
        stop = load_stopwords()
        counts: dict[str, int] = {}
        for tip in tips:
            for token in tokenize(tip):
                if token not in stop:
                    counts[token] = counts.get(token, 0) + 1
        if not counts:
            return "They have it all."
        top = sorted(counts, key=lambda t: (-counts[t], t))[:3]
        if len(top) == 1:
            return f"They have {top[0]}."
        return "They have " + ", ".join(top[:-1]) + f" and {top[-1]}."


def mock_refinement_response(prompt: str, stopwords: frozenset[str] | None = None) -> str:
    """Deterministic stand-in for the re-ranking model.

    Rule: locate the JSON candidate array between "Information:" and the
    final "Query:" line; score each candidate by the number of distinct
    non-stopword lowercase query tokens that appear among the tokens of its
    serialized JSON text; keep candidates scoring >= 1; order by descending
    score with ties in input order; emit a JSON object mapping candidate name
    to "matched N query terms" in that order. Anything unparseable, and any
    query with no matches, yields "{}".
    """
    stop = stopwords if stopwords is not None else load_stopwords()
    info_idx = prompt.find("Information:")
    if info_idx < 0:
        return "{}"
    query_idx = prompt.rfind("\nQuery:")
    if query_idx < 0 or query_idx < info_idx:
        return "{}"
    array_text = prompt[info_idx + len("Information:"):query_idx].strip()
    query_text = prompt[query_idx + len("\nQuery:"):].strip()
    try:
        candidates = json.loads(array_text)
    except json.JSONDecodeError:
        return "{}"
    if not isinstance(candidates, list):
        return "{}"

    query_tokens = {t for t in tokenize(query_text) if t not in stop}
    ranked: list[tuple[int, str]] = []  # (score, name), input order preserved on ties
    for item in candidates:
        if not isinstance(item, dict) or "name" not in item:
            continue
        name = str(item["name"])
        item_tokens = set(tokenize(json.dumps(item, ensure_ascii=False)))
        score = len(query_tokens & item_tokens)
        if score >= 1:
            ranked.append((score, name))
    ranked.sort(key=lambda pair: -pair[0])  # stable: ties keep input order

    out: dict[str, str] = {}
    for score, name in ranked:
        if name not in out:
            out[name] = f"matched {score} query terms"
    return json.dumps(out, ensure_ascii=False)


class MockRefinementChat:
    """Chat provider wrapper around :func:`mock_refinement_response`."""

    def chat(self, messages: list[ChatMessage]) -> str:
        prompt = "\n".join(m.content for m in messages)
        return mock_refinement_response(prompt)
