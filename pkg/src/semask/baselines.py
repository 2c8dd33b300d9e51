"""Lexical and topic-model baselines that rank objects inside a query range.

TF-IDF scores documents by cosine over smoothed tf-idf weights. LDA fits a
topic model with collapsed Gibbs sampling and scores documents by negative
Jensen-Shannon divergence between topic distributions. Both produce total
orders: descending score, ties by ascending object id.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .geo import Category, GeoTextualObject, Query, Text
from .textutil import tokenize

logger = logging.getLogger(__name__)


def document_text(obj: GeoTextualObject) -> str:
    """Ranking document for an object: textual attribute values, tip summary,
    and category terms."""
    parts: list[str] = []
    for value in obj.attributes.values():
        if isinstance(value, Text):
            parts.append(value.value)
        elif isinstance(value, Category):
            parts.extend(value.values)
    if obj.tip_summary:
        parts.append(obj.tip_summary)
    return " ".join(parts)


# --- TF-IDF -------------------------------------------------------------------


@dataclass
class TfIdfModel:
    """Corpus statistics for tf-idf weighting.

    idf uses the smoothed form ln((1+N)/(1+df)) + 1, which is strictly
    positive and stable when every document contains a term.
    """

    vocabulary: dict[str, int]
    df: dict[str, int]
    n_docs: int

    @classmethod
    def fit(cls, objects: list[GeoTextualObject]) -> "TfIdfModel":
        if not objects:
            raise ValueError("cannot fit tf-idf on an empty corpus")
        vocabulary: dict[str, int] = {}
        df: dict[str, int] = {}
        for obj in objects:
            seen = set(tokenize(document_text(obj)))
            for term in seen:
                df[term] = df.get(term, 0) + 1
                if term not in vocabulary:
                    vocabulary[term] = len(vocabulary)
        return cls(vocabulary=vocabulary, df=df, n_docs=len(objects))

    def idf(self, term: str) -> float:
        return math.log((1 + self.n_docs) / (1 + self.df.get(term, 0))) + 1.0

    def weights(self, text: str) -> dict[str, float]:
        """Sparse tf-idf vector over in-vocabulary terms."""
        counts = Counter(t for t in tokenize(text) if t in self.vocabulary)
        return {term: tf * self.idf(term) for term, tf in counts.items()}


def _cosine_sparse(a: dict[str, float], b: dict[str, float]) -> float:
    if not a or not b:
        return 0.0
    if len(b) < len(a):
        a, b = b, a
    dot = sum(w * b[t] for t, w in a.items() if t in b)
    if dot == 0.0:
        return 0.0
    norm_a = math.sqrt(sum(w * w for w in a.values()))
    norm_b = math.sqrt(sum(w * w for w in b.values()))
    return dot / (norm_a * norm_b)


def tfidf_rank(
    query: Query, model: TfIdfModel, objects_in_range: list[GeoTextualObject]
) -> list[tuple[str, float]]:
    """Rank objects by cosine between query and document tf-idf vectors."""
    query_vec = model.weights(query.text)
    scored = [
        (obj.id, _cosine_sparse(query_vec, model.weights(document_text(obj))))
        for obj in objects_in_range
    ]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored


# --- LDA ----------------------------------------------------------------------


@dataclass
class LdaModel:
    """Collapsed-Gibbs LDA state after fitting.

    theta rows are Dirichlet-smoothed document-topic distributions,
    (count + alpha) / (length + K * alpha); each row sums to one.
    """

    n_topics: int
    alpha: float
    beta: float
    iterations: int
    rng_seed: int
    vocabulary: dict[str, int]
    topic_word: np.ndarray  # (K, V) counts
    topic_totals: np.ndarray  # (K,) counts
    theta: dict[str, np.ndarray] = field(default_factory=dict)

    def fold_in(self, tokens: list[str], sweeps: int = 50) -> np.ndarray:
        """Topic distribution for unseen text, word-topic counts frozen.

        Out-of-vocabulary tokens are dropped; with none left the distribution
        is uniform.
        """
        ids = [self.vocabulary[t] for t in tokens if t in self.vocabulary]
        k = self.n_topics
        if not ids:
            return np.full(k, 1.0 / k)
        rng = np.random.default_rng(self.rng_seed + 1)
        v_beta = self.beta * len(self.vocabulary)
        assignments = rng.integers(0, k, size=len(ids))
        counts = np.bincount(assignments, minlength=k).astype(np.float64)
        word_factor = (self.topic_word + self.beta) / (self.topic_totals + v_beta)[:, None]
        for _ in range(sweeps):
            for pos, w in enumerate(ids):
                counts[assignments[pos]] -= 1
                weights = (counts + self.alpha) * word_factor[:, w]
                total = float(weights.sum())
                target = rng.random() * total
                z = int(np.searchsorted(np.cumsum(weights), target, side="right"))
                z = min(z, k - 1)
                assignments[pos] = z
                counts[z] += 1
        return (counts + self.alpha) / (len(ids) + k * self.alpha)


def lda_fit(
    objects: list[GeoTextualObject],
    n_topics: int = 50,
    alpha: float | None = None,
    beta: float = 0.01,
    iterations: int = 500,
    rng_seed: int = 0,
) -> LdaModel:
    """Fit LDA by collapsed Gibbs sampling over the objects' documents.

    Empty documents (no tokens) are dropped with a warning and get no theta
    row; ranking treats them as uniform.
    """
    if not objects:
        raise ValueError("cannot fit LDA on an empty corpus")
    if n_topics < 2:
        raise ValueError("n_topics must be >= 2")
    if alpha is None:
        alpha = 50.0 / n_topics

    docs: list[tuple[str, list[str]]] = []
    vocabulary: dict[str, int] = {}
    for obj in objects:
        tokens = tokenize(document_text(obj))
        if not tokens:
            logger.warning("dropping empty document for object %s", obj.id)
            continue
        for t in tokens:
            if t not in vocabulary:
                vocabulary[t] = len(vocabulary)
        docs.append((obj.id, tokens))
    if not docs:
        raise ValueError("all documents were empty")

    k = n_topics
    v = len(vocabulary)
    rng = np.random.default_rng(rng_seed)
    doc_words = [np.array([vocabulary[t] for t in tokens]) for _, tokens in docs]
    assignments = [rng.integers(0, k, size=len(words)) for words in doc_words]

    doc_topic = np.zeros((len(docs), k), dtype=np.float64)
    topic_word = np.zeros((k, v), dtype=np.float64)
    topic_totals = np.zeros(k, dtype=np.float64)
    for d, (words, zs) in enumerate(zip(doc_words, assignments)):
        for w, z in zip(words, zs):
            doc_topic[d, z] += 1
            topic_word[z, w] += 1
            topic_totals[z] += 1

    v_beta = beta * v
    for _ in range(iterations):
        for d, words in enumerate(doc_words):
            zs = assignments[d]
            dt = doc_topic[d]
            for pos in range(len(words)):
                w = words[pos]
                z = zs[pos]
                dt[z] -= 1
                topic_word[z, w] -= 1
                topic_totals[z] -= 1
                weights = (dt + alpha) * (topic_word[:, w] + beta) / (topic_totals + v_beta)
                total = float(weights.sum())
                target = rng.random() * total
                z_new = int(np.searchsorted(np.cumsum(weights), target, side="right"))
                z_new = min(z_new, k - 1)
                zs[pos] = z_new
                dt[z_new] += 1
                topic_word[z_new, w] += 1
                topic_totals[z_new] += 1

    theta = {
        docs[d][0]: (doc_topic[d] + alpha) / (len(doc_words[d]) + k * alpha)
        for d in range(len(docs))
    }
    return LdaModel(
        n_topics=k,
        alpha=alpha,
        beta=beta,
        iterations=iterations,
        rng_seed=rng_seed,
        vocabulary=vocabulary,
        topic_word=topic_word,
        topic_totals=topic_totals,
        theta=theta,
    )


def jensen_shannon(p: np.ndarray, q: np.ndarray) -> float:
    """Symmetric, bounded divergence between two distributions (natural log)."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    m = (p + q) / 2.0
    def kl(a: np.ndarray, b: np.ndarray) -> float:
        mask = a > 0
        return float(np.sum(a[mask] * np.log(a[mask] / b[mask])))
    return 0.5 * kl(p, m) + 0.5 * kl(q, m)


def lda_rank(
    query: Query, model: LdaModel, objects_in_range: list[GeoTextualObject]
) -> list[tuple[str, float]]:
    """Rank by negative Jensen-Shannon divergence between the folded-in query
    distribution and each document's distribution."""
    theta_q = model.fold_in(tokenize(query.text))
    uniform = np.full(model.n_topics, 1.0 / model.n_topics)
    scored = []
    for obj in objects_in_range:
        theta_d = model.theta.get(obj.id, uniform)
        scored.append((obj.id, -jensen_shannon(theta_q, theta_d)))
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored
