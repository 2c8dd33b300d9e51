import math
import random
import re

import numpy as np
import pytest

from semask.baselines import (
    LdaModel,
    TfIdfModel,
    document_text,
    jensen_shannon,
    lda_fit,
    lda_rank,
    tfidf_rank,
)
from semask.geo import GeoPoint, GeoRect, GeoTextualObject, Query, Text
from semask.textutil import tokenize

RECT = GeoRect(35.9, 36.3, -87.0, -86.6)


def doc_obj(obj_id: str, text: str, lat: float = 36.1, lon: float = -86.8) -> GeoTextualObject:
    return GeoTextualObject(
        id=obj_id,
        name=obj_id,
        location=GeoPoint(lat, lon),
        attributes={"blurb": Text(text)},
    )


def query_of(text: str, k: int = 10) -> Query:
    return Query(RECT, text, k=k)


# Independent oracle: a from-scratch quadratic tf-idf ranker sharing no code
# with the implementation under test.
def naive_tfidf(query_text: str, docs: dict[str, str]):
    def toks(s):
        return re.findall(r"[^\W_]+", s.lower())

    n = len(docs)
    df: dict[str, int] = {}
    for text in docs.values():
        for t in set(toks(text)):
            df[t] = df.get(t, 0) + 1

    def vec(text):
        counts: dict[str, int] = {}
        for t in toks(text):
            if t in df:
                counts[t] = counts.get(t, 0) + 1
        return {t: c * (math.log((1 + n) / (1 + df[t])) + 1.0) for t, c in counts.items()}

    qv = vec(query_text)
    scores: dict[str, float] = {}
    for doc_id, text in docs.items():
        dv = vec(text)
        dot = sum(w * dv.get(t, 0.0) for t, w in qv.items())
        if dot == 0.0:
            scores[doc_id] = 0.0
            continue
        nq = math.sqrt(sum(w * w for w in qv.values()))
        nd = math.sqrt(sum(w * w for w in dv.values()))
        scores[doc_id] = dot / (nq * nd)
    order = sorted(docs, key=lambda i: (-scores[i], i))
    return order, scores


class TestTfIdf:
    def test_hand_computed_two_doc_example(self):
        objs = [doc_obj("d1", "coffee shop"), doc_obj("d2", "tire repair")]
        model = TfIdfModel.fit(objs)
        ranked = tfidf_rank(query_of("coffee"), model, objs)
        # Both d1 terms occur in one of two docs, so their idf is identical and
        # cosine reduces to 1/sqrt(2) exactly; d2 shares nothing with the query.
        assert ranked[0][0] == "d1"
        assert ranked[0][1] == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-9)
        assert ranked[1] == ("d2", 0.0)

    def test_disjoint_query_scores_all_zero_id_order(self):
        objs = [doc_obj("b", "tire repair"), doc_obj("a", "coffee shop")]
        model = TfIdfModel.fit(objs)
        ranked = tfidf_rank(query_of("sushi"), model, objs)
        assert ranked == [("a", 0.0), ("b", 0.0)]

    def test_matches_naive_oracle_on_random_corpora(self):
        vocab = ["coffee", "tire", "sushi", "bar", "wings", "book", "gym", "taco",
                 "salon", "repair", "fresh", "cozy", "cheap", "best", "night"]
        rng = random.Random(1234)
        for trial in range(100):
            n_docs = rng.randint(2, 12)
            docs = {
                f"doc{j:02d}": " ".join(rng.choices(vocab, k=rng.randint(3, 9)))
                for j in range(n_docs)
            }
            objs = [doc_obj(i, text) for i, text in docs.items()]
            query_text = " ".join(rng.choices(vocab, k=rng.randint(1, 4)))
            model = TfIdfModel.fit(objs)
            ranked = tfidf_rank(query_of(query_text), model, objs)
            expected_order, expected_scores = naive_tfidf(query_text, docs)
            assert [i for i, _ in ranked] == expected_order, f"trial {trial}"
            for obj_id, score in ranked:
                assert score == pytest.approx(expected_scores[obj_id], abs=1e-12)

    def test_duplicating_corpus_preserves_ranking(self):
        vocab = ["espresso", "brake", "roll", "pizza", "bench", "novel"]
        rng = random.Random(77)
        for _ in range(30):
            objs = [
                doc_obj(f"d{j}", " ".join(rng.choices(vocab, k=rng.randint(3, 7))))
                for j in range(6)
            ]
            clones = [doc_obj(f"clone-{o.id}", o.attributes["blurb"].value) for o in objs]
            query = query_of(" ".join(rng.choices(vocab, k=2)))
            base = tfidf_rank(query, TfIdfModel.fit(objs), objs)
            doubled = tfidf_rank(query, TfIdfModel.fit(objs + clones), objs)
            assert [i for i, _ in base] == [i for i, _ in doubled]

    def test_document_text_collects_text_summary_categories(self):
        from semask.geo import Category, Number

        obj = GeoTextualObject(
            id="x",
            name="X",
            location=GeoPoint(0, 0),
            attributes={
                "name": Text("Mike's"),
                "stars": Number(4.0),
                "categories": Category(("Ice Cream", "Fast Food")),
            },
            tip_summary="creamy treats",
        )
        text = document_text(obj)
        assert "Mike's" in text and "Ice Cream" in text and "creamy treats" in text
        assert "4.0" not in text

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            TfIdfModel.fit([])


CLUSTER_A = ["espresso", "latte", "roast", "bean", "crema", "barista", "mocha", "drip"]
CLUSTER_B = ["piston", "brake", "clutch", "gasket", "torque", "axle", "camshaft", "rotor"]


def cluster_corpus(rng: random.Random, per_cluster: int = 40):
    objs = []
    for j in range(per_cluster):
        objs.append(doc_obj(f"a{j:02d}", " ".join(rng.choices(CLUSTER_A, k=rng.randint(8, 14)))))
    for j in range(per_cluster):
        objs.append(doc_obj(f"b{j:02d}", " ".join(rng.choices(CLUSTER_B, k=rng.randint(8, 14)))))
    return objs


class TestLda:
    def fit_small(self, objs, seed=0, iterations=120):
        return lda_fit(objs, n_topics=2, iterations=iterations, rng_seed=seed)

    def test_seeded_determinism(self):
        objs = cluster_corpus(random.Random(5), per_cluster=15)
        m1 = self.fit_small(objs, seed=11, iterations=40)
        m2 = self.fit_small(objs, seed=11, iterations=40)
        for obj_id in m1.theta:
            assert np.array_equal(m1.theta[obj_id], m2.theta[obj_id])

    def test_theta_rows_normalized(self):
        objs = cluster_corpus(random.Random(6), per_cluster=10)
        model = self.fit_small(objs, iterations=30)
        for row in model.theta.values():
            assert row.sum() == pytest.approx(1.0, abs=1e-9)
            assert (row >= 0).all()

    def test_two_cluster_separation(self):
        objs = cluster_corpus(random.Random(7))
        model = self.fit_small(objs, seed=3)
        thetas = model.theta

        def mean_cos(ids1, ids2):
            sims = []
            for i in ids1:
                for j in ids2:
                    if i == j:
                        continue
                    a, b = thetas[i], thetas[j]
                    sims.append(float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b))))
            return sum(sims) / len(sims)

        a_ids = [o.id for o in objs if o.id.startswith("a")]
        b_ids = [o.id for o in objs if o.id.startswith("b")]
        within = (mean_cos(a_ids, a_ids) + mean_cos(b_ids, b_ids)) / 2
        cross = mean_cos(a_ids, b_ids)
        assert within > cross

    def test_query_identical_to_mixed_document_ranks_it_first(self):
        rng = random.Random(8)
        objs = cluster_corpus(rng, per_cluster=25)
        mixed_text = " ".join(CLUSTER_A[:5] + CLUSTER_B[:5] + CLUSTER_A[5:8] + CLUSTER_B[5:8])
        objs.append(doc_obj("mixed-doc", mixed_text))
        model = self.fit_small(objs, seed=2)
        ranked = lda_rank(query_of(mixed_text), model, objs)
        assert ranked[0][0] == "mixed-doc"

    def test_out_of_vocabulary_query_uniform_and_finite(self):
        objs = cluster_corpus(random.Random(9), per_cluster=8)
        model = self.fit_small(objs, iterations=30)
        theta_q = model.fold_in(tokenize("zzz qqq www"))
        assert np.allclose(theta_q, 0.5)
        ranked = lda_rank(query_of("zzz qqq www"), model, objs)
        assert all(math.isfinite(score) for _, score in ranked)

    def test_unknown_object_gets_uniform_theta(self):
        objs = cluster_corpus(random.Random(10), per_cluster=8)
        model = self.fit_small(objs, iterations=30)
        stranger = doc_obj("stranger", "espresso latte")
        ranked = lda_rank(query_of("espresso"), model, objs + [stranger])
        assert "stranger" in [i for i, _ in ranked]

    def test_empty_documents_dropped_with_warning(self, caplog):
        objs = cluster_corpus(random.Random(11), per_cluster=5)
        objs.append(doc_obj("empty-doc", "   "))
        with caplog.at_level("WARNING"):
            model = self.fit_small(objs, iterations=10)
        assert "empty-doc" not in model.theta
        assert any("empty-doc" in r.message for r in caplog.records)

    def test_n_topics_validated(self):
        with pytest.raises(ValueError):
            lda_fit([doc_obj("a", "x")], n_topics=1)


class TestJensenShannon:
    def test_symmetry(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            p = rng.dirichlet(np.ones(5))
            q = rng.dirichlet(np.ones(5))
            assert jensen_shannon(p, q) == pytest.approx(jensen_shannon(q, p), abs=1e-12)

    def test_identity_is_zero(self):
        p = np.array([0.2, 0.3, 0.5])
        assert jensen_shannon(p, p) == pytest.approx(0.0, abs=1e-15)

    def test_bounded_by_ln_two(self):
        p = np.array([1.0, 0.0])
        q = np.array([0.0, 1.0])
        assert jensen_shannon(p, q) == pytest.approx(math.log(2.0), abs=1e-12)

    def test_lda_rank_score_symmetric_in_arguments(self):
        # -JS(p, q) == -JS(q, p): swapping theta arguments cannot change a score.
        rng = np.random.default_rng(4)
        p = rng.dirichlet(np.ones(3))
        q = rng.dirichlet(np.ones(3))
        assert -jensen_shannon(p, q) == pytest.approx(-jensen_shannon(q, p), abs=1e-12)
