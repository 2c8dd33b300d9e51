import json
import random

import httpx
import numpy as np
import pytest

from semask.providers import (
    AuthError,
    ChatMessage,
    LocalDeterministicEmbedder,
    MockRefinementChat,
    MockSummarizerChat,
    ProviderConfig,
    ProviderError,
    RemoteChat,
    RemoteEmbedder,
    deterministic_embed,
    is_unit_or_zero,
    load_stopwords,
    mock_refinement_response,
)
from semask.providers.local import EchoChat, FixedChat
from semask.textutil import parse_quoted_list, render_quoted_list, tokenize


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.dot(a, b))


class TestTextUtil:
    def test_tokenize_lowercases_and_splits(self):
        assert tokenize("Coffee, Espresso-Cafe!") == ["coffee", "espresso", "cafe"]

    def test_quoted_list_round_trip(self):
        items = ["plain", "it's great", "has ] bracket", "quotes ''doubled''", ""]
        assert parse_quoted_list(render_quoted_list(items)) == items

    def test_quoted_list_rejects_garbage(self):
        with pytest.raises(ValueError):
            parse_quoted_list("not a list")


class TestDeterministicEmbed:
    def test_dimension_and_unit_norm(self):
        v = deterministic_embed("coffee espresso cafe", dim=64)
        assert v.shape == (64,)
        assert is_unit_or_zero(v)

    def test_empty_text_is_zero_vector(self):
        v = deterministic_embed("   ", dim=32)
        assert not v.any()

    def test_deterministic(self):
        a = deterministic_embed("same text twice", dim=128)
        b = deterministic_embed("same text twice", dim=128)
        assert np.array_equal(a, b)

    def test_single_token_single_bucket(self):
        v = deterministic_embed("espresso", dim=8)
        nonzero = np.nonzero(v)[0]
        assert len(nonzero) == 1
        assert abs(v[nonzero[0]]) == pytest.approx(1.0)

    def test_bag_of_tokens_order_invariance(self):
        a = deterministic_embed("alpha beta gamma", dim=64)
        b = deterministic_embed("gamma alpha beta", dim=64)
        assert np.array_equal(a, b)

    def test_shared_vocabulary_raises_cosine(self):
        a = deterministic_embed("coffee espresso cafe", dim=256)
        b = deterministic_embed("coffee latte", dim=256)
        c = deterministic_embed("tire repair brake", dim=256)
        assert cosine(a, b) > cosine(a, c)

    def test_min_dimension_enforced(self):
        with pytest.raises(ValueError):
            deterministic_embed("x", dim=4)

    def test_disjoint_vocab_collision_rate_below_ten_percent(self):
        # Monte-Carlo: random disjoint token sets, dim 1024, <= 10 tokens each.
        rng = random.Random(7)
        collisions = 0
        trials = 200
        for _ in range(trials):
            pool = [f"tok{rng.randrange(1_000_000)}" for _ in range(20)]
            left = " ".join(pool[:10])
            right = " ".join(pool[10:])
            sim = cosine(
                deterministic_embed(left, dim=1024), deterministic_embed(right, dim=1024)
            )
            if sim != 0.0:
                collisions += 1
        assert collisions / trials < 0.10


class TestLocalEmbedder:
    def test_configured_dim_respected(self):
        emb = LocalDeterministicEmbedder(dim=48)
        assert emb.embed("anything").shape == (48,)


class TestStopwords:
    def test_fifty_function_words(self):
        words = load_stopwords()
        assert len(words) == 50
        assert "the" in words and "of" in words


class TestMockChats:
    def test_echo_returns_last_message(self):
        chat = EchoChat()
        out = chat.chat([ChatMessage("system", "sys"), ChatMessage("user", "payload")])
        assert out == "payload"

    def test_fixed_is_deterministic(self):
        chat = FixedChat("always this")
        msg = [ChatMessage("user", "whatever")]
        assert chat.chat(msg) == chat.chat(msg) == "always this"

    def test_summarizer_includes_content_word(self):
        tips = ["Great espresso and pastries", "espresso was smooth", "cozy seating"]
        prompt = "Now it is your turn: " + render_quoted_list(tips)
        out = MockSummarizerChat().chat([ChatMessage("user", prompt)])
        assert "\n" not in out
        tip_tokens = set(tokenize(" ".join(tips)))
        assert any(tok in tip_tokens for tok in tokenize(out))
        assert "espresso" in out  # most frequent content token


def refinement_prompt(candidates: list[dict], query: str) -> str:
    return f"Information: {json.dumps(candidates)}\n\nQuery: {query}"


class TestMockRefinement:
    def test_no_overlap_returns_empty_dict(self):
        prompt = refinement_prompt([{"name": "A", "categories": ["golf"]}], "sushi dinner")
        assert mock_refinement_response(prompt) == "{}"

    def test_scores_and_order(self):
        cands = [
            {"name": "A", "text": "sushi and bar menu"},
            {"name": "B", "text": "a quiet bar"},
        ]
        out = json.loads(mock_refinement_response(refinement_prompt(cands, "sushi bar")))
        assert list(out.items()) == [
            ("A", "matched 2 query terms"),
            ("B", "matched 1 query terms"),
        ]

    def test_ties_preserve_input_order(self):
        cands = [
            {"name": "First", "text": "pizza"},
            {"name": "Second", "text": "pizza"},
        ]
        out = json.loads(mock_refinement_response(refinement_prompt(cands, "pizza")))
        assert list(out.keys()) == ["First", "Second"]

    def test_unparseable_information_block(self):
        assert mock_refinement_response("Information: [not json\n\nQuery: x") == "{}"
        assert mock_refinement_response("no blocks at all") == "{}"

    def test_stopword_only_query_matches_nothing(self):
        cands = [{"name": "A", "text": "the and of"}]
        out = mock_refinement_response(refinement_prompt(cands, "the of and"))
        assert out == "{}"

    def test_chat_wrapper_is_deterministic(self):
        prompt = refinement_prompt([{"name": "A", "text": "sushi"}], "sushi")
        chat = MockRefinementChat()
        msg = [ChatMessage("user", prompt)]
        assert chat.chat(msg) == chat.chat(msg)


def make_transport(handler):
    return httpx.MockTransport(handler)


class TestRemoteProviders:
    def config(self, **kw):
        defaults = dict(base_url="http://testserver/v1", max_retries=1, backoff_s=0.0)
        defaults.update(kw)
        return ProviderConfig(**defaults)

    def test_chat_success(self):
        def handler(request):
            body = json.loads(request.content)
            assert body["model"] == "gpt-4o"
            assert body["temperature"] == 0.0
            return httpx.Response(
                200, json={"choices": [{"message": {"content": "hello"}}]}
            )

        chat = RemoteChat(self.config(), transport=make_transport(handler))
        assert chat.chat([ChatMessage("user", "hi")]) == "hello"

    def test_auth_error_after_retries(self, monkeypatch):
        monkeypatch.setenv("SEMASK_API_KEY", "bad-key")
        calls = []

        def handler(request):
            calls.append(request.headers.get("authorization"))
            return httpx.Response(401, json={"error": "invalid key"})

        chat = RemoteChat(self.config(max_retries=2), transport=make_transport(handler))
        with pytest.raises(AuthError):
            chat.chat([ChatMessage("user", "hi")])
        assert len(calls) == 3  # initial + 2 retries
        assert all(c == "Bearer bad-key" for c in calls)

    def test_retry_then_success(self):
        attempts = []

        def handler(request):
            attempts.append(1)
            if len(attempts) < 2:
                return httpx.Response(500)
            return httpx.Response(200, json={"choices": [{"message": {"content": "ok"}}]})

        chat = RemoteChat(self.config(max_retries=3), transport=make_transport(handler))
        assert chat.chat([ChatMessage("user", "hi")]) == "ok"
        assert len(attempts) == 2

    def test_embed_normalizes_and_checks_dim(self):
        def handler(request):
            return httpx.Response(200, json={"data": [{"embedding": [3.0, 4.0] + [0.0] * 14}]})

        emb = RemoteEmbedder(self.config(embed_dim=16), transport=make_transport(handler))
        vec = emb.embed("text")
        assert vec.shape == (16,)
        assert is_unit_or_zero(vec)
        assert vec[0] == pytest.approx(0.6)

    def test_embed_dim_mismatch_is_error(self):
        def handler(request):
            return httpx.Response(200, json={"data": [{"embedding": [1.0, 0.0]}]})

        emb = RemoteEmbedder(self.config(embed_dim=16), transport=make_transport(handler))
        with pytest.raises(ProviderError):
            emb.embed("text")

    def test_embed_blank_text_short_circuits(self):
        def handler(request):  # pragma: no cover - must never be called
            raise AssertionError("no HTTP call expected for blank text")

        emb = RemoteEmbedder(self.config(embed_dim=16), transport=make_transport(handler))
        assert not emb.embed("   ").any()

    def test_key_not_sent_when_unset(self, monkeypatch):
        monkeypatch.delenv("SEMASK_API_KEY", raising=False)
        seen = {}

        def handler(request):
            seen["auth"] = request.headers.get("authorization")
            return httpx.Response(200, json={"choices": [{"message": {"content": "x"}}]})

        chat = RemoteChat(self.config(), transport=make_transport(handler))
        chat.chat([ChatMessage("user", "hi")])
        assert seen["auth"] is None


class TestProviderConfig:
    def test_env_overrides(self, monkeypatch):
        monkeypatch.setenv("SEMASK_BASE_URL", "http://alt/v1")
        monkeypatch.setenv("SEMASK_CHAT_MODEL", "other-model")
        monkeypatch.setenv("SEMASK_EMBED_DIM", "64")
        cfg = ProviderConfig.from_env()
        assert cfg.base_url == "http://alt/v1"
        assert cfg.chat_model == "other-model"
        assert cfg.embed_dim == 64

    def test_invalid_timeout_rejected(self):
        with pytest.raises(ValueError):
            ProviderConfig(timeout_s=0)
