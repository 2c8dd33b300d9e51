"""Chat and embedding providers: remote HTTP clients plus deterministic local mocks."""

from .base import (
    AuthError,
    ChatMessage,
    ChatProvider,
    DEFAULT_EMBED_DIM,
    EmbeddingProvider,
    ProviderConfig,
    ProviderError,
    is_unit_or_zero,
)
from .local import (
    EchoChat,
    FixedChat,
    LocalDeterministicEmbedder,
    MockRefinementChat,
    MockSummarizerChat,
    deterministic_embed,
    load_stopwords,
    mock_refinement_response,
)
from .remote import RemoteChat, RemoteEmbedder

__all__ = [
    "AuthError",
    "ChatMessage",
    "ChatProvider",
    "DEFAULT_EMBED_DIM",
    "EchoChat",
    "EmbeddingProvider",
    "FixedChat",
    "LocalDeterministicEmbedder",
    "MockRefinementChat",
    "MockSummarizerChat",
    "ProviderConfig",
    "ProviderError",
    "RemoteChat",
    "RemoteEmbedder",
    "deterministic_embed",
    "is_unit_or_zero",
    "load_stopwords",
    "mock_refinement_response",
]
