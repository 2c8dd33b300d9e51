"""Provider interfaces, configuration, and typed errors."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Protocol, runtime_checkable

import numpy as np

DEFAULT_EMBED_DIM = 1536

ENV_API_KEY = "SEMASK_API_KEY"
ENV_BASE_URL = "SEMASK_BASE_URL"
ENV_CHAT_MODEL = "SEMASK_CHAT_MODEL"
ENV_EMBED_MODEL = "SEMASK_EMBED_MODEL"
ENV_EMBED_DIM = "SEMASK_EMBED_DIM"


class ProviderError(Exception):
    """A provider call failed after exhausting retries."""


class AuthError(ProviderError):
    """The provider rejected the configured credentials."""


@dataclass(frozen=True)
class ChatMessage:
    role: str  # "system" or "user"
    content: str

    def __post_init__(self) -> None:
        if self.role not in ("system", "user"):
            raise ValueError(f"unsupported role {self.role!r}")
        if not self.content:
            raise ValueError("message content must be non-empty")


@dataclass(frozen=True)
class ProviderConfig:
    """Connection settings for OpenAI-compatible chat/embedding endpoints.

    Model names are configuration, not code: swapping the chat model is how
    alternative refinement models are selected.
    """

    base_url: str = "https://api.openai.com/v1"
    api_key_env: str = ENV_API_KEY
    chat_model: str = "gpt-4o"
    embed_model: str = "text-embedding-3-small"
    embed_dim: int = DEFAULT_EMBED_DIM
    timeout_s: float = 30.0
    max_retries: int = 3
    backoff_s: float = 0.5
    temperature: float = 0.0
    max_in_flight: int = 8

    def __post_init__(self) -> None:
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")

    @classmethod
    def from_env(cls, **overrides) -> "ProviderConfig":
        env = os.environ
        fields: dict = {}
        if env.get(ENV_BASE_URL):
            fields["base_url"] = env[ENV_BASE_URL]
        if env.get(ENV_CHAT_MODEL):
            fields["chat_model"] = env[ENV_CHAT_MODEL]
        if env.get(ENV_EMBED_MODEL):
            fields["embed_model"] = env[ENV_EMBED_MODEL]
        if env.get(ENV_EMBED_DIM):
            fields["embed_dim"] = int(env[ENV_EMBED_DIM])
        fields.update(overrides)
        return cls(**fields)

    @property
    def api_key(self) -> str | None:
        """Key read from the configured environment variable; never logged."""
        return os.environ.get(self.api_key_env) or None


@runtime_checkable
class ChatProvider(Protocol):
    def chat(self, messages: list[ChatMessage]) -> str: ...


@runtime_checkable
class EmbeddingProvider(Protocol):
    dim: int

    def embed(self, text: str) -> np.ndarray: ...


def is_unit_or_zero(vec: np.ndarray, tol: float = 1e-6) -> bool:
    """Embedding invariant: L2 norm is 1 (within tol) or exactly zero."""
    norm = float(np.linalg.norm(vec))
    return norm == 0.0 or abs(norm - 1.0) <= tol
