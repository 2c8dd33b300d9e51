"""Remote chat/embedding clients speaking the OpenAI-compatible JSON shape.

Wire format (POST, JSON body, optional ``Authorization: Bearer <key>``):

  {base_url}/chat/completions
      request:  {"model": ..., "messages": [{"role": ..., "content": ...}],
                 "temperature": ...}
      response: {"choices": [{"message": {"content": "..."}}]}

  {base_url}/embeddings
      request:  {"model": ..., "input": "..."}
      response: {"data": [{"embedding": [floats]}]}

Failures are retried ``max_retries`` times with exponential backoff and then
surfaced as typed errors. The API key is read from the configured environment
variable and never logged.
"""

from __future__ import annotations

import logging
import threading
import time

import httpx
import numpy as np

from .base import AuthError, ChatMessage, ProviderConfig, ProviderError

logger = logging.getLogger(__name__)


class _RemoteClient:
    def __init__(self, config: ProviderConfig, transport: httpx.BaseTransport | None = None):
        self.config = config
        self._semaphore = threading.Semaphore(config.max_in_flight)
        self._client = httpx.Client(
            base_url=config.base_url,
            timeout=config.timeout_s,
            transport=transport,
        )

    def _headers(self) -> dict[str, str]:
        key = self.config.api_key
        if key:
            return {"Authorization": f"Bearer {key}"}
        return {}

    def _post(self, path: str, payload: dict) -> dict:
        attempts = self.config.max_retries + 1
        last_error: Exception | None = None
        for attempt in range(attempts):
            if attempt > 0:
                time.sleep(self.config.backoff_s * (2 ** (attempt - 1)))
            try:
                with self._semaphore:
                    response = self._client.post(path, json=payload, headers=self._headers())
            except httpx.HTTPError as exc:
                last_error = ProviderError(f"request to {path} failed: {exc}")
                logger.warning("provider call failed (attempt %d/%d): %s", attempt + 1, attempts, exc)
                continue
            if response.status_code in (401, 403):
                last_error = AuthError(f"provider rejected credentials (HTTP {response.status_code})")
                logger.warning("provider auth failure (attempt %d/%d)", attempt + 1, attempts)
                continue
            if response.status_code >= 400:
                last_error = ProviderError(f"provider returned HTTP {response.status_code}")
                logger.warning(
                    "provider error HTTP %d (attempt %d/%d)",
                    response.status_code, attempt + 1, attempts,
                )
                continue
            try:
                return response.json()
            except ValueError as exc:
                last_error = ProviderError(f"provider returned non-JSON body: {exc}")
        assert last_error is not None
        raise last_error

    def close(self) -> None:
        self._client.close()


class RemoteChat(_RemoteClient):
    def chat(self, messages: list[ChatMessage]) -> str:
        if not messages:
            raise ValueError("at least one message required")
        payload = {
            "model": self.config.chat_model,
            "messages": [{"role": m.role, "content": m.content} for m in messages],
            "temperature": self.config.temperature,
        }
        body = self._post("/chat/completions", payload)
        try:
            return body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed chat response: {exc}") from exc


class RemoteEmbedder(_RemoteClient):
    @property
    def dim(self) -> int:
        return self.config.embed_dim

    def embed(self, text: str) -> np.ndarray:
        if not text.strip():
            return np.zeros(self.config.embed_dim, dtype=np.float32)
        payload = {"model": self.config.embed_model, "input": text}
        body = self._post("/embeddings", payload)
        try:
            values = body["data"][0]["embedding"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed embedding response: {exc}") from exc
        vec = np.asarray(values, dtype=np.float64)
        if vec.shape != (self.config.embed_dim,):
            raise ProviderError(
                f"embedding dimension {vec.shape} does not match configured {self.config.embed_dim}"
            )
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            return np.zeros(self.config.embed_dim, dtype=np.float32)
        # Normalized at the provider boundary: cosine reduces to dot product downstream.
        return (vec / norm).astype(np.float32)
