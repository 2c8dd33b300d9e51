"""Shared text helpers: tokenization, hashing, and quoted-list serialization."""

from __future__ import annotations

import re

# Unicode alphanumerics, underscore excluded: "split on non-alphanumerics".
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

_FNV64_OFFSET = 0xCBF29CE484222325
_FNV64_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def tokenize(text: str) -> list[str]:
    """Lowercase tokens split on non-alphanumeric characters."""
    return _TOKEN_RE.findall(text.lower())


def fnv1a_64(data: bytes) -> int:
    """64-bit FNV-1a hash."""
    h = _FNV64_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV64_PRIME) & _MASK64
    return h


def render_quoted_list(items: list[str] | tuple[str, ...]) -> str:
    """Bracketed, comma-separated list with single-quoted items.

    Internal single quotes are doubled, so the rendering is unambiguous and
    ``parse_quoted_list`` recovers the original items exactly.
    """
    return "[" + ", ".join("'" + item.replace("'", "''") + "'" for item in items) + "]"


def parse_quoted_list(text: str) -> list[str]:
    """Inverse of ``render_quoted_list``. Raises ValueError on malformed input."""
    s = text.strip()
    if not (s.startswith("[") and s.endswith("]")):
        raise ValueError("not a bracketed list")
    body = s[1:-1]
    items: list[str] = []
    i = 0
    n = len(body)
    while i < n:
        while i < n and body[i] in " ,":
            i += 1
        if i >= n:
            break
        if body[i] != "'":
            raise ValueError(f"expected quote at offset {i}")
        i += 1
        chars: list[str] = []
        while True:
            if i >= n:
                raise ValueError("unterminated quoted item")
            c = body[i]
            if c == "'":
                if i + 1 < n and body[i + 1] == "'":  # doubled quote = literal quote
                    chars.append("'")
                    i += 2
                    continue
                i += 1
                break
            chars.append(c)
            i += 1
        items.append("".join(chars))
    return items
