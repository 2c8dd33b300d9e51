"""In-process HNSW approximate k-nearest-neighbor index over embeddings.

Hierarchical navigable small-world graph (Malkov & Yashunin style): every
vector lives at layer 0, a geometrically-decaying fraction also lives at
higher layers that act as long-range entry points for greedy descent.

Vectors are expected unit-norm (or all-zeros), so cosine similarity is the
plain dot product. Similarity ordering is (similarity desc, id asc)
everywhere, which makes seeded builds reproducible bit-for-bit.

Filtered search: small allowed sets (below ``exact_scan_threshold``) are
answered by an exact scan, larger ones by graph traversal that navigates
through all nodes but only collects allowed ones, with ef inflated by the
allowed fraction (capped at 4x ef_search).
"""

from __future__ import annotations

import heapq
import json
import math
import random
from dataclasses import dataclass, asdict
from typing import Callable, Iterable

import numpy as np


@dataclass(frozen=True)
class HnswParams:
    """Graph construction/search knobs. mL defaults to 1/ln(M)."""

    M: int = 16
    ef_construction: int = 200
    ef_search: int = 128
    rng_seed: int = 0
    exact_scan_threshold: int = 1000

    def __post_init__(self) -> None:
        if self.M < 2:
            raise ValueError("M must be >= 2")
        if self.ef_construction < 1 or self.ef_search < 1:
            raise ValueError("ef parameters must be >= 1")

    @property
    def mL(self) -> float:
        return 1.0 / math.log(self.M)


@dataclass(frozen=True)
class ScoredHit:
    id: str
    similarity: float


SNAPSHOT_VERSION = 1

AllowArg = Iterable[str] | Callable[[str], bool] | None


class HnswIndex:
    """Build-then-query index: single writer during construction, then
    arbitrarily many concurrent readers. Deletions are not supported."""

    def __init__(self, dim: int, params: HnswParams | None = None):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self.params = params or HnswParams()
        self._rng = random.Random(self.params.rng_seed)
        self._ids: list[str] = []
        self._id_to_idx: dict[str, int] = {}
        self._levels: list[int] = []
        # _graph[idx][layer] -> list of neighbor idxs
        self._graph: list[list[list[int]]] = []
        self._entry: int | None = None
        self._max_level: int = -1
        self._capacity = 1024
        self._vectors = np.zeros((self._capacity, dim), dtype=np.float32)

    def __len__(self) -> int:
        return len(self._ids)

    @property
    def ids(self) -> list[str]:
        return list(self._ids)

    # -- construction ---------------------------------------------------

    def insert(self, obj_id: str, vector: np.ndarray) -> None:
        if obj_id in self._id_to_idx:
            raise ValueError(f"duplicate id {obj_id!r}")
        vec = np.asarray(vector, dtype=np.float32)
        if vec.shape != (self.dim,):
            raise ValueError(f"vector shape {vec.shape} does not match index dim {self.dim}")

        idx = len(self._ids)
        if idx >= self._capacity:
            self._grow()
        self._vectors[idx] = vec
        self._ids.append(obj_id)
        self._id_to_idx[obj_id] = idx

        level = self._random_level()
        self._levels.append(level)
        self._graph.append([[] for _ in range(level + 1)])

        if self._entry is None:
            self._entry = idx
            self._max_level = level
            return

        q = self._vectors[idx]
        ep = [self._entry]
        # greedy descent through layers above the new node's level
        for layer in range(self._max_level, level, -1):
            ep = [self._closest(q, ep, layer)]

        m = self.params.M
        for layer in range(min(level, self._max_level), -1, -1):
            found = self._search_layer(q, ep, self.params.ef_construction, layer, allowed=None)
            neighbors = self._select_neighbors(q, found, m)
            m_max = 2 * m if layer == 0 else m
            for n in neighbors:
                self._graph[idx][layer].append(n)
                self._graph[n][layer].append(idx)
                if len(self._graph[n][layer]) > m_max:
                    self._shrink(n, layer, m_max)
            ep = [i for _, i in found]

        if level > self._max_level:
            self._entry = idx
            self._max_level = level

    def _grow(self) -> None:
        self._capacity = int(self._capacity * 1.5) + 1
        grown = np.zeros((self._capacity, self.dim), dtype=np.float32)
        grown[: len(self._ids)] = self._vectors[: len(self._ids)]
        self._vectors = grown

    def _random_level(self) -> int:
        u = 1.0 - self._rng.random()  # (0, 1], avoids log(0)
        return int(-math.log(u) * self.params.mL)

    def _dists(self, q: np.ndarray, idxs: list[int]) -> np.ndarray:
        return 1.0 - self._vectors[idxs] @ q

    def _closest(self, q: np.ndarray, eps: list[int], layer: int) -> int:
        """Greedy ef=1 walk at one layer; returns the local minimum."""
        dists = self._dists(q, eps)
        order = int(np.argmin(dists))
        best, best_d = eps[order], float(dists[order])
        improved = True
        visited = set(eps)
        while improved:
            improved = False
            fresh = [n for n in self._graph[best][layer] if n not in visited]
            if not fresh:
                break
            visited.update(fresh)
            nd = self._dists(q, fresh)
            pos = int(np.argmin(nd))
            if float(nd[pos]) < best_d:
                best, best_d = fresh[pos], float(nd[pos])
                improved = True
        return best

    def _search_layer(
        self,
        q: np.ndarray,
        eps: list[int],
        ef: int,
        layer: int,
        allowed: set[int] | None,
    ) -> list[tuple[float, int]]:
        """Beam search at one layer. Returns up to ef (dist, idx) pairs.

        Navigation considers every node; only allowed nodes enter the result
        heap (post-filter during traversal).
        """
        visited = set(eps)
        dists = self._dists(q, eps)
        candidates: list[tuple[float, int]] = [(float(d), i) for d, i in zip(dists, eps)]
        heapq.heapify(candidates)
        results: list[tuple[float, int]] = [
            (-float(d), i) for d, i in zip(dists, eps) if allowed is None or i in allowed
        ]
        heapq.heapify(results)
        while len(results) > ef:
            heapq.heappop(results)

        while candidates:
            d, current = heapq.heappop(candidates)
            if len(results) >= ef and d > -results[0][0]:
                break
            fresh = [n for n in self._graph[current][layer] if n not in visited]
            if not fresh:
                continue
            visited.update(fresh)
            nd = self._dists(q, fresh)
            full = len(results) >= ef
            bound = -results[0][0] if results else math.inf
            for dist_n, n in zip(nd, fresh):
                dist_n = float(dist_n)
                if full and dist_n >= bound:
                    continue
                heapq.heappush(candidates, (dist_n, n))
                if allowed is None or n in allowed:
                    heapq.heappush(results, (-dist_n, n))
                    if len(results) > ef:
                        heapq.heappop(results)
                    full = len(results) >= ef
                    bound = -results[0][0] if results else math.inf
        return [(-neg, i) for neg, i in results]

    def _select_neighbors(
        self, q: np.ndarray, candidates: list[tuple[float, int]], m: int
    ) -> list[int]:
        """Diversity-aware neighbor selection (the Malkov-Yashunin heuristic).

        A candidate is kept when it is closer to q than to every neighbor
        already selected; pruned candidates back-fill remaining slots.
        """
        if len(candidates) <= m:
            return [i for _, i in sorted(candidates, key=lambda p: (p[0], p[1]))]
        selected: list[int] = []
        pruned: list[tuple[float, int]] = []
        for d, idx in sorted(candidates, key=lambda p: (p[0], p[1])):
            if len(selected) == m:
                break
            if selected:
                to_selected = float(np.min(self._dists(self._vectors[idx], selected)))
                if to_selected < d:
                    pruned.append((d, idx))
                    continue
            selected.append(idx)
        for d, idx in pruned:
            if len(selected) == m:
                break
            selected.append(idx)
        return selected

    def _shrink(self, idx: int, layer: int, m_max: int) -> None:
        neighbors = self._graph[idx][layer]
        dists = self._dists(self._vectors[idx], neighbors)
        self._graph[idx][layer] = self._select_neighbors(
            self._vectors[idx], list(zip(map(float, dists), neighbors)), m_max
        )

    # -- queries ----------------------------------------------------------

    def _resolve_allow(self, allow: AllowArg) -> set[int] | None:
        if allow is None:
            return None
        if callable(allow):
            return {i for i, obj_id in enumerate(self._ids) if allow(obj_id)}
        return {self._id_to_idx[obj_id] for obj_id in allow if obj_id in self._id_to_idx}

    def _exact(self, q: np.ndarray, k: int, idxs: list[int]) -> list[ScoredHit]:
        if not idxs:
            return []
        sims = self._vectors[idxs] @ q
        hits = [ScoredHit(self._ids[i], float(s)) for i, s in zip(idxs, sims)]
        hits.sort(key=lambda h: (-h.similarity, h.id))
        return hits[:k]

    def brute_force_knn(self, query: np.ndarray, k: int, allow: AllowArg = None) -> list[ScoredHit]:
        """Exact top-k by cosine over the allowed ids; the test oracle."""
        if k < 1:
            raise ValueError("k must be >= 1")
        q = np.asarray(query, dtype=np.float32)
        allowed = self._resolve_allow(allow)
        idxs = list(range(len(self._ids))) if allowed is None else sorted(allowed)
        return self._exact(q, k, idxs)

    def knn(self, query: np.ndarray, k: int, allow: AllowArg = None) -> list[ScoredHit]:
        """Approximate top-k, exact whenever the allowed set is small or k
        covers it entirely."""
        if k < 1:
            raise ValueError("k must be >= 1")
        if not self._ids:
            return []
        q = np.asarray(query, dtype=np.float32)
        allowed = self._resolve_allow(allow)
        n_allowed = len(self._ids) if allowed is None else len(allowed)
        if n_allowed == 0:
            return []
        if n_allowed < self.params.exact_scan_threshold or k >= n_allowed:
            idxs = list(range(len(self._ids))) if allowed is None else sorted(allowed)
            return self._exact(q, k, idxs)

        ef = max(self.params.ef_search, k)
        if allowed is not None:
            fraction = n_allowed / len(self._ids)
            ef = min(math.ceil(ef / fraction), 4 * self.params.ef_search)
            ef = max(ef, k)

        assert self._entry is not None
        ep = [self._entry]
        for layer in range(self._max_level, 0, -1):
            ep = [self._closest(q, ep, layer)]
        found = self._search_layer(q, ep, ef, 0, allowed)
        hits = [ScoredHit(self._ids[i], 1.0 - d) for d, i in found]
        hits.sort(key=lambda h: (-h.similarity, h.id))
        return hits[:k]

    # -- introspection and persistence -------------------------------------

    def reachable_from_entry(self, layer: int = 0) -> int:
        """Number of nodes reachable from the entry point at a layer."""
        if self._entry is None:
            return 0
        seen = {self._entry}
        frontier = [self._entry]
        while frontier:
            nxt = []
            for idx in frontier:
                if layer < len(self._graph[idx]):
                    for n in self._graph[idx][layer]:
                        if n not in seen:
                            seen.add(n)
                            nxt.append(n)
            frontier = nxt
        return len(seen)

    def save(self, path: str) -> None:
        """Snapshot: numpy archive holding the vectors plus a JSON header
        (version tag, params, ids, levels, graph edges)."""
        meta = {
            "version": SNAPSHOT_VERSION,
            "dim": self.dim,
            "params": asdict(self.params),
            "ids": self._ids,
            "levels": self._levels,
            "entry": self._entry,
            "max_level": self._max_level,
            "graph": self._graph,
        }
        with open(path, "wb") as fh:
            np.savez_compressed(
                fh,
                vectors=self._vectors[: len(self._ids)],
                meta=np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8),
            )

    @classmethod
    def load(cls, path: str) -> "HnswIndex":
        with np.load(path) as archive:
            meta = json.loads(bytes(archive["meta"]).decode("utf-8"))
            vectors = archive["vectors"]
        if meta.get("version") != SNAPSHOT_VERSION:
            raise ValueError(f"unsupported snapshot version {meta.get('version')!r}")
        index = cls(meta["dim"], HnswParams(**meta["params"]))
        count = len(meta["ids"])
        index._ids = list(meta["ids"])
        index._id_to_idx = {obj_id: i for i, obj_id in enumerate(index._ids)}
        index._levels = list(meta["levels"])
        index._graph = meta["graph"]
        index._entry = meta["entry"]
        index._max_level = meta["max_level"]
        index._capacity = max(count, 1024)
        index._vectors = np.zeros((index._capacity, meta["dim"]), dtype=np.float32)
        index._vectors[:count] = vectors
        return index
