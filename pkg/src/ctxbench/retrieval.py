"""Embedding providers, cosine-similarity passage index, budget selection.

Corpora are single documents, so the index scores exhaustively with one
matrix product; no ANN structure is needed.  Providers return unit-norm
float32 vectors.  A content-addressed disk cache lets reruns skip
re-embedding (values are deterministic, so last-write-wins is safe).
"""

from __future__ import annotations

import hashlib
import os
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyBatch,
    EmptyIndex,
    ProviderTransientError,
    ProviderUnavailable,
)
from .text import DEFAULT_COUNTER, Passage

BATCH_CAP = 64


def normalize(vec: np.ndarray) -> np.ndarray:
    """L2-normalize to unit length; zero vectors map to e0."""
    v = np.asarray(vec, dtype=np.float32)
    n = float(np.linalg.norm(v))
    if n == 0.0:
        out = np.zeros_like(v)
        out[0] = 1.0
        return out
    return v / n


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Dot product of unit vectors; raises on dimension mismatch."""
    if a.shape != b.shape:
        raise DimensionMismatch(f"dims {a.shape} vs {b.shape}")
    return float(np.dot(a, b))


class HashedBagEmbedder:
    """Deterministic offline embedder: hashed bag of tokens.

    Each token of the default counter (lowercased) is hashed into one of
    ``dims`` coordinates; occurrence counts are L2-normalized.  Order
    insensitive but content sensitive, which is all the property tests
    and synthetic end-to-end runs need.
    """

    def __init__(self, dims: int = 256) -> None:
        self.dims = dims
        self.embedder_id = f"hashed-bag-{dims}"
        self.deterministic = True

    def _coord(self, token: str) -> int:
        digest = hashlib.md5(token.lower().encode("utf-8")).digest()
        return int.from_bytes(digest[:4], "little") % self.dims

    def embed(self, texts: list[str]) -> np.ndarray:
        if not texts:
            raise EmptyBatch("no texts to embed")
        out = np.zeros((len(texts), self.dims), dtype=np.float32)
        for row, text in enumerate(texts):
            for token in DEFAULT_COUNTER.tokenize(text):
                out[row, self._coord(token)] += 1.0
            out[row] = normalize(out[row])
        return out


class RemoteEmbedder:
    """Batched HTTP embedding endpoint with exponential-backoff retry.

    Expects an OpenAI-style ``/embeddings`` JSON API.  The API key comes
    from an environment variable so configs stay secret-free.  Optional
    query/document prefixes support instruction-tuned embedder families.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        dims: int,
        api_key_env: str = "CTXBENCH_EMBED_API_KEY",
        query_prefix: str = "",
        document_prefix: str = "",
        max_attempts: int = 3,
        timeout: float = 60.0,
    ) -> None:
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.dims = dims
        self.api_key_env = api_key_env
        self.query_prefix = query_prefix
        self.document_prefix = document_prefix
        self.max_attempts = max_attempts
        self.timeout = timeout
        self.embedder_id = f"{model}@{self.base_url}"
        self.deterministic = True

    def _post(self, texts: list[str]) -> list[list[float]]:
        import requests

        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        resp = requests.post(
            f"{self.base_url}/embeddings",
            json={"model": self.model, "input": texts},
            headers=headers,
            timeout=self.timeout,
        )
        if resp.status_code in (429, 500, 502, 503, 504):
            raise ProviderTransientError(f"embeddings HTTP {resp.status_code}")
        resp.raise_for_status()
        data = resp.json()["data"]
        return [item["embedding"] for item in data]

    def embed(self, texts: list[str]) -> np.ndarray:
        if not texts:
            raise EmptyBatch("no texts to embed")
        rows: list[list[float]] = []
        for i in range(0, len(texts), BATCH_CAP):
            batch = texts[i:i + BATCH_CAP]
            delay = 1.0
            for attempt in range(self.max_attempts):
                try:
                    rows.extend(self._post(batch))
                    break
                except (ProviderTransientError, OSError) as exc:
                    if attempt == self.max_attempts - 1:
                        raise ProviderUnavailable(str(exc)) from exc
                    time.sleep(delay)
                    delay *= 2
        out = np.asarray(rows, dtype=np.float32)
        if out.shape != (len(texts), self.dims):
            raise DimensionMismatch(
                f"provider returned shape {out.shape}, expected ({len(texts)}, {self.dims})"
            )
        return np.stack([normalize(r) for r in out])


class EmbeddingCache:
    """Content-addressed embedding store.

    One record per (embedder_id, sha256(text)): a raw little-endian
    float32 array at ``<dir>/<embedder_id>/<sha256>.f32``.  Writes are
    atomic (temp file + rename) so concurrent writers of the same
    deterministic value cannot corrupt each other.
    """

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)

    def _path(self, embedder_id: str, text: str) -> Path:
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
        safe = embedder_id.replace("/", "_").replace(":", "_")
        return self.root / safe / f"{digest}.f32"

    def get(self, embedder_id: str, text: str) -> np.ndarray | None:
        path = self._path(embedder_id, text)
        if not path.exists():
            return None
        return np.frombuffer(path.read_bytes(), dtype="<f4").copy()

    def put(self, embedder_id: str, text: str, vec: np.ndarray) -> None:
        path = self._path(embedder_id, text)
        path.parent.mkdir(parents=True, exist_ok=True)
        data = np.asarray(vec, dtype="<f4").tobytes()
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)


def embed_batch(texts: list[str], provider, cache: EmbeddingCache | None = None) -> np.ndarray:
    """Embed texts through a provider, filling misses via the cache."""
    if not texts:
        raise EmptyBatch("no texts to embed")
    if cache is None:
        return provider.embed(texts)
    vecs: list[np.ndarray | None] = [cache.get(provider.embedder_id, t) for t in texts]
    missing = [i for i, v in enumerate(vecs) if v is None]
    if missing:
        fresh = provider.embed([texts[i] for i in missing])
        for row, i in enumerate(missing):
            vecs[i] = fresh[row]
            cache.put(provider.embedder_id, texts[i], fresh[row])
    return np.stack(vecs).astype(np.float32)


@dataclass(frozen=True)
class RankedPassage:
    passage: Passage
    score: float
    rank: int


@dataclass
class PassageIndex:
    """Passages of one document with their embeddings, position order."""

    doc_id: str
    passages: list[Passage]
    matrix: np.ndarray  # (n, dims) float32, unit rows
    embedder_id: str

    def __post_init__(self) -> None:
        if len(self.passages) != self.matrix.shape[0]:
            raise DimensionMismatch("one embedding per passage required")


def build_passage_index(
    passages: list[Passage],
    provider,
    cache: EmbeddingCache | None = None,
) -> PassageIndex:
    """Embed a document's passages into a shareable immutable index."""
    if not passages:
        raise EmptyIndex("no passages to index")
    ordered = sorted(passages, key=lambda p: p.position)
    matrix = embed_batch([p.text for p in ordered], provider, cache)
    return PassageIndex(ordered[0].doc_id, ordered, matrix, provider.embedder_id)


def embed_query(query: str, provider, cache: EmbeddingCache | None = None) -> np.ndarray:
    prefix = getattr(provider, "query_prefix", "")
    return embed_batch([prefix + query], provider, cache)[0]


def rank_passages(query_vec: np.ndarray, index: PassageIndex) -> list[RankedPassage]:
    """All passages ordered by decreasing cosine similarity.

    Ties break by ascending passage position, making the order total
    and deterministic.
    """
    if not index.passages:
        raise EmptyIndex(f"index for {index.doc_id!r} is empty")
    if index.matrix.shape[1] != query_vec.shape[0]:
        raise DimensionMismatch(
            f"index dims {index.matrix.shape[1]} vs query {query_vec.shape[0]}"
        )
    scores = index.matrix @ query_vec.astype(np.float32)
    order = sorted(range(len(index.passages)), key=lambda i: (-scores[i], index.passages[i].position))
    return [
        RankedPassage(index.passages[i], float(scores[i]), rank)
        for rank, i in enumerate(order)
    ]


def select_within_budget(
    ranked: list[RankedPassage],
    budget_tokens: int,
    fill_gaps: bool = False,
) -> list[RankedPassage]:
    """Prefix-stop selection under a token budget.

    Walk in rank order accumulating token counts and stop before the
    first passage that would overflow the budget.  ``fill_gaps`` keeps
    walking instead (skip-and-continue); it is off by default because
    prefix-stop yields nested selections across budgets.
    """
    if budget_tokens < 1:
        raise ValueError("budget_tokens must be >= 1")
    selected: list[RankedPassage] = []
    total = 0
    for rp in ranked:
        if total + rp.passage.token_count > budget_tokens:
            if fill_gaps:
                continue
            break
        selected.append(rp)
        total += rp.passage.token_count
    return selected
