"""Embedding providers: remote service, precomputed file, deterministic fallback.

The fallback embedder feature-hashes word unigrams and character trigrams into
a fixed number of buckets with a fixed seed, then L2-normalizes. It makes the
whole toolkit runnable without any model; it is a stand-in, not a
reproduction of any particular embedding model.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from dataclasses import dataclass

import httpx
import numpy as np

from .errors import (DimensionMismatch, MissingKey, TransportError,
                     ZeroVector)

SUBJECTS = ("definition", "sentence", "token-span", "label")


@dataclass(frozen=True)
class EmbeddingVector:
    values: np.ndarray
    provider_id: str
    subject: str = "definition"

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("embedding contains non-finite values")


def text_key(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def span_key(context: str, start: int, end: int) -> str:
    return text_key(f"{context}\x00{start}:{end}")


def cosine(a, b) -> float:
    """Cosine similarity, clamped to [-1, 1] against rounding."""
    va = a.values if isinstance(a, EmbeddingVector) else np.asarray(a, dtype=float)
    vb = b.values if isinstance(b, EmbeddingVector) else np.asarray(b, dtype=float)
    if va.shape != vb.shape:
        raise DimensionMismatch(f"{va.shape} vs {vb.shape}")
    na, nb = np.linalg.norm(va), np.linalg.norm(vb)
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine undefined for zero vector")
    if np.array_equal(va, vb):
        return 1.0  # identical inputs are exactly 1, not 1 - epsilon
    return float(min(1.0, max(-1.0, float(np.dot(va, vb)) / (na * nb))))


def _validate_span(context: str, start: int, end: int) -> None:
    if not (0 <= start < end <= len(context)):
        raise ValueError(f"span {start}:{end} out of bounds "
                         f"for context of length {len(context)}")


class FallbackEmbedder:
    """Deterministic local embedder: signed feature hashing, unit norm."""

    def __init__(self, dim: int = 256, seed: int = 0, span_window: int = 20):
        self.dim = dim
        self.seed = seed
        self.span_window = span_window
        self.provider_id = f"fallback-hash-d{dim}-s{seed}"

    def _features(self, text: str):
        tokens = text.lower().split()
        for tok in tokens:
            yield "w:" + tok
        chars = " ".join(tokens)
        for i in range(len(chars) - 2):
            yield "c:" + chars[i:i + 3]

    def _embed_one(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim)
        key = str(self.seed).encode()
        for feat in self._features(text):
            digest = hashlib.blake2b(feat.encode("utf-8"), key=key,
                                     digest_size=8).digest()
            h = int.from_bytes(digest, "big")
            sign = 1.0 if h & 1 else -1.0
            vec[(h >> 1) % self.dim] += sign
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            # Empty text still gets a fixed direction so cosine stays defined.
            vec[0] = 1.0
            norm = 1.0
        return vec / norm

    def embed_texts(self, texts, subject="definition"):
        return [EmbeddingVector(self._embed_one(t), self.provider_id, subject)
                for t in texts]

    def embed_token_span(self, context: str, start: int, end: int):
        _validate_span(context, start, end)
        w = self.span_window
        window = context[max(0, start - w):min(len(context), end + w)]
        return EmbeddingVector(self._embed_one(window), self.provider_id,
                               "token-span")


class FileProvider:
    """Precomputed embeddings looked up by sha256 text key."""

    def __init__(self, path):
        self.dim, self.provider_id, self._table = load_embeddings(path)

    def embed_texts(self, texts, subject="definition"):
        out = []
        for t in texts:
            key = text_key(t)
            if key not in self._table:
                raise MissingKey(f"no embedding for text hash {key}")
            out.append(EmbeddingVector(self._table[key], self.provider_id,
                                       subject))
        return out

    def embed_token_span(self, context: str, start: int, end: int):
        _validate_span(context, start, end)
        key = span_key(context, start, end)
        if key not in self._table:
            raise MissingKey(f"no embedding for span hash {key}")
        return EmbeddingVector(self._table[key], self.provider_id, "token-span")


class RemoteProvider:
    """Client for the /v1/embed protocol."""

    def __init__(self, endpoint: str, batch_size: int = 32,
                 max_retries: int = 3, backoff: float = 0.5,
                 timeout: float = 60.0):
        self.endpoint = endpoint.rstrip("/")
        self.batch_size = batch_size
        self.max_retries = max_retries
        self.backoff = backoff
        self._client = httpx.Client(timeout=timeout)
        self.provider_id = f"remote:{self.endpoint}"
        self._dim = None

    def _post(self, body: dict) -> dict:
        last_exc = None
        for attempt in range(self.max_retries + 1):
            try:
                resp = self._client.post(self.endpoint + "/v1/embed", json=body)
            except httpx.TransportError as exc:
                last_exc = exc
                time.sleep(self.backoff * (2 ** attempt))
                continue
            if resp.status_code != 200:
                raise TransportError(
                    f"embed endpoint returned {resp.status_code}", retries=attempt)
            return resp.json()
        raise TransportError(str(last_exc), retries=self.max_retries)

    def _check_dim(self, dim: int) -> None:
        if self._dim is None:
            self._dim = dim
        elif dim != self._dim:
            raise DimensionMismatch(f"provider dim changed {self._dim} -> {dim}")

    def embed_texts(self, texts, subject="definition"):
        out = []
        for start in range(0, len(texts), self.batch_size):
            batch = list(texts[start:start + self.batch_size])
            payload = self._post({"subject": subject, "texts": batch})
            self._check_dim(payload["dim"])
            vectors = payload["vectors"]
            if len(vectors) != len(batch):
                raise TransportError(
                    f"expected {len(batch)} vectors, got {len(vectors)}")
            pid = payload.get("provider_id", self.provider_id)
            out.extend(EmbeddingVector(np.asarray(v, dtype=float), pid, subject)
                       for v in vectors)
        return out

    def embed_token_span(self, context: str, start: int, end: int):
        _validate_span(context, start, end)
        payload = self._post({"subject": "token-span",
                              "items": [{"context": context,
                                         "start": start, "end": end}]})
        self._check_dim(payload["dim"])
        pid = payload.get("provider_id", self.provider_id)
        return EmbeddingVector(np.asarray(payload["vectors"][0], dtype=float),
                               pid, "token-span")


class EmbeddingCache:
    """In-memory cache keyed by (provider_id, subject, text hash).

    Insertion of identical keys is idempotent, so concurrent embedding of the
    same text is safe.
    """

    def __init__(self, provider):
        self.provider = provider
        self.provider_id = provider.provider_id
        self._store: dict[tuple, EmbeddingVector] = {}
        self._lock = threading.Lock()

    def embed_texts(self, texts, subject="definition"):
        missing = []
        seen = set()
        for t in texts:
            k = (self.provider_id, subject, text_key(t))
            if k not in self._store and k not in seen:
                seen.add(k)
                missing.append(t)
        if missing:
            fresh = self.provider.embed_texts(missing, subject=subject)
            with self._lock:
                for t, v in zip(missing, fresh):
                    self._store.setdefault(
                        (self.provider_id, subject, text_key(t)), v)
        return [self._store[(self.provider_id, subject, text_key(t))]
                for t in texts]

    def embed_token_span(self, context, start, end):
        k = (self.provider_id, "token-span", span_key(context, start, end))
        if k not in self._store:
            v = self.provider.embed_token_span(context, start, end)
            with self._lock:
                self._store.setdefault(k, v)
        return self._store[k]


def save_embeddings(path, keyed_vectors, dim: int, provider_id: str) -> None:
    """Write the embeddings file: one header line, then JSONL rows.

    Values are stored as 32-bit floats (round-trip within 1e-7).
    """
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"dim": dim, "provider": provider_id}) + "\n")
        for key, values in keyed_vectors:
            row = {"key": key,
                   "v": [float(x) for x in np.asarray(values, dtype=np.float32)]}
            fh.write(json.dumps(row) + "\n")


def load_embeddings(path):
    """Read an embeddings file. Returns (dim, provider_id, {key: ndarray})."""
    with open(path, encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        dim, provider_id = header["dim"], header["provider"]
        table = {}
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            row = json.loads(line)
            vec = np.asarray(row["v"], dtype=float)
            if vec.shape != (dim,):
                raise DimensionMismatch(
                    f"line {lineno}: expected dim {dim}, got {vec.shape}")
            table[row["key"]] = vec
    return dim, provider_id, table


def make_provider(spec: str, seed: int = 0, dim: int = 256):
    """Build a provider from a CLI spec: 'fallback', 'file:PATH' or a URL."""
    if spec == "fallback":
        return FallbackEmbedder(dim=dim, seed=seed)
    if spec.startswith("file:"):
        return FileProvider(spec[len("file:"):])
    if spec.startswith(("http://", "https://")):
        return RemoteProvider(spec)
    raise ValueError(f"unknown provider spec '{spec}'")
