"""Embedding providers and persistence.

Three interchangeable sources of sentence vectors: a deterministic hash-based
reference embedder (no model downloads, bitwise reproducible), precomputed
SEMV1 files, and a remote HTTP embedding service. Matrices persist in the
SEMV1 binary container.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import requests

from .corpus import Document
from .errors import FormatError, ProviderError, SemvarError

PROVIDER_KINDS = ("file", "remote", "reference")

# FNV-1a 64-bit parameters.
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF

# splitmix64 constants.
_SM_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_SM_MUL2 = np.uint64(0x94D049BB133111EB)

_EMPTY_TOKEN = "∅"


def validate_model_id(name: str) -> str:
    if not name or any(c.isspace() for c in name) or len(name.encode("utf-8")) > 32:
        raise SemvarError(f"invalid model id: {name!r}")
    return name


@dataclass(frozen=True)
class EmbeddingMatrix:
    """N x D float32 sentence vectors for one (document, model) pair."""

    model: str
    doc_id: str
    values: np.ndarray

    def __post_init__(self) -> None:
        validate_model_id(self.model)
        v = self.values
        if v.ndim != 2 or v.dtype != np.float32:
            raise SemvarError("embedding values must be a 2-D float32 array")
        if not np.isfinite(v).all():
            raise SemvarError("embedding contains non-finite entries")
        if v.shape[0] and not (v != 0).any(axis=1).all():
            raise SemvarError("embedding contains an all-zero row")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class ProviderConfig:
    """Where sentence vectors come from.

    kind 'file': location is a SEMV1 path. kind 'remote': location is the
    service base URL; sentences are sent in order, batch_size per request.
    kind 'reference': the built-in hash embedder with dimension ``dim``.
    """

    kind: str
    location: str = ""
    dim: int = 64
    batch_size: int = 64

    def __post_init__(self) -> None:
        if self.kind not in PROVIDER_KINDS:
            raise SemvarError(f"unknown provider kind: {self.kind!r}")
        if self.kind == "reference" and self.dim < 2:
            raise SemvarError("reference provider requires dim >= 2")
        if self.kind == "remote" and self.batch_size < 1:
            raise SemvarError("batch_size must be >= 1")
        if self.kind in ("file", "remote") and not self.location:
            raise SemvarError(f"{self.kind} provider requires a location")


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


def _splitmix64(seeds: np.ndarray, count: int) -> np.ndarray:
    """First ``count`` outputs of a splitmix64 stream per seed; (T, count) uint64."""
    steps = np.arange(1, count + 1, dtype=np.uint64) * _SM_GAMMA
    z = seeds[:, None] + steps[None, :]
    z ^= z >> np.uint64(30)
    z *= _SM_MUL1
    z ^= z >> np.uint64(27)
    z *= _SM_MUL2
    z ^= z >> np.uint64(31)
    return z


def _token_vectors(tokens: list[str], dim: int) -> np.ndarray:
    seeds = np.array([fnv1a64(t.encode("utf-8")) for t in tokens], dtype=np.uint64)
    u = _splitmix64(seeds, dim)
    return u / np.float64(2**63) - 1.0


def _tokenize(text: str) -> list[str]:
    tokens = text.lower().split()
    return tokens if tokens else [_EMPTY_TOKEN]


def reference_embed_batch(texts: list[str], dim: int) -> np.ndarray:
    """Vectorized reference embedding of many sentences; (len(texts), dim) float32."""
    if dim < 2:
        raise SemvarError("reference embedder requires dim >= 2")
    vocab: dict[str, int] = {}
    token_ids: list[np.ndarray] = []
    for text in texts:
        ids = [vocab.setdefault(t, len(vocab)) for t in _tokenize(text)]
        token_ids.append(np.asarray(ids, dtype=np.intp))

    table = _token_vectors(list(vocab), dim)
    out = np.empty((len(texts), dim), dtype=np.float32)
    for i, ids in enumerate(token_ids):
        v = table[ids].mean(axis=0)
        norm = np.sqrt(np.dot(v, v))
        if norm == 0.0:
            raise SemvarError("reference embedding degenerated to a zero vector")
        out[i] = (v / norm).astype(np.float32)
    return out


def reference_embed(sentence_text: str, dim: int) -> np.ndarray:
    """Deterministic hash-based sentence vector: mean of per-token splitmix64
    streams seeded by FNV-1a, L2-normalized. Same text, same bits, anywhere."""
    return reference_embed_batch([sentence_text], dim)[0]


def _embed_remote(provider: ProviderConfig, doc: Document, model: str) -> np.ndarray:
    url = provider.location.rstrip("/") + "/embed"
    texts = doc.texts()
    rows: list[np.ndarray] = []
    dim: int | None = None
    for start in range(0, len(texts), provider.batch_size):
        batch = texts[start : start + provider.batch_size]
        try:
            resp = requests.post(url, json={"model": model, "sentences": batch}, timeout=300)
        except requests.RequestException as e:
            raise ProviderError(f"provider unreachable: {url}: {e}") from e
        if resp.status_code != 200:
            detail = ""
            try:
                detail = resp.json().get("error", "")
            except ValueError:
                pass
            raise ProviderError(f"embed request failed ({resp.status_code}): {detail}")
        payload = resp.json()
        vectors = np.asarray(payload["vectors"], dtype=np.float32)
        if vectors.ndim != 2 or vectors.shape[0] != len(batch):
            raise ProviderError("row count mismatch in provider response")
        if dim is None:
            dim = vectors.shape[1]
        elif vectors.shape[1] != dim:
            raise ProviderError(
                f"dimension mismatch across batches: {vectors.shape[1]} != {dim}"
            )
        rows.append(vectors)
    values = np.concatenate(rows, axis=0)
    if not (values != 0).any(axis=1).all():
        raise ProviderError("zero vector returned by provider")
    return values


def list_remote_models(base_url: str) -> list[dict]:
    """GET /models from an embedding service; returns its model entries."""
    try:
        resp = requests.get(base_url.rstrip("/") + "/models", timeout=30)
    except requests.RequestException as e:
        raise ProviderError(f"provider unreachable: {base_url}: {e}") from e
    if resp.status_code != 200:
        raise ProviderError(f"model listing failed ({resp.status_code})")
    return resp.json()["models"]


def embed_document(provider: ProviderConfig, doc: Document, model: str) -> EmbeddingMatrix:
    """Produce the N x D embedding matrix for ``doc`` under ``model``."""
    validate_model_id(model)
    if doc.n == 0:
        raise SemvarError("document has no sentences")

    if provider.kind == "reference":
        values = reference_embed_batch(doc.texts(), provider.dim)
    elif provider.kind == "file":
        m = read_embeddings(provider.location)
        if m.n != doc.n:
            raise ProviderError(
                f"row count mismatch: file has {m.n} rows, document has {doc.n} sentences"
            )
        if m.model != model:
            raise ProviderError(f"file provider holds model {m.model!r}, expected {model!r}")
        values = m.values
    else:
        values = _embed_remote(provider, doc, model)

    return EmbeddingMatrix(model=model, doc_id=doc.id, values=values)


# SEMV1 container: magic, version, model name, doc id, n, d, float32 payload,
# CRC32 of the payload. SSM files append a flag byte (and mu/sigma when
# standardized) to the header; see semvar.ssm.

MAGIC = b"SEMV"
VERSION = 1


def pack_semv1(
    model: str,
    doc_id: str,
    values: np.ndarray,
    flag: int | None = None,
    mu_sigma: tuple[float, float] | None = None,
) -> bytes:
    model_b = model.encode("utf-8")
    doc_b = doc_id.encode("utf-8")
    if len(model_b) > 255 or len(doc_b) > 255:
        raise FormatError("model name and doc id must be at most 255 bytes")
    n, d = values.shape
    header = bytearray()
    header += MAGIC
    header.append(VERSION)
    header.append(len(model_b))
    header += model_b
    header.append(len(doc_b))
    header += doc_b
    header += struct.pack("<II", n, d)
    if flag is not None:
        header.append(flag)
        if mu_sigma is not None:
            header += struct.pack("<dd", *mu_sigma)
    payload = np.ascontiguousarray(values, dtype="<f4").tobytes()
    crc = zlib.crc32(payload) & 0xFFFFFFFF
    return bytes(header) + payload + struct.pack("<I", crc)


class _Cursor:
    def __init__(self, data: bytes, path: Path):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, count: int) -> bytes:
        if self.pos + count > len(self.data):
            raise FormatError(f"truncated payload: {self.path}")
        out = self.data[self.pos : self.pos + count]
        self.pos += count
        return out


def unpack_semv1(
    path: str | Path, with_flag: bool = False
) -> tuple[str, str, np.ndarray, int, float, float]:
    """Parse a SEMV1 file; returns (model, doc_id, values, flag, mu, sigma).

    ``with_flag`` selects the SSM header variant. flag/mu/sigma are 0 when
    absent.
    """
    path = Path(path)
    cur = _Cursor(path.read_bytes(), path)
    if cur.take(4) != MAGIC:
        raise FormatError(f"bad magic: {path}")
    version = cur.take(1)[0]
    if version != VERSION:
        raise FormatError(f"unsupported version {version}: {path}")
    model = cur.take(cur.take(1)[0]).decode("utf-8")
    doc_id = cur.take(cur.take(1)[0]).decode("utf-8")
    n, d = struct.unpack("<II", cur.take(8))
    flag, mu, sigma = 0, 0.0, 0.0
    if with_flag:
        flag = cur.take(1)[0]
        if flag == 1:
            mu, sigma = struct.unpack("<dd", cur.take(16))
    payload = cur.take(n * d * 4)
    (crc,) = struct.unpack("<I", cur.take(4))
    if cur.pos != len(cur.data):
        raise FormatError(f"trailing bytes after checksum: {path}")
    if crc != (zlib.crc32(payload) & 0xFFFFFFFF):
        raise FormatError(f"checksum mismatch: {path}")
    values = np.frombuffer(payload, dtype="<f4").reshape(n, d).copy()
    return model, doc_id, values, flag, mu, sigma


def write_embeddings(m: EmbeddingMatrix, path: str | Path) -> None:
    Path(path).write_bytes(pack_semv1(m.model, m.doc_id, m.values))


def read_embeddings(path: str | Path) -> EmbeddingMatrix:
    model, doc_id, values, _, _, _ = unpack_semv1(path)
    return EmbeddingMatrix(model=model, doc_id=doc_id, values=values)
