"""Model registry: named encoders behind a common interface.

Two backends: sentence-transformers checkpoints (the real thing, loaded
lazily so the service can describe itself before weights arrive) and a
deterministic hash-based stub (`stub:<dim>`) for tests and dry runs.
Inference is serialized per model instance; FastAPI may call concurrently.
"""

from __future__ import annotations

import hashlib
import logging
import threading
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger("embedsvc")

_BATCH = 32


@dataclass(frozen=True)
class ModelRegistryEntry:
    name: str
    dim: int
    pooling: str
    source: str


class StubEncoder:
    """Deterministic token-hash encoder; shared tokens make similar sentences
    land near each other, which is all the protocol tests need."""

    def __init__(self, name: str, dim: int):
        if dim < 2:
            raise ValueError("stub dim must be >= 2")
        self.name = name
        self.dim = dim
        self.pooling = "mean"
        self.source = f"stub:{dim}"
        self.max_seq_length = 512

    def _token_vector(self, token: str) -> np.ndarray:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        rng = np.random.default_rng(int.from_bytes(digest, "little"))
        return rng.standard_normal(self.dim)

    def encode(self, sentences: list[str]) -> np.ndarray:
        out = np.empty((len(sentences), self.dim), dtype=np.float32)
        for i, text in enumerate(sentences):
            tokens = text.lower().split() or ["<empty>"]
            v = np.mean([self._token_vector(t) for t in tokens], axis=0)
            norm = float(np.linalg.norm(v))
            out[i] = (v / norm if norm else v + 1.0 / self.dim).astype(np.float32)
        return out


class SentenceTransformerEncoder:
    """Wraps one sentence-transformers checkpoint; weights load on first use."""

    def __init__(self, name: str, source: str, device: str = "cpu"):
        self.name = name
        self.source = source
        self.device = device
        self._model = None
        self._lock = threading.Lock()

    def _load(self):
        if self._model is None:
            from sentence_transformers import SentenceTransformer

            logger.info("loading %s from %s on %s", self.name, self.source, self.device)
            self._model = SentenceTransformer(self.source, device=self.device)
            self._model.eval()
        return self._model

    @property
    def dim(self) -> int:
        return int(self._load().get_sentence_embedding_dimension())

    @property
    def max_seq_length(self) -> int:
        return int(getattr(self._load(), "max_seq_length", 512))

    @property
    def pooling(self) -> str:
        try:
            for module in self._load():
                mode = getattr(module, "get_pooling_mode_str", None)
                if mode is not None:
                    return str(mode())
        except Exception:
            pass
        return "unknown"

    def encode(self, sentences: list[str]) -> np.ndarray:
        model = self._load()
        return np.asarray(
            model.encode(
                sentences,
                batch_size=_BATCH,
                convert_to_numpy=True,
                show_progress_bar=False,
            ),
            dtype=np.float32,
        )


class Registry:
    """Name -> encoder map with per-model inference locks."""

    def __init__(self):
        self._encoders: dict[str, object] = {}
        self._locks: dict[str, threading.Lock] = {}

    def add(self, name: str, encoder) -> None:
        if name in self._encoders:
            raise ValueError(f"duplicate model name: {name}")
        self._encoders[name] = encoder
        self._locks[name] = threading.Lock()

    def add_source(self, name: str, source: str, device: str = "cpu") -> None:
        if source.startswith("stub:"):
            self.add(name, StubEncoder(name, int(source.split(":", 1)[1])))
        else:
            self.add(name, SentenceTransformerEncoder(name, source, device=device))

    def names(self) -> list[str]:
        return list(self._encoders)

    def entry(self, name: str) -> ModelRegistryEntry:
        e = self._encoders[name]
        return ModelRegistryEntry(name=name, dim=e.dim, pooling=e.pooling, source=e.source)

    def encode(self, name: str, sentences: list[str]) -> np.ndarray:
        if name not in self._encoders:
            raise KeyError(name)
        encoder = self._encoders[name]
        max_seq = getattr(encoder, "max_seq_length", 512)
        long_count = sum(1 for s in sentences if len(s.split()) > max_seq)
        if long_count:
            # Gutenberg texts contain very long sentences; truncation is
            # expected behavior, never an error.
            logger.warning(
                "%s: %d sentence(s) exceed ~%d tokens and will be truncated",
                name, long_count, max_seq,
            )
        with self._locks[name]:
            vectors = encoder.encode(sentences)
        if vectors.shape[0] != len(sentences):
            raise RuntimeError(
                f"{name}: encoder returned {vectors.shape[0]} vectors "
                f"for {len(sentences)} sentences"
            )
        return vectors


def parse_model_specs(spec: str) -> list[tuple[str, str]]:
    """Comma-separated name=source pairs, e.g.
    'MiniLM=sentence-transformers/all-MiniLM-L6-v2,Toy=stub:64'."""
    pairs = []
    for item in spec.split(","):
        name, sep, source = item.partition("=")
        if not sep or not name or not source:
            raise ValueError(f"bad model spec (want name=source): {item!r}")
        pairs.append((name.strip(), source.strip()))
    return pairs


DEFAULT_MODELS = (
    ("MiniLM", "sentence-transformers/all-MiniLM-L6-v2"),
    ("MPNet", "sentence-transformers/all-mpnet-base-v2"),
)
