from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import pytest

from semvar.corpus import Document, Sentence

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

# The paper's corpus: slug -> (sentence count, word-token count).
BOOK_COUNTS = {
    "a-christmas-carol": (1942, 29112),
    "heart-of-darkness": (2430, 39061),
    "metamorphosis": (795, 22373),
    "the-prophet": (647, 12360),
    "a-modest-proposal": (68, 3431),
    "a-study-in-scarlet": (2689, 43919),
    "adventures-of-huckleberry-finn": (5789, 116313),
    "dragons-and-cherry-blossoms": (1174, 29157),
    "laughter": (1794, 42947),
    "little-women": (9438, 190752),
    "the-picture-of-dorian-gray": (6479, 79978),
    "ruth-of-the-usa": (5093, 98880),
    "siddhartha": (1850, 39719),
    "the-catspaw": (1555, 19271),
    "the-hound-of-the-baskervilles": (3876, 59802),
    "the-scarlet-letter": (3500, 84709),
    "the-sons-of-japheth": (203, 2327),
    "treasure-island": (3732, 70077),
}


def books_dir() -> Path:
    return Path(os.environ.get("SEMVAR_BOOKS_DIR", FIXTURES / "books"))


def available_books() -> dict[str, Path]:
    d = books_dir()
    if not d.is_dir():
        return {}
    return {p.stem: p for p in sorted(d.glob("*.txt")) if p.stem in BOOK_COUNTS}


def make_doc(texts: list[str], doc_id: str = "toy") -> Document:
    sentences = tuple(
        Sentence(index=i, text=t, token_count=len(t.split())) for i, t in enumerate(texts)
    )
    return Document(id=doc_id, title=doc_id, sentences=sentences, source_path="<memory>")


_WORDS = [
    "tide", "lantern", "ledger", "storm", "harbor", "iron", "glass", "rope",
    "wick", "signal", "north", "salt", "keeper", "page", "ink", "beam",
    "stair", "cloud", "mercury", "lens", "hour", "wind", "shoal", "pane",
]


def random_doc(rng: np.random.Generator, n_sentences: int, doc_id: str = "toy") -> Document:
    texts = []
    for _ in range(n_sentences):
        k = int(rng.integers(3, 9))
        words = rng.choice(_WORDS, size=k)
        texts.append(" ".join(words) + ".")
    return make_doc(texts, doc_id=doc_id)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260810)


@pytest.fixture
def lighthouse_path() -> Path:
    return FIXTURES / "lighthouse.txt"
