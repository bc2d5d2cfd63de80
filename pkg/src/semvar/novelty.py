"""Per-sentence novelty scores and ensemble flags.

A sentence whose row of the standardized SSM is uniformly low similarity (a
"dark band") gets a high novelty score: the negated mean of its off-diagonal
z-scores. Sentences flagged by at least k of the M models at quantile q form
the ensemble report.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import Document
from .errors import SemvarError
from .ssm import StandardizedSSM

EXCERPT_CHARS = 60


@dataclass(frozen=True)
class NoveltyReport:
    doc_id: str
    models: tuple[str, ...]
    scores: np.ndarray  # (M, N) float64, row order matches models
    flags: tuple[tuple[int, int], ...]  # (sentence index, agreeing-model count)
    q: float
    k: int

    def __post_init__(self) -> None:
        if self.scores.shape[0] != len(self.models):
            raise SemvarError("score rows do not match model list")
        if any(count < self.k for _, count in self.flags):
            raise SemvarError("flag below the agreement threshold")


def row_novelty(z: StandardizedSSM) -> np.ndarray:
    """score[i] = -(mean of z[i, j] over j != i); higher means more novel."""
    if z.n < 3:
        raise SemvarError("row novelty requires at least 3 sentences")
    row_sums = z.values.sum(axis=1, dtype=np.float64)
    diag = np.diagonal(z.values).astype(np.float64)
    return -(row_sums - diag) / (z.n - 1)


def _candidate_threshold(scores: np.ndarray, q: float) -> float:
    """The (1-q) empirical quantile: the ceil((1-q)*N)-th smallest score.

    Scores strictly above it are candidates, so at most a q fraction of
    sentences is flagged per model.
    """
    n = scores.size
    rank = min(max(math.ceil((1.0 - q) * n), 1), n)
    return float(np.sort(scores)[rank - 1])


def ensemble_flags(
    scores_by_model: Sequence[tuple[str, Sequence[float] | np.ndarray]],
    q: float = 0.05,
    k: int = 1,
) -> list[tuple[int, int]]:
    """Sentences whose novelty score is in the top q fraction for at least k
    models, as (index, agreeing-model count), sorted by count then index."""
    if not scores_by_model:
        raise SemvarError("empty model set")
    if not 0.0 < q < 1.0:
        raise SemvarError(f"quantile q must be in (0, 1), got {q}")
    if not 1 <= k <= len(scores_by_model):
        raise SemvarError(f"k must be in 1..{len(scores_by_model)}, got {k}")

    lengths = {len(np.asarray(s, dtype=np.float64)) for _, s in scores_by_model}
    if len(lengths) != 1:
        raise SemvarError("score lists have different lengths")
    n = next(iter(lengths))

    counts = np.zeros(n, dtype=np.int64)
    for _, raw in scores_by_model:
        scores = np.asarray(raw, dtype=np.float64)
        counts += scores > _candidate_threshold(scores, q)

    flagged = [(int(i), int(c)) for i, c in enumerate(counts) if c >= k]
    flagged.sort(key=lambda item: (-item[1], item[0]))
    return flagged


def default_min_agreement(model_count: int) -> int:
    """Majority agreement: no single model is trusted alone."""
    return max(1, math.ceil(model_count / 2))


def build_report(
    ssms: Sequence[StandardizedSSM], q: float = 0.05, k: int | None = None
) -> NoveltyReport:
    """Score every sentence under every model and flag ensemble agreement."""
    if not ssms:
        raise SemvarError("empty model set")
    doc_ids = {z.doc_id for z in ssms}
    if len(doc_ids) != 1:
        raise SemvarError(f"standardized SSMs span multiple documents: {sorted(doc_ids)}")
    if k is None:
        k = default_min_agreement(len(ssms))
    models = tuple(z.model for z in ssms)
    scores = np.stack([row_novelty(z) for z in ssms])
    flags = ensemble_flags(list(zip(models, scores)), q=q, k=k)
    return NoveltyReport(
        doc_id=doc_ids.pop(), models=models, scores=scores, flags=tuple(flags), q=q, k=k
    )


def _excerpt(text: str) -> str:
    return " ".join(text.split())[:EXCERPT_CHARS]


def _agree_counts(report: NoveltyReport, n: int) -> np.ndarray:
    counts = np.zeros(n, dtype=np.int64)
    for index, count in report.flags:
        counts[index] = count
    return counts


def write_novelty_csv(report: NoveltyReport, doc: Document, path: str | Path) -> None:
    if doc.n != report.scores.shape[1]:
        raise SemvarError("document length does not match the report")
    counts = _agree_counts(report, doc.n)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(
            ["index", "sentence_excerpt", "agree_count"]
            + [f"score_{m}" for m in report.models]
        )
        for i, sentence in enumerate(doc.sentences):
            writer.writerow(
                [i, _excerpt(sentence.text), int(counts[i])]
                + [f"{report.scores[j, i]:.6f}" for j in range(len(report.models))]
            )


def write_novelty_json(report: NoveltyReport, doc: Document, path: str | Path) -> None:
    if doc.n != report.scores.shape[1]:
        raise SemvarError("document length does not match the report")
    counts = _agree_counts(report, doc.n)
    payload = {
        "doc_id": report.doc_id,
        "models": list(report.models),
        "params": {"q": report.q, "min_agreement": report.k},
        "flags": [[i, c] for i, c in report.flags],
        "sentences": [
            {
                "index": i,
                "sentence_excerpt": _excerpt(s.text),
                "agree_count": int(counts[i]),
                "scores": {
                    m: round(float(report.scores[j, i]), 6)
                    for j, m in enumerate(report.models)
                },
            }
            for i, s in enumerate(doc.sentences)
        ],
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
