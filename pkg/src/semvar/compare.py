"""Cross-model agreement: Pearson correlation maps over successive-similarity
time series, and the positive/negative/directional agreement fractions over
standardized SSMs.

Pair counts are exact integers; fractions are formed once at the end, so the
partition identity pos_pos + neg_neg + pos_neg + neg_pos = total holds
exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import FormatError, SemvarError
from .ssm import StandardizedSSM, TimeSeries

_BLOCK_ROWS = 2048

MATRIX_KINDS = ("correlation", "paf", "naf", "ddaf")

MEAN_DOC_ID = "<mean>"


@dataclass(frozen=True)
class ModelMatrix:
    """Small M x M labeled matrix over models (one document or the corpus mean)."""

    kind: str
    models: tuple[str, ...]
    values: np.ndarray
    doc_id: str

    def __post_init__(self) -> None:
        if self.kind not in MATRIX_KINDS:
            raise SemvarError(f"unknown matrix kind: {self.kind!r}")
        m = len(self.models)
        if self.values.shape != (m, m):
            raise SemvarError("matrix shape does not match model list")
        if len(set(self.models)) != m:
            raise SemvarError("duplicate model names")


@dataclass(frozen=True)
class PairSignSummary:
    """Sign-quadrant counts over all unordered sentence pairs of two models."""

    model_a: str
    model_b: str
    pos_pos: int
    neg_neg: int
    pos_neg: int
    neg_pos: int
    total_pairs: int

    def __post_init__(self) -> None:
        if self.pos_pos + self.neg_neg + self.pos_neg + self.neg_pos != self.total_pairs:
            raise SemvarError("sign counts do not partition the pairs")


def pearson(x: Sequence[float] | np.ndarray, y: Sequence[float] | np.ndarray) -> float:
    """Pearson correlation coefficient, float64 accumulation, clamped to [-1, 1]."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise SemvarError("length mismatch")
    if x.size < 3:
        raise SemvarError("pearson requires at least 3 points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise SemvarError("zero variance")
    r = float(np.dot(dx, dy)) / np.sqrt(sxx * syy)
    return float(min(1.0, max(-1.0, r)))


def _check_same_doc(items: Sequence, what: str) -> str:
    doc_ids = {it.doc_id for it in items}
    if len(doc_ids) != 1:
        raise SemvarError(f"{what} span multiple documents: {sorted(doc_ids)}")
    return next(iter(doc_ids))


def correlation_map(series_by_model: Sequence[tuple[str, TimeSeries]]) -> ModelMatrix:
    """Pairwise Pearson correlations between the models' time series."""
    if len(series_by_model) < 2:
        raise SemvarError("correlation map requires at least 2 models")
    models = tuple(name for name, _ in series_by_model)
    series = [ts for _, ts in series_by_model]
    doc_id = _check_same_doc(series, "time series")
    lengths = {len(ts) for ts in series}
    if len(lengths) != 1:
        raise SemvarError(f"time series lengths differ: {sorted(lengths)}")

    m = len(models)
    values = np.eye(m, dtype=np.float64)
    for i in range(m):
        for j in range(i + 1, m):
            r = pearson(series[i].values, series[j].values)
            values[i, j] = values[j, i] = r
    return ModelMatrix(kind="correlation", models=models, values=values, doc_id=doc_id)


def mean_correlation_map(maps: Sequence[ModelMatrix]) -> ModelMatrix:
    """Entrywise mean of per-document correlation maps."""
    if not maps:
        raise SemvarError("mean of zero maps")
    first = maps[0]
    for mm in maps:
        if mm.kind != "correlation":
            raise SemvarError(f"expected correlation maps, got {mm.kind!r}")
        if mm.models != first.models:
            raise SemvarError("inconsistent model lists across maps")
    values = np.mean(np.stack([mm.values for mm in maps]), axis=0)
    return ModelMatrix(kind="correlation", models=first.models, values=values, doc_id=MEAN_DOC_ID)


def _positive_upper_count(z: np.ndarray) -> int:
    """Number of strictly positive entries in the strict upper triangle."""
    n = z.shape[0]
    cols = np.arange(n)
    count = 0
    for start in range(0, n, _BLOCK_ROWS):
        stop = min(start + _BLOCK_ROWS, n)
        mask = cols[None, :] > np.arange(start, stop)[:, None]
        count += int(np.count_nonzero((z[start:stop] > 0) & mask))
    return count


def sign_summary(a: StandardizedSSM, b: StandardizedSSM) -> PairSignSummary:
    """Classify every unordered sentence pair by the sign pair of its z-scores.

    'Positive' means strictly above zero; an exact zero counts as negative,
    which makes the four counts an exact partition of N(N-1)/2.
    """
    if a.n != b.n:
        raise SemvarError(f"sentence count mismatch: {a.n} != {b.n}")
    _check_same_doc([a, b], "standardized SSMs")
    n = a.n
    cols = np.arange(n)
    pos_pos = neg_neg = pos_neg = 0
    for start in range(0, n, _BLOCK_ROWS):
        stop = min(start + _BLOCK_ROWS, n)
        mask = cols[None, :] > np.arange(start, stop)[:, None]
        ap = a.values[start:stop] > 0
        bp = b.values[start:stop] > 0
        pos_pos += int(np.count_nonzero(ap & bp & mask))
        neg_neg += int(np.count_nonzero(~ap & ~bp & mask))
        pos_neg += int(np.count_nonzero(ap & ~bp & mask))
    total = n * (n - 1) // 2
    return PairSignSummary(
        model_a=a.model,
        model_b=b.model,
        pos_pos=pos_pos,
        neg_neg=neg_neg,
        pos_neg=pos_neg,
        neg_pos=total - pos_pos - neg_neg - pos_neg,
        total_pairs=total,
    )


def agreement_matrices(
    ssms: Sequence[StandardizedSSM],
) -> tuple[ModelMatrix, ModelMatrix, ModelMatrix]:
    """PAF, NAF and DDAF matrices over all model pairs on one document.

    paf[a][b]: fraction of pairs positive in both models; naf[a][b]: negative
    in both; ddaf[a][b]: positive in a, negative in b (asymmetric). The
    paf/naf diagonals carry each model's own positive/negative fraction;
    the ddaf diagonal is zero.
    """
    if len(ssms) < 2:
        raise SemvarError("agreement matrices require at least 2 models")
    doc_id = _check_same_doc(ssms, "standardized SSMs")
    models = tuple(z.model for z in ssms)
    if len(set(models)) != len(models):
        raise SemvarError("duplicate model names")

    m = len(ssms)
    n = ssms[0].n
    total = n * (n - 1) // 2
    paf = np.zeros((m, m), dtype=np.float64)
    naf = np.zeros((m, m), dtype=np.float64)
    ddaf = np.zeros((m, m), dtype=np.float64)

    for i, z in enumerate(ssms):
        positive = _positive_upper_count(z.values)
        paf[i, i] = positive / total
        # 1 - paf keeps paf[i][i] + naf[i][i] == 1 exact in floats.
        naf[i, i] = 1.0 - paf[i, i]

    for i in range(m):
        for j in range(i + 1, m):
            s = sign_summary(ssms[i], ssms[j])
            paf[i, j] = paf[j, i] = s.pos_pos / total
            naf[i, j] = naf[j, i] = s.neg_neg / total
            ddaf[i, j] = s.pos_neg / total
            ddaf[j, i] = s.neg_pos / total

    return (
        ModelMatrix(kind="paf", models=models, values=paf, doc_id=doc_id),
        ModelMatrix(kind="naf", models=models, values=naf, doc_id=doc_id),
        ModelMatrix(kind="ddaf", models=models, values=ddaf, doc_id=doc_id),
    )


def _flat_upper(z: np.ndarray) -> np.ndarray:
    n = z.shape[0]
    out = np.empty(n * (n - 1) // 2, dtype=np.float64)
    pos = 0
    for i in range(n - 1):
        row = z[i, i + 1 :]
        out[pos : pos + row.size] = row
        pos += row.size
    return out


def correlation_map_full_ssm(ssms: Sequence[StandardizedSSM]) -> ModelMatrix:
    """Correlation map over flattened strict-upper-triangle SSM values instead
    of the successive-sentence series (exploratory alternative)."""
    if len(ssms) < 2:
        raise SemvarError("correlation map requires at least 2 models")
    doc_id = _check_same_doc(ssms, "standardized SSMs")
    sizes = {z.n for z in ssms}
    if len(sizes) != 1:
        raise SemvarError(f"sentence counts differ: {sorted(sizes)}")
    models = tuple(z.model for z in ssms)
    flats = [_flat_upper(z.values) for z in ssms]
    m = len(models)
    values = np.eye(m, dtype=np.float64)
    for i in range(m):
        for j in range(i + 1, m):
            values[i, j] = values[j, i] = pearson(flats[i], flats[j])
    return ModelMatrix(kind="correlation", models=models, values=values, doc_id=doc_id)


def write_model_matrix_csv(mm: ModelMatrix, path: str | Path) -> None:
    """CSV layout: `kind,doc_id`, a header row of model names, then one row
    per model with values at 6 decimal places."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow([mm.kind, mm.doc_id])
        writer.writerow([""] + list(mm.models))
        for name, row in zip(mm.models, mm.values):
            writer.writerow([name] + [f"{v:.6f}" for v in row])


def read_model_matrix_csv(path: str | Path) -> ModelMatrix:
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    if len(rows) < 3 or len(rows[0]) != 2:
        raise FormatError(f"bad model-matrix CSV: {path}")
    kind, doc_id = rows[0]
    models = tuple(rows[1][1:])
    values = np.asarray([[float(v) for v in row[1:]] for row in rows[2:]], dtype=np.float64)
    return ModelMatrix(kind=kind, models=models, values=values, doc_id=doc_id)
