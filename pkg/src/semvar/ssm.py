"""Semantic similarity matrices: cosine SSM, z-score standardization, and the
successive-sentence time series.

All accumulation happens in float64; matrices are stored dense float32,
row-major. Values are computed for the upper triangle and mirrored, so
symmetry is bitwise exact.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embedding import EmbeddingMatrix, pack_semv1, unpack_semv1, validate_model_id
from .errors import FormatError, SemvarError

_BLOCK_ROWS = 1024

FLAG_RAW = 0
FLAG_STANDARDIZED = 1


def _check_square_f32(values: np.ndarray, what: str) -> None:
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise SemvarError(f"{what} must be square")
    if values.dtype != np.float32:
        raise SemvarError(f"{what} must be float32")
    if not np.isfinite(values).all():
        raise SemvarError(f"{what} contains non-finite entries")


@dataclass(frozen=True)
class SSM:
    """Raw N x N cosine similarity matrix for one (document, model) pair."""

    model: str
    doc_id: str
    values: np.ndarray

    def __post_init__(self) -> None:
        validate_model_id(self.model)
        _check_square_f32(self.values, "SSM")
        d = np.diagonal(self.values)
        if d.size and float(np.abs(d - 1.0).max()) > 1e-5:
            raise SemvarError("SSM diagonal deviates from 1")
        if self.values.size and float(np.abs(self.values).max()) > 1.0 + 1e-6:
            raise SemvarError("SSM entries outside [-1, 1]")

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class StandardizedSSM:
    """Z-scored SSM plus the population statistics that produced it."""

    model: str
    doc_id: str
    values: np.ndarray
    mu: float
    sigma: float

    def __post_init__(self) -> None:
        validate_model_id(self.model)
        _check_square_f32(self.values, "standardized SSM")

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class TimeSeries:
    """First superdiagonal of a standardized SSM: similarity of each sentence
    to the next."""

    model: str
    doc_id: str
    values: np.ndarray

    def __post_init__(self) -> None:
        validate_model_id(self.model)
        if self.values.ndim != 1 or self.values.dtype != np.float32:
            raise SemvarError("time series must be a 1-D float32 array")

    def __len__(self) -> int:
        return self.values.shape[0]


def cosine(u, v) -> float:
    """Cosine similarity with float64 accumulation, clamped to [-1, 1]."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise SemvarError("length mismatch")
    nu = np.sqrt(np.dot(u, u))
    nv = np.sqrt(np.dot(v, v))
    if nu == 0.0 or nv == 0.0:
        raise SemvarError("zero-norm input")
    return float(min(1.0, max(-1.0, np.dot(u, v) / (nu * nv))))


def _symmetrize_from_upper(s: np.ndarray) -> np.ndarray:
    """Mirror the strict upper triangle into the lower one, bitwise."""
    return np.triu(s) + np.triu(s, 1).T


def build_ssm(m: EmbeddingMatrix) -> SSM:
    """All-pairs cosine similarity of the embedding rows.

    Rows are normalized once in float64 so the pairwise step is a single
    matrix product; the result is mirrored from the upper triangle and
    stored float32.
    """
    if m.n < 2:
        raise SemvarError("SSM requires at least 2 sentences")
    a = m.values.astype(np.float64)
    norms = np.sqrt((a * a).sum(axis=1))
    a /= norms[:, None]
    s = (a @ a.T).astype(np.float32)
    np.clip(s, -1.0, 1.0, out=s)
    s = _symmetrize_from_upper(s)
    return SSM(model=m.model, doc_id=m.doc_id, values=s)


def _population_stats(values: np.ndarray, include_diagonal: bool) -> tuple[float, float]:
    """Two-pass population mean/std over the strict upper triangle, or over
    the full matrix when ``include_diagonal`` is set. Blockwise float64."""
    n = values.shape[0]
    diag = np.diagonal(values).astype(np.float64)

    total = 0.0
    for start in range(0, n, _BLOCK_ROWS):
        total += float(values[start : start + _BLOCK_ROWS].sum(dtype=np.float64))
    if include_diagonal:
        count = n * n
        mu = total / count
    else:
        count = n * (n - 1) // 2
        mu = (total - float(diag.sum())) / 2.0 / count

    total_sq = 0.0
    for start in range(0, n, _BLOCK_ROWS):
        d = values[start : start + _BLOCK_ROWS].astype(np.float64) - mu
        total_sq += float((d * d).sum())
    if include_diagonal:
        var = total_sq / count
    else:
        dd = diag - mu
        var = (total_sq - float((dd * dd).sum())) / 2.0 / count
    return mu, float(np.sqrt(var))


def standardize(s: SSM, include_diagonal: bool = False) -> StandardizedSSM:
    """Map the SSM to z-scores: zero mean, unit population variance.

    The population is the strict upper triangle by default (the diagonal is
    constantly 1 and the lower triangle is redundant); ``include_diagonal``
    switches to the full-matrix population for comparison. Every entry,
    diagonal included, is transformed.
    """
    if s.n < 3:
        raise SemvarError("standardize requires at least 3 sentences")
    mu, sigma = _population_stats(s.values, include_diagonal)
    if sigma < 1e-9:
        raise SemvarError("degenerate sigma: all pairs equally similar")

    n = s.n
    z = np.empty((n, n), dtype=np.float32)
    for start in range(0, n, _BLOCK_ROWS):
        block = s.values[start : start + _BLOCK_ROWS].astype(np.float64)
        z[start : start + _BLOCK_ROWS] = ((block - mu) / sigma).astype(np.float32)
    return StandardizedSSM(model=s.model, doc_id=s.doc_id, values=z, mu=mu, sigma=sigma)


def successive_series(z: StandardizedSSM) -> TimeSeries:
    """values[t] = z[t, t+1], the similarity of sentence t to sentence t+1."""
    if z.n < 2:
        raise SemvarError("time series requires at least 2 sentences")
    return TimeSeries(
        model=z.model, doc_id=z.doc_id, values=np.diagonal(z.values, offset=1).copy()
    )


def write_ssm(s: SSM | StandardizedSSM, path: str | Path) -> None:
    if isinstance(s, StandardizedSSM):
        blob = pack_semv1(
            s.model, s.doc_id, s.values, flag=FLAG_STANDARDIZED, mu_sigma=(s.mu, s.sigma)
        )
    else:
        blob = pack_semv1(s.model, s.doc_id, s.values, flag=FLAG_RAW)
    Path(path).write_bytes(blob)


def read_ssm(path: str | Path) -> SSM | StandardizedSSM:
    model, doc_id, values, flag, mu, sigma = unpack_semv1(path, with_flag=True)
    if flag == FLAG_STANDARDIZED:
        return StandardizedSSM(model=model, doc_id=doc_id, values=values, mu=mu, sigma=sigma)
    if flag == FLAG_RAW:
        return SSM(model=model, doc_id=doc_id, values=values)
    raise FormatError(f"unknown SSM flag {flag}: {path}")


def write_timeseries_csv(ts: TimeSeries, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["index", "z"])
        for t, v in enumerate(ts.values):
            writer.writerow([t, f"{float(v):.6f}"])


def read_timeseries_csv(path: str | Path, model: str = "series", doc_id: str = "doc") -> TimeSeries:
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    if not rows or rows[0] != ["index", "z"]:
        raise FormatError(f"bad time-series header: {path}")
    values = np.asarray([float(r[1]) for r in rows[1:]], dtype=np.float32)
    return TimeSeries(model=model, doc_id=doc_id, values=values)
