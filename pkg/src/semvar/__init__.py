"""Semantic variation analysis for long texts.

Reconstructs a document's semantic structure as sentence-pair similarity
matrices under interchangeable embedding models, quantifies cross-model
agreement, and flags novel sentences by ensemble vote.
"""

from .compare import (
    ModelMatrix,
    PairSignSummary,
    agreement_matrices,
    correlation_map,
    mean_correlation_map,
    pearson,
    sign_summary,
)
from .corpus import (
    Document,
    DocumentStats,
    Sentence,
    corpus_stats,
    load_document,
    segment_sentences,
)
from .embedding import (
    EmbeddingMatrix,
    ProviderConfig,
    embed_document,
    read_embeddings,
    reference_embed,
    write_embeddings,
)
from .errors import FormatError, ProviderError, SemvarError
from .novelty import NoveltyReport, build_report, ensemble_flags, row_novelty
from .pipeline import PipelineConfig, PipelineResult, run_pipeline
from .render import RenderSpec, render_heatmap, render_timeseries
from .ssm import (
    SSM,
    StandardizedSSM,
    TimeSeries,
    build_ssm,
    cosine,
    read_ssm,
    standardize,
    successive_series,
    write_ssm,
)

__version__ = "0.1.0"
