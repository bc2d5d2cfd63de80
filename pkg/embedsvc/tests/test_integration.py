"""End-to-end: the analysis package's remote provider driving this service
over real HTTP, stub encoders standing in for model weights."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from semvar.corpus import load_document
from semvar.embedding import ProviderConfig, embed_document, list_remote_models
from semvar.pipeline import PipelineConfig, run_pipeline

FIXTURE = Path(__file__).resolve().parents[2] / "tests" / "fixtures" / "lighthouse.txt"


class TestRemoteProviderAgainstService:
    def test_embed_document_over_http(self, live_server):
        doc = load_document(FIXTURE)
        provider = ProviderConfig(kind="remote", location=live_server.url, batch_size=16)
        m = embed_document(provider, doc, "S48")
        assert (m.n, m.d) == (doc.n, 48)
        norms = np.linalg.norm(m.values.astype(np.float64), axis=1)
        assert np.abs(norms - 1.0).max() <= 1e-5

    def test_list_models_over_http(self, live_server):
        models = {m["name"]: m["dim"] for m in list_remote_models(live_server.url)}
        assert models == {"S48": 48, "S64": 64}

    def test_full_pipeline_with_remote_providers(self, live_server, tmp_path):
        out = tmp_path / "out"
        config = PipelineConfig(
            documents=(str(FIXTURE),),
            providers=(
                ("S48", ProviderConfig(kind="remote", location=live_server.url, batch_size=8)),
                ("S64", ProviderConfig(kind="remote", location=live_server.url, batch_size=8)),
            ),
            cache_dir=str(out),
        )
        result = run_pipeline(config)
        assert result.exit_code == 0
        assert (out / "compare/lighthouse.correlation.csv").is_file()
        assert (out / "novelty/lighthouse.novelty.json").is_file()

    def test_unknown_model_surfaces_service_error(self, live_server):
        doc = load_document(FIXTURE)
        provider = ProviderConfig(kind="remote", location=live_server.url, batch_size=8)
        from semvar.errors import ProviderError

        with pytest.raises(ProviderError, match="unknown model"):
            embed_document(provider, doc, "missing")
