from __future__ import annotations

import numpy as np
import pytest
from fastapi.testclient import TestClient

from embedsvc.app import create_app
from embedsvc.registry import Registry, StubEncoder, parse_model_specs

from conftest import stub_registry


@pytest.fixture
def client() -> TestClient:
    return TestClient(create_app(stub_registry()), raise_server_exceptions=False)


class TestModelsEndpoint:
    def test_lists_registered_models(self, client):
        payload = client.get("/models").json()
        by_name = {m["name"]: m for m in payload["models"]}
        assert by_name["S48"]["dim"] == 48
        assert by_name["S64"]["dim"] == 64
        assert by_name["S48"]["pooling"] == "mean"
        assert by_name["S48"]["source"] == "stub:48"


class TestEmbedEndpoint:
    def test_shape_contract(self, client):
        resp = client.post(
            "/embed", json={"model": "S48", "sentences": ["one sentence", "and another"]}
        )
        assert resp.status_code == 200
        payload = resp.json()
        assert payload["model"] == "S48"
        assert payload["dim"] == 48
        assert len(payload["vectors"]) == 2
        assert all(len(v) == 48 for v in payload["vectors"])

    def test_same_sentence_twice_identical(self, client):
        resp = client.post(
            "/embed", json={"model": "S64", "sentences": ["repeat me", "repeat me"]}
        )
        v = resp.json()["vectors"]
        assert v[0] == v[1]

    def test_order_matches_request(self, client):
        sentences = ["alpha beta", "gamma", "alpha beta", "delta epsilon"]
        resp = client.post("/embed", json={"model": "S48", "sentences": sentences})
        vectors = resp.json()["vectors"]
        assert vectors[0] == vectors[2]
        assert vectors[0] != vectors[1] != vectors[3]
        encoder = StubEncoder("S48", 48)
        expected = encoder.encode([sentences[1]])[0]
        assert np.abs(np.asarray(vectors[1], dtype=np.float32) - expected).max() == 0

    def test_empty_sentence_handled(self, client):
        resp = client.post("/embed", json={"model": "S48", "sentences": [""]})
        assert resp.status_code == 200
        assert len(resp.json()["vectors"]) == 1

    def test_unknown_model_404_with_error_body(self, client):
        resp = client.post("/embed", json={"model": "nope", "sentences": ["x"]})
        assert resp.status_code == 404
        assert "unknown model" in resp.json()["error"]

    def test_malformed_body_400_with_error_body(self, client):
        resp = client.post("/embed", json={"model": "S48"})
        assert resp.status_code == 400
        assert "error" in resp.json()

    def test_invalid_json_400(self, client):
        resp = client.post(
            "/embed", content=b"{not json", headers={"Content-Type": "application/json"}
        )
        assert resp.status_code == 400
        assert "error" in resp.json()

    def test_inference_failure_500_with_error_body(self):
        class Exploding:
            dim = 8
            pooling = "mean"
            source = "boom"
            max_seq_length = 512

            def encode(self, sentences):
                raise RuntimeError("boom")

        registry = Registry()
        registry.add("bad", Exploding())
        client = TestClient(create_app(registry), raise_server_exceptions=False)
        resp = client.post("/embed", json={"model": "bad", "sentences": ["x"]})
        assert resp.status_code == 500
        assert "boom" in resp.json()["error"]


class TestRegistry:
    def test_parse_model_specs(self):
        pairs = parse_model_specs("MiniLM=sentence-transformers/all-MiniLM-L6-v2,T=stub:8")
        assert pairs == [
            ("MiniLM", "sentence-transformers/all-MiniLM-L6-v2"),
            ("T", "stub:8"),
        ]

    def test_parse_rejects_garbage(self):
        with pytest.raises(ValueError, match="bad model spec"):
            parse_model_specs("nonsense")

    def test_duplicate_names_rejected(self):
        registry = Registry()
        registry.add_source("A", "stub:8")
        with pytest.raises(ValueError, match="duplicate"):
            registry.add_source("A", "stub:16")

    def test_stub_unit_norm_and_determinism(self):
        encoder = StubEncoder("S", 32)
        a = encoder.encode(["the tide returns", "the tide returns"])
        assert np.array_equal(a[0], a[1])
        assert abs(float(np.linalg.norm(a[0].astype(np.float64))) - 1.0) <= 1e-6

    def test_row_count_guard(self):
        class Short:
            dim = 4
            pooling = "mean"
            source = "short"
            max_seq_length = 512

            def encode(self, sentences):
                return np.zeros((len(sentences) - 1, 4), dtype=np.float32)

        registry = Registry()
        registry.add("short", Short())
        with pytest.raises(RuntimeError, match="returned"):
            registry.encode("short", ["a", "b"])
