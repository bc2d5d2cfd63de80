from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semvar.compare import (
    ModelMatrix,
    agreement_matrices,
    correlation_map,
    correlation_map_full_ssm,
    mean_correlation_map,
    pearson,
    read_model_matrix_csv,
    sign_summary,
    write_model_matrix_csv,
)
from semvar.errors import SemvarError
from semvar.ssm import StandardizedSSM, TimeSeries

from oracles import oracle_agreement, oracle_pearson, oracle_sign_counts


def _ts(values, model="A", doc_id="doc") -> TimeSeries:
    return TimeSeries(model=model, doc_id=doc_id, values=np.asarray(values, dtype=np.float32))


def _z(matrix, model="A", doc_id="doc") -> StandardizedSSM:
    return StandardizedSSM(
        model=model, doc_id=doc_id, values=np.asarray(matrix, dtype=np.float32), mu=0.0, sigma=1.0
    )


def _sign_matrix(rng, n, model, doc_id="doc") -> StandardizedSSM:
    """Symmetric matrix of random nonzero z values."""
    upper = np.where(rng.random((n, n)) < 0.5, -1.0, 1.0) * (0.5 + rng.random((n, n)))
    m = np.triu(upper, 1)
    return _z(m + m.T, model=model, doc_id=doc_id)


class TestPearson:
    def test_self_correlation(self, rng):
        x = rng.normal(size=50)
        assert abs(pearson(x, x) - 1.0) <= 1e-12

    def test_sign_flip(self, rng):
        x = rng.normal(size=50)
        assert abs(pearson(x, -x) + 1.0) <= 1e-12

    def test_hand_computed(self):
        r = pearson([1, 2, 3, 4], [1, 2, 3, 5])
        assert abs(r - 0.98270763) <= 1e-6

    def test_matches_oracle(self, rng):
        x = rng.normal(size=31)
        y = rng.normal(size=31)
        assert abs(pearson(x, y) - oracle_pearson(x.tolist(), y.tolist())) <= 1e-12

    def test_affine_invariance(self, rng):
        x = rng.normal(size=40)
        for a, c in ((2.0, 3.0), (0.25, -7.0)):
            assert abs(pearson(x, a * x + c) - 1.0) <= 1e-9

    def test_zero_variance_rejected(self):
        with pytest.raises(SemvarError, match="zero variance"):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_length_mismatch(self):
        with pytest.raises(SemvarError, match="length mismatch"):
            pearson([1.0, 2.0, 3.0], [1.0, 2.0])

    def test_minimum_length(self):
        with pytest.raises(SemvarError, match="at least 3"):
            pearson([1.0, 2.0], [2.0, 1.0])


class TestCorrelationMap:
    def test_identical_series_all_ones(self):
        values = [0.1, -0.5, 0.9, 0.2]
        mm = correlation_map([("A", _ts(values)), ("B", _ts(values))])
        assert np.allclose(mm.values, 1.0)
        assert mm.kind == "correlation" and mm.doc_id == "doc"

    def test_diagonal_is_exactly_one(self, rng):
        series = [(m, _ts(rng.normal(size=20))) for m in ("A", "B", "C")]
        mm = correlation_map(series)
        assert np.array_equal(np.diagonal(mm.values), np.ones(3))

    def test_three_models_match_pairwise_pearson(self, rng):
        series = {m: _ts(rng.normal(size=25)) for m in ("A", "B", "C")}
        mm = correlation_map(list(series.items()))
        names = list(series)
        for i, a in enumerate(names):
            for j, b in enumerate(names):
                if i != j:
                    expected = pearson(series[a].values, series[b].values)
                    assert abs(mm.values[i, j] - expected) <= 1e-15

    def test_eight_models_shape(self, rng):
        models = ["DC", "I-F", "DB", "RB", "USE", "MPNet", "XLM", "MiniLM"]
        series = [(m, _ts(rng.normal(size=30))) for m in models]
        mm = correlation_map(series)
        assert mm.values.shape == (8, 8)
        assert mm.models == tuple(models)

    def test_permutation_equivariance(self, rng):
        series = [(m, _ts(rng.normal(size=20))) for m in ("A", "B", "C", "D")]
        mm = correlation_map(series)
        perm = [2, 0, 3, 1]
        mm_p = correlation_map([series[i] for i in perm])
        assert np.array_equal(mm_p.values, mm.values[np.ix_(perm, perm)])

    def test_length_mismatch_rejected(self, rng):
        with pytest.raises(SemvarError, match="lengths differ"):
            correlation_map([("A", _ts(rng.normal(size=5))), ("B", _ts(rng.normal(size=6)))])

    def test_document_mismatch_rejected(self, rng):
        with pytest.raises(SemvarError, match="multiple documents"):
            correlation_map(
                [("A", _ts(rng.normal(size=5))), ("B", _ts(rng.normal(size=5), doc_id="other"))]
            )


class TestMeanCorrelationMap:
    def test_single_map_identity(self, rng):
        mm = correlation_map([(m, _ts(rng.normal(size=12))) for m in ("A", "B")])
        mean = mean_correlation_map([mm])
        assert np.array_equal(mean.values, mm.values)
        assert mean.doc_id == "<mean>"

    def test_two_maps_average(self):
        a = ModelMatrix("correlation", ("A", "B"), np.array([[1.0, 0.2], [0.2, 1.0]]), "d1")
        b = ModelMatrix("correlation", ("A", "B"), np.array([[1.0, 0.6], [0.6, 1.0]]), "d2")
        mean = mean_correlation_map([a, b])
        assert mean.values[0, 1] == pytest.approx(0.4, abs=1e-15)

    def test_eighteen_maps(self, rng):
        maps = []
        for d in range(18):
            maps.append(
                correlation_map(
                    [(m, _ts(rng.normal(size=15), doc_id=f"doc{d}")) for m in ("A", "B", "C")]
                )
            )
        mean = mean_correlation_map(maps)
        stacked = np.stack([m.values for m in maps])
        assert np.abs(mean.values - stacked.mean(axis=0)).max() <= 1e-15

    def test_inconsistent_models_rejected(self, rng):
        a = ModelMatrix("correlation", ("A", "B"), np.eye(2), "d1")
        b = ModelMatrix("correlation", ("A", "C"), np.eye(2), "d2")
        with pytest.raises(SemvarError, match="inconsistent"):
            mean_correlation_map([a, b])


class TestSignSummary:
    def test_self_agreement(self, rng):
        za = _sign_matrix(rng, 6, "A")
        zb = _z(za.values.copy(), model="B")
        s = sign_summary(za, zb)
        assert s.pos_neg == 0 and s.neg_pos == 0
        assert s.pos_pos + s.neg_neg == s.total_pairs

    def test_total_disagreement(self, rng):
        za = _sign_matrix(rng, 6, "A")
        zb = _z(-za.values, model="B")
        s = sign_summary(za, zb)
        assert s.pos_pos == 0 and s.neg_neg == 0

    def test_hand_enumerated_four_sentences(self):
        # Upper-triangle signs in pair order (0,1),(0,2),(0,3),(1,2),(1,3),(2,3).
        def from_signs(signs, model):
            m = np.zeros((4, 4))
            pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
            for (i, j), s in zip(pairs, signs):
                m[i, j] = m[j, i] = s
            return _z(m, model=model)

        za = from_signs([+1, +1, -1, -1, +1, -1], "A")
        zb = from_signs([+1, -1, -1, +1, +1, +1], "B")
        s = sign_summary(za, zb)
        assert (s.pos_pos, s.neg_neg, s.pos_neg, s.neg_pos) == (2, 1, 1, 2)
        assert s.total_pairs == 6

    def test_zero_counts_as_negative(self):
        za = _z([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [1.0, -1.0, 0.0]], model="A")
        zb = _z([[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]], model="B")
        s = sign_summary(za, zb)
        # pairs: (0,1): a=0 -> neg, b=+ ; (0,2): a=+, b=+ ; (1,2): a=-, b=+
        assert (s.pos_pos, s.neg_neg, s.pos_neg, s.neg_pos) == (1, 0, 0, 2)

    def test_size_mismatch(self, rng):
        with pytest.raises(SemvarError, match="mismatch"):
            sign_summary(_sign_matrix(rng, 4, "A"), _sign_matrix(rng, 5, "B"))

    def test_matches_oracle(self, rng):
        za = _sign_matrix(rng, 8, "A")
        zb = _sign_matrix(rng, 8, "B")
        s = sign_summary(za, zb)
        expected = oracle_sign_counts(za.values.tolist(), zb.values.tolist())
        assert (s.pos_pos, s.neg_neg, s.pos_neg, s.neg_pos) == expected


class TestAgreementMatrices:
    def test_identical_models(self, rng):
        za = _sign_matrix(rng, 6, "A")
        zb = _z(za.values.copy(), model="B")
        paf, naf, ddaf = agreement_matrices([za, zb])
        assert paf.values[0, 1] + naf.values[0, 1] == pytest.approx(1.0, abs=1e-15)
        assert ddaf.values[0, 1] == 0.0 and ddaf.values[1, 0] == 0.0

    def test_toy_fixture_matches_oracle(self, rng):
        ssms = [_sign_matrix(rng, 5, m) for m in ("A", "B", "C")]
        paf, naf, ddaf = agreement_matrices(ssms)
        o_paf, o_naf, o_ddaf = oracle_agreement([z.values.tolist() for z in ssms])
        assert np.abs(paf.values - np.asarray(o_paf)).max() <= 1e-15
        assert np.abs(naf.values - np.asarray(o_naf)).max() <= 1e-15
        assert np.abs(ddaf.values - np.asarray(o_ddaf)).max() <= 1e-15

    def test_symmetry_and_diagonals(self, rng):
        ssms = [_sign_matrix(rng, 7, m) for m in ("A", "B", "C")]
        paf, naf, ddaf = agreement_matrices(ssms)
        assert np.array_equal(paf.values, paf.values.T)
        assert np.array_equal(naf.values, naf.values.T)
        assert np.array_equal(np.diagonal(ddaf.values), np.zeros(3))
        for i in range(3):
            assert paf.values[i, i] + naf.values[i, i] == 1.0

    def test_majority_positive_model_has_high_paf_diagonal(self):
        n = 5
        m = np.full((n, n), 0.3)
        np.fill_diagonal(m, 0.0)
        m[0, 1] = m[1, 0] = -0.2
        za = _z(m, model="A")
        zb = _z(-m, model="B")
        paf, _, _ = agreement_matrices([za, zb])
        assert paf.values[0, 0] > 0.5
        assert paf.values[1, 1] < 0.5

    @settings(max_examples=40, deadline=None)
    @given(n=st.integers(3, 9), seed=st.integers(0, 2**31 - 1))
    def test_partition_identity_integer_exact(self, n, seed):
        rng = np.random.default_rng(seed)
        za = _sign_matrix(rng, n, "A")
        zb = _sign_matrix(rng, n, "B")
        s = sign_summary(za, zb)
        assert s.pos_pos + s.neg_neg + s.pos_neg + s.neg_pos == s.total_pairs
        assert s.total_pairs == n * (n - 1) // 2


class TestFullSsmCorrelation:
    def test_matches_flattened_pearson(self, rng):
        ssms = [_sign_matrix(rng, 6, m) for m in ("A", "B")]
        mm = correlation_map_full_ssm(ssms)
        iu = np.triu_indices(6, k=1)
        expected = pearson(ssms[0].values[iu], ssms[1].values[iu])
        assert abs(mm.values[0, 1] - expected) <= 1e-12


class TestModelMatrixCsv:
    def test_round_trip(self, rng):
        mm = correlation_map([(m, _ts(rng.normal(size=10))) for m in ("A", "B", "C")])
        import tempfile
        from pathlib import Path

        with tempfile.TemporaryDirectory() as d:
            path = Path(d) / "mm.csv"
            write_model_matrix_csv(mm, path)
            lines = path.read_text().splitlines()
            assert lines[0] == "correlation,doc"
            assert lines[1] == ",A,B,C"
            back = read_model_matrix_csv(path)
            assert back.kind == mm.kind and back.models == mm.models
            assert np.abs(back.values - mm.values).max() <= 1e-6
