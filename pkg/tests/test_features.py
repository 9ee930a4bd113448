"""TF-IDF vectors, embedding file IO, and the SVD fallback projector."""

import json
import math

import numpy as np
import pytest
from scipy.stats import spearmanr

from egoflux.errors import EmbeddingFormatError
from egoflux.features import (
    SOURCE_EXTERNAL,
    SOURCE_FALLBACK,
    EmbeddingSet,
    FallbackProjector,
    TfidfModel,
    fallback_embeddings,
    fit_tfidf,
    load_embeddings,
    save_embeddings,
    tfidf_matrix,
    transform_tfidf,
)
from egoflux.textpipe import TokenDoc


def docs_of(*token_lists):
    return [TokenDoc(post_id=f"d{i}", tokens=list(t)) for i, t in enumerate(token_lists)]


class TestFitTfidf:
    def test_two_doc_fixture_idf(self):
        # idf(t) = ln((1+n)/(1+df)) + 1 with n=2 docs
        model = fit_tfidf(docs_of(["a", "b"], ["a", "c"]), min_df=1)
        assert model.vocabulary == {"a": 0, "b": 1, "c": 2}
        assert model.idf[model.vocabulary["a"]] == pytest.approx(1.0, abs=1e-12)
        assert model.idf[model.vocabulary["b"]] == pytest.approx(
            math.log(3 / 2) + 1, abs=1e-12
        )
        assert model.idf[model.vocabulary["b"]] == pytest.approx(1.405465, abs=1e-6)

    def test_vocabulary_sorted_alphabetically(self):
        model = fit_tfidf(docs_of(["zeta", "alpha", "mid"]), min_df=1)
        assert list(model.vocabulary) == ["alpha", "mid", "zeta"]
        assert list(model.vocabulary.values()) == [0, 1, 2]

    def test_min_df_filters_rare_tokens(self):
        model = fit_tfidf(docs_of(["a", "b"], ["a", "c"], ["a"]), min_df=2)
        assert set(model.vocabulary) == {"a"}

    def test_min_df_counts_docs_not_occurrences(self):
        # "b" appears 3 times but only in one doc
        model = fit_tfidf(docs_of(["b", "b", "b"], ["a"], ["a"]), min_df=2)
        assert set(model.vocabulary) == {"a"}

    def test_errors(self):
        with pytest.raises(ValueError):
            fit_tfidf(docs_of(["a"]), min_df=0)
        with pytest.raises(ValueError):
            fit_tfidf(docs_of([], []))
        with pytest.raises(ValueError):
            fit_tfidf(docs_of(["a"], ["b"]), min_df=2)

    def test_roundtrip_dict(self):
        model = fit_tfidf(docs_of(["a", "b"], ["a", "c"]), min_df=1)
        again = TfidfModel.from_dict(model.to_dict())
        assert again.vocabulary == model.vocabulary
        np.testing.assert_allclose(again.idf, model.idf)
        assert again.doc_count == model.doc_count
        assert again.min_df == model.min_df


class TestTransformTfidf:
    def setup_method(self):
        self.model = fit_tfidf(docs_of(["a", "b"], ["a", "c"]), min_df=1)

    def test_fixture_values(self):
        vec = transform_tfidf(self.model, TokenDoc("q", ["a", "a", "b"])).to_dense()
        assert vec[self.model.vocabulary["a"]] == pytest.approx(0.818180, abs=1e-6)
        assert vec[self.model.vocabulary["b"]] == pytest.approx(0.574961, abs=1e-6)
        assert vec[self.model.vocabulary["c"]] == 0.0

    def test_unit_norm(self):
        vec = transform_tfidf(self.model, TokenDoc("q", ["a", "b", "c", "c"]))
        assert np.linalg.norm(vec.to_dense()) == pytest.approx(1.0, abs=1e-9)

    def test_oov_ignored(self):
        with_oov = transform_tfidf(self.model, TokenDoc("q", ["a", "zzz"])).to_dense()
        without = transform_tfidf(self.model, TokenDoc("q", ["a"])).to_dense()
        np.testing.assert_allclose(with_oov, without)

    def test_empty_doc_zero_vector(self):
        vec = transform_tfidf(self.model, TokenDoc("q", []))
        assert vec.to_dense().sum() == 0.0

    def test_matrix_rows_match_transforms(self):
        docs = docs_of(["a", "b"], ["c"], [])
        mat = tfidf_matrix(self.model, docs)
        assert mat.shape == (3, self.model.dim)
        for i, doc in enumerate(docs):
            np.testing.assert_allclose(
                np.asarray(mat[i].todense()).ravel(),
                transform_tfidf(self.model, doc).to_dense(),
            )


class TestEmbeddingIO:
    def _emb(self):
        return EmbeddingSet(
            dim=2,
            vectors={"p1": np.array([1.0, 0.0]), "p2": np.array([0.5, 0.5])},
            source=SOURCE_EXTERNAL,
        )

    def test_jsonl_roundtrip(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        save_embeddings(self._emb(), path)
        loaded = load_embeddings(path)
        assert set(loaded.vectors) == {"p1", "p2"}
        np.testing.assert_allclose(loaded.vectors["p2"], [0.5, 0.5])
        assert loaded.dim == 2

    def test_jsonl_rows_sorted_by_id(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        save_embeddings(self._emb(), path)
        ids = [json.loads(line)["id"] for line in path.read_text().splitlines()]
        assert ids == sorted(ids)

    def test_csv_load(self, tmp_path):
        path = tmp_path / "emb.csv"
        path.write_text("id,v0,v1\np1,1.0,0.0\np2,0.5,0.5\n", encoding="utf-8")
        loaded = load_embeddings(path)
        assert loaded.dim == 2
        np.testing.assert_allclose(loaded.vectors["p1"], [1.0, 0.0])

    def test_dim_mismatch_names_id(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        path.write_text(
            '{"id": "ok", "v": [1.0, 2.0]}\n{"id": "bad", "v": [1.0]}\n',
            encoding="utf-8",
        )
        with pytest.raises(EmbeddingFormatError, match="bad"):
            load_embeddings(path)

    def test_nan_rejected(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        path.write_text('{"id": "p1", "v": [1.0, NaN]}\n', encoding="utf-8")
        with pytest.raises(EmbeddingFormatError, match="p1"):
            load_embeddings(path)

    def test_strict_missing_doc_id(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        path.write_text('{"id": "p1", "v": [1.0, 0.0]}\n', encoding="utf-8")
        docs = [TokenDoc("p1", ["x"]), TokenDoc("p2", ["y"])]
        with pytest.raises(EmbeddingFormatError, match="p2"):
            load_embeddings(path, docs=docs, strict=True)
        loaded = load_embeddings(path, docs=docs, strict=False)
        assert set(loaded.vectors) == {"p1"}

    def test_missing_file(self, tmp_path):
        with pytest.raises(EmbeddingFormatError):
            load_embeddings(tmp_path / "nope.jsonl")


class TestFallbackProjector:
    def _fit_corpus(self, rng, n_docs=40, vocab=12, doc_len=8):
        words = [f"w{i:02d}" for i in range(vocab)]
        return [
            TokenDoc(f"d{i}", list(rng.choice(words, size=doc_len)))
            for i in range(n_docs)
        ]

    def test_full_rank_preserves_cosines(self):
        rng = np.random.default_rng(0)
        docs = self._fit_corpus(rng)
        model = fit_tfidf(docs, min_df=1)
        emb = fallback_embeddings(model, docs, dim=model.dim)
        dense = tfidf_matrix(model, docs).toarray()
        low = emb.matrix([d.post_id for d in docs])
        for i in range(0, 40, 7):
            for j in range(1, 40, 11):
                expected = float(dense[i] @ dense[j])
                got = float(low[i] @ low[j])
                assert got == pytest.approx(expected, abs=1e-6)

    def test_reduced_rank_correlates(self):
        rng = np.random.default_rng(1)
        docs = self._fit_corpus(rng, n_docs=60, vocab=20)
        model = fit_tfidf(docs, min_df=1)
        emb = fallback_embeddings(model, docs, dim=10)
        dense = tfidf_matrix(model, docs).toarray()
        low = emb.matrix([d.post_id for d in docs])
        full_cos, low_cos = [], []
        for i in range(60):
            for j in range(i + 1, 60):
                full_cos.append(float(dense[i] @ dense[j]))
                low_cos.append(float(low[i] @ low[j]))
        rho = spearmanr(full_cos, low_cos).statistic
        assert rho > 0.8

    def test_rows_unit_norm_and_source(self):
        rng = np.random.default_rng(2)
        docs = self._fit_corpus(rng)
        model = fit_tfidf(docs, min_df=1)
        emb = fallback_embeddings(model, docs, dim=6)
        assert emb.source == SOURCE_FALLBACK
        for vec in emb.vectors.values():
            assert np.linalg.norm(vec) == pytest.approx(1.0, abs=1e-9)

    def test_empty_doc_stays_zero(self):
        docs = docs_of(["a", "b"], ["a", "c"], [])
        model = fit_tfidf(docs, min_df=1)
        emb = fallback_embeddings(model, docs, dim=2)
        assert np.linalg.norm(emb.vectors["d2"]) == 0.0

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        docs = self._fit_corpus(rng)
        model = fit_tfidf(docs, min_df=1)
        a = fallback_embeddings(model, docs, dim=5, seed=42)
        b = fallback_embeddings(model, docs, dim=5, seed=42)
        for pid in a.vectors:
            np.testing.assert_array_equal(a.vectors[pid], b.vectors[pid])

    def test_alter_side_reuses_components(self):
        rng = np.random.default_rng(4)
        fit_docs = self._fit_corpus(rng)
        model = fit_tfidf(fit_docs, min_df=1)
        projector = FallbackProjector.fit(model, fit_docs, dim=5)
        again = FallbackProjector.from_dict(projector.to_dict())
        new_docs = docs_of(["w00", "w01", "w02"])
        out1 = projector.transform(model, new_docs)
        out2 = again.transform(model, new_docs)
        np.testing.assert_allclose(out1.vectors["d0"], out2.vectors["d0"], atol=1e-12)

    def test_dim_larger_than_vocab_rejected(self):
        docs = docs_of(["a", "b"], ["a", "b"])
        model = fit_tfidf(docs, min_df=1)
        with pytest.raises(ValueError):
            FallbackProjector.fit(model, docs, dim=10)

    def test_disjoint_vocab_near_orthogonal(self):
        rng = np.random.default_rng(5)
        docs_a = [TokenDoc(f"a{i}", list(rng.choice(["x1", "x2", "x3"], 6))) for i in range(20)]
        docs_b = [TokenDoc(f"b{i}", list(rng.choice(["y1", "y2", "y3"], 6))) for i in range(20)]
        docs = docs_a + docs_b
        model = fit_tfidf(docs, min_df=1)
        emb = fallback_embeddings(model, docs, dim=4)
        for i in range(0, 20, 5):
            for j in range(0, 20, 5):
                cos = float(emb.vectors[f"a{i}"] @ emb.vectors[f"b{j}"])
                assert abs(cos) < 0.05


class TestEmbeddingSet:
    def test_matrix_orders_rows_by_ids(self):
        emb = EmbeddingSet(
            dim=2,
            vectors={"a": np.array([1.0, 2.0]), "b": np.array([3.0, 4.0])},
            source=SOURCE_EXTERNAL,
        )
        mat = emb.matrix(["b", "a"])
        np.testing.assert_allclose(mat, [[3.0, 4.0], [1.0, 2.0]])
