"""TF-IDF featurization and dense embeddings (external file or TF-IDF fallback)."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from .errors import EmbeddingFormatError
from .textpipe import TokenDoc

logger = logging.getLogger(__name__)

SOURCE_EXTERNAL = "external_file"
SOURCE_FALLBACK = "tfidf_fallback"

DEFAULT_MIN_DF = 2
DEFAULT_SVD_SEED = 42


@dataclass
class TfidfModel:
    """Vocabulary plus smoothed idf weights: idf = ln((1+n)/(1+df)) + 1."""

    vocabulary: dict[str, int]
    idf: np.ndarray
    doc_count: int
    min_df: int

    @property
    def dim(self) -> int:
        return len(self.vocabulary)

    def to_dict(self) -> dict:
        ordered = sorted(self.vocabulary.items(), key=lambda kv: kv[1])
        return {
            "schema_version": 1,
            "vocabulary": [t for t, _ in ordered],
            "idf": [float(v) for v in self.idf],
            "doc_count": self.doc_count,
            "min_df": self.min_df,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TfidfModel":
        return cls(
            vocabulary={t: i for i, t in enumerate(d["vocabulary"])},
            idf=np.asarray(d["idf"], dtype=float),
            doc_count=int(d["doc_count"]),
            min_df=int(d["min_df"]),
        )


@dataclass
class SparseVec:
    """L2-normalized tf-idf row; indices strictly increasing, values positive."""

    indices: np.ndarray
    values: np.ndarray
    dim: int

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out


def fit_tfidf(docs: Sequence[TokenDoc], min_df: int = DEFAULT_MIN_DF) -> TfidfModel:
    """Build the vocabulary (document frequency >= min_df) and idf weights."""
    if min_df < 1:
        raise ValueError("min_df must be >= 1")
    n_docs = len(docs)
    if n_docs == 0 or all(not d.tokens for d in docs):
        raise ValueError("need at least one nonempty doc")
    df: dict[str, int] = {}
    for doc in docs:
        for token in set(doc.tokens):
            df[token] = df.get(token, 0) + 1
    vocab_tokens = sorted(t for t, c in df.items() if c >= min_df)
    if not vocab_tokens:
        raise ValueError(f"vocabulary is empty after min_df={min_df} filtering")
    vocabulary = {t: i for i, t in enumerate(vocab_tokens)}
    idf = np.array(
        [math.log((1 + n_docs) / (1 + df[t])) + 1.0 for t in vocab_tokens], dtype=float
    )
    return TfidfModel(vocabulary=vocabulary, idf=idf, doc_count=n_docs, min_df=min_df)


def transform_tfidf(model: TfidfModel, doc: TokenDoc) -> SparseVec:
    """Raw term counts times idf, L2-normalized; OOV tokens are ignored.

    A doc with no in-vocabulary tokens yields an all-zero vector (exempt from
    the unit-norm invariant).
    """
    counts: dict[int, int] = {}
    for token in doc.tokens:
        j = model.vocabulary.get(token)
        if j is not None:
            counts[j] = counts.get(j, 0) + 1
    if not counts:
        return SparseVec(indices=np.empty(0, dtype=int), values=np.empty(0), dim=model.dim)
    indices = np.array(sorted(counts), dtype=int)
    values = np.array([counts[j] for j in indices], dtype=float) * model.idf[indices]
    values /= np.linalg.norm(values)
    return SparseVec(indices=indices, values=values, dim=model.dim)


def tfidf_matrix(model: TfidfModel, docs: Sequence[TokenDoc]) -> sparse.csr_matrix:
    """Stack transform_tfidf rows into a CSR matrix (rows follow doc order)."""
    data, indices, indptr = [], [], [0]
    for doc in docs:
        vec = transform_tfidf(model, doc)
        data.extend(vec.values)
        indices.extend(vec.indices)
        indptr.append(len(indices))
    return sparse.csr_matrix(
        (np.asarray(data), np.asarray(indices, dtype=int), np.asarray(indptr, dtype=int)),
        shape=(len(docs), model.dim),
    )


@dataclass
class EmbeddingSet:
    """Dense vectors keyed by post id, all sharing one dimension."""

    dim: int
    vectors: dict[str, np.ndarray]
    source: str

    def matrix(self, ids: Sequence[str]) -> np.ndarray:
        return np.stack([self.vectors[i] for i in ids])


def load_embeddings(
    path,
    docs: Sequence[TokenDoc] | None = None,
    strict: bool = False,
) -> EmbeddingSet:
    """Read id -> vector rows from JSONL ({"id":..., "v":[...]}) or CSV (id,v0..).

    All rows must share one dimension (error names the offending id).  When
    `docs` is given, ids missing from the file are reported; strict mode
    turns any missing id into an error.
    """
    path = Path(path)
    if not path.exists():
        raise EmbeddingFormatError(f"{path}: no such file")
    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None

    def add(post_id: str, values: Sequence[float]) -> None:
        nonlocal dim
        vec = np.asarray(values, dtype=float)
        if vec.ndim != 1 or len(vec) == 0:
            raise EmbeddingFormatError(f"{path}: id {post_id!r} has no vector")
        if not np.all(np.isfinite(vec)):
            raise EmbeddingFormatError(f"{path}: id {post_id!r} has NaN/Inf components")
        if dim is None:
            dim = len(vec)
        elif len(vec) != dim:
            raise EmbeddingFormatError(
                f"{path}: id {post_id!r} has dim {len(vec)}, expected {dim}"
            )
        vectors[post_id] = vec

    if path.suffix.lower() == ".csv":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or header[0] != "id":
                raise EmbeddingFormatError(f"{path}: CSV header must start with 'id'")
            for row in reader:
                if not row:
                    continue
                add(row[0], [float(v) for v in row[1:]])
    else:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    add(str(record["id"]), record["v"])
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise EmbeddingFormatError(f"{path}:{lineno}: {exc}") from exc

    if dim is None:
        raise EmbeddingFormatError(f"{path}: file contains no vectors")
    if docs is not None:
        missing = [d.post_id for d in docs if d.post_id not in vectors]
        if missing:
            msg = f"{path}: {len(missing)} ids missing from embedding file: {missing[:10]}"
            if strict:
                raise EmbeddingFormatError(msg)
            logger.warning(msg)
    return EmbeddingSet(dim=dim, vectors=vectors, source=SOURCE_EXTERNAL)


def save_embeddings(emb: EmbeddingSet, path) -> None:
    """Write JSONL rows sorted by id; floats round-trip exactly."""
    with open(path, "w", encoding="utf-8") as fh:
        for post_id in sorted(emb.vectors):
            fh.write(json.dumps({"id": post_id, "v": [float(v) for v in emb.vectors[post_id]]}))
            fh.write("\n")


def _randomized_svd(A: sparse.csr_matrix, n_components: int, seed: int,
                    n_oversample: int = 10, n_iter: int = 4) -> np.ndarray:
    """Right singular vectors (V x n_components) by randomized subspace iteration."""
    n, V = A.shape
    width = min(n_components + n_oversample, min(n, V))
    rng = np.random.default_rng(seed)
    Y = A @ rng.standard_normal((V, width))
    Q, _ = np.linalg.qr(Y)
    for _ in range(n_iter):
        Z, _ = np.linalg.qr(A.T @ Q)
        Q, _ = np.linalg.qr(A @ Z)
    B = (A.T @ Q).T
    _, _, Vt = np.linalg.svd(B, full_matrices=False)
    k = min(n_components, Vt.shape[0])
    components = np.zeros((V, n_components))
    components[:, :k] = Vt[:k].T
    return components


@dataclass
class FallbackProjector:
    """Truncated-SVD projection of TF-IDF rows into a dense space.

    Fitted on the ego corpus once; alter docs reuse the same components so
    both sides live in one embedding space.
    """

    components: np.ndarray
    dim: int
    seed: int

    @classmethod
    def fit(cls, model: TfidfModel, docs: Sequence[TokenDoc], dim: int,
            seed: int = DEFAULT_SVD_SEED) -> "FallbackProjector":
        if dim < 1:
            raise ValueError("dim must be >= 1")
        if dim > model.dim:
            raise ValueError(f"dim {dim} exceeds vocabulary size {model.dim}")
        A = tfidf_matrix(model, docs)
        return cls(components=_randomized_svd(A, dim, seed), dim=dim, seed=seed)

    def transform(self, model: TfidfModel, docs: Sequence[TokenDoc]) -> EmbeddingSet:
        A = tfidf_matrix(model, docs)
        rows = np.asarray(A @ self.components)
        norms = np.linalg.norm(rows, axis=1)
        nonzero = norms > 0
        rows[nonzero] /= norms[nonzero, None]
        vectors = {doc.post_id: rows[i] for i, doc in enumerate(docs)}
        return EmbeddingSet(dim=self.dim, vectors=vectors, source=SOURCE_FALLBACK)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "dim": self.dim,
            "seed": self.seed,
            "components": [[float(v) for v in row] for row in self.components],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FallbackProjector":
        return cls(components=np.asarray(d["components"], dtype=float),
                   dim=int(d["dim"]), seed=int(d["seed"]))


def fallback_embeddings(
    model: TfidfModel,
    docs: Sequence[TokenDoc],
    dim: int,
    seed: int = DEFAULT_SVD_SEED,
) -> EmbeddingSet:
    """Deterministic embedding stand-in when no encoder output is provided."""
    return FallbackProjector.fit(model, docs, dim, seed=seed).transform(model, docs)
