"""egoflux: topic-level influence analysis of an ego account's post stream.

The package walks one pipeline: ingest posts, clean and phrase-merge text,
featurize (TF-IDF plus dense embeddings), cluster the ego's posts into topics
with k-medoids, train a linear classifier to carry those topics onto alter
posts, bin everything into weekly count series, and test each (alter, topic)
pair for Granger causality of the alter's series onto the ego's.
"""

from .bundle import ModelBundle
from .classifier import EvalReport, LinearClassifier, TrainConfig, evaluate, predict, train
from .corpus import (
    AlterRanking,
    Corpus,
    IngestResult,
    Post,
    canonical_handle,
    load_corpus,
    parse_timestamp,
    rank_alters,
)
from .errors import (
    CorpusFormatError,
    DegenerateSeriesError,
    EgofluxError,
    EmbeddingFormatError,
    InsufficientDataError,
    NonStationarizableError,
    SingularDesignError,
)
from .features import (
    EmbeddingSet,
    FallbackProjector,
    SparseVec,
    TfidfModel,
    fallback_embeddings,
    fit_tfidf,
    load_embeddings,
    save_embeddings,
    tfidf_matrix,
    transform_tfidf,
)
from .pipeline import PipelineConfig, PipelineResult, TopicFit, classify_corpus, fit_topics, run_pipeline
from .report import ReportBundle, emit_heatmap_data, emit_matrix_csv, emit_report_bundle, emit_run_report
from .series import TopicSeries, WeekIndex, bin_posts, build_week_index, read_series_csv, write_series_csv
from .stats import (
    AdfResult,
    CausalityMatrix,
    GrangerResult,
    OlsFit,
    PairOutcome,
    adf_test,
    bh_adjust,
    causality_scan,
    difference,
    f_sf,
    granger_test,
    make_stationary_pair,
    ols,
)
from .synth import AlterSpec, Coupling, DetectionScore, SynthSpec, generate_series, score_detection
from .textpipe import (
    PhraseModel,
    PhrasePipeline,
    TokenDoc,
    apply_phrases,
    build_token_docs,
    clean,
    fit_phrase_pipeline,
    fit_phrases,
    tokenize,
)
from .topics import (
    Clustering,
    DistanceMatrix,
    KSelection,
    TopicSummary,
    cosine_distance_matrix,
    kmedoids,
    select_k,
    silhouette,
    summarize_topics,
)

__version__ = "0.1.0"

__all__ = [
    "AdfResult",
    "AlterRanking",
    "AlterSpec",
    "CausalityMatrix",
    "Clustering",
    "Corpus",
    "CorpusFormatError",
    "Coupling",
    "DegenerateSeriesError",
    "DetectionScore",
    "DistanceMatrix",
    "EgofluxError",
    "EmbeddingFormatError",
    "EmbeddingSet",
    "EvalReport",
    "FallbackProjector",
    "GrangerResult",
    "IngestResult",
    "InsufficientDataError",
    "KSelection",
    "LinearClassifier",
    "ModelBundle",
    "NonStationarizableError",
    "OlsFit",
    "PairOutcome",
    "PhraseModel",
    "PhrasePipeline",
    "PipelineConfig",
    "PipelineResult",
    "Post",
    "ReportBundle",
    "SingularDesignError",
    "SparseVec",
    "SynthSpec",
    "TfidfModel",
    "TokenDoc",
    "TopicFit",
    "TopicSeries",
    "TopicSummary",
    "TrainConfig",
    "WeekIndex",
    "adf_test",
    "apply_phrases",
    "bh_adjust",
    "bin_posts",
    "build_token_docs",
    "build_week_index",
    "canonical_handle",
    "causality_scan",
    "classify_corpus",
    "clean",
    "cosine_distance_matrix",
    "difference",
    "emit_heatmap_data",
    "emit_matrix_csv",
    "emit_report_bundle",
    "emit_run_report",
    "evaluate",
    "f_sf",
    "fallback_embeddings",
    "fit_phrase_pipeline",
    "fit_phrases",
    "fit_tfidf",
    "fit_topics",
    "granger_test",
    "kmedoids",
    "load_corpus",
    "load_embeddings",
    "make_stationary_pair",
    "ols",
    "parse_timestamp",
    "predict",
    "rank_alters",
    "read_series_csv",
    "run_pipeline",
    "save_embeddings",
    "score_detection",
    "select_k",
    "silhouette",
    "summarize_topics",
    "tfidf_matrix",
    "tokenize",
    "train",
    "transform_tfidf",
    "write_series_csv",
]
