"""End-to-end run: corpus -> topics -> classifier -> series -> causality -> report."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import classifier as clf_mod
from .bundle import ModelBundle
from .corpus import AlterRanking, Corpus, rank_alters
from .features import (
    EmbeddingSet,
    FallbackProjector,
    fit_tfidf,
    load_embeddings,
)
from .report import ReportBundle
from .series import TopicSeries, bin_posts, build_week_index
from .stats import (
    CORRECTION_NONE,
    DEFAULT_ALPHA,
    DEFAULT_MAX_DIFF,
    DEFAULT_MAX_LAG,
    CausalityMatrix,
    causality_scan,
)
from .textpipe import (
    DEFAULT_MIN_COUNT,
    DEFAULT_THRESHOLD,
    build_token_docs,
    fit_phrase_pipeline,
)
from .topics import (
    Clustering,
    cosine_distance_matrix,
    kmedoids,
    select_k,
    silhouette,
    summarize_topics,
)

logger = logging.getLogger(__name__)

DEFAULT_EMBED_DIM = 64


@dataclass
class PipelineConfig:
    """Every knob of a full run, embedded verbatim in the run report."""

    ego: str
    n_alters: int = 12
    exclude: tuple[str, ...] = ()
    phrase_min_count: int = DEFAULT_MIN_COUNT
    phrase_threshold: float = DEFAULT_THRESHOLD
    min_df: int = 2
    k: int | None = None
    k_min: int = 2
    k_max: int = 12
    top_words: int = 50
    embed_dim: int = DEFAULT_EMBED_DIM
    embeddings_path: str | None = None
    seed: int = 42
    max_lag: int = DEFAULT_MAX_LAG
    alpha: float = DEFAULT_ALPHA
    correction: str = CORRECTION_NONE
    max_diff: int = DEFAULT_MAX_DIFF
    grouping: dict[str, str] | None = None

    def to_dict(self) -> dict:
        return {
            "ego": self.ego,
            "n_alters": self.n_alters,
            "exclude": list(self.exclude),
            "phrase_min_count": self.phrase_min_count,
            "phrase_threshold": self.phrase_threshold,
            "min_df": self.min_df,
            "k": self.k,
            "k_min": self.k_min,
            "k_max": self.k_max,
            "top_words": self.top_words,
            "embed_dim": self.embed_dim,
            "embeddings_path": self.embeddings_path,
            "seed": self.seed,
            "max_lag": self.max_lag,
            "alpha": self.alpha,
            "correction": self.correction,
            "max_diff": self.max_diff,
            "grouping": self.grouping,
        }


@dataclass
class TopicFit:
    """Output of the model-fitting half of a run (everything except causality)."""

    bundle: ModelBundle
    clustering: Clustering
    eval_report: clf_mod.EvalReport
    ego_labels: dict[str, int]
    alter_labels: dict[str, int]
    ranking: AlterRanking
    silhouette_by_k: dict[int, float]
    n_unfeaturized: int


def _nonzero_ids(emb: EmbeddingSet, ids: list[str]) -> list[str]:
    return [i for i in ids if np.linalg.norm(emb.vectors[i]) > 0]


def fit_topics(corpus: Corpus, config: PipelineConfig) -> TopicFit:
    """Fit phrase/TF-IDF/embedding models on the ego, cluster, train, label alters."""
    ego = config.ego.lower().lstrip("@")
    ego_posts = [p for p in corpus.posts if p.author == ego]
    if not ego_posts:
        raise ValueError(f"corpus has no posts by ego {ego!r}")

    ranking = rank_alters(corpus, ego, exclude=config.exclude, n=config.n_alters)
    alters = [handle for handle, _ in ranking.entries]
    alter_posts = [p for p in corpus.posts if p.author in set(alters)]
    logger.info("ego %s: %d posts; %d alters with %d posts",
                ego, len(ego_posts), len(alters), len(alter_posts))

    # Models fit on the ego corpus only; alters pass through them unchanged.
    raw_ego_docs = build_token_docs(ego_posts)
    phrases = fit_phrase_pipeline(
        raw_ego_docs, min_count=config.phrase_min_count,
        threshold=config.phrase_threshold,
    )
    ego_docs = build_token_docs(ego_posts, pipeline=phrases, remove_stops=True)
    alter_docs = build_token_docs(alter_posts, pipeline=phrases, remove_stops=True)
    tfidf = fit_tfidf(ego_docs, min_df=config.min_df)

    projector: FallbackProjector | None = None
    if config.embeddings_path:
        emb = load_embeddings(config.embeddings_path, docs=ego_docs + alter_docs,
                              strict=True)
        ego_emb = alter_emb = emb
    else:
        dim = min(config.embed_dim, tfidf.dim)
        projector = FallbackProjector.fit(tfidf, ego_docs, dim, seed=config.seed)
        ego_emb = projector.transform(tfidf, ego_docs)
        alter_emb = projector.transform(tfidf, alter_docs)

    cluster_ids = _nonzero_ids(ego_emb, [d.post_id for d in ego_docs])
    n_unfeaturized = len(ego_docs) - len(cluster_ids)
    if n_unfeaturized:
        logger.info("%d ego posts have empty feature vectors; excluded from topics",
                    n_unfeaturized)
    if len(cluster_ids) < 3:
        raise ValueError("too few featurizable ego posts to cluster")

    dm = cosine_distance_matrix(ego_emb, cluster_ids)
    silhouette_by_k: dict[int, float] = {}
    if config.k is not None:
        clustering = kmedoids(dm, config.k, seed=config.seed)
        silhouette_by_k[config.k] = silhouette(dm, clustering)
    else:
        k_max = min(config.k_max, dm.n - 1)
        selection = select_k(dm, config.k_min, k_max, seed=config.seed)
        clustering = selection.best
        silhouette_by_k = selection.scores
    summaries = summarize_topics(
        clustering, tfidf,
        [d for d in ego_docs if d.post_id in clustering.assignment],
        top_n=config.top_words,
    )

    ego_labels = dict(clustering.assignment)
    classifier, eval_report = clf_mod.train(
        ego_emb, ego_labels, clf_mod.TrainConfig(seed=config.seed),
    )

    alter_pred_ids = _nonzero_ids(alter_emb, [d.post_id for d in alter_docs])
    alter_labels = clf_mod.predict(classifier, alter_emb, ids=alter_pred_ids)

    bundle = ModelBundle(
        phrases=phrases,
        tfidf=tfidf,
        k=clustering.k,
        medoid_ids=list(clustering.medoid_ids),
        medoid_vectors=np.stack([ego_emb.vectors[i] for i in clustering.medoid_ids]),
        topic_labels={s.topic: s.label for s in summaries},
        summaries=summaries,
        projector=projector,
        classifier=classifier,
        embedding_source=ego_emb.source,
        embedding_dim=ego_emb.dim,
        seed=config.seed,
        silhouette_by_k=silhouette_by_k,
    )
    return TopicFit(
        bundle=bundle,
        clustering=clustering,
        eval_report=eval_report,
        ego_labels=ego_labels,
        alter_labels=alter_labels,
        ranking=ranking,
        silhouette_by_k=silhouette_by_k,
        n_unfeaturized=n_unfeaturized,
    )


@dataclass
class PipelineResult:
    bundle: ModelBundle
    report: ReportBundle
    matrix: CausalityMatrix
    series: list[TopicSeries]
    labels: dict[str, int]
    eval_report: clf_mod.EvalReport
    clustering: Clustering
    alters: list[str]
    metrics: dict = field(default_factory=dict)


def run_pipeline(corpus: Corpus, config: PipelineConfig) -> PipelineResult:
    """Fit everything on the ego's posts, score the alters, scan for causality."""
    ego = config.ego.lower().lstrip("@")
    fit = fit_topics(corpus, config)
    alters = [handle for handle, _ in fit.ranking.entries]
    labels = {**fit.ego_labels, **fit.alter_labels}

    week_index = build_week_index((corpus.window_start, corpus.window_end))
    labeled_posts = [p for p in corpus.posts if p.id in labels]
    series = bin_posts(labeled_posts, labels, week_index, fit.clustering.k,
                       accounts=[ego, *alters])

    matrix = causality_scan(series, ego, alters, max_lag=config.max_lag,
                            alpha=config.alpha, correction=config.correction,
                            max_diff=config.max_diff)

    skip_counts = Counter(p.skip_reason for p in matrix.pairs if p.skip_reason)
    metrics = {
        "n_ego_posts": sum(1 for p in corpus.posts if p.author == ego),
        "n_labeled_posts": len(labeled_posts),
        "n_unfeaturized_ego_posts": fit.n_unfeaturized,
        "alter_retweet_counts": {h: c for h, c in fit.ranking.entries},
        "silhouette_by_k": {str(k): v for k, v in sorted(fit.silhouette_by_k.items())},
        "selected_k": fit.clustering.k,
        "total_cost": fit.clustering.total_cost,
        "weighted_f1": fit.eval_report.weighted_f1,
        "eval": fit.eval_report.to_dict(),
        "skip_counts": dict(sorted(skip_counts.items())),
        "n_weeks": week_index.n_weeks,
    }
    report = ReportBundle(
        matrix=matrix,
        config=config.to_dict(),
        metrics=metrics,
        topics=[s.to_dict() for s in fit.bundle.summaries],
        grouping=config.grouping,
    )
    return PipelineResult(
        bundle=fit.bundle,
        report=report,
        matrix=matrix,
        series=series,
        labels=labels,
        eval_report=fit.eval_report,
        clustering=fit.clustering,
        alters=alters,
        metrics=metrics,
    )


def classify_corpus(bundle: ModelBundle, posts, emb: EmbeddingSet | None = None
                    ) -> dict[str, int]:
    """Label posts with a saved bundle, rebuilding features the same way.

    When `emb` is None the bundle must carry the fallback projector; external
    embedding files must cover every featurizable post id.
    """
    if bundle.classifier is None:
        raise ValueError("bundle has no classifier part")
    docs = build_token_docs(posts, pipeline=bundle.phrases, remove_stops=True)
    if emb is None:
        if bundle.projector is None:
            raise ValueError(
                "bundle has no fallback projector; supply an embedding file"
            )
        emb = bundle.projector.transform(bundle.tfidf, docs)
    ids = [d.post_id for d in docs
           if d.post_id in emb.vectors and np.linalg.norm(emb.vectors[d.post_id]) > 0]
    return clf_mod.predict(bundle.classifier, emb, ids=ids)
