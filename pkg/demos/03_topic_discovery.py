"""Discover the ego's topics: cosine distances, k-medoids, silhouette selection.

Topics are clusters of the ego's own posts in embedding space.  k-medoids
(PAM) keeps an actual post as each cluster's center, the silhouette score
picks k, and each topic is summarized by the tokens with the highest mean
TF-IDF inside it.
"""

from datetime import datetime, timezone
from pathlib import Path

from egoflux.corpus import load_corpus
from egoflux.features import fallback_embeddings, fit_tfidf
from egoflux.textpipe import build_token_docs, fit_phrase_pipeline
from egoflux.topics import (
    cosine_distance_matrix,
    select_k,
    summarize_topics,
)

REPO = Path(__file__).resolve().parents[1]
CORPUS_CSV = REPO / "tests" / "data" / "synthetic_corpus.csv"
WINDOW = (datetime(2021, 1, 4, tzinfo=timezone.utc),
          datetime(2021, 10, 11, tzinfo=timezone.utc))


def main() -> None:
    corpus = load_corpus(CORPUS_CSV, format="csv", window=WINDOW).corpus
    ego_posts = [p for p in corpus.posts if p.author == "ego"]
    print(f"{len(ego_posts)} ego posts")

    raw_docs = build_token_docs(ego_posts)
    phrases = fit_phrase_pipeline(raw_docs)
    docs = build_token_docs(ego_posts, pipeline=phrases, remove_stops=True)
    tfidf = fit_tfidf(docs, min_df=2)
    emb = fallback_embeddings(tfidf, docs, dim=16, seed=42)

    featurized = [d.post_id for d in docs
                  if d.post_id in emb.vectors and emb.vectors[d.post_id].any()]
    dm = cosine_distance_matrix(emb, featurized)

    print("\n== Choosing k by silhouette ==")
    selection = select_k(dm, k_min=2, k_max=5, seed=42)
    print("k   silhouette")
    for k in sorted(selection.scores):
        mark = "  <- selected" if k == selection.best.k else ""
        print(f"{k}   {selection.scores[k]:.4f}{mark}")

    clustering = selection.best
    print("\n== Topic summaries ==")
    summaries = summarize_topics(
        clustering, tfidf,
        [d for d in docs if d.post_id in clustering.assignment],
        top_n=8,
    )
    for s in summaries:
        words = ", ".join(t for t, _ in s.top_words)
        print(f"{s.label} (n={s.size}): {words}")

    print("\nEach medoid is a real post:")
    text_by_id = {p.id: p.text for p in ego_posts}
    for topic, mid in enumerate(clustering.medoid_ids):
        print(f"  topic_{topic} medoid {mid}: {text_by_id[mid][:60]!r}")


if __name__ == "__main__":
    main()
