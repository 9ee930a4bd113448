"""Load a raw post corpus, normalize it, and rank the ego's alters.

The loader canonicalizes handles, parses timestamps to UTC, enforces the
observation window inclusively, drops duplicate ids (keeping the first), and
counts everything it discards.  Alters are then ranked by how often the ego
retweeted them, which is the record of attention the rest of the pipeline
is built on.
"""

from datetime import datetime, timezone
from pathlib import Path

from egoflux.corpus import load_corpus, rank_alters

REPO = Path(__file__).resolve().parents[1]
CORPUS_CSV = REPO / "tests" / "data" / "synthetic_corpus.csv"
WINDOW = (datetime(2021, 1, 4, tzinfo=timezone.utc),
          datetime(2021, 10, 11, tzinfo=timezone.utc))


def main() -> None:
    print("== Ingest ==")
    result = load_corpus(CORPUS_CSV, format="csv", window=WINDOW)
    corpus = result.corpus
    print(f"kept {len(corpus)} posts "
          f"({result.dropped_out_of_window} outside window, "
          f"{result.dropped_malformed} malformed, "
          f"{result.dropped_duplicate} duplicates dropped)")
    print(f"window: {corpus.window_start.date()} .. {corpus.window_end.date()}")

    authors = sorted({p.author for p in corpus.posts})
    print(f"accounts present: {', '.join(authors)}")

    first = corpus.posts[0]
    print("\nfirst post (canonical form):")
    print(f"  id={first.id} author={first.author}")
    print(f"  created_at={first.created_at.isoformat()}")
    print(f"  text={first.text[:60]!r}")

    print("\n== Alter ranking ==")
    ranking = rank_alters(corpus, "ego", n=12)
    print("handle      retweets by ego")
    for handle, count in ranking.entries:
        print(f"{handle:<12}{count}")
    print("\nAccounts the ego never retweeted (like the bystander noise in")
    print("this corpus) do not appear: attention, not mere presence, makes")
    print("an account an alter.")


if __name__ == "__main__":
    main()
