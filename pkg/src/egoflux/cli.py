"""Command-line surface: ingest, topics, classify, series, causality, simulate, report."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path

from .bundle import ModelBundle
from .corpus import Corpus, Post, load_corpus, parse_timestamp
from .errors import EgofluxError
from .pipeline import DEFAULT_EMBED_DIM, PipelineConfig, classify_corpus, fit_topics
from .report import ReportBundle, emit_report_bundle
from .series import bin_posts, build_week_index, read_series_csv, write_series_csv
from .stats import (
    CORRECTION_BH,
    CORRECTION_NONE,
    DEFAULT_ALPHA,
    DEFAULT_MAX_DIFF,
    DEFAULT_MAX_LAG,
    CausalityMatrix,
    causality_scan,
)
from .synth import SynthSpec, generate_series
from .textpipe import DEFAULT_MIN_COUNT, DEFAULT_THRESHOLD
from .features import load_embeddings

logger = logging.getLogger(__name__)

WIDE_START = datetime(1970, 1, 1, tzinfo=timezone.utc)
WIDE_END = datetime(9999, 12, 28, tzinfo=timezone.utc)


@contextmanager
def _open_out(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _load_windowed(args) -> Corpus:
    """Load a corpus; absent window bounds shrink to the observed timestamps."""
    start = parse_timestamp(args.start) if args.start else WIDE_START
    end = parse_timestamp(args.end) if args.end else WIDE_END
    result = load_corpus(args.corpus, args.format, (start, end),
                         strict=getattr(args, "strict", False))
    if result.dropped:
        logger.info("dropped %d rows (%d window, %d malformed, %d duplicate)",
                    result.dropped, result.dropped_out_of_window,
                    result.dropped_malformed, result.dropped_duplicate)
    corpus = result.corpus
    if corpus.posts and (not args.start or not args.end):
        corpus = Corpus(
            posts=corpus.posts,
            window_start=parse_timestamp(args.start) if args.start
            else corpus.posts[0].created_at,
            window_end=parse_timestamp(args.end) if args.end
            else corpus.posts[-1].created_at,
        )
    return corpus


def _cmd_ingest(args) -> int:
    start = parse_timestamp(args.start)
    end = parse_timestamp(args.end)
    result = load_corpus(args.corpus, args.format, (start, end), strict=args.strict)
    for warning in result.warnings:
        logger.warning("%s", warning)
    logger.info("kept %d posts; dropped %d (%d window, %d malformed, %d duplicate)",
                len(result.corpus), result.dropped, result.dropped_out_of_window,
                result.dropped_malformed, result.dropped_duplicate)
    with _open_out(args.out) as fh:
        fh.write(result.corpus.to_jsonl())
    return 0


def _cmd_topics(args) -> int:
    corpus = _load_windowed(args)
    config = PipelineConfig(
        ego=args.ego,
        n_alters=args.n_alters,
        exclude=tuple(args.exclude.split(",")) if args.exclude else (),
        phrase_min_count=args.min_count,
        phrase_threshold=args.threshold,
        min_df=args.min_df,
        k=args.k,
        k_min=args.k_min,
        k_max=args.k_max,
        top_words=args.top_words,
        embed_dim=args.dim,
        embeddings_path=args.embeddings,
        seed=args.seed,
    )
    fit = fit_topics(corpus, config)
    fit.bundle.save(args.out)

    print("ranked alters: "
          + ", ".join(f"{h} ({c} retweets)" for h, c in fit.ranking.entries))
    print("k\tsilhouette")
    for k in sorted(fit.silhouette_by_k):
        chosen = " <- selected" if k == fit.clustering.k else ""
        print(f"{k}\t{fit.silhouette_by_k[k]:.4f}{chosen}")
    print(f"validation weighted F1: {fit.eval_report.weighted_f1:.4f}")
    for summary in fit.bundle.summaries:
        head = ", ".join(t for t, _ in summary.top_words[:8])
        print(f"{summary.label} (n={summary.size}): {head}")
    logger.info("bundle written to %s", args.out)
    return 0


def _cmd_classify(args) -> int:
    bundle = ModelBundle.load(args.model)
    corpus = _load_windowed(args)
    emb = None
    if args.embeddings:
        emb = load_embeddings(args.embeddings)
    labels = classify_corpus(bundle, corpus.posts, emb)
    skipped = sum(1 for p in corpus.posts if p.id not in labels)
    if skipped:
        logger.info("%d posts had no usable features and were not labeled", skipped)
    with _open_out(args.out) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["post_id", "author", "created_at", "topic"])
        for post in corpus.posts:
            if post.id in labels:
                writer.writerow([post.id, post.author,
                                 post.created_at.isoformat(), labels[post.id]])
    return 0


def _cmd_series(args) -> int:
    posts: list[Post] = []
    labels: dict[str, int] = {}
    for path in args.labeled:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            required = {"post_id", "author", "created_at", "topic"}
            if reader.fieldnames is None or not required.issubset(reader.fieldnames):
                raise EgofluxError(f"{path}: need columns {sorted(required)}")
            for row in reader:
                posts.append(Post(id=row["post_id"], author=row["author"],
                                  created_at=parse_timestamp(row["created_at"]),
                                  text=""))
                labels[row["post_id"]] = int(row["topic"])
    if not posts:
        raise EgofluxError("no labeled posts given")
    start = parse_timestamp(args.start) if args.start \
        else min(p.created_at for p in posts)
    end = parse_timestamp(args.end) if args.end \
        else max(p.created_at for p in posts)
    week_index = build_week_index((start, end))
    n_topics = args.n_topics or max(labels.values()) + 1
    accounts = args.accounts.split(",") if args.accounts else None
    series = bin_posts(posts, labels, week_index, n_topics, accounts=accounts)
    if args.out and args.out != "-":
        write_series_csv(series, args.out)
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["week_start", "account", "topic", "count"])
        for s in series:
            for week in range(week_index.n_weeks):
                writer.writerow([week_index.week_start(week).isoformat(),
                                 s.account, s.topic, int(s.counts[week])])
    return 0


def _cmd_causality(args) -> int:
    series = read_series_csv(args.series)
    accounts = sorted({s.account for s in series})
    ego = args.ego.lower().lstrip("@")
    if ego not in accounts:
        raise EgofluxError(f"series file has no account {ego!r}")
    alters = args.alters.split(",") if args.alters \
        else [a for a in accounts if a != ego]
    correction = CORRECTION_BH if args.bh else CORRECTION_NONE
    matrix = causality_scan(series, ego, alters, max_lag=args.max_lag,
                            alpha=args.alpha, correction=correction,
                            max_diff=args.max_diff)
    with _open_out(args.out) as fh:
        fh.write(matrix.to_json())
        fh.write("\n")
    return 0


def _cmd_simulate(args) -> int:
    spec = SynthSpec.load_json(args.spec)
    result = generate_series(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_series_csv(result.series, out / "series.csv")
    truth = {
        "ego": spec.ego,
        "seed": spec.seed,
        "couplings": [
            {"alter": a, "topic": t, "lag": lag, "strength": s}
            for a, t, lag, s in result.truth
        ],
    }
    (out / "truth.json").write_text(
        json.dumps(truth, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    spec.save_json(out / "spec.json")
    logger.info("wrote %s", out)
    return 0


def _read_groups(path: str | None) -> dict[str, str] | None:
    if not path:
        return None
    grouping: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        handle_col = "handle" if "handle" in fields else "alter"
        if handle_col not in fields or "group" not in fields:
            raise EgofluxError(f"{path}: need columns handle (or alter) and group")
        for row in reader:
            grouping[row[handle_col]] = row["group"]
    return grouping


def _cmd_report(args) -> int:
    data = json.loads(Path(args.matrix).read_text(encoding="utf-8"))
    if "config" in data and "matrix" in data:
        bundle = ReportBundle.from_dict(data)
    else:
        bundle = ReportBundle(matrix=CausalityMatrix.from_dict(data))
    grouping = _read_groups(args.groups)
    if grouping is not None:
        bundle.grouping = grouping
    paths = emit_report_bundle(bundle, args.out)
    for name, path in sorted(paths.items()):
        logger.info("wrote %s: %s", name, path)
    return 0


def _add_corpus_args(sub: argparse.ArgumentParser, window_required: bool) -> None:
    sub.add_argument("corpus", help="input corpus file")
    sub.add_argument("--format", choices=["csv", "jsonl"], default="jsonl",
                     help="corpus file format (default jsonl)")
    sub.add_argument("--start", required=window_required,
                     help="window start, ISO-8601")
    sub.add_argument("--end", required=window_required,
                     help="window end, ISO-8601")
    sub.add_argument("--strict", action="store_true",
                     help="fail on the first malformed row instead of skipping")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="egoflux",
        description="Topic-level influence analysis of an ego account's post stream.",
    )
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log at DEBUG level")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("ingest", help="normalize a raw corpus into canonical JSONL")
    _add_corpus_args(p, window_required=True)
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=_cmd_ingest)

    p = commands.add_parser("topics", help="fit the topic model bundle on the ego corpus")
    _add_corpus_args(p, window_required=False)
    p.add_argument("--ego", required=True, help="ego account handle")
    p.add_argument("--k", type=int, default=None, help="fix k instead of searching")
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=12)
    p.add_argument("--top-words", type=int, default=50)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--embeddings", help="external embedding file (JSONL or CSV)")
    p.add_argument("--dim", type=int, default=DEFAULT_EMBED_DIM,
                   help="fallback embedding dimension")
    p.add_argument("--min-df", type=int, default=2)
    p.add_argument("--min-count", type=int, default=DEFAULT_MIN_COUNT,
                   help="phrase detector minimum pair count")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD,
                   help="phrase detector score threshold")
    p.add_argument("--n-alters", type=int, default=12)
    p.add_argument("--exclude", help="comma-separated handles to exclude from ranking")
    p.add_argument("--out", required=True, help="bundle output directory")
    p.set_defaults(func=_cmd_topics)

    p = commands.add_parser("classify", help="label a corpus with a saved bundle")
    _add_corpus_args(p, window_required=False)
    p.add_argument("--model", required=True, help="topic model bundle directory")
    p.add_argument("--embeddings", help="external embedding file for these posts")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(func=_cmd_classify)

    p = commands.add_parser("series", help="bin labeled posts into weekly topic series")
    p.add_argument("labeled", nargs="+", help="labeled-post CSVs from classify")
    p.add_argument("--start", help="window start, ISO-8601 (default observed)")
    p.add_argument("--end", help="window end, ISO-8601 (default observed)")
    p.add_argument("--n-topics", type=int, default=None)
    p.add_argument("--accounts", help="comma-separated accounts to force into output")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(func=_cmd_series)

    p = commands.add_parser("causality", help="Granger-scan weekly series")
    p.add_argument("series", help="series CSV from the series/simulate commands")
    p.add_argument("--ego", required=True, help="ego account handle")
    p.add_argument("--alters", help="comma-separated alters (default: all non-ego)")
    p.add_argument("--max-lag", type=int, default=DEFAULT_MAX_LAG)
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--bh", action="store_true",
                   help="Benjamini-Hochberg correction across pairs")
    p.add_argument("--max-diff", type=int, default=DEFAULT_MAX_DIFF)
    p.add_argument("--out", help="matrix JSON path (default stdout)")
    p.set_defaults(func=_cmd_causality)

    p = commands.add_parser("simulate", help="generate a synthetic ecosystem")
    p.add_argument("--spec", required=True, help="SynthSpec JSON path")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_simulate)

    p = commands.add_parser("report", help="render a causality matrix to CSV/JSON")
    p.add_argument("--matrix", required=True,
                   help="matrix JSON (bare matrix or full run report)")
    p.add_argument("--groups", help="CSV mapping handle -> group")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (EgofluxError, ValueError, OSError) as exc:
        logger.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
