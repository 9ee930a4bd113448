"""Text cleaning, tokenization, and bigram/trigram phrase merging."""

from __future__ import annotations

import json
import logging
import unicodedata
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

logger = logging.getLogger(__name__)

DEFAULT_MIN_COUNT = 5
DEFAULT_THRESHOLD = 10.0
PHRASE_JOIN = "_"


@dataclass
class TokenDoc:
    """Cleaned, tokenized, n-gram-merged form of one post."""

    post_id: str
    tokens: list[str]


def _is_url(token: str) -> bool:
    low = token.lower()
    return low.startswith(("http://", "https://", "www."))


def clean(text: str) -> str:
    """Strip URLs, @mentions, RT markers, and punctuation; lowercase.

    Hashtag words are kept without the '#'; apostrophes are dropped with the
    word rejoined ("don't" -> "dont"); any other non-alphanumeric character
    splits the token.  Idempotent: cleaning cleaned text is a no-op.
    """
    pieces: list[str] = []
    for token in unicodedata.normalize("NFC", text).split():
        if _is_url(token) or token.startswith("@"):
            continue
        if token.startswith("#"):
            token = token[1:]
        token = token.replace("'", "").replace("’", "")
        chars = [ch if ch.isalnum() else " " for ch in token]
        for piece in "".join(chars).lower().split():
            if piece == "rt":
                continue
            pieces.append(piece)
    return " ".join(pieces)


def tokenize(cleaned: str) -> list[str]:
    """Split cleaned text on whitespace; drop 1-char tokens and pure digits."""
    return [t for t in cleaned.split() if len(t) >= 2 and not t.isdigit()]


@lru_cache(maxsize=1)
def english_stopwords() -> frozenset[str]:
    data = resources.files("egoflux").joinpath("data/stopwords_en.txt").read_text("utf-8")
    return frozenset(w for w in data.split() if w)


def remove_stopwords(tokens: Sequence[str]) -> list[str]:
    """Drop exact stopword tokens (merged n-grams always survive)."""
    stop = english_stopwords()
    return [t for t in tokens if t not in stop]


@dataclass
class PhraseModel:
    """Counts and thresholds for one bigram-merging pass."""

    token_counts: dict[str, int]
    pair_counts: dict[tuple[str, str], int]
    min_count: int
    threshold: float
    total_tokens: int

    def score(self, a: str, b: str) -> float:
        """(pair - min_count) * total_tokens / (count(a) * count(b)); -inf if unseen."""
        pair = self.pair_counts.get((a, b), 0)
        ca, cb = self.token_counts.get(a, 0), self.token_counts.get(b, 0)
        if pair == 0 or ca == 0 or cb == 0:
            return float("-inf")
        return (pair - self.min_count) * self.total_tokens / (ca * cb)

    def qualifies(self, a: str, b: str) -> bool:
        return self.score(a, b) > self.threshold

    def to_dict(self) -> dict:
        return {
            "token_counts": dict(sorted(self.token_counts.items())),
            "pair_counts": [[a, b, c] for (a, b), c in sorted(self.pair_counts.items())],
            "min_count": self.min_count,
            "threshold": self.threshold,
            "total_tokens": self.total_tokens,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PhraseModel":
        return cls(
            token_counts=dict(d["token_counts"]),
            pair_counts={(a, b): c for a, b, c in d["pair_counts"]},
            min_count=int(d["min_count"]),
            threshold=float(d["threshold"]),
            total_tokens=int(d["total_tokens"]),
        )


def fit_phrases(
    docs: Iterable[Sequence[str]],
    min_count: int = DEFAULT_MIN_COUNT,
    threshold: float = DEFAULT_THRESHOLD,
) -> PhraseModel:
    """Count unigrams and adjacent pairs for one merging pass."""
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    token_counts: dict[str, int] = {}
    pair_counts: dict[tuple[str, str], int] = {}
    total = 0
    for doc in docs:
        for token in doc:
            token_counts[token] = token_counts.get(token, 0) + 1
            total += 1
        for a, b in zip(doc, doc[1:]):
            pair_counts[(a, b)] = pair_counts.get((a, b), 0) + 1
    if total == 0:
        raise ValueError("cannot fit phrases on all-empty docs")
    return PhraseModel(
        token_counts=token_counts,
        pair_counts=pair_counts,
        min_count=min_count,
        threshold=threshold,
        total_tokens=total,
    )


def apply_phrases(model: PhraseModel, tokens: Sequence[str]) -> list[str]:
    """Greedy left-to-right single merging pass over one token list."""
    out: list[str] = []
    i = 0
    while i < len(tokens):
        if i + 1 < len(tokens) and model.qualifies(tokens[i], tokens[i + 1]):
            out.append(tokens[i] + PHRASE_JOIN + tokens[i + 1])
            i += 2
        else:
            out.append(tokens[i])
            i += 1
    return out


@dataclass
class PhrasePipeline:
    """Stacked merging passes; two passes turn qualifying trigrams into one token."""

    stages: list[PhraseModel] = field(default_factory=list)

    def apply(self, tokens: Sequence[str]) -> list[str]:
        merged = list(tokens)
        for stage in self.stages:
            merged = apply_phrases(stage, merged)
        return merged

    def apply_docs(self, docs: Iterable[TokenDoc]) -> list[TokenDoc]:
        return [TokenDoc(post_id=d.post_id, tokens=self.apply(d.tokens)) for d in docs]

    def to_dict(self) -> dict:
        return {"schema_version": 1, "stages": [s.to_dict() for s in self.stages]}

    @classmethod
    def from_dict(cls, d: dict) -> "PhrasePipeline":
        return cls(stages=[PhraseModel.from_dict(s) for s in d["stages"]])

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, indent=2), "utf-8")

    @classmethod
    def load(cls, path) -> "PhrasePipeline":
        return cls.from_dict(json.loads(Path(path).read_text("utf-8")))


def fit_phrase_pipeline(
    docs: Sequence[TokenDoc] | Sequence[Sequence[str]],
    min_count: int = DEFAULT_MIN_COUNT,
    threshold: float = DEFAULT_THRESHOLD,
    passes: int = 2,
) -> PhrasePipeline:
    """Fit `passes` merging passes, refitting counts on the merged output.

    The second pass sees first-pass merges as single tokens, so a merged
    bigram can pair with a following token to form a trigram.
    """
    if passes < 1:
        raise ValueError("passes must be >= 1")
    current = [list(d.tokens) if isinstance(d, TokenDoc) else list(d) for d in docs]
    stages = []
    for _ in range(passes):
        model = fit_phrases(current, min_count=min_count, threshold=threshold)
        stages.append(model)
        current = [apply_phrases(model, doc) for doc in current]
    return PhrasePipeline(stages=stages)


def build_token_docs(
    posts,
    pipeline: PhrasePipeline | None = None,
    remove_stops: bool = False,
) -> list[TokenDoc]:
    """clean + tokenize each post, then apply phrase merging when given.

    Stopword removal (when requested) runs after merging: phrase statistics
    need stopwords, TF-IDF downstream does not.  Fully-stripped posts come
    back as empty TokenDocs (kept, but logged).
    """
    docs = []
    n_empty = 0
    for post in posts:
        tokens = tokenize(clean(post.text))
        if pipeline is not None:
            tokens = pipeline.apply(tokens)
        if remove_stops:
            tokens = remove_stopwords(tokens)
        if not tokens:
            n_empty += 1
        docs.append(TokenDoc(post_id=post.id, tokens=tokens))
    if n_empty:
        logger.info("%d of %d posts tokenized to empty docs", n_empty, len(docs))
    return docs
