"""Weekly per-(account, topic) count series on a shared Monday-aligned grid."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Post


def _utc_date(ts: datetime) -> date:
    if ts.tzinfo is None:
        return ts.date()
    return ts.astimezone(timezone.utc).date()


@dataclass(frozen=True)
class WeekIndex:
    """Consecutive 7-day bins starting on the first Monday <= window_start (UTC)."""

    epoch_week_start: date
    n_weeks: int

    def bin_of(self, ts: datetime) -> int:
        days = (_utc_date(ts) - self.epoch_week_start).days
        week = days // 7
        if days < 0 or week >= self.n_weeks:
            raise ValueError(f"timestamp {ts.isoformat()} outside week index span")
        return week

    def week_start(self, week: int) -> date:
        if not 0 <= week < self.n_weeks:
            raise IndexError(week)
        return self.epoch_week_start + timedelta(days=7 * week)


def build_week_index(window: tuple[datetime, datetime]) -> WeekIndex:
    """Monday-aligned weekly bins covering [window_start, window_end]."""
    start, end = window
    if start > end:
        raise ValueError("window start must not be after end")
    start_date = _utc_date(start)
    end_date = _utc_date(end)
    epoch = start_date - timedelta(days=start_date.weekday())
    n_weeks = (end_date - epoch).days // 7 + 1
    return WeekIndex(epoch_week_start=epoch, n_weeks=n_weeks)


@dataclass
class TopicSeries:
    """Weekly counts of one account's posts on one topic."""

    account: str
    topic: int
    counts: np.ndarray
    week_index: WeekIndex

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=int)
        if len(self.counts) != self.week_index.n_weeks:
            raise ValueError("counts length must equal the week index length")


def bin_posts(
    posts: Iterable[Post],
    labels: Mapping[str, int],
    week_index: WeekIndex,
    n_topics: int,
    accounts: Sequence[str] | None = None,
) -> list[TopicSeries]:
    """Count labeled posts per (account, topic, week).

    Every post must fall inside the index span and carry a label in
    0..n_topics-1.  Accounts (or topics) with zero posts still yield all-zero
    series; pass `accounts` to force series for accounts absent from `posts`.
    """
    grids: dict[str, np.ndarray] = {}
    for account in accounts or ():
        grids[account] = np.zeros((n_topics, week_index.n_weeks), dtype=int)

    for post in posts:
        try:
            topic = labels[post.id]
        except KeyError:
            raise ValueError(f"post {post.id!r} has no topic label") from None
        if not 0 <= topic < n_topics:
            raise ValueError(f"label {topic} for post {post.id!r} outside 0..{n_topics - 1}")
        week = week_index.bin_of(post.created_at)
        grid = grids.get(post.author)
        if grid is None:
            grid = grids[post.author] = np.zeros((n_topics, week_index.n_weeks), dtype=int)
        grid[topic, week] += 1

    return [
        TopicSeries(account=account, topic=topic, counts=grids[account][topic], week_index=week_index)
        for account in sorted(grids)
        for topic in range(n_topics)
    ]


def write_series_csv(series: Sequence[TopicSeries], path) -> None:
    """Interchange CSV: week_start, account, topic, count (all cells, zeros included)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["week_start", "account", "topic", "count"])
        for s in sorted(series, key=lambda s: (s.account, s.topic)):
            for week in range(s.week_index.n_weeks):
                writer.writerow(
                    [s.week_index.week_start(week).isoformat(), s.account, s.topic, int(s.counts[week])]
                )


def read_series_csv(path) -> list[TopicSeries]:
    """Inverse of write_series_csv; reconstructs the shared WeekIndex."""
    cells: dict[tuple[str, int], dict[date, int]] = {}
    weeks: set[date] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"week_start", "account", "topic", "count"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValueError(f"series CSV must have columns {sorted(required)}")
        for row in reader:
            week = date.fromisoformat(row["week_start"])
            weeks.add(week)
            key = (row["account"], int(row["topic"]))
            cells.setdefault(key, {})[week] = int(row["count"])
    if not weeks:
        raise ValueError("series CSV is empty")

    epoch = min(weeks)
    n_weeks = (max(weeks) - epoch).days // 7 + 1
    index = WeekIndex(epoch_week_start=epoch, n_weeks=n_weeks)
    out = []
    for (account, topic), by_week in sorted(cells.items()):
        counts = np.zeros(n_weeks, dtype=int)
        for week, count in by_week.items():
            counts[(week - epoch).days // 7] = count
        out.append(TopicSeries(account=account, topic=topic, counts=counts, week_index=index))
    return out
