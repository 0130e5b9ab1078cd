"""Core record types for user cohorts: posts, stress periods, users, edges, lexicons.

All records are plain dataclasses validated at construction boundaries
(file ingestion and synthesis), not on every mutation; a built
CohortDataset is treated as immutable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date
from typing import Optional

import numpy as np

from riskgraph.errors import FormatError, IntegrityError

TEXT_DIM = 768
IMAGE_DIM = 300

GENDERS = ("female", "male", "unknown")

LOCATIONS = (
    "east",
    "south",
    "north",
    "south_west",
    "north_west",
    "middle",
    "north_east",
    "unknown",
)

STRESS_CATEGORIES = (
    "study",
    "work",
    "family",
    "interpersonal_relation",
    "romantic_relation",
    "self_cognition",
)

LEXICON_NAMES = (
    "suicide",
    "last_words",
    "future",
    "negation",
    "self_concern",
    "others_concern",
    "perfection",
    "ruminant",
    "love",
    "joy",
    "anxiety",
    "sorrow",
)

# token_counts keys holding raw occurrence counts of suicide-lexicon words at
# each weight; post_degree sums k * count_k over these.
SUICIDE_WEIGHT_KEYS = ("suicide_w1", "suicide_w2", "suicide_w3")

SPLIT_NAMES = ("train", "validation", "test")


@dataclass
class PostRecord:
    """A single post: embeddings, posting hour, and lexicon hit counts."""

    post_id: str
    user_id: str
    timestamp: int
    hour: int
    text_embedding: np.ndarray
    image_embedding: np.ndarray
    token_counts: dict[str, int]
    total_tokens: int
    sentiment_polarity: float
    image_brightness: Optional[float] = None
    image_warmth: Optional[float] = None

    def validate(self) -> None:
        if not 0 <= self.hour <= 23:
            raise FormatError(f"post {self.post_id}: hour {self.hour} outside 0..23")
        if self.text_embedding.shape != (TEXT_DIM,):
            raise FormatError(
                f"post {self.post_id}: text embedding width "
                f"{self.text_embedding.shape} (expected {TEXT_DIM})"
            )
        if self.image_embedding.shape != (IMAGE_DIM,):
            raise FormatError(
                f"post {self.post_id}: image embedding width "
                f"{self.image_embedding.shape} (expected {IMAGE_DIM})"
            )
        if self.total_tokens < 1:
            raise FormatError(f"post {self.post_id}: total_tokens must be positive")
        for cat, count in self.token_counts.items():
            if count < 0:
                raise FormatError(f"post {self.post_id}: negative count for {cat!r}")
            if count > self.total_tokens:
                raise FormatError(
                    f"post {self.post_id}: token_counts[{cat!r}]={count} exceeds "
                    f"total_tokens={self.total_tokens}"
                )
        if not -1.0 <= self.sentiment_polarity <= 1.0:
            raise FormatError(f"post {self.post_id}: polarity outside [-1,1]")

    def hit_count(self, category: str) -> int:
        return self.token_counts.get(category, 0)


@dataclass
class StressPeriod:
    """One detected stressful period: span, level (1 weak / 2 strong), category."""

    start_day: date
    end_day: date
    level: int
    category: str

    def validate(self) -> None:
        if (self.end_day - self.start_day).days <= 5:
            raise FormatError(
                f"stress period {self.start_day}..{self.end_day} not over five days"
            )
        if self.level not in (1, 2):
            raise FormatError(f"stress level {self.level} not in {{1,2}}")
        if self.category not in STRESS_CATEGORIES:
            raise FormatError(f"unknown stress category {self.category!r}")

    @property
    def duration_days(self) -> int:
        return (self.end_day - self.start_day).days


@dataclass
class UserRecord:
    """One user: demographics, chronological posts, stress history, social counts."""

    user_id: str
    gender: str
    age_years: Optional[int]
    location: str
    posts: list[PostRecord] = field(default_factory=list)
    stress_periods: list[StressPeriod] = field(default_factory=list)
    disorder_flag: bool = False
    attempt_flag: bool = False
    following_count: int = 0
    follower_count: int = 0
    interact_count: int = 0
    label: int = 0

    def validate(self) -> None:
        if self.gender not in GENDERS:
            raise FormatError(f"user {self.user_id}: unknown gender {self.gender!r}")
        if self.location not in LOCATIONS:
            raise FormatError(f"user {self.user_id}: unknown location {self.location!r}")
        if self.age_years is not None and self.age_years < 0:
            raise FormatError(f"user {self.user_id}: negative age")
        if min(self.following_count, self.follower_count, self.interact_count) < 0:
            raise FormatError(f"user {self.user_id}: negative interaction count")
        times = [p.timestamp for p in self.posts]
        if any(a > b for a, b in zip(times, times[1:])):
            raise FormatError(f"user {self.user_id}: posts not sorted by timestamp")
        for post in self.posts:
            if post.user_id != self.user_id:
                raise IntegrityError(
                    f"post {post.post_id} attached to user {self.user_id} "
                    f"but records user_id {post.user_id}"
                )
            post.validate()
        for period in self.stress_periods:
            period.validate()


@dataclass(frozen=True)
class SocialEdge:
    """Directed follow edge: src follows dst."""

    src: str
    dst: str


@dataclass
class Lexicon:
    """Named word/phrase list with positive weights (suicide lexicon uses 1..3)."""

    name: str
    entries: dict[str, float]

    def validate(self) -> None:
        if not self.entries:
            raise FormatError(f"lexicon {self.name!r} has no entries")
        for word, weight in self.entries.items():
            if weight <= 0:
                raise FormatError(f"lexicon {self.name!r}: weight {weight} for {word!r}")

    def max_phrase_len(self) -> int:
        return max(len(w.split()) for w in self.entries)


@dataclass
class CohortDataset:
    """A full labeled cohort: users, follow edges, lexicons, and split assignment."""

    users: list[UserRecord]
    edges: list[SocialEdge]
    lexicons: dict[str, Lexicon]
    split: dict[str, str]

    def __post_init__(self) -> None:
        self._by_id = {u.user_id: u for u in self.users}

    def user(self, user_id: str) -> UserRecord:
        return self._by_id[user_id]

    def has_user(self, user_id: str) -> bool:
        return user_id in self._by_id

    def split_user_ids(self, split_name: str) -> list[str]:
        return [u.user_id for u in self.users if self.split.get(u.user_id) == split_name]

    def validate(self) -> None:
        if len(self._by_id) != len(self.users):
            dupes = len(self.users) - len(self._by_id)
            raise IntegrityError(f"{dupes} duplicate user id(s) in cohort")
        for user in self.users:
            user.validate()
        for edge in self.edges:
            for endpoint in (edge.src, edge.dst):
                if endpoint not in self._by_id:
                    raise IntegrityError(f"edge references unknown user id {endpoint!r}")
        for lex in self.lexicons.values():
            lex.validate()
        for user_id, split_name in self.split.items():
            if user_id not in self._by_id:
                raise IntegrityError(f"split references unknown user id {user_id!r}")
            if split_name not in SPLIT_NAMES:
                raise FormatError(f"unknown split name {split_name!r} for {user_id!r}")
        missing = [u.user_id for u in self.users if u.user_id not in self.split]
        if missing:
            raise IntegrityError(f"users missing split assignment: {missing[:5]}")

    def reference_date(self) -> date:
        """Latest post date in the cohort; anchors recency-windowed encodings."""
        latest = 0
        for user in self.users:
            if user.posts:
                latest = max(latest, user.posts[-1].timestamp)
        if latest == 0:
            return date(1970, 1, 1)
        from datetime import datetime, timezone

        return datetime.fromtimestamp(latest, tz=timezone.utc).date()
