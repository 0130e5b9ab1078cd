"""Property-vector encoding and graph assembly.

Each user becomes one fixed-width numeric vector covering six feature
categories (personal information, personality, experience, post behavior,
emotion expression, social interaction); users plus follow edges form the
KnowledgeGraph consumed by the attention network.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from typing import Iterable, Mapping, Optional

import numpy as np

from riskgraph.errors import FormatError, IntegrityError, InternalError
from riskgraph.data_model.types import (
    GENDERS,
    LOCATIONS,
    CohortDataset,
    Lexicon,
    StressPeriod,
    UserRecord,
)

log = logging.getLogger(__name__)

DEFAULT_MAX_AGE = 65
LAST_WORDS_WINDOW_DAYS = 14
TRANSITION_WINDOW_POSTS = 10

CATEGORY_PERSONAL = "personal_information"
CATEGORY_PERSONALITY = "personality"
CATEGORY_EXPERIENCE = "experience"
CATEGORY_POST = "post_behavior"
CATEGORY_EMOTION = "emotion_expression"
CATEGORY_SOCIAL = "social_interaction"

CATEGORIES = (
    CATEGORY_PERSONAL,
    CATEGORY_PERSONALITY,
    CATEGORY_EXPERIENCE,
    CATEGORY_POST,
    CATEGORY_EMOTION,
    CATEGORY_SOCIAL,
)

# (segment name, width, category) in concatenation order.
_SEGMENT_TABLE = (
    ("gender", 3, CATEGORY_PERSONAL),
    ("age", 1, CATEGORY_PERSONAL),
    ("location", 8, CATEGORY_PERSONAL),
    ("perfection", 1, CATEGORY_PERSONALITY),
    ("ruminant", 1, CATEGORY_PERSONALITY),
    ("sensitive", 1, CATEGORY_PERSONALITY),
    ("stress_periods", 1, CATEGORY_EXPERIENCE),
    ("stress_level", 1, CATEGORY_EXPERIENCE),
    ("stress_categories", 1, CATEGORY_EXPERIENCE),
    ("disorder", 1, CATEGORY_EXPERIENCE),
    ("attempt", 1, CATEGORY_EXPERIENCE),
    ("post_behavior", 30, CATEGORY_POST),
    ("suicide_words", 1, CATEGORY_EMOTION),
    ("last_words", 1, CATEGORY_EMOTION),
    ("future_words", 1, CATEGORY_EMOTION),
    ("negation_words", 1, CATEGORY_EMOTION),
    ("self_concern_words", 1, CATEGORY_EMOTION),
    ("love_joy", 1, CATEGORY_EMOTION),
    ("love_anxiety_sorrow", 1, CATEGORY_EMOTION),
    ("following", 1, CATEGORY_SOCIAL),
    ("follower", 1, CATEGORY_SOCIAL),
    ("interact", 1, CATEGORY_SOCIAL),
)


@dataclass(frozen=True)
class Segment:
    name: str
    offset: int
    width: int
    category: str


@dataclass(frozen=True)
class PropertyLayout:
    """Ordered (name, offset, width) map of one property vector."""

    segments: tuple[Segment, ...]
    total_width: int

    def __post_init__(self) -> None:
        expected = 0
        for seg in self.segments:
            if seg.offset != expected:
                raise InternalError(
                    f"segment {seg.name} at offset {seg.offset}, expected {expected}"
                )
            expected += seg.width
        if expected != self.total_width:
            raise InternalError(
                f"layout total_width {self.total_width} != segment sum {expected}"
            )

    def segment(self, name: str) -> Segment:
        for seg in self.segments:
            if seg.name == name:
                return seg
        raise KeyError(name)

    def has_segment(self, name: str) -> bool:
        return any(seg.name == name for seg in self.segments)

    def slice_of(self, name: str) -> slice:
        seg = self.segment(name)
        return slice(seg.offset, seg.offset + seg.width)

    def segment_names(self) -> tuple[str, ...]:
        return tuple(seg.name for seg in self.segments)

    def to_json(self) -> dict:
        return {
            "segments": [
                {"name": s.name, "offset": s.offset, "width": s.width, "category": s.category}
                for s in self.segments
            ],
            "total_width": self.total_width,
        }

    @staticmethod
    def from_json(raw: dict) -> "PropertyLayout":
        segments = tuple(
            Segment(s["name"], s["offset"], s["width"], s["category"])
            for s in raw["segments"]
        )
        layout = PropertyLayout(segments=segments, total_width=raw["total_width"])
        return layout

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n", encoding="utf-8")

    @staticmethod
    def load(path: str | Path) -> "PropertyLayout":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        layout = PropertyLayout.from_json(raw)
        width = sum(s.width for s in layout.segments)
        if width != layout.total_width:
            raise FormatError(f"layout total_width {layout.total_width} != segment sum {width}")
        return layout


def default_layout(
    disabled_categories: Iterable[str] = (),
    without_kg: bool = False,
    include_reserved_slot: bool = False,
) -> PropertyLayout:
    """Build the standard layout (60 wide; 61 with the reserved slot).

    without_kg keeps only the 30 post-behavior dims. disabled_categories
    drops whole categories (e.g. for cohorts with no profile data).
    """
    disabled = set(disabled_categories)
    unknown = disabled - set(CATEGORIES)
    if unknown:
        raise FormatError(f"unknown categories to disable: {sorted(unknown)}")
    rows = []
    for name, width, category in _SEGMENT_TABLE:
        if without_kg and category != CATEGORY_POST:
            continue
        if category in disabled:
            continue
        rows.append((name, width, category))
    if include_reserved_slot and not without_kg:
        rows.append(("reserved", 1, CATEGORY_POST))
    segments = []
    offset = 0
    for name, width, category in rows:
        segments.append(Segment(name, offset, width, category))
        offset += width
    return PropertyLayout(segments=tuple(segments), total_width=offset)


@dataclass
class PropertyVector:
    """One user's assembled property vector plus the layout describing it."""

    values: np.ndarray
    layout: PropertyLayout

    def segment_values(self, name: str) -> np.ndarray:
        return self.values[self.layout.slice_of(name)]


@dataclass
class KnowledgeGraph:
    """Users with property vectors and labels, plus follow adjacency."""

    vectors: dict[str, PropertyVector]
    labels: dict[str, int]
    adjacency: dict[str, tuple[str, ...]]

    def neighbours(self, user_id: str) -> tuple[str, ...]:
        return self.adjacency.get(user_id, ())


# --- category encoders ------------------------------------------------------


def encode_gender(gender: str) -> np.ndarray:
    """One-hot over (female, male, unknown)."""
    if gender not in GENDERS:
        raise FormatError(f"unknown gender {gender!r}")
    vec = np.zeros(3)
    vec[GENDERS.index(gender)] = 1.0
    return vec


def encode_age(age_years: Optional[int], max_age: int = DEFAULT_MAX_AGE) -> float:
    """Age scaled by the cohort maximum, clamped to [0,1]; unknown encodes 0."""
    if max_age <= 0:
        raise FormatError(f"max_age must be positive, got {max_age}")
    if age_years is None:
        return 0.0
    if age_years < 0:
        raise FormatError(f"negative age {age_years}")
    return min(age_years / max_age, 1.0)


def encode_location(location: str) -> np.ndarray:
    """One-hot over the eight location directions (last slot = unknown)."""
    if location not in LOCATIONS:
        raise FormatError(f"unknown location {location!r}")
    vec = np.zeros(8)
    vec[LOCATIONS.index(location)] = 1.0
    return vec


def encode_stress(periods: list[StressPeriod]) -> tuple[float, float, float]:
    """(period count, mean level, distinct category count); empty list -> zeros."""
    if not periods:
        return (0.0, 0.0, 0.0)
    count = float(len(periods))
    mean_level = sum(p.level for p in periods) / count
    categories = len({p.category for p in periods})
    return (count, mean_level, float(categories))


def encode_personality(
    user: UserRecord, lexicons: Mapping[str, Lexicon]
) -> tuple[float, float, float]:
    """(perfection, ruminant, sensitive).

    Perfection and ruminant are mean per-post hit/token ratios; users with
    no posts encode 0. Sensitive counts interpersonal-relation stress periods.
    """
    if user.posts:
        perfect = float(np.mean([p.hit_count("perfection") / p.total_tokens for p in user.posts]))
        ruminant = float(np.mean([p.hit_count("ruminant") / p.total_tokens for p in user.posts]))
    else:
        perfect = ruminant = 0.0
    sensitive = float(
        sum(1 for sp in user.stress_periods if sp.category == "interpersonal_relation")
    )
    return (perfect, ruminant, sensitive)


def _post_date(timestamp: int) -> date:
    return datetime.fromtimestamp(timestamp, tz=timezone.utc).date()


def encode_emotion_expression(
    user: UserRecord, lexicons: Mapping[str, Lexicon], now: date
) -> np.ndarray:
    """Seven emotion-expression features.

    (suicide, last_words, future, negation, self_concern) are mean per-post
    hit/token ratios; last_words only counts posts from the two weeks before
    `now`. The final two entries count love->joy and love->anxiety/sorrow
    transitions: ordered pairs among the ten most recent posts where the
    earlier post has a love hit and a strictly later one has a joy
    (respectively anxiety or sorrow) hit.
    """
    posts = user.posts
    out = np.zeros(7)
    if not posts:
        return out

    for idx, cat in enumerate(("suicide", "future", "negation", "self_concern")):
        slot = (0, 2, 3, 4)[idx]
        out[slot] = float(np.mean([p.hit_count(cat) / p.total_tokens for p in posts]))

    window_start = now - timedelta(days=LAST_WORDS_WINDOW_DAYS)
    recent = [p for p in posts if window_start <= _post_date(p.timestamp) <= now]
    if recent:
        out[1] = float(np.mean([p.hit_count("last_words") / p.total_tokens for p in recent]))

    window = posts[-TRANSITION_WINDOW_POSTS:]
    love_joy = 0
    love_anx = 0
    for i, first in enumerate(window):
        if first.hit_count("love") < 1:
            continue
        for second in window[i + 1 :]:
            if second.timestamp <= first.timestamp:
                continue
            if second.hit_count("joy") >= 1:
                love_joy += 1
            if second.hit_count("anxiety") >= 1 or second.hit_count("sorrow") >= 1:
                love_anx += 1
    out[5] = float(love_joy)
    out[6] = float(love_anx)
    return out


def encode_interaction(user: UserRecord, scale: bool = True) -> np.ndarray:
    """(following, follower, interact) counts, log(1+x)-scaled by default."""
    counts = np.array(
        [user.following_count, user.follower_count, user.interact_count], dtype=np.float64
    )
    if np.any(counts < 0):
        raise FormatError(f"user {user.user_id}: negative interaction count")
    return np.log1p(counts) if scale else counts


def assemble_property_vector(
    user: UserRecord,
    post_behavior: np.ndarray,
    layout: PropertyLayout,
    lexicons: Mapping[str, Lexicon],
    now: date,
    max_age: int = DEFAULT_MAX_AGE,
    scale_interaction: bool = True,
) -> PropertyVector:
    """Concatenate every encoded category into the layout's vector."""
    post_behavior = np.asarray(post_behavior, dtype=np.float64)
    post_seg = layout.segment("post_behavior")
    if post_behavior.shape != (post_seg.width,):
        raise InternalError(
            f"post behavior width {post_behavior.shape} != layout width {post_seg.width}"
        )

    stress = encode_stress(user.stress_periods)
    personality = encode_personality(user, lexicons)
    emotion = encode_emotion_expression(user, lexicons, now)
    interaction = encode_interaction(user, scale=scale_interaction)

    by_name: dict[str, np.ndarray] = {
        "gender": encode_gender(user.gender),
        "age": np.array([encode_age(user.age_years, max_age)]),
        "location": encode_location(user.location),
        "perfection": np.array([personality[0]]),
        "ruminant": np.array([personality[1]]),
        "sensitive": np.array([personality[2]]),
        "stress_periods": np.array([stress[0]]),
        "stress_level": np.array([stress[1]]),
        "stress_categories": np.array([stress[2]]),
        "disorder": np.array([1.0 if user.disorder_flag else 0.0]),
        "attempt": np.array([1.0 if user.attempt_flag else 0.0]),
        "post_behavior": post_behavior,
        "suicide_words": emotion[0:1],
        "last_words": emotion[1:2],
        "future_words": emotion[2:3],
        "negation_words": emotion[3:4],
        "self_concern_words": emotion[4:5],
        "love_joy": emotion[5:6],
        "love_anxiety_sorrow": emotion[6:7],
        "following": interaction[0:1],
        "follower": interaction[1:2],
        "interact": interaction[2:3],
        "reserved": np.zeros(1),
    }

    values = np.zeros(layout.total_width)
    for seg in layout.segments:
        chunk = by_name.get(seg.name)
        if chunk is None:
            raise InternalError(f"no encoder output for layout segment {seg.name!r}")
        if chunk.shape != (seg.width,):
            raise InternalError(
                f"segment {seg.name}: encoded width {chunk.shape} != layout width {seg.width}"
            )
        values[seg.offset : seg.offset + seg.width] = chunk
    return PropertyVector(values=values, layout=layout)


def build_adjacency(dataset: CohortDataset) -> dict[str, tuple[str, ...]]:
    """Sorted neighbour tuples per user; self-edges dropped with a warning.

    Sorting makes downstream aggregation invariant to edge-file ordering.
    """
    neighbour_sets: dict[str, set[str]] = {u.user_id: set() for u in dataset.users}
    for edge in dataset.edges:
        if edge.src == edge.dst:
            log.warning("dropping self-edge on user %s", edge.src)
            continue
        neighbour_sets[edge.src].add(edge.dst)
    return {uid: tuple(sorted(nbrs)) for uid, nbrs in neighbour_sets.items()}


def build_graph(
    dataset: CohortDataset, vectors: Mapping[str, PropertyVector]
) -> KnowledgeGraph:
    """Assemble the knowledge graph from a cohort and its property vectors."""
    for user in dataset.users:
        if user.user_id not in vectors:
            raise IntegrityError(f"no property vector for user {user.user_id!r}")
    return KnowledgeGraph(
        vectors=dict(vectors),
        labels={u.user_id: u.label for u in dataset.users},
        adjacency=build_adjacency(dataset),
    )
