"""Synthetic cohort generation.

Cohorts are generated with quota-based assignment wherever a per-class
mean is targeted (exact category counts, sum-adjusted integer draws,
Bresenham-style word planting), so class-level sample means track the
configured targets tightly at desk scale. Embeddings are drawn from
class-conditional distributions (a per-class unit direction plus
isotropic noise) so the classes are learnably separable.

The default weibo profile mirrors the published per-class statistics
(gender mix, mean stressful periods, interaction counts, emotion
transitions, ...); post counts and embedding-signal strength are
desk-scale knobs. The reddit profile produces five ordinal classes from
posts alone: no profile fields, no images, no follow edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from datetime import date, datetime, timedelta, timezone
from typing import Optional, Sequence

import numpy as np

from riskgraph.errors import ConfigError
from riskgraph.data_model.types import (
    GENDERS,
    LEXICON_NAMES,
    LOCATIONS,
    STRESS_CATEGORIES,
    CohortDataset,
    Lexicon,
    PostRecord,
    SocialEdge,
    StressPeriod,
    UserRecord,
)

REFERENCE_DATE = date(2019, 4, 30)
YEAR_SECONDS = 365 * 24 * 3600

WEIBO_CATEGORY_TARGETS = (
    "personal_information",
    "personality",
    "experience",
    "post_behavior",
    "emotion_expression",
    "social_interaction",
)


@dataclass(frozen=True)
class ClassProfile:
    """Per-class generation targets; means are class-level expectations."""

    name: str
    label: int
    gender_mix: tuple[float, float, float]  # female, male, unknown
    age_mean: Optional[float]
    age_sd: float
    location_mix: tuple[float, ...]
    perfection_prop: float
    ruminant_prop: float
    stress_periods_mean: float
    stress_level_mean: float
    stress_interpersonal_frac: float
    stress_duration_mean: float
    disorder_rate: float
    attempt_rate: float
    posts_mean: float
    image_post_rate: float
    suicide_prop: float
    last_words_prop: float
    future_prop: float
    negation_prop: float
    self_concern_prop: float
    love_joy_mean: float
    love_anxiety_sorrow_mean: float
    following_mean: float
    follower_mean: float
    interact_mean: float
    neighbour_mean: float
    sentiment_mean: float
    brightness_mean: float
    warmth_mean: float
    # fraction of users whose post appearance (embeddings, polarity, image
    # tone) is drawn from the opposite class; profile fields stay truthful
    antireal_rate: float = 0.0


@dataclass(frozen=True)
class SynthConfig:
    """Cohort shape plus the per-class profiles driving every target mean."""

    profile: str
    users: int
    class_fracs: tuple[float, ...]
    class_profiles: tuple[ClassProfile, ...]
    split_fracs: tuple[float, float, float] = (0.84, 0.08, 0.08)
    tokens_low: int = 20
    tokens_high: int = 80
    homophily: float = 0.8
    text_signal: float = 1.0
    image_signal: float = 1.0
    planted_category: Optional[str] = None

    def validate(self) -> None:
        if len(self.class_fracs) != len(self.class_profiles):
            raise ConfigError("class_fracs and class_profiles length mismatch")
        if abs(sum(self.class_fracs) - 1.0) > 1e-9:
            raise ConfigError("class fractions must sum to 1")
        if abs(sum(self.split_fracs) - 1.0) > 1e-9:
            raise ConfigError("split fractions must sum to 1")
        if self.users < 2 * len(self.class_fracs):
            raise ConfigError(
                f"cohort of {self.users} users cannot hold >= 2 users "
                f"per class for {len(self.class_fracs)} classes"
            )
        for count in _quota(self.users, self.class_fracs):
            if count < 2:
                raise ConfigError("every class needs at least 2 users")


def _quota(n: int, fracs: Sequence[float]) -> list[int]:
    """Largest-remainder apportionment of n into len(fracs) integer counts."""
    raw = [n * f for f in fracs]
    counts = [int(math.floor(r)) for r in raw]
    remainders = sorted(
        range(len(fracs)), key=lambda i: (raw[i] - counts[i], -i), reverse=True
    )
    short = n - sum(counts)
    for i in remainders[:short]:
        counts[i] += 1
    return counts


def _ints_with_mean(rng: np.random.Generator, n: int, mean: float) -> np.ndarray:
    """Poisson-shaped non-negative ints whose sum is adjusted to round(mean*n)."""
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    values = rng.poisson(mean, size=n).astype(np.int64)
    target = int(round(mean * n))
    diff = target - int(values.sum())
    while diff != 0:
        idx = int(rng.integers(0, n))
        if diff > 0:
            values[idx] += 1
            diff -= 1
        elif values[idx] > 0:
            values[idx] -= 1
            diff += 1
    return values


def _flag_quota(rng: np.random.Generator, n: int, rate: float) -> np.ndarray:
    flags = np.zeros(n, dtype=bool)
    k = int(round(rate * n))
    if k > 0:
        flags[rng.choice(n, size=min(k, n), replace=False)] = True
    return flags


def _categorical_quota(rng: np.random.Generator, n: int, mix: Sequence[float]) -> np.ndarray:
    counts = _quota(n, mix)
    values = np.repeat(np.arange(len(mix)), counts)
    return rng.permutation(values)


def _plant_counts(token_counts: Sequence[int], proportion: float) -> list[int]:
    """Spread hits so the class-level hit/token ratio matches the proportion."""
    acc = 0.0
    out = []
    for tokens in token_counts:
        acc += proportion * tokens
        hits = int(acc)
        hits = min(hits, tokens)
        out.append(hits)
        acc -= hits
    return out


def _class_direction(rng: np.random.Generator, width: int) -> np.ndarray:
    vec = rng.normal(size=width)
    return vec / np.linalg.norm(vec)


def _make_lexicons(rng: np.random.Generator) -> dict[str, Lexicon]:
    lexicons = {}
    for name in LEXICON_NAMES:
        entries: dict[str, float] = {}
        for i in range(24):
            weight = 1.0
            if name == "suicide":
                weight = float(1 + (i % 3))
            entries[f"{name}_term_{i:02d}"] = weight
        lexicons[name] = Lexicon(name=name, entries=entries)
    return lexicons


def generate_synthetic_cohort(config: SynthConfig, seed: int) -> CohortDataset:
    """Deterministically generate a labeled cohort for the given config and seed."""
    config.validate()
    rng = np.random.default_rng(seed)

    n = config.users
    class_counts = _quota(n, config.class_fracs)
    class_of = rng.permutation(np.repeat(np.arange(len(class_counts)), class_counts))
    user_ids = [f"u{i:05d}" for i in range(n)]

    text_dirs = [_class_direction(rng, 768) for _ in config.class_profiles]
    image_dirs = [_class_direction(rng, 300) for _ in config.class_profiles]
    lexicons = _make_lexicons(rng)

    end_ts = int(
        datetime(
            REFERENCE_DATE.year, REFERENCE_DATE.month, REFERENCE_DATE.day,
            23, 0, tzinfo=timezone.utc,
        ).timestamp()
    )
    start_ts = end_ts - YEAR_SECONDS

    users: list[UserRecord] = []
    suicide_weight_cycle = 0
    for cls, profile in enumerate(config.class_profiles):
        members = [i for i in range(n) if class_of[i] == cls]
        m = len(members)

        genders = _categorical_quota(rng, m, profile.gender_mix)
        locations = _categorical_quota(rng, m, profile.location_mix)
        if profile.age_mean is None:
            ages: list[Optional[int]] = [None] * m
        else:
            drawn = np.rint(rng.normal(profile.age_mean, profile.age_sd, size=m))
            ages = [int(a) for a in np.clip(drawn, 14, 60)]
        disorder = _flag_quota(rng, m, profile.disorder_rate)
        attempt = _flag_quota(rng, m, profile.attempt_rate)
        post_counts = _ints_with_mean(rng, m, profile.posts_mean)
        stress_counts = _ints_with_mean(rng, m, profile.stress_periods_mean)
        following = np.rint(
            rng.gamma(2.78, profile.following_mean / 2.78, size=m)
        ).astype(int) if profile.following_mean > 0 else np.zeros(m, dtype=int)
        follower = np.rint(
            rng.gamma(2.78, profile.follower_mean / 2.78, size=m)
        ).astype(int) if profile.follower_mean > 0 else np.zeros(m, dtype=int)
        interact = np.rint(
            rng.gamma(2.78, profile.interact_mean / 2.78, size=m)
        ).astype(int) if profile.interact_mean > 0 else np.zeros(m, dtype=int)

        lj_flags = _flag_quota(rng, m, profile.love_joy_mean)
        las_flags = _flag_quota(rng, m, profile.love_anxiety_sorrow_mean)
        antireal = _flag_quota(rng, m, profile.antireal_rate)
        flip_cls = (cls + 1) % len(config.class_profiles)
        flip_profile = config.class_profiles[flip_cls]

        # stress-period attributes are apportioned across the class's periods
        total_periods = int(stress_counts.sum())
        strong_levels = _flag_quota(rng, total_periods, profile.stress_level_mean - 1.0)
        interp_frac = min(profile.stress_interpersonal_frac, 1.0)
        other_categories = [c for c in STRESS_CATEGORIES if c != "interpersonal_relation"]
        category_mix = [interp_frac] + [(1.0 - interp_frac) / 5.0] * 5
        period_categories = _categorical_quota(rng, total_periods, category_mix)

        # word hits are planted across the class's posts to hit each proportion
        tokens_per_post: list[int] = []
        for count in post_counts:
            tokens_per_post.extend(
                int(t) for t in rng.integers(config.tokens_low, config.tokens_high + 1, size=count)
            )
        planted = {
            "suicide": _plant_counts(tokens_per_post, profile.suicide_prop),
            "last_words": _plant_counts(tokens_per_post, profile.last_words_prop),
            "future": _plant_counts(tokens_per_post, profile.future_prop),
            "negation": _plant_counts(tokens_per_post, profile.negation_prop),
            "self_concern": _plant_counts(tokens_per_post, profile.self_concern_prop),
            "perfection": _plant_counts(tokens_per_post, profile.perfection_prop),
            "ruminant": _plant_counts(tokens_per_post, profile.ruminant_prop),
        }

        period_cursor = 0
        post_cursor = 0
        for local, idx in enumerate(members):
            uid = user_ids[idx]
            n_posts = int(post_counts[local])

            # strictly increasing timestamps so post order is unambiguous
            timestamps = np.sort(rng.integers(start_ts, end_ts, size=n_posts))
            timestamps = timestamps + np.arange(n_posts)
            has_image = rng.random(n_posts) < profile.image_post_rate

            plant_love_joy = lj_flags[local] and n_posts >= 2
            plant_love_anx = las_flags[local] and n_posts >= 2
            love_pos = max(n_posts - 3, 0)
            joy_pos = n_posts - 2 if n_posts >= 3 else n_posts - 1
            anx_pos = n_posts - 1

            posts: list[PostRecord] = []
            for j in range(n_posts):
                tokens = tokens_per_post[post_cursor]
                counts: dict[str, int] = {}
                for cat, hits in planted.items():
                    if hits[post_cursor]:
                        counts[cat] = hits[post_cursor]
                if counts.get("suicide"):
                    w1 = w2 = w3 = 0
                    for _ in range(counts["suicide"]):
                        bucket = suicide_weight_cycle % 3
                        suicide_weight_cycle += 1
                        w1 += bucket == 0
                        w2 += bucket == 1
                        w3 += bucket == 2
                    if w1:
                        counts["suicide_w1"] = w1
                    if w2:
                        counts["suicide_w2"] = w2
                    if w3:
                        counts["suicide_w3"] = w3
                post_cursor += 1

                # emotion-transition patterns live in the final posts
                if (plant_love_joy or plant_love_anx) and j == love_pos:
                    counts["love"] = max(counts.get("love", 0), 1)
                if plant_love_joy and j == joy_pos:
                    counts["joy"] = max(counts.get("joy", 0), 1)
                if plant_love_anx and j == anx_pos:
                    counts["anxiety"] = max(counts.get("anxiety", 0), 1)

                ts = int(timestamps[j])
                hour = datetime.fromtimestamp(ts, tz=timezone.utc).hour

                shown = flip_profile if antireal[local] else profile
                shown_cls = flip_cls if antireal[local] else cls
                noise = rng.normal(size=768) / math.sqrt(768)
                text_vec = noise + config.text_signal * text_dirs[shown_cls]
                text_vec /= np.linalg.norm(text_vec)
                if has_image[j]:
                    img_noise = rng.normal(size=300) / math.sqrt(300)
                    image_vec = img_noise + config.image_signal * image_dirs[shown_cls]
                    image_vec /= np.linalg.norm(image_vec)
                    brightness = float(np.clip(rng.normal(shown.brightness_mean, 0.18), 0, 1))
                    warmth = float(np.clip(rng.normal(shown.warmth_mean, 0.18), 0, 1))
                else:
                    image_vec = np.zeros(300)
                    brightness = None
                    warmth = None
                polarity = float(np.clip(rng.normal(shown.sentiment_mean, 0.35), -1, 1))

                posts.append(
                    PostRecord(
                        post_id=f"{uid}_p{j:04d}",
                        user_id=uid,
                        timestamp=ts,
                        hour=hour,
                        text_embedding=text_vec,
                        image_embedding=image_vec,
                        token_counts=counts,
                        total_tokens=int(tokens),
                        sentiment_polarity=polarity,
                        image_brightness=brightness,
                        image_warmth=warmth,
                    )
                )
            periods: list[StressPeriod] = []
            for _ in range(int(stress_counts[local])):
                level = 2 if strong_levels[period_cursor] else 1
                cat_idx = int(period_categories[period_cursor])
                category = (
                    "interpersonal_relation" if cat_idx == 0 else other_categories[cat_idx - 1]
                )
                period_cursor += 1
                duration = 6 + int(rng.poisson(max(profile.stress_duration_mean - 6.0, 0.0)))
                start_offset = int(rng.integers(0, 365 - duration))
                start_day = REFERENCE_DATE - timedelta(days=365 - start_offset)
                periods.append(
                    StressPeriod(
                        start_day=start_day,
                        end_day=start_day + timedelta(days=duration),
                        level=level,
                        category=category,
                    )
                )

            users.append(
                UserRecord(
                    user_id=uid,
                    gender=GENDERS[int(genders[local])],
                    age_years=ages[local],
                    location=LOCATIONS[int(locations[local])],
                    posts=posts,
                    stress_periods=periods,
                    disorder_flag=bool(disorder[local]),
                    attempt_flag=bool(attempt[local]),
                    following_count=int(following[local]),
                    follower_count=int(follower[local]),
                    interact_count=int(interact[local]),
                    label=profile.label,
                )
            )

    users.sort(key=lambda u: u.user_id)

    edges = _make_edges(rng, users, class_of, config)
    split = _make_split(rng, users, config.split_fracs)

    dataset = CohortDataset(users=users, edges=edges, lexicons=lexicons, split=split)
    dataset.validate()
    return dataset


def _make_edges(
    rng: np.random.Generator,
    users: list[UserRecord],
    class_of: np.ndarray,
    config: SynthConfig,
) -> list[SocialEdge]:
    n = len(users)
    by_class: dict[int, list[int]] = {}
    for i in range(n):
        by_class.setdefault(int(class_of[i]), []).append(i)

    edges: list[SocialEdge] = []
    for cls, profile in enumerate(config.class_profiles):
        members = by_class.get(cls, [])
        if profile.neighbour_mean <= 0 or not members:
            continue
        degrees = _ints_with_mean(rng, len(members), profile.neighbour_mean)
        same_pool = np.array(members)
        other_pool = np.array([i for i in range(n) if int(class_of[i]) != cls])
        for local, i in enumerate(members):
            degree = min(int(degrees[local]), n - 1)
            if degree == 0:
                continue
            same_wanted = int(round(config.homophily * degree))
            same_candidates = same_pool[same_pool != i]
            same_wanted = min(same_wanted, len(same_candidates))
            other_wanted = min(degree - same_wanted, len(other_pool))
            chosen: list[int] = []
            if same_wanted:
                chosen.extend(
                    int(x) for x in rng.choice(same_candidates, size=same_wanted, replace=False)
                )
            if other_wanted > 0 and len(other_pool):
                chosen.extend(
                    int(x) for x in rng.choice(other_pool, size=other_wanted, replace=False)
                )
            for target in sorted(set(chosen)):
                edges.append(SocialEdge(users[i].user_id, users[target].user_id))
    return edges


def _make_split(
    rng: np.random.Generator,
    users: list[UserRecord],
    split_fracs: tuple[float, float, float],
) -> dict[str, str]:
    split: dict[str, str] = {}
    by_label: dict[int, list[str]] = {}
    for user in users:
        by_label.setdefault(user.label, []).append(user.user_id)
    for label in sorted(by_label):
        ids = by_label[label]
        order = rng.permutation(len(ids))
        counts = _quota(len(ids), split_fracs)
        names = (
            ["train"] * counts[0] + ["validation"] * counts[1] + ["test"] * counts[2]
        )
        for pos, name in zip(order, names):
            split[ids[pos]] = name
    return split


# --- built-in profiles --------------------------------------------------------


def _normalized(mix: Sequence[float]) -> tuple[float, ...]:
    total = sum(mix)
    return tuple(v / total for v in mix)


ORDINARY_PROFILE = ClassProfile(
    name="ordinary",
    label=0,
    gender_mix=_normalized((0.423, 0.506, 0.071)),
    age_mean=28.3,
    age_sd=6.0,
    location_mix=_normalized((0.250, 0.150, 0.157, 0.058, 0.029, 0.079, 0.053, 0.223)),
    perfection_prop=0.0017,
    ruminant_prop=0.00052,
    stress_periods_mean=1.8,
    stress_level_mean=1.3,
    stress_interpersonal_frac=1.0 / 1.8,
    stress_duration_mean=9.0,
    disorder_rate=0.0003,
    attempt_rate=0.001,
    posts_mean=10.0,
    image_post_rate=0.53,
    suicide_prop=0.00016,
    last_words_prop=0.00000023,
    future_prop=0.00045,
    negation_prop=0.00009,
    self_concern_prop=0.00029,
    love_joy_mean=0.3,
    love_anxiety_sorrow_mean=0.1,
    following_mean=378.1,
    follower_mean=1515.3,
    interact_mean=10.9,
    neighbour_mean=5.1,
    sentiment_mean=0.15,
    brightness_mean=0.58,
    warmth_mean=0.55,
    antireal_rate=0.08,
)

SUICIDAL_PROFILE = ClassProfile(
    name="suicidal",
    label=1,
    gender_mix=_normalized((0.785, 0.213, 0.002)),
    age_mean=25.8,
    age_sd=6.0,
    location_mix=_normalized((0.188, 0.105, 0.074, 0.066, 0.030, 0.070, 0.033, 0.435)),
    perfection_prop=0.0025,
    ruminant_prop=0.00086,
    stress_periods_mean=2.1,
    stress_level_mean=1.6,
    stress_interpersonal_frac=1.3 / 2.1,
    stress_duration_mean=12.0,
    disorder_rate=0.001,
    attempt_rate=0.035,
    posts_mean=8.0,
    image_post_rate=0.37,
    suicide_prop=0.00034,
    last_words_prop=0.000013,
    future_prop=0.00031,
    negation_prop=0.00012,
    self_concern_prop=0.00079,
    love_joy_mean=0.1,
    love_anxiety_sorrow_mean=0.5,
    following_mean=207.0,
    follower_mean=566.9,
    interact_mean=3.4,
    neighbour_mean=4.3,
    sentiment_mean=-0.25,
    brightness_mean=0.42,
    warmth_mean=0.45,
    antireal_rate=0.08,
)


def weibo_config(
    users: int = 600,
    balance: float = 0.5,
    text_signal: float = 1.0,
    image_signal: float = 1.0,
    split_fracs: tuple[float, float, float] = (0.84, 0.08, 0.08),
) -> SynthConfig:
    """Binary cohort shaped like the published per-class statistics table."""
    return SynthConfig(
        profile="weibo",
        users=users,
        class_fracs=(1.0 - balance, balance),
        class_profiles=(ORDINARY_PROFILE, SUICIDAL_PROFILE),
        split_fracs=split_fracs,
        text_signal=text_signal,
        image_signal=image_signal,
    )


REDDIT_CLASS_NAMES = (
    "supportive",
    "suicide_indicator",
    "suicidal_ideation",
    "suicidal_behavior",
    "actual_attempt",
)
REDDIT_CLASS_COUNTS = (108, 99, 171, 77, 45)


def _reddit_profile(cls: int) -> ClassProfile:
    t = cls / 4.0
    return ClassProfile(
        name=REDDIT_CLASS_NAMES[cls],
        label=cls,
        gender_mix=(0.0, 0.0, 1.0),
        age_mean=None,
        age_sd=0.0,
        location_mix=(0.0,) * 7 + (1.0,),
        perfection_prop=0.001 + 0.002 * t,
        ruminant_prop=0.0004 + 0.0012 * t,
        stress_periods_mean=1.0 + 1.5 * t,
        stress_level_mean=1.2 + 0.6 * t,
        stress_interpersonal_frac=0.4,
        stress_duration_mean=8.0 + 6.0 * t,
        disorder_rate=0.002 + 0.03 * t,
        attempt_rate=0.002 + 0.06 * t,
        posts_mean=9.0,
        image_post_rate=0.0,
        suicide_prop=0.0002 + 0.0012 * t,
        last_words_prop=0.0004 * t,
        future_prop=0.0006 - 0.0004 * t,
        negation_prop=0.0001 + 0.0002 * t,
        self_concern_prop=0.0003 + 0.0008 * t,
        love_joy_mean=0.3 - 0.25 * t,
        love_anxiety_sorrow_mean=0.05 + 0.5 * t,
        following_mean=0.0,
        follower_mean=0.0,
        interact_mean=0.0,
        neighbour_mean=0.0,
        sentiment_mean=0.2 - 0.7 * t,
        brightness_mean=0.5,
        warmth_mean=0.5,
    )


def reddit_config(users: int = 500, text_signal: float = 1.0) -> SynthConfig:
    """Five ordinal classes from posts alone (no profiles, images, or edges)."""
    return SynthConfig(
        profile="reddit",
        users=users,
        class_fracs=_normalized(REDDIT_CLASS_COUNTS),
        class_profiles=tuple(_reddit_profile(c) for c in range(5)),
        split_fracs=(0.606, 0.198, 0.196),
        text_signal=text_signal,
        image_signal=0.0,
    )


# --- planted-signal fixtures --------------------------------------------------


def planted_config(category: str, users: int = 200) -> SynthConfig:
    """Binary cohort where only one category separates the classes.

    Both classes start from a neutral baseline; the planted category gets a
    wide gap so it must dominate any per-category info-gain ranking.
    """
    base = replace(
        ORDINARY_PROFILE,
        name="baseline",
        antireal_rate=0.0,
        attempt_rate=0.0,
        disorder_rate=0.0,
        posts_mean=6.0,
        neighbour_mean=2.0,
        sentiment_mean=0.0,
        brightness_mean=0.5,
        warmth_mean=0.5,
        image_post_rate=0.5,
        love_joy_mean=0.2,
        love_anxiety_sorrow_mean=0.2,
        stress_level_mean=1.5,
        stress_interpersonal_frac=0.3,
    )
    positive = replace(base, name=f"planted_{category}", label=1)
    if category == "personal_information":
        base = replace(base, gender_mix=(0.2, 0.7, 0.1), age_mean=34.0)
        positive = replace(
            positive,
            gender_mix=(0.8, 0.15, 0.05),
            age_mean=22.0,
            location_mix=_normalized((0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05, 0.65)),
        )
    elif category == "personality":
        positive = replace(positive, perfection_prop=0.02, ruminant_prop=0.015)
        base = replace(base, perfection_prop=0.001, ruminant_prop=0.0005)
    elif category == "experience":
        base = replace(
            base,
            stress_periods_mean=1.0,
            stress_level_mean=1.2,
            stress_duration_mean=8.0,
            stress_interpersonal_frac=0.4,
        )
        positive = replace(
            positive,
            stress_periods_mean=4.0,
            stress_level_mean=1.9,
            stress_duration_mean=16.0,
            stress_interpersonal_frac=0.1,
            disorder_rate=0.3,
            attempt_rate=0.35,
        )
    elif category == "post_behavior":
        base = replace(base, sentiment_mean=0.4, brightness_mean=0.7, warmth_mean=0.65)
        positive = replace(
            positive, sentiment_mean=-0.4, brightness_mean=0.3, warmth_mean=0.35
        )
    elif category == "emotion_expression":
        base = replace(
            base,
            suicide_prop=0.0005,
            self_concern_prop=0.001,
            love_joy_mean=0.5,
            love_anxiety_sorrow_mean=0.05,
        )
        positive = replace(
            positive,
            suicide_prop=0.01,
            last_words_prop=0.004,
            negation_prop=0.006,
            self_concern_prop=0.012,
            love_joy_mean=0.05,
            love_anxiety_sorrow_mean=0.6,
        )
    elif category == "social_interaction":
        base = replace(
            base, following_mean=400.0, follower_mean=2000.0, interact_mean=15.0
        )
        positive = replace(
            positive, following_mean=80.0, follower_mean=150.0, interact_mean=2.0
        )
    else:
        raise ConfigError(f"unknown category to plant: {category!r}")
    return SynthConfig(
        profile="weibo",
        users=users,
        class_fracs=(0.5, 0.5),
        class_profiles=(base, positive),
        split_fracs=(0.84, 0.08, 0.08),
        text_signal=0.0,
        image_signal=0.0,
        planted_category=category,
    )
