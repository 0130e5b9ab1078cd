"""Information-gain feature analysis.

Per-user analysis features are discretized (continuous values split at the
mean, text by mean sentiment polarity into three classes, images by
brightness/warm-color fraction into four), then ranked by the reduction in
label entropy. Entropy uses log base 2, so gains are in bits.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from datetime import date
from typing import Callable, Hashable, Optional, Sequence

import numpy as np

from riskgraph.errors import FormatError
from riskgraph.data_model.types import CohortDataset, UserRecord
from riskgraph.kg_builder import (
    CATEGORY_EMOTION,
    CATEGORY_EXPERIENCE,
    CATEGORY_PERSONAL,
    CATEGORY_PERSONALITY,
    CATEGORY_POST,
    CATEGORY_SOCIAL,
    encode_emotion_expression,
    encode_personality,
    encode_stress,
)

DISCRETIZE_KINDS = ("mean_split", "categorical", "text_polarity", "image_bw")


def entropy(labels: Sequence[Hashable]) -> float:
    """Shannon entropy in bits of the empirical label distribution."""
    if len(labels) == 0:
        raise FormatError("entropy of empty sequence")
    counts = Counter(labels)
    total = len(labels)
    h = 0.0
    for count in counts.values():
        p = count / total
        h -= p * math.log2(p)
    return h


def info_gain(labels: Sequence[Hashable], feature_classes: Sequence[Hashable]) -> float:
    """H(labels) minus the conditional entropy given the feature classes."""
    if len(labels) == 0 or len(feature_classes) == 0:
        raise FormatError("info_gain on empty input")
    if len(labels) != len(feature_classes):
        raise FormatError("labels and feature classes differ in length")
    total = len(labels)
    by_class: dict[Hashable, list[Hashable]] = {}
    for label, feature in zip(labels, feature_classes):
        by_class.setdefault(feature, []).append(label)
    conditional = 0.0
    for group in by_class.values():
        conditional += (len(group) / total) * entropy(group)
    gain = entropy(labels) - conditional
    return max(gain, 0.0)


def discretize_feature(values: Sequence, kind: str) -> list:
    """Map raw per-user values to discrete classes per the configured rule."""
    if kind not in DISCRETIZE_KINDS:
        raise FormatError(f"unknown discretization kind {kind!r}")
    if len(values) == 0:
        raise FormatError("discretize_feature on empty values")
    if kind == "categorical":
        return list(values)
    if kind == "mean_split":
        arr = np.asarray(values, dtype=np.float64)
        mean = float(arr.mean())
        return [1 if v >= mean else 0 for v in arr]
    if kind == "text_polarity":
        out = []
        for ep in values:
            if ep <= -0.3:
                out.append(0)
            elif ep < 0.3:
                out.append(1)
            else:
                out.append(2)
        return out
    # image_bw: values are (brightness, warmth) pairs
    out = []
    for brightness, warmth in values:
        bright = brightness >= 0.5
        warm = warmth >= 0.5
        out.append((2 if bright else 0) + (1 if warm else 0))
    return out


@dataclass(frozen=True)
class AnalysisFeature:
    """One rankable per-user feature: raw extractor plus discretization rule."""

    name: str
    category: str
    kind: str
    extract: Callable[[UserRecord, date], object]
    # how a knockout zeroes this feature: property-vector segment names
    # and/or post-input column ranges; None marks analysis-only features
    mask_segments: Optional[tuple[str, ...]] = None
    mask_input_cols: Optional[tuple[int, int]] = None

    @property
    def maskable(self) -> bool:
        return self.mask_segments is not None or self.mask_input_cols is not None


def _mean_polarity(user: UserRecord, now: date) -> float:
    if not user.posts:
        return 0.0
    return float(np.mean([p.sentiment_polarity for p in user.posts]))


def _mean_image_bw(user: UserRecord, now: date) -> tuple[float, float]:
    pairs = [
        (p.image_brightness, p.image_warmth)
        for p in user.posts
        if p.image_brightness is not None and p.image_warmth is not None
    ]
    if not pairs:
        return (0.0, 0.0)
    return (
        float(np.mean([b for b, _ in pairs])),
        float(np.mean([w for _, w in pairs])),
    )


def _emotion(slot: int) -> Callable[[UserRecord, date], float]:
    def extract(user: UserRecord, now: date) -> float:
        return float(encode_emotion_expression(user, {}, now)[slot])

    return extract


def analysis_features() -> list[AnalysisFeature]:
    """The fixed per-user feature battery used by ranking and knockouts."""
    feats: list[AnalysisFeature] = [
        AnalysisFeature(
            "gender", CATEGORY_PERSONAL, "categorical",
            lambda u, now: u.gender, mask_segments=("gender",),
        ),
        AnalysisFeature(
            "age", CATEGORY_PERSONAL, "mean_split",
            lambda u, now: float(u.age_years or 0), mask_segments=("age",),
        ),
        AnalysisFeature(
            "location", CATEGORY_PERSONAL, "categorical",
            lambda u, now: u.location, mask_segments=("location",),
        ),
        AnalysisFeature(
            "perfection", CATEGORY_PERSONALITY, "mean_split",
            lambda u, now: encode_personality(u, {})[0], mask_segments=("perfection",),
        ),
        AnalysisFeature(
            "ruminant", CATEGORY_PERSONALITY, "mean_split",
            lambda u, now: encode_personality(u, {})[1], mask_segments=("ruminant",),
        ),
        AnalysisFeature(
            "sensitive", CATEGORY_PERSONALITY, "mean_split",
            lambda u, now: encode_personality(u, {})[2], mask_segments=("sensitive",),
        ),
        AnalysisFeature(
            "stress_periods", CATEGORY_EXPERIENCE, "mean_split",
            lambda u, now: encode_stress(u.stress_periods)[0],
            mask_segments=("stress_periods",),
        ),
        AnalysisFeature(
            "stress_level", CATEGORY_EXPERIENCE, "mean_split",
            lambda u, now: encode_stress(u.stress_periods)[1],
            mask_segments=("stress_level",),
        ),
        AnalysisFeature(
            "stress_categories", CATEGORY_EXPERIENCE, "mean_split",
            lambda u, now: encode_stress(u.stress_periods)[2],
            mask_segments=("stress_categories",),
        ),
        AnalysisFeature(
            "stress_duration", CATEGORY_EXPERIENCE, "mean_split",
            lambda u, now: float(
                np.mean([sp.duration_days for sp in u.stress_periods])
            ) if u.stress_periods else 0.0,
        ),
        AnalysisFeature(
            "disorder", CATEGORY_EXPERIENCE, "categorical",
            lambda u, now: int(u.disorder_flag), mask_segments=("disorder",),
        ),
        AnalysisFeature(
            "attempt", CATEGORY_EXPERIENCE, "categorical",
            lambda u, now: int(u.attempt_flag), mask_segments=("attempt",),
        ),
        AnalysisFeature(
            "texts", CATEGORY_POST, "text_polarity",
            _mean_polarity, mask_input_cols=(0, 768),
        ),
        AnalysisFeature(
            "images", CATEGORY_POST, "image_bw",
            _mean_image_bw, mask_input_cols=(768, 1068),
        ),
        AnalysisFeature(
            "suicide_words", CATEGORY_EMOTION, "mean_split",
            _emotion(0), mask_segments=("suicide_words",),
        ),
        AnalysisFeature(
            "last_words", CATEGORY_EMOTION, "mean_split",
            _emotion(1), mask_segments=("last_words",),
        ),
        AnalysisFeature(
            "future_words", CATEGORY_EMOTION, "mean_split",
            _emotion(2), mask_segments=("future_words",),
        ),
        AnalysisFeature(
            "negation_words", CATEGORY_EMOTION, "mean_split",
            _emotion(3), mask_segments=("negation_words",),
        ),
        AnalysisFeature(
            "self_concern_words", CATEGORY_EMOTION, "mean_split",
            _emotion(4), mask_segments=("self_concern_words",),
        ),
        AnalysisFeature(
            "emotion_transition", CATEGORY_EMOTION, "categorical",
            lambda u, now: (
                int(encode_emotion_expression(u, {}, now)[5]),
                int(encode_emotion_expression(u, {}, now)[6]),
            ),
            mask_segments=("love_joy", "love_anxiety_sorrow"),
        ),
        AnalysisFeature(
            "following", CATEGORY_SOCIAL, "mean_split",
            lambda u, now: float(u.following_count), mask_segments=("following",),
        ),
        AnalysisFeature(
            "follower", CATEGORY_SOCIAL, "mean_split",
            lambda u, now: float(u.follower_count), mask_segments=("follower",),
        ),
        AnalysisFeature(
            "interact", CATEGORY_SOCIAL, "mean_split",
            lambda u, now: float(u.interact_count), mask_segments=("interact",),
        ),
    ]
    return feats


def property_gains(
    dataset: CohortDataset,
    now: Optional[date] = None,
    features: Optional[list[AnalysisFeature]] = None,
) -> list[tuple[AnalysisFeature, float]]:
    """Info gain of every analysis feature, sorted descending (stable by name)."""
    now = now or dataset.reference_date()
    features = features if features is not None else analysis_features()
    labels = [u.label for u in dataset.users]
    scored = []
    for feat in features:
        raw = [feat.extract(u, now) for u in dataset.users]
        classes = discretize_feature(raw, feat.kind)
        scored.append((feat, info_gain(labels, classes)))
    scored.sort(key=lambda item: (-item[1], item[0].name))
    return scored


def rank_categories(
    dataset: CohortDataset, now: Optional[date] = None
) -> list[tuple[str, float]]:
    """Mean info gain of the features inside each category, sorted descending."""
    by_category: dict[str, list[float]] = {}
    for feat, gain in property_gains(dataset, now):
        by_category.setdefault(feat.category, []).append(gain)
    ranked = [(cat, float(np.mean(gains))) for cat, gains in by_category.items()]
    ranked.sort(key=lambda item: (-item[1], item[0]))
    return ranked
