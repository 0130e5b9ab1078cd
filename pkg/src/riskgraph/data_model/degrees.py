"""Suicide-lexicon expression degrees.

A post's degree is the weight sum over every matched lexicon word or
phrase; a user's degree sums over all their posts. Matching is a
longest-match scan over the token stream, counting every occurrence
(an expression repeated twice contributes its weight twice).
"""

from __future__ import annotations

from typing import Optional, Sequence

from riskgraph.data_model.types import (
    SUICIDE_WEIGHT_KEYS,
    Lexicon,
    PostRecord,
    UserRecord,
)


def match_weight_sum(tokens: Sequence[str], lexicon: Lexicon) -> float:
    """Total lexicon weight over all matches in a token stream.

    At each position the longest matching phrase wins and the scan resumes
    after it; unmatched tokens contribute nothing.
    """
    if not lexicon.entries:
        return 0.0
    max_len = lexicon.max_phrase_len()
    total = 0.0
    i = 0
    n = len(tokens)
    while i < n:
        matched = 0
        for length in range(min(max_len, n - i), 0, -1):
            phrase = " ".join(tokens[i : i + length])
            if phrase in lexicon.entries:
                total += lexicon.entries[phrase]
                matched = length
                break
        i += matched if matched else 1
    return total


def match_hit_count(tokens: Sequence[str], lexicon: Lexicon) -> int:
    """Number of lexicon matches in a token stream (same scan as match_weight_sum)."""
    if not lexicon.entries:
        return 0
    max_len = lexicon.max_phrase_len()
    hits = 0
    i = 0
    n = len(tokens)
    while i < n:
        matched = 0
        for length in range(min(max_len, n - i), 0, -1):
            if " ".join(tokens[i : i + length]) in lexicon.entries:
                hits += 1
                matched = length
                break
        i += matched if matched else 1
    return hits


def post_degree(
    post: PostRecord,
    suicide_lexicon: Lexicon,
    tokens: Optional[Sequence[str]] = None,
) -> float:
    """Weighted suicide-word degree of one post.

    With raw tokens supplied the lexicon is scanned directly; otherwise the
    post's stored per-weight hit counts (suicide_w1..suicide_w3) are summed.
    """
    if tokens is not None:
        return match_weight_sum(tokens, suicide_lexicon)
    total = 0.0
    for key in SUICIDE_WEIGHT_KEYS:
        weight = int(key.rsplit("_w", 1)[1])
        total += weight * post.token_counts.get(key, 0)
    return total


def user_degree(user: UserRecord, suicide_lexicon: Lexicon) -> float:
    """Sum of post degrees over all the user's posts."""
    return sum(post_degree(p, suicide_lexicon) for p in user.posts)
