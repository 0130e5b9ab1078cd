import numpy as np
import pytest

from riskgraph.data_model.types import Lexicon, PostRecord, UserRecord


def make_post(
    post_id="p0",
    user_id="u0",
    timestamp=1_556_000_000,
    hour=12,
    token_counts=None,
    total_tokens=20,
    polarity=0.0,
    text=None,
    image=None,
    brightness=None,
    warmth=None,
) -> PostRecord:
    return PostRecord(
        post_id=post_id,
        user_id=user_id,
        timestamp=timestamp,
        hour=hour,
        text_embedding=np.zeros(768) if text is None else text,
        image_embedding=np.zeros(300) if image is None else image,
        token_counts=dict(token_counts or {}),
        total_tokens=total_tokens,
        sentiment_polarity=polarity,
        image_brightness=brightness,
        image_warmth=warmth,
    )


def make_user(user_id="u0", posts=None, **kwargs) -> UserRecord:
    defaults = dict(gender="unknown", age_years=None, location="unknown")
    defaults.update(kwargs)
    return UserRecord(user_id=user_id, posts=list(posts or []), **defaults)


@pytest.fixture
def suicide_lexicon() -> Lexicon:
    return Lexicon(
        name="suicide",
        entries={"w_heavy": 3.0, "w_mid": 2.0, "w_a": 1.0, "w_b": 1.0, "two words": 2.0},
    )


def fd_check(loss_fn, arrays, eps=1e-5, rel_tol=1e-4, abs_tol=1e-6, rng=None, max_entries=30):
    """Central finite differences vs analytic grads for named (array, grad) pairs."""
    rng = rng or np.random.default_rng(0)
    failures = []
    for name, array, grad in arrays:
        flat = array.reshape(-1)
        gflat = np.asarray(grad).reshape(-1)
        if len(flat) <= max_entries:
            indices = range(len(flat))
        else:
            indices = rng.choice(len(flat), size=max_entries, replace=False)
        for k in indices:
            orig = flat[k]
            flat[k] = orig + eps
            plus = loss_fn()
            flat[k] = orig - eps
            minus = loss_fn()
            flat[k] = orig
            fd = (plus - minus) / (2 * eps)
            err = abs(fd - gflat[k])
            if err > abs_tol + rel_tol * max(abs(fd), abs(gflat[k])):
                failures.append((name, int(k), fd, float(gflat[k])))
    assert not failures, f"gradient mismatches: {failures[:5]}"
