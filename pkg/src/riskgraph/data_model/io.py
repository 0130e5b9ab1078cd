"""Cohort directory serialization.

Layout:
    users.jsonl        one user per line; posts referenced by post id
    posts.jsonl        one post per line; embeddings as float arrays
    edges.csv          header ``src,dst``, one directed edge per line
    lexicons/<name>.tsv  word TAB weight
    split.csv          header ``user_id,split``

All text is UTF-8 with LF line endings. Floats are emitted with Python's
shortest round-trip repr, so load(save(d)) reproduces values exactly.
"""

from __future__ import annotations

import csv
import io
import json
from datetime import date
from pathlib import Path

import numpy as np

from riskgraph.errors import FormatError, IntegrityError, LoadError
from riskgraph.data_model.types import (
    CohortDataset,
    Lexicon,
    PostRecord,
    SocialEdge,
    StressPeriod,
    UserRecord,
)

USERS_FILE = "users.jsonl"
POSTS_FILE = "posts.jsonl"
EDGES_FILE = "edges.csv"
SPLIT_FILE = "split.csv"
LEXICON_DIR = "lexicons"


def _user_to_json(user: UserRecord) -> dict:
    return {
        "user_id": user.user_id,
        "gender": user.gender,
        "age_years": user.age_years,
        "location": user.location,
        "post_ids": [p.post_id for p in user.posts],
        "stress_periods": [
            {
                "start_day": sp.start_day.isoformat(),
                "end_day": sp.end_day.isoformat(),
                "level": sp.level,
                "category": sp.category,
            }
            for sp in user.stress_periods
        ],
        "disorder_flag": user.disorder_flag,
        "attempt_flag": user.attempt_flag,
        "following_count": user.following_count,
        "follower_count": user.follower_count,
        "interact_count": user.interact_count,
        "label": user.label,
    }


def _post_to_json(post: PostRecord) -> dict:
    return {
        "post_id": post.post_id,
        "user_id": post.user_id,
        "timestamp": post.timestamp,
        "hour": post.hour,
        "text_embedding": [float(x) for x in post.text_embedding],
        "image_embedding": [float(x) for x in post.image_embedding],
        "token_counts": post.token_counts,
        "total_tokens": post.total_tokens,
        "sentiment_polarity": float(post.sentiment_polarity),
        "image_brightness": None
        if post.image_brightness is None
        else float(post.image_brightness),
        "image_warmth": None if post.image_warmth is None else float(post.image_warmth),
    }


def save_cohort(dataset: CohortDataset, dir_path: str | Path, force: bool = False) -> Path:
    """Write a cohort directory; refuses a non-empty target unless force."""
    root = Path(dir_path)
    if root.exists() and any(root.iterdir()) and not force:
        raise LoadError(f"output directory {root} is not empty (use force to overwrite)")
    root.mkdir(parents=True, exist_ok=True)
    (root / LEXICON_DIR).mkdir(exist_ok=True)

    with open(root / USERS_FILE, "w", encoding="utf-8", newline="\n") as f:
        for user in dataset.users:
            f.write(json.dumps(_user_to_json(user), ensure_ascii=False) + "\n")

    with open(root / POSTS_FILE, "w", encoding="utf-8", newline="\n") as f:
        for user in dataset.users:
            for post in user.posts:
                f.write(json.dumps(_post_to_json(post), ensure_ascii=False) + "\n")

    with open(root / EDGES_FILE, "w", encoding="utf-8", newline="\n") as f:
        f.write("src,dst\n")
        for edge in dataset.edges:
            f.write(f"{edge.src},{edge.dst}\n")

    for name, lex in sorted(dataset.lexicons.items()):
        with open(root / LEXICON_DIR / f"{name}.tsv", "w", encoding="utf-8", newline="\n") as f:
            for word, weight in lex.entries.items():
                weight_repr = str(int(weight)) if float(weight).is_integer() else repr(weight)
                f.write(f"{word}\t{weight_repr}\n")

    with open(root / SPLIT_FILE, "w", encoding="utf-8", newline="\n") as f:
        f.write("user_id,split\n")
        for user in dataset.users:
            f.write(f"{user.user_id},{dataset.split[user.user_id]}\n")

    return root


def _parse_embedding(raw: list, width: int, post_id: str, kind: str) -> np.ndarray:
    vec = np.asarray(raw, dtype=np.float64)
    if vec.shape != (width,):
        raise FormatError(
            f"post {post_id}: {kind} embedding has width {vec.shape[0] if vec.ndim == 1 else vec.shape} "
            f"(expected {width})"
        )
    return vec


def load_cohort(dir_path: str | Path) -> CohortDataset:
    """Load and cross-validate a cohort directory written by save_cohort."""
    root = Path(dir_path)
    if not root.is_dir():
        raise LoadError(f"cohort directory {root} does not exist")
    for required in (USERS_FILE, POSTS_FILE, EDGES_FILE, SPLIT_FILE):
        if not (root / required).is_file():
            raise LoadError(f"missing cohort file {required} in {root}")
    if not (root / LEXICON_DIR).is_dir():
        raise LoadError(f"missing cohort file {LEXICON_DIR}/ in {root}")

    posts_by_id: dict[str, PostRecord] = {}
    with open(root / POSTS_FILE, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{POSTS_FILE}:{lineno}: bad JSON: {exc}") from exc
            post = PostRecord(
                post_id=raw["post_id"],
                user_id=raw["user_id"],
                timestamp=int(raw["timestamp"]),
                hour=int(raw["hour"]),
                text_embedding=_parse_embedding(raw["text_embedding"], 768, raw["post_id"], "text"),
                image_embedding=_parse_embedding(raw["image_embedding"], 300, raw["post_id"], "image"),
                token_counts={k: int(v) for k, v in raw["token_counts"].items()},
                total_tokens=int(raw["total_tokens"]),
                sentiment_polarity=float(raw["sentiment_polarity"]),
                image_brightness=raw.get("image_brightness"),
                image_warmth=raw.get("image_warmth"),
            )
            posts_by_id[post.post_id] = post

    users: list[UserRecord] = []
    with open(root / USERS_FILE, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{USERS_FILE}:{lineno}: bad JSON: {exc}") from exc
            posts = []
            for pid in raw["post_ids"]:
                if pid not in posts_by_id:
                    raise IntegrityError(
                        f"user {raw['user_id']} references unknown post id {pid!r}"
                    )
                posts.append(posts_by_id[pid])
            users.append(
                UserRecord(
                    user_id=raw["user_id"],
                    gender=raw["gender"],
                    age_years=raw["age_years"],
                    location=raw["location"],
                    posts=posts,
                    stress_periods=[
                        StressPeriod(
                            start_day=date.fromisoformat(sp["start_day"]),
                            end_day=date.fromisoformat(sp["end_day"]),
                            level=int(sp["level"]),
                            category=sp["category"],
                        )
                        for sp in raw["stress_periods"]
                    ],
                    disorder_flag=bool(raw["disorder_flag"]),
                    attempt_flag=bool(raw["attempt_flag"]),
                    following_count=int(raw["following_count"]),
                    follower_count=int(raw["follower_count"]),
                    interact_count=int(raw["interact_count"]),
                    label=int(raw["label"]),
                )
            )

    user_ids = {u.user_id for u in users}
    for post in posts_by_id.values():
        if post.user_id not in user_ids:
            raise IntegrityError(f"post {post.post_id} references unknown user id {post.user_id!r}")

    edges: list[SocialEdge] = []
    seen: set[tuple[str, str]] = set()
    with open(root / EDGES_FILE, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["src", "dst"]:
            raise FormatError(f"{EDGES_FILE}: expected header src,dst, got {header}")
        for row in reader:
            if not row:
                continue
            if len(row) != 2:
                raise FormatError(f"{EDGES_FILE}: malformed row {row}")
            src, dst = row
            for endpoint in (src, dst):
                if endpoint not in user_ids:
                    raise IntegrityError(f"edge references unknown user id {endpoint!r}")
            if (src, dst) not in seen:
                seen.add((src, dst))
                edges.append(SocialEdge(src, dst))

    lexicons: dict[str, Lexicon] = {}
    for path in sorted((root / LEXICON_DIR).glob("*.tsv")):
        entries: dict[str, float] = {}
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise FormatError(f"{path.name}:{lineno}: expected word TAB weight")
                entries[parts[0]] = float(parts[1])
        lexicons[path.stem] = Lexicon(name=path.stem, entries=entries)

    split: dict[str, str] = {}
    with open(root / SPLIT_FILE, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["user_id", "split"]:
            raise FormatError(f"{SPLIT_FILE}: expected header user_id,split, got {header}")
        for row in reader:
            if not row:
                continue
            user_id, split_name = row
            if user_id in split:
                raise IntegrityError(f"{SPLIT_FILE}: duplicate split row for {user_id!r}")
            split[user_id] = split_name

    dataset = CohortDataset(users=users, edges=edges, lexicons=lexicons, split=split)
    dataset.validate()
    return dataset


def datasets_equal(a: CohortDataset, b: CohortDataset) -> bool:
    """Field-by-field equality, used by round-trip tests."""
    buf_a, buf_b = io.StringIO(), io.StringIO()
    for buf, d in ((buf_a, a), (buf_b, b)):
        for user in d.users:
            buf.write(json.dumps(_user_to_json(user), sort_keys=True))
            for post in user.posts:
                buf.write(json.dumps(_post_to_json(post), sort_keys=True))
        buf.write(json.dumps([(e.src, e.dst) for e in d.edges]))
        buf.write(json.dumps({k: v.entries for k, v in sorted(d.lexicons.items())}))
        buf.write(json.dumps(d.split, sort_keys=True))
    return buf_a.getvalue() == buf_b.getvalue()
