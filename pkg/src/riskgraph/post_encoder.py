"""Post-history encoder: LSTM over per-post vectors, projected to 30 dims.

Each post contributes one row (text 768 | image 300 | hour 1 = 1069 wide);
the last LSTM output (hidden 300) passes through a ReLU fully connected
layer to the 30-dim post-behavior vector. Forward and reverse passes are
hand-written numpy; the batched kernels exist purely for throughput and
share the math with the per-user path (one batch bucket per sequence
length, so no padding or masking).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from riskgraph.errors import FormatError, InternalError
from riskgraph.data_model.types import UserRecord

INPUT_WIDTH = 1069
HIDDEN_WIDTH = 300
OUTPUT_WIDTH = 30
DEFAULT_MAX_POSTS = 200


@dataclass
class LstmParams:
    """Gate weights (order: input, forget, cell, output) plus the output head."""

    w_x: np.ndarray  # (input, 4*hidden)
    w_h: np.ndarray  # (hidden, 4*hidden)
    b: np.ndarray  # (4*hidden,)
    w_out: np.ndarray  # (hidden, out)
    b_out: np.ndarray  # (out,)

    @property
    def hidden(self) -> int:
        return self.w_h.shape[0]

    @property
    def input_width(self) -> int:
        return self.w_x.shape[0]

    @property
    def out_width(self) -> int:
        return self.w_out.shape[1]

    def validate(self) -> None:
        h = self.hidden
        if self.w_x.shape[1] != 4 * h or self.w_h.shape != (h, 4 * h):
            raise InternalError("inconsistent LSTM gate shapes")
        if self.b.shape != (4 * h,):
            raise InternalError("inconsistent LSTM bias shape")
        if self.w_out.shape[0] != h or self.b_out.shape != (self.out_width,):
            raise InternalError("inconsistent LSTM output head shapes")

    def tensors(self) -> dict[str, np.ndarray]:
        return {
            "lstm.w_x": self.w_x,
            "lstm.w_h": self.w_h,
            "lstm.b": self.b,
            "lstm.w_out": self.w_out,
            "lstm.b_out": self.b_out,
        }


def init_lstm_params(
    rng: np.random.Generator,
    hidden: int = HIDDEN_WIDTH,
    input_width: int = INPUT_WIDTH,
    out_width: int = OUTPUT_WIDTH,
) -> LstmParams:
    """Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) per matrix, seeded by rng."""

    def u(fan_in: int, shape: tuple[int, ...]) -> np.ndarray:
        limit = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-limit, limit, size=shape)

    return LstmParams(
        w_x=u(input_width, (input_width, 4 * hidden)),
        w_h=u(hidden, (hidden, 4 * hidden)),
        b=np.zeros(4 * hidden),
        w_out=u(hidden, (hidden, out_width)),
        b_out=np.zeros(out_width),
    )


def zero_grads(params: LstmParams) -> "LstmGrads":
    return LstmGrads(
        w_x=np.zeros_like(params.w_x),
        w_h=np.zeros_like(params.w_h),
        b=np.zeros_like(params.b),
        w_out=np.zeros_like(params.w_out),
        b_out=np.zeros_like(params.b_out),
    )


@dataclass
class LstmGrads:
    w_x: np.ndarray
    w_h: np.ndarray
    b: np.ndarray
    w_out: np.ndarray
    b_out: np.ndarray

    def add_(self, other: "LstmGrads") -> None:
        self.w_x += other.w_x
        self.w_h += other.w_h
        self.b += other.b
        self.w_out += other.w_out
        self.b_out += other.b_out

    def tensors(self) -> dict[str, np.ndarray]:
        return {
            "lstm.w_x": self.w_x,
            "lstm.w_h": self.w_h,
            "lstm.b": self.b,
            "lstm.w_out": self.w_out,
            "lstm.b_out": self.b_out,
        }


@dataclass
class PostSequenceTensor:
    """Chronological post rows, one 1069-wide row per post."""

    rows: np.ndarray

    def validate(self, input_width: int = INPUT_WIDTH, raw_hour: bool = False) -> None:
        if self.rows.ndim != 2 or self.rows.shape[1] != input_width:
            raise FormatError(
                f"post tensor has shape {self.rows.shape}, expected (n, {input_width})"
            )
        if self.rows.shape[0] < 1:
            raise FormatError("post tensor needs at least one row")
        hour = self.rows[:, -1]
        if not raw_hour and (hour.min() < 0.0 or hour.max() > 1.0):
            raise FormatError("hour feature outside [0,1]")


def build_post_tensor(
    user: UserRecord,
    max_posts: int = DEFAULT_MAX_POSTS,
    raw_hour: bool = False,
) -> PostSequenceTensor:
    """Stack the user's most recent posts into model input rows.

    A user with no posts maps to a single all-zero row (null text, null
    image, hour 0), so every user has a defined encoding.
    """
    posts = user.posts[-max_posts:] if max_posts else user.posts
    if not posts:
        return PostSequenceTensor(rows=np.zeros((1, INPUT_WIDTH)))
    rows = np.zeros((len(posts), INPUT_WIDTH))
    for i, post in enumerate(posts):
        rows[i, :768] = post.text_embedding
        rows[i, 768:1068] = post.image_embedding
        rows[i, 1068] = post.hour if raw_hour else post.hour / 23.0
    return PostSequenceTensor(rows=rows)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class _KernelCache:
    x: np.ndarray  # (B, L, input)
    gates: np.ndarray  # (B, L, 4, hidden) post-activation i,f,g,o
    c: np.ndarray  # (B, L, hidden)
    h: np.ndarray  # (B, L, hidden)
    final: np.ndarray  # (B, hidden)
    head_pre: np.ndarray  # (B, out) pre-ReLU


def _forward_kernel(x: np.ndarray, params: LstmParams) -> _KernelCache:
    """LSTM + head forward over a (B, L, input) batch of equal-length sequences."""
    batch, length, _ = x.shape
    hidden = params.hidden
    gates = np.empty((batch, length, 4, hidden))
    c_seq = np.empty((batch, length, hidden))
    h_seq = np.empty((batch, length, hidden))
    h = np.zeros((batch, hidden))
    c = np.zeros((batch, hidden))
    for t in range(length):
        z = x[:, t, :] @ params.w_x + h @ params.w_h + params.b
        i = _sigmoid(z[:, :hidden])
        f = _sigmoid(z[:, hidden : 2 * hidden])
        g = np.tanh(z[:, 2 * hidden : 3 * hidden])
        o = _sigmoid(z[:, 3 * hidden :])
        c = f * c + i * g
        h = o * np.tanh(c)
        gates[:, t, 0] = i
        gates[:, t, 1] = f
        gates[:, t, 2] = g
        gates[:, t, 3] = o
        c_seq[:, t] = c
        h_seq[:, t] = h
    head_pre = h @ params.w_out + params.b_out
    return _KernelCache(x=x, gates=gates, c=c_seq, h=h_seq, final=h, head_pre=head_pre)


def _backward_kernel(
    cache: _KernelCache,
    params: LstmParams,
    upstream: np.ndarray,
    need_input_grad: bool = False,
) -> tuple[LstmGrads, Optional[np.ndarray]]:
    """Reverse pass for one equal-length batch; grads are summed over the batch."""
    batch, length, _ = cache.x.shape
    hidden = params.hidden
    grads = zero_grads(params)

    d_head = upstream * (cache.head_pre > 0)
    grads.w_out += cache.final.T @ d_head
    grads.b_out += d_head.sum(axis=0)
    dh = d_head @ params.w_out.T
    dc = np.zeros((batch, hidden))
    dx = np.zeros_like(cache.x) if need_input_grad else None

    for t in range(length - 1, -1, -1):
        i = cache.gates[:, t, 0]
        f = cache.gates[:, t, 1]
        g = cache.gates[:, t, 2]
        o = cache.gates[:, t, 3]
        c = cache.c[:, t]
        c_prev = cache.c[:, t - 1] if t > 0 else np.zeros((batch, hidden))
        tanh_c = np.tanh(c)

        do = dh * tanh_c
        dc = dc + dh * o * (1.0 - tanh_c * tanh_c)
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dc = dc * f

        dz = np.concatenate(
            [
                di * i * (1.0 - i),
                df * f * (1.0 - f),
                dg * (1.0 - g * g),
                do * o * (1.0 - o),
            ],
            axis=1,
        )
        h_prev = cache.h[:, t - 1] if t > 0 else np.zeros((batch, hidden))
        grads.w_x += cache.x[:, t, :].T @ dz
        grads.w_h += h_prev.T @ dz
        grads.b += dz.sum(axis=0)
        if need_input_grad:
            dx[:, t, :] = dz @ params.w_x.T
        dh = dz @ params.w_h.T
    return grads, dx


# --- per-user operations -----------------------------------------------------


def lstm_forward(seq: PostSequenceTensor, params: LstmParams) -> tuple[np.ndarray, np.ndarray]:
    """Run the recurrence over one sequence; returns (all outputs, final output)."""
    seq.validate(input_width=params.input_width, raw_hour=True)
    cache = _forward_kernel(seq.rows[None, :, :], params)
    return cache.h[0], cache.final[0]


def encode_post_behavior(seq: PostSequenceTensor, params: LstmParams) -> np.ndarray:
    """ReLU(final_output @ w_out + b_out); always out_width wide, non-negative."""
    vec, _ = encode_with_cache(seq, params)
    return vec


@dataclass
class PostEncoderCache:
    params: LstmParams
    kernel: _KernelCache


def encode_with_cache(
    seq: PostSequenceTensor, params: LstmParams
) -> tuple[np.ndarray, PostEncoderCache]:
    seq.validate(input_width=params.input_width, raw_hour=True)
    kernel = _forward_kernel(seq.rows[None, :, :], params)
    vec = np.maximum(kernel.head_pre[0], 0.0)
    return vec, PostEncoderCache(params=params, kernel=kernel)


def encode_empty_user(params: LstmParams) -> np.ndarray:
    """Encoding for a user with zero posts: one all-zero input row."""
    return encode_post_behavior(
        PostSequenceTensor(rows=np.zeros((1, params.input_width))), params
    )


def lstm_backward(
    cache: Optional[PostEncoderCache],
    upstream_grad: np.ndarray,
) -> tuple[LstmGrads, np.ndarray]:
    """Exact gradients of encode_post_behavior wrt parameters and input rows.

    Requires the cache from encode_with_cache for the same sequence.
    """
    if cache is None:
        raise InternalError("lstm_backward requires the forward cache; run encode_with_cache first")
    upstream_grad = np.asarray(upstream_grad, dtype=np.float64)
    if upstream_grad.shape != (cache.params.out_width,):
        raise InternalError(
            f"upstream grad shape {upstream_grad.shape}, expected ({cache.params.out_width},)"
        )
    grads, dx = _backward_kernel(
        cache.kernel, cache.params, upstream_grad[None, :], need_input_grad=True
    )
    return grads, dx[0]


# --- batched operations (training throughput) --------------------------------


@dataclass
class BatchCache:
    params: LstmParams
    buckets: list[tuple[list[int], _KernelCache]]


def encode_post_behavior_batch(
    seqs: Sequence[np.ndarray], params: LstmParams
) -> tuple[np.ndarray, BatchCache]:
    """Encode many sequences at once, bucketed by length (no padding).

    Returns (B, out_width) behavior vectors in input order plus the cache
    for lstm_backward_batch.
    """
    by_length: dict[int, list[int]] = {}
    for idx, rows in enumerate(seqs):
        by_length.setdefault(rows.shape[0], []).append(idx)
    out = np.zeros((len(seqs), params.out_width))
    buckets = []
    for length in sorted(by_length):
        indices = by_length[length]
        stacked = np.stack([seqs[i] for i in indices])
        kernel = _forward_kernel(stacked, params)
        out[indices] = np.maximum(kernel.head_pre, 0.0)
        buckets.append((indices, kernel))
    return out, BatchCache(params=params, buckets=buckets)


def lstm_backward_batch(cache: BatchCache, upstream: np.ndarray) -> LstmGrads:
    """Parameter gradients summed over the batch for given upstream gradients."""
    grads = zero_grads(cache.params)
    for indices, kernel in cache.buckets:
        bucket_grads, _ = _backward_kernel(kernel, cache.params, upstream[indices])
        grads.add_(bucket_grads)
    return grads
