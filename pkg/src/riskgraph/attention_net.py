"""Two-layer attention network over the knowledge graph.

Per user: a softmax property attention reweights the property vector, a
fully connected layer produces a 60-dim hidden state, neighbour attention
scores each followed user's hidden state, and the beta-weighted neighbour
sum plus a residual passes through sigma, one more tanh layer, and a
softmax head. Forward/backward are exact hand-written numpy; the
*_cohort functions are vectorized equivalents used by the trainer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from riskgraph.errors import FormatError, InternalError, IntegrityError
from riskgraph.kg_builder import KnowledgeGraph

HIDDEN_WIDTH = 60


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Numerically stable softmax (max-subtracted)."""
    shifted = x - np.max(x, axis=axis, keepdims=True)
    ex = np.exp(shifted)
    return ex / np.sum(ex, axis=axis, keepdims=True)


@dataclass
class AttentionParams:
    """Trainable tensors of the attention network and classifier head."""

    w1: np.ndarray  # (D, D) property attention
    b1: np.ndarray  # (D,)
    w2: np.ndarray  # (D, 60) hidden projection
    b2: np.ndarray  # (60,)
    w3: np.ndarray  # (120,) neighbour coefficient
    b3: np.ndarray  # (1,) shared scalar bias
    w4: np.ndarray  # (60, 60) final projection
    b4: np.ndarray  # (60,)
    w5: np.ndarray  # (60, C) classifier head
    b5: np.ndarray  # (C,)

    def __post_init__(self) -> None:
        self.b3 = np.atleast_1d(np.asarray(self.b3, dtype=np.float64))

    @property
    def width(self) -> int:
        return self.w1.shape[0]

    @property
    def class_count(self) -> int:
        return self.w5.shape[1]

    def validate(self) -> None:
        d = self.width
        h = self.w2.shape[1]
        if self.w1.shape != (d, d) or self.b1.shape != (d,):
            raise InternalError("property attention shapes inconsistent")
        if self.w2.shape != (d, h) or self.b2.shape != (h,):
            raise InternalError("hidden projection shapes inconsistent")
        if self.w3.shape != (2 * h,) or self.b3.shape != (1,):
            raise InternalError("neighbour coefficient shape inconsistent")
        if self.w4.shape != (h, h) or self.b4.shape != (h,):
            raise InternalError("final projection shapes inconsistent")
        if self.w5.shape[0] != h or self.b5.shape != (self.class_count,):
            raise InternalError("classifier head shapes inconsistent")

    def tensors(self) -> dict[str, np.ndarray]:
        return {
            "attn.w1": self.w1,
            "attn.b1": self.b1,
            "attn.w2": self.w2,
            "attn.b2": self.b2,
            "attn.w3": self.w3,
            "attn.b3": self.b3,
            "attn.w4": self.w4,
            "attn.b4": self.b4,
            "attn.w5": self.w5,
            "attn.b5": self.b5,
        }


def init_attention_params(
    rng: np.random.Generator,
    width: int,
    class_count: int,
    hidden: int = HIDDEN_WIDTH,
) -> AttentionParams:
    def u(fan_in: int, shape: tuple[int, ...]) -> np.ndarray:
        limit = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-limit, limit, size=shape)

    return AttentionParams(
        w1=u(width, (width, width)),
        b1=np.zeros(width),
        w2=u(width, (width, hidden)),
        b2=np.zeros(hidden),
        w3=u(2 * hidden, (2 * hidden,)),
        b3=0.0,
        w4=u(hidden, (hidden, hidden)),
        b4=np.zeros(hidden),
        w5=u(hidden, (hidden, class_count)),
        b5=np.zeros(class_count),
    )


@dataclass
class AttentionGrads:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray
    w4: np.ndarray
    b4: np.ndarray
    w5: np.ndarray
    b5: np.ndarray

    def add_(self, other: "AttentionGrads") -> None:
        self.w1 += other.w1
        self.b1 += other.b1
        self.w2 += other.w2
        self.b2 += other.b2
        self.w3 += other.w3
        self.b3 += other.b3
        self.w4 += other.w4
        self.b4 += other.b4
        self.w5 += other.w5
        self.b5 += other.b5

    def tensors(self) -> dict[str, np.ndarray]:
        return {
            "attn.w1": self.w1,
            "attn.b1": self.b1,
            "attn.w2": self.w2,
            "attn.b2": self.b2,
            "attn.w3": self.w3,
            "attn.b3": self.b3,
            "attn.w4": self.w4,
            "attn.b4": self.b4,
            "attn.w5": self.w5,
            "attn.b5": self.b5,
        }


def zero_attention_grads(params: AttentionParams) -> AttentionGrads:
    return AttentionGrads(
        w1=np.zeros_like(params.w1),
        b1=np.zeros_like(params.b1),
        w2=np.zeros_like(params.w2),
        b2=np.zeros_like(params.b2),
        w3=np.zeros_like(params.w3),
        b3=np.zeros(1),
        w4=np.zeros_like(params.w4),
        b4=np.zeros_like(params.b4),
        w5=np.zeros_like(params.w5),
        b5=np.zeros_like(params.b5),
    )


@dataclass(frozen=True)
class NetConfig:
    """Architecture switches shared by forward and backward passes."""

    use_property_attention: bool = True
    use_neighbour_attention: bool = True
    sigma: str = "logistic"  # or "elu"

    def __post_init__(self) -> None:
        if self.sigma not in ("logistic", "elu"):
            raise FormatError(f"unknown sigma {self.sigma!r}")


def _sigma(x: np.ndarray, kind: str) -> np.ndarray:
    if kind == "logistic":
        out = np.empty_like(x)
        pos = x >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
        ex = np.exp(x[~pos])
        out[~pos] = ex / (1.0 + ex)
        return out
    return np.where(x > 0, x, np.exp(np.minimum(x, 0.0)) - 1.0)


def _sigma_grad(x: np.ndarray, value: np.ndarray, kind: str) -> np.ndarray:
    if kind == "logistic":
        return value * (1.0 - value)
    return np.where(x > 0, 1.0, value + 1.0)


# --- per-user operations -----------------------------------------------------


def property_attention(
    p: np.ndarray, params: AttentionParams
) -> tuple[np.ndarray, np.ndarray]:
    """Softmax significance weights over property entries; returns (p', alpha)."""
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (params.width,):
        raise FormatError(f"property vector shape {p.shape}, expected ({params.width},)")
    alpha = softmax(p @ params.w1 + params.b1)
    return p * alpha, alpha


def hidden_state(p_prime: np.ndarray, params: AttentionParams) -> np.ndarray:
    """tanh projection of the attended property vector into the 60-dim space."""
    return np.tanh(np.asarray(p_prime) @ params.w2 + params.b2)


def neighbour_scores(
    h_u: np.ndarray,
    neighbour_hiddens: Sequence[np.ndarray] | np.ndarray,
    params: AttentionParams,
) -> tuple[np.ndarray, np.ndarray]:
    """tanh coefficients and softmax scores for each neighbour; empty -> empty."""
    hiddens = np.asarray(neighbour_hiddens, dtype=np.float64)
    if hiddens.size == 0:
        return np.zeros(0), np.zeros(0)
    h = params.w2.shape[1]
    coeffs = np.tanh(
        hiddens @ params.w3[h:] + float(h_u @ params.w3[:h]) + params.b3
    )
    return coeffs, softmax(coeffs)


def aggregate(
    h_u: np.ndarray,
    neighbour_hiddens: Sequence[np.ndarray] | np.ndarray,
    betas: np.ndarray,
    sigma: str = "logistic",
) -> np.ndarray:
    """sigma(beta-weighted neighbour sum + residual); no neighbours -> sigma(h_u)."""
    hiddens = np.asarray(neighbour_hiddens, dtype=np.float64)
    betas = np.asarray(betas, dtype=np.float64)
    if hiddens.size == 0:
        return _sigma(np.asarray(h_u, dtype=np.float64), sigma)
    if len(betas) != len(hiddens):
        raise InternalError(f"{len(betas)} betas for {len(hiddens)} neighbours")
    return _sigma(betas @ hiddens + h_u, sigma)


def classify(h_prime: np.ndarray, params: AttentionParams) -> tuple[np.ndarray, np.ndarray]:
    """Final representation and class probabilities; probs sum to 1."""
    r = np.tanh(np.asarray(h_prime) @ params.w4 + params.b4)
    return r, softmax(r @ params.w5 + params.b5)


@dataclass
class ForwardTrace:
    """Every intermediate of one user's forward pass (needed for backward)."""

    user_id: str
    config: NetConfig
    p: np.ndarray
    alpha: np.ndarray
    p_prime: np.ndarray
    h_u: np.ndarray
    neighbour_ids: tuple[str, ...]
    neighbour_p: np.ndarray  # (k, D)
    neighbour_alpha: np.ndarray  # (k, D)
    neighbour_p_prime: np.ndarray  # (k, D)
    neighbour_h: np.ndarray  # (k, 60)
    coeffs: np.ndarray  # (k,)
    betas: np.ndarray  # (k,)
    agg: np.ndarray  # (60,) pre-sigma
    h_prime: np.ndarray
    r: np.ndarray
    probs: np.ndarray

    @property
    def predicted_class(self) -> int:
        return int(np.argmax(self.probs))


def _attend_node(
    p: np.ndarray, params: AttentionParams, config: NetConfig
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(alpha, p', h) for one node under the configured attention switches."""
    if config.use_property_attention:
        p_prime, alpha = property_attention(p, params)
    else:
        alpha = np.full(params.width, 1.0 / params.width)
        p_prime = np.asarray(p, dtype=np.float64)
    return alpha, p_prime, hidden_state(p_prime, params)


def forward_user(
    graph: KnowledgeGraph,
    user_id: str,
    params: AttentionParams,
    config: NetConfig = NetConfig(),
) -> ForwardTrace:
    """Full forward pass for one user over its 1-hop neighbourhood."""
    if user_id not in graph.vectors:
        raise IntegrityError(f"unknown user id {user_id!r}")
    p = graph.vectors[user_id].values
    alpha, p_prime, h_u = _attend_node(p, params, config)

    neighbour_ids = graph.neighbours(user_id) if config.use_neighbour_attention else ()
    k = len(neighbour_ids)
    d = params.width
    h = params.w2.shape[1]
    neighbour_p = np.zeros((k, d))
    neighbour_alpha = np.zeros((k, d))
    neighbour_p_prime = np.zeros((k, d))
    neighbour_h = np.zeros((k, h))
    for i, nid in enumerate(neighbour_ids):
        if nid not in graph.vectors:
            raise IntegrityError(f"missing property vector for neighbour {nid!r}")
        neighbour_p[i] = graph.vectors[nid].values
        neighbour_alpha[i], neighbour_p_prime[i], neighbour_h[i] = _attend_node(
            neighbour_p[i], params, config
        )

    coeffs, betas = neighbour_scores(h_u, neighbour_h, params)
    agg = betas @ neighbour_h + h_u if k else h_u.copy()
    h_prime = _sigma(agg, config.sigma)
    r, probs = classify(h_prime, params)
    return ForwardTrace(
        user_id=user_id,
        config=config,
        p=p,
        alpha=alpha,
        p_prime=p_prime,
        h_u=h_u,
        neighbour_ids=neighbour_ids,
        neighbour_p=neighbour_p,
        neighbour_alpha=neighbour_alpha,
        neighbour_p_prime=neighbour_p_prime,
        neighbour_h=neighbour_h,
        coeffs=coeffs,
        betas=betas,
        agg=agg,
        h_prime=h_prime,
        r=r,
        probs=probs,
    )


def cross_entropy(probs: np.ndarray, label: int, weight: float = 1.0) -> float:
    """Weighted negative log-likelihood of the true class."""
    return float(-weight * np.log(max(probs[label], 1e-300)))


def backward_user(
    trace: ForwardTrace,
    label: int,
    params: AttentionParams,
    weight: float = 1.0,
) -> tuple[AttentionGrads, dict[str, np.ndarray]]:
    """Exact gradients of the weighted cross-entropy at one user.

    Returns attention-parameter gradients and, per involved node (the user
    and each neighbour), the gradient wrt its full property vector; the
    trainer slices out the post-behavior part to continue into the LSTM.
    """
    if label < 0 or label >= params.class_count:
        raise InternalError(f"label {label} outside 0..{params.class_count - 1}")
    if trace.p.shape != (params.width,):
        raise InternalError("trace does not match parameter width")
    grads = zero_attention_grads(params)
    config = trace.config
    hdim = params.w2.shape[1]

    d_logits = weight * trace.probs.copy()
    d_logits[label] -= weight
    grads.w5 += np.outer(trace.r, d_logits)
    grads.b5 += d_logits
    d_r = d_logits @ params.w5.T

    d_m = d_r * (1.0 - trace.r * trace.r)
    grads.w4 += np.outer(trace.h_prime, d_m)
    grads.b4 += d_m
    d_hprime = d_m @ params.w4.T

    d_agg = d_hprime * _sigma_grad(trace.agg, trace.h_prime, config.sigma)

    k = len(trace.neighbour_ids)
    d_h_u = d_agg.copy()
    d_h_nbrs = np.zeros((k, hdim))
    if k:
        d_h_nbrs += trace.betas[:, None] * d_agg[None, :]
        d_beta = trace.neighbour_h @ d_agg
        d_c = trace.betas * (d_beta - float(trace.betas @ d_beta))
        d_s = d_c * (1.0 - trace.coeffs * trace.coeffs)
        grads.w3[:hdim] += d_s.sum() * trace.h_u
        grads.w3[hdim:] += d_s @ trace.neighbour_h
        grads.b3 += float(d_s.sum())
        d_h_u += d_s.sum() * params.w3[:hdim]
        d_h_nbrs += np.outer(d_s, params.w3[hdim:])

    d_p_by_node: dict[str, np.ndarray] = {}

    def node_backward(node_id: str, d_h: np.ndarray, p: np.ndarray,
                      alpha: np.ndarray, p_prime: np.ndarray, h_vec: np.ndarray) -> None:
        d_a = d_h * (1.0 - h_vec * h_vec)
        grads.w2 += np.outer(p_prime, d_a)
        grads.b2 += d_a
        d_pprime = d_a @ params.w2.T
        if config.use_property_attention:
            d_p = d_pprime * alpha
            d_alpha = d_pprime * p
            d_z = alpha * (d_alpha - float(alpha @ d_alpha))
            grads.w1 += np.outer(p, d_z)
            grads.b1 += d_z
            d_p = d_p + d_z @ params.w1.T
        else:
            d_p = d_pprime
        d_p_by_node[node_id] = d_p_by_node.get(node_id, 0.0) + d_p

    node_backward(trace.user_id, d_h_u, trace.p, trace.alpha, trace.p_prime, trace.h_u)
    for i, nid in enumerate(trace.neighbour_ids):
        node_backward(
            nid,
            d_h_nbrs[i],
            trace.neighbour_p[i],
            trace.neighbour_alpha[i],
            trace.neighbour_p_prime[i],
            trace.neighbour_h[i],
        )
    return grads, d_p_by_node


# --- vectorized cohort pass (trainer) ----------------------------------------


@dataclass
class CohortTrace:
    """Vectorized forward intermediates for a set of users sharing one graph."""

    config: NetConfig
    user_index: dict[str, int]
    p: np.ndarray  # (N, D)
    alpha: np.ndarray  # (N, D)
    p_prime: np.ndarray  # (N, D)
    h: np.ndarray  # (N, 60)
    edge_src: np.ndarray  # (E,) int, sorted by src
    edge_dst: np.ndarray  # (E,) int
    coeffs: np.ndarray  # (E,)
    betas: np.ndarray  # (E,)
    agg: np.ndarray  # (N, 60)
    h_prime: np.ndarray
    r: np.ndarray
    probs: np.ndarray  # (N, C)


def _segment_softmax(
    values: np.ndarray, seg_ids: np.ndarray, seg_count: int
) -> np.ndarray:
    """Softmax within contiguous groups given by sorted seg_ids."""
    seg_max = np.full(seg_count, -np.inf)
    np.maximum.at(seg_max, seg_ids, values)
    ex = np.exp(values - seg_max[seg_ids])
    seg_sum = np.zeros(seg_count)
    np.add.at(seg_sum, seg_ids, ex)
    return ex / seg_sum[seg_ids]


def forward_cohort(
    user_ids: Sequence[str],
    vectors: np.ndarray,
    adjacency: Mapping[str, tuple[str, ...]],
    params: AttentionParams,
    config: NetConfig = NetConfig(),
) -> CohortTrace:
    """Vectorized forward over all listed users; matches forward_user per row."""
    n, d = vectors.shape
    if d != params.width:
        raise InternalError(f"vector width {d} != parameter width {params.width}")
    user_index = {uid: i for i, uid in enumerate(user_ids)}
    hdim = params.w2.shape[1]

    if config.use_property_attention:
        alpha = softmax(vectors @ params.w1 + params.b1, axis=1)
        p_prime = vectors * alpha
    else:
        alpha = np.full((n, d), 1.0 / d)
        p_prime = vectors
    h = np.tanh(p_prime @ params.w2 + params.b2)

    pairs: list[tuple[int, int]] = []
    if config.use_neighbour_attention:
        for uid in user_ids:
            src = user_index[uid]
            for nid in adjacency.get(uid, ()):
                pairs.append((src, user_index[nid]))
    if pairs:
        edge_src = np.array([s for s, _ in pairs], dtype=np.intp)
        edge_dst = np.array([t for _, t in pairs], dtype=np.intp)
        coeffs = np.tanh(
            h[edge_src] @ params.w3[:hdim] + h[edge_dst] @ params.w3[hdim:] + params.b3
        )
        betas = _segment_softmax(coeffs, edge_src, n)
        agg = h.copy()
        np.add.at(agg, edge_src, betas[:, None] * h[edge_dst])
    else:
        edge_src = np.zeros(0, dtype=np.intp)
        edge_dst = np.zeros(0, dtype=np.intp)
        coeffs = np.zeros(0)
        betas = np.zeros(0)
        agg = h.copy()

    h_prime = _sigma(agg, config.sigma)
    r = np.tanh(h_prime @ params.w4 + params.b4)
    probs = softmax(r @ params.w5 + params.b5, axis=1)
    return CohortTrace(
        config=config,
        user_index=user_index,
        p=vectors,
        alpha=alpha,
        p_prime=p_prime,
        h=h,
        edge_src=edge_src,
        edge_dst=edge_dst,
        coeffs=coeffs,
        betas=betas,
        agg=agg,
        h_prime=h_prime,
        r=r,
        probs=probs,
    )


def backward_cohort(
    trace: CohortTrace,
    params: AttentionParams,
    d_logits: np.ndarray,
) -> tuple[AttentionGrads, np.ndarray]:
    """Vectorized reverse pass; d_logits rows of zero skip that user's loss.

    Returns parameter gradients and the (N, D) gradient wrt property vectors.
    """
    n = trace.p.shape[0]
    hdim = params.w2.shape[1]
    grads = zero_attention_grads(params)

    grads.w5 += trace.r.T @ d_logits
    grads.b5 += d_logits.sum(axis=0)
    d_r = d_logits @ params.w5.T
    d_m = d_r * (1.0 - trace.r * trace.r)
    grads.w4 += trace.h_prime.T @ d_m
    grads.b4 += d_m.sum(axis=0)
    d_hprime = d_m @ params.w4.T
    d_agg = d_hprime * _sigma_grad(trace.agg, trace.h_prime, trace.config.sigma)

    d_h = d_agg.copy()
    if trace.edge_src.size:
        src, dst = trace.edge_src, trace.edge_dst
        betas, coeffs = trace.betas, trace.coeffs
        np.add.at(d_h, dst, betas[:, None] * d_agg[src])
        d_beta = np.einsum("ej,ej->e", trace.h[dst], d_agg[src])
        seg_dot = np.zeros(n)
        np.add.at(seg_dot, src, betas * d_beta)
        d_c = betas * (d_beta - seg_dot[src])
        d_s = d_c * (1.0 - coeffs * coeffs)
        d_s_per_src = np.zeros(n)
        np.add.at(d_s_per_src, src, d_s)
        grads.w3[:hdim] += d_s_per_src @ trace.h
        grads.w3[hdim:] += d_s @ trace.h[dst]
        grads.b3 += float(d_s.sum())
        d_h += d_s_per_src[:, None] * params.w3[:hdim][None, :]
        np.add.at(d_h, dst, np.outer(d_s, params.w3[hdim:]))

    d_a = d_h * (1.0 - trace.h * trace.h)
    grads.w2 += trace.p_prime.T @ d_a
    grads.b2 += d_a.sum(axis=0)
    d_pprime = d_a @ params.w2.T
    if trace.config.use_property_attention:
        d_p = d_pprime * trace.alpha
        d_alpha = d_pprime * trace.p
        d_z = trace.alpha * (d_alpha - np.sum(trace.alpha * d_alpha, axis=1, keepdims=True))
        grads.w1 += trace.p.T @ d_z
        grads.b1 += d_z.sum(axis=0)
        d_p = d_p + d_z @ params.w1.T
    else:
        d_p = d_pprime
    return grads, d_p
