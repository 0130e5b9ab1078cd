"""Training loop, end-to-end evaluation, and feature-knockout experiments.

Training runs mini-batch adaptive-moment gradient descent over users. Per
batch the LSTM encodes the batch users plus every followed neighbour, the
vectorized cohort pass classifies the batch, and exact gradients flow back
through both attention layers into the LSTM. The checkpoint with the best
validation F1 (macro-F1 for five classes, ties broken by lower validation
loss) is returned. Everything is driven by one seeded generator, so a
fixed seed reproduces the run bit for bit.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from riskgraph.errors import ConfigError, FormatError, InternalError
from riskgraph.data_model.types import CohortDataset
from riskgraph import attention_net as anet
from riskgraph import post_encoder as penc
from riskgraph.kg_builder import (
    KnowledgeGraph,
    PropertyLayout,
    PropertyVector,
    assemble_property_vector,
    build_adjacency,
    build_graph,
    default_layout,
)
from riskgraph.model_io import ModelBundle
from riskgraph.train_eval.infogain import AnalysisFeature, property_gains
from riskgraph.train_eval.metrics import (
    ConfusionMatrix,
    MetricsReport,
    confusion_from_pairs,
    metrics_from_confusion,
)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    learning_rate: float = 1e-3
    seed: int = 7
    class_count: int = 2
    batch_size: int = 64  # 0 = full batch
    optimizer: str = "adam"  # or "sgd"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    lstm_hidden: int = penc.HIDDEN_WIDTH
    max_posts: int = penc.DEFAULT_MAX_POSTS
    raw_hour: bool = False
    scale_interaction: bool = True
    sigma: str = "logistic"
    include_reserved_slot: bool = False
    class_balanced_loss: bool = True
    disable_neighbour_attention: bool = False
    disable_property_attention: bool = False
    disable_categories: tuple[str, ...] = ()
    without_kg: bool = False

    def validate(self) -> None:
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.class_count not in (2, 5):
            raise ConfigError(f"class_count must be 2 or 5, got {self.class_count}")
        if self.optimizer not in ("adam", "sgd"):
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")
        if self.epochs < 0 or self.batch_size < 0:
            raise ConfigError("epochs and batch_size must be non-negative")

    def layout(self) -> PropertyLayout:
        return default_layout(
            disabled_categories=self.disable_categories,
            without_kg=self.without_kg,
            include_reserved_slot=self.include_reserved_slot,
        )

    def net_config(self) -> anet.NetConfig:
        return anet.NetConfig(
            use_property_attention=not self.disable_property_attention,
            use_neighbour_attention=(
                not self.disable_neighbour_attention and not self.without_kg
            ),
            sigma=self.sigma,
        )


@dataclass(frozen=True)
class KnockoutMask:
    """Zeroed property segments and post-input column ranges."""

    segment_names: tuple[str, ...] = ()
    input_col_ranges: tuple[tuple[int, int], ...] = ()

    @staticmethod
    def from_features(features: Sequence[AnalysisFeature]) -> "KnockoutMask":
        segments: list[str] = []
        ranges: list[tuple[int, int]] = []
        for feat in features:
            if feat.mask_segments:
                segments.extend(feat.mask_segments)
            if feat.mask_input_cols:
                ranges.append(feat.mask_input_cols)
        return KnockoutMask(segment_names=tuple(segments), input_col_ranges=tuple(ranges))


@dataclass
class CohortInputs:
    """Per-user model inputs shared by every epoch of a run."""

    user_ids: list[str]
    labels: np.ndarray
    static: np.ndarray  # (N, D) property vectors with post slice zeroed
    post_slice: slice
    seqs: list[np.ndarray]
    adjacency: dict[str, tuple[str, ...]]
    split_indices: dict[str, np.ndarray]


def prepare_inputs(
    dataset: CohortDataset,
    layout: PropertyLayout,
    config: TrainConfig,
    mask: KnockoutMask = KnockoutMask(),
) -> CohortInputs:
    now = dataset.reference_date()
    user_ids = [u.user_id for u in dataset.users]
    labels = np.array([u.label for u in dataset.users], dtype=np.int64)
    if labels.min() < 0 or labels.max() >= config.class_count:
        raise FormatError(
            f"labels outside 0..{config.class_count - 1} for this configuration"
        )

    post_slice = layout.slice_of("post_behavior")
    zero_post = np.zeros(layout.segment("post_behavior").width)
    static = np.zeros((len(user_ids), layout.total_width))
    for i, user in enumerate(dataset.users):
        static[i] = assemble_property_vector(
            user,
            zero_post,
            layout,
            dataset.lexicons,
            now,
            scale_interaction=config.scale_interaction,
        ).values
    for name in mask.segment_names:
        if layout.has_segment(name):
            static[:, layout.slice_of(name)] = 0.0

    seqs = []
    for user in dataset.users:
        rows = penc.build_post_tensor(user, config.max_posts, config.raw_hour).rows
        for lo, hi in mask.input_col_ranges:
            rows = rows.copy()
            rows[:, lo:hi] = 0.0
        seqs.append(rows)

    split_indices = {
        name: np.array(
            [i for i, u in enumerate(dataset.users) if dataset.split[u.user_id] == name],
            dtype=np.intp,
        )
        for name in ("train", "validation", "test")
    }
    return CohortInputs(
        user_ids=user_ids,
        labels=labels,
        static=static,
        post_slice=post_slice,
        seqs=seqs,
        adjacency=build_adjacency(dataset),
        split_indices=split_indices,
    )


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    val_accuracy: float
    val_f1: float
    val_loss: float


class _Optimizer:
    """Adam or plain SGD over named parameter arrays, updated in place."""

    def __init__(self, params: dict[str, np.ndarray], config: TrainConfig):
        self.params = params
        self.config = config
        self.step_count = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, grads: dict[str, np.ndarray]) -> None:
        cfg = self.config
        if cfg.optimizer == "sgd":
            for name, param in self.params.items():
                param -= cfg.learning_rate * grads[name]
            return
        self.step_count += 1
        t = self.step_count
        for name, param in self.params.items():
            g = grads[name]
            m = self.m[name]
            v = self.v[name]
            m *= cfg.beta1
            m += (1 - cfg.beta1) * g
            v *= cfg.beta2
            v += (1 - cfg.beta2) * (g * g)
            m_hat = m / (1 - cfg.beta1**t)
            v_hat = v / (1 - cfg.beta2**t)
            param -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.eps)


def _class_weights(labels: np.ndarray, class_count: int, balanced: bool) -> np.ndarray:
    if not balanced:
        return np.ones(class_count)
    counts = np.bincount(labels, minlength=class_count).astype(np.float64)
    weights = np.zeros(class_count)
    present = counts > 0
    weights[present] = len(labels) / (class_count * counts[present])
    return weights


def _forward_indices(
    inputs: CohortInputs,
    lstm: penc.LstmParams,
    attn: anet.AttentionParams,
    net_config: anet.NetConfig,
    batch: np.ndarray,
) -> tuple[np.ndarray, anet.CohortTrace, penc.BatchCache, list[int]]:
    """Forward the batch users (plus neighbour closure) through the full model."""
    closure: list[int] = list(batch)
    index_of = {inputs.user_ids[i]: i for i in range(len(inputs.user_ids))}
    seen = set(closure)
    if net_config.use_neighbour_attention:
        for i in batch:
            for nid in inputs.adjacency.get(inputs.user_ids[i], ()):
                j = index_of[nid]
                if j not in seen:
                    seen.add(j)
                    closure.append(j)
    behavior, cache = penc.encode_post_behavior_batch(
        [inputs.seqs[i] for i in closure], lstm
    )
    vectors = inputs.static[closure].copy()
    vectors[:, inputs.post_slice] = behavior
    sub_ids = [inputs.user_ids[i] for i in closure]
    sub_adjacency = {
        inputs.user_ids[i]: inputs.adjacency.get(inputs.user_ids[i], ()) for i in batch
    }
    trace = anet.forward_cohort(sub_ids, vectors, sub_adjacency, attn, net_config)
    return behavior, trace, cache, closure


def predict_proba(
    bundle: ModelBundle, dataset: CohortDataset, config: Optional[TrainConfig] = None
) -> tuple[list[str], np.ndarray]:
    """Class probabilities for every user in the dataset, in user order."""
    config = config or bundle_train_config(bundle)
    inputs = prepare_inputs(dataset, bundle.layout, config)
    net_config = config.net_config()
    all_indices = np.arange(len(inputs.user_ids), dtype=np.intp)
    _, trace, _, closure = _forward_indices(
        inputs, bundle.lstm, bundle.attn, net_config, all_indices
    )
    return inputs.user_ids, trace.probs


def bundle_train_config(bundle: ModelBundle) -> TrainConfig:
    """Rebuild the architecture switches recorded in a saved model."""
    meta = bundle.meta
    return TrainConfig(
        class_count=int(meta.get("class_count", 2)),
        sigma=meta.get("sigma", "logistic"),
        raw_hour=bool(meta.get("raw_hour", False)),
        scale_interaction=bool(meta.get("scale_interaction", True)),
        max_posts=int(meta.get("max_posts", penc.DEFAULT_MAX_POSTS)),
        lstm_hidden=int(meta.get("lstm_hidden", penc.HIDDEN_WIDTH)),
        disable_neighbour_attention=bool(meta.get("disable_neighbour_attention", False)),
        disable_property_attention=bool(meta.get("disable_property_attention", False)),
        disable_categories=tuple(meta.get("disable_categories", ())),
        without_kg=bool(meta.get("without_kg", False)),
        include_reserved_slot=bool(meta.get("include_reserved_slot", False)),
    )


def _bundle_meta(config: TrainConfig, seed: int) -> dict:
    return {
        "class_count": config.class_count,
        "sigma": config.sigma,
        "raw_hour": config.raw_hour,
        "scale_interaction": config.scale_interaction,
        "max_posts": config.max_posts,
        "lstm_hidden": config.lstm_hidden,
        "disable_neighbour_attention": config.disable_neighbour_attention,
        "disable_property_attention": config.disable_property_attention,
        "disable_categories": list(config.disable_categories),
        "without_kg": config.without_kg,
        "include_reserved_slot": config.include_reserved_slot,
        "seed": seed,
    }


def train(
    dataset: CohortDataset,
    config: TrainConfig,
    mask: KnockoutMask = KnockoutMask(),
) -> tuple[ModelBundle, list[EpochStats]]:
    """Train on the cohort's train split; return the best-validation model."""
    config.validate()
    layout = config.layout()
    inputs = prepare_inputs(dataset, layout, config, mask)
    train_idx = inputs.split_indices["train"]
    val_idx = inputs.split_indices["validation"]
    if len(train_idx) == 0 or len(val_idx) == 0:
        raise ConfigError("train and validation splits must both be non-empty")

    rng = np.random.default_rng(config.seed)
    lstm = penc.init_lstm_params(
        rng, hidden=config.lstm_hidden, out_width=layout.segment("post_behavior").width
    )
    attn = anet.init_attention_params(rng, layout.total_width, config.class_count)
    net_config = config.net_config()
    weights = _class_weights(inputs.labels[train_idx], config.class_count, config.class_balanced_loss)

    named = {**lstm.tensors(), **attn.tensors()}
    optimizer = _Optimizer(named, config)

    best_lstm = copy.deepcopy(lstm)
    best_attn = copy.deepcopy(attn)
    best_key: Optional[tuple[float, float]] = None
    log: list[EpochStats] = []

    batch_size = config.batch_size if config.batch_size > 0 else len(train_idx)
    for epoch in range(1, config.epochs + 1):
        order = train_idx[rng.permutation(len(train_idx))]
        epoch_loss = 0.0
        for start in range(0, len(order), batch_size):
            batch = order[start : start + batch_size]
            behavior, trace, cache, closure = _forward_indices(
                inputs, lstm, attn, net_config, batch
            )
            batch_labels = inputs.labels[batch]
            batch_rows = np.arange(len(batch))
            w = weights[batch_labels]
            probs = trace.probs[batch_rows]
            losses = -np.log(np.maximum(probs[np.arange(len(batch)), batch_labels], 1e-300))
            epoch_loss += float((w * losses).sum())

            d_logits = np.zeros_like(trace.probs)
            d_logits[batch_rows] = probs
            d_logits[batch_rows, batch_labels] -= 1.0
            d_logits[batch_rows] *= (w / len(batch))[:, None]

            attn_grads, d_p = anet.backward_cohort(trace, attn, d_logits)
            lstm_grads = penc.lstm_backward_batch(cache, d_p[:, inputs.post_slice])
            optimizer.step({**lstm_grads.tensors(), **attn_grads.tensors()})

        train_loss = epoch_loss / len(order)
        if not math.isfinite(train_loss):
            raise InternalError(
                f"training diverged at epoch {epoch}: loss {train_loss}; "
                "lower the learning rate or check the cohort"
            )

        val_stats = _split_stats(inputs, lstm, attn, net_config, val_idx, config.class_count)
        log.append(
            EpochStats(
                epoch=epoch,
                train_loss=train_loss,
                val_accuracy=val_stats[0],
                val_f1=val_stats[1],
                val_loss=val_stats[2],
            )
        )
        key = (val_stats[1], -val_stats[2])
        if best_key is None or key > best_key:
            best_key = key
            best_lstm = copy.deepcopy(lstm)
            best_attn = copy.deepcopy(attn)

    if config.epochs == 0:
        best_lstm, best_attn = lstm, attn

    bundle = ModelBundle(
        lstm=best_lstm,
        attn=best_attn,
        layout=layout,
        meta=_bundle_meta(config, config.seed),
    )
    return bundle, log


def _split_stats(
    inputs: CohortInputs,
    lstm: penc.LstmParams,
    attn: anet.AttentionParams,
    net_config: anet.NetConfig,
    idx: np.ndarray,
    class_count: int,
) -> tuple[float, float, float]:
    """(accuracy, f1, mean loss) on the given user indices."""
    _, trace, _, closure = _forward_indices(inputs, lstm, attn, net_config, idx)
    rows = np.arange(len(idx))
    probs = trace.probs[rows]
    labels = inputs.labels[idx]
    preds = np.argmax(probs, axis=1)
    cm = confusion_from_pairs(labels.tolist(), preds.tolist(), class_count)
    report = metrics_from_confusion(cm)
    loss = float(np.mean(-np.log(np.maximum(probs[rows, labels], 1e-300))))
    f1 = report.macro_f1 if class_count > 2 else report.f1
    return report.accuracy, float(f1), loss


def evaluate(
    bundle: ModelBundle,
    dataset: CohortDataset,
    split: str,
    config: Optional[TrainConfig] = None,
) -> tuple[MetricsReport, ConfusionMatrix]:
    """Metrics over one split, with neighbours drawn from the whole graph."""
    if split not in ("train", "validation", "test"):
        raise ConfigError(f"unknown split {split!r}")
    config = config or bundle_train_config(bundle)
    inputs = prepare_inputs(dataset, bundle.layout, config)
    idx = inputs.split_indices[split]
    if len(idx) == 0:
        raise ConfigError(f"split {split!r} is empty")
    _, trace, _, _ = _forward_indices(
        inputs, bundle.lstm, bundle.attn, config.net_config(), idx
    )
    rows = np.arange(len(idx))
    preds = np.argmax(trace.probs[rows], axis=1)
    cm = confusion_from_pairs(inputs.labels[idx].tolist(), preds.tolist(), config.class_count)
    return metrics_from_confusion(cm), cm


def encode_graph(
    bundle: ModelBundle,
    dataset: CohortDataset,
    config: Optional[TrainConfig] = None,
) -> KnowledgeGraph:
    """Complete knowledge graph with every user's property vector filled in."""
    config = config or bundle_train_config(bundle)
    inputs = prepare_inputs(dataset, bundle.layout, config)
    behavior, _ = penc.encode_post_behavior_batch(inputs.seqs, bundle.lstm)
    vectors = {}
    for i, uid in enumerate(inputs.user_ids):
        values = inputs.static[i].copy()
        values[inputs.post_slice] = behavior[i]
        vectors[uid] = PropertyVector(values=values, layout=bundle.layout)
    return build_graph(dataset, vectors)


def learned_post_dims(
    bundle: ModelBundle,
    dataset: CohortDataset,
    config: Optional[TrainConfig] = None,
) -> np.ndarray:
    """(N, out_width) learned post-behavior encodings, in dataset user order."""
    config = config or bundle_train_config(bundle)
    inputs = prepare_inputs(dataset, bundle.layout, config)
    behavior, _ = penc.encode_post_behavior_batch(inputs.seqs, bundle.lstm)
    return behavior


def feature_knockout(
    dataset: CohortDataset,
    config: TrainConfig,
    top_x: int,
) -> MetricsReport:
    """Retrain with the top-x info-gain properties zeroed; evaluate on test."""
    ranked = [(feat, gain) for feat, gain in property_gains(dataset) if feat.maskable]
    if top_x < 0 or top_x >= len(ranked):
        raise ConfigError(
            f"top_x {top_x} must be below the maskable property count {len(ranked)}"
        )
    mask = KnockoutMask.from_features([feat for feat, _ in ranked[:top_x]])
    bundle, _ = train(dataset, config, mask)
    # evaluation must see the same masked inputs the model was trained on
    inputs = prepare_inputs(dataset, bundle.layout, config, mask)
    idx = inputs.split_indices["test"]
    _, trace, _, _ = _forward_indices(
        inputs, bundle.lstm, bundle.attn, config.net_config(), idx
    )
    rows = np.arange(len(idx))
    preds = np.argmax(trace.probs[rows], axis=1)
    cm = confusion_from_pairs(inputs.labels[idx].tolist(), preds.tolist(), config.class_count)
    return metrics_from_confusion(cm)
