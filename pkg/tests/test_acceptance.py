"""Acceptance suite: one test per release criterion, one printed line each.

Run with `pytest tests/test_acceptance.py -v -s`. The end-to-end and
knockout tests train real models and together take several minutes on a
laptop-class machine.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from riskgraph import attention_net as anet
from riskgraph import post_encoder as penc
from riskgraph.cli import main as cli_main
from riskgraph.data_model.synth import (
    generate_synthetic_cohort,
    planted_config,
    reddit_config,
    weibo_config,
)
from riskgraph.kg_builder import CATEGORIES, KnowledgeGraph, PropertyLayout, PropertyVector, Segment
from riskgraph.train_eval.infogain import info_gain, rank_categories
from riskgraph.train_eval.metrics import confusion_from_pairs, metrics_from_confusion
from riskgraph.train_eval.pipeline import TrainConfig, evaluate, feature_knockout, train

from conftest import fd_check

E2E_SEED = 11
E2E_USERS = 600


def _report(name: str, detail: str) -> None:
    print(f"[ACCEPT] {name}: PASS ({detail})")


def _toy_setup(rng, d=6, lstm_hidden=4, input_width=7, post_width=3):
    layout = PropertyLayout(
        segments=(
            Segment("static", 0, d - post_width, "personality"),
            Segment("post_behavior", d - post_width, post_width, "post_behavior"),
        ),
        total_width=d,
    )
    ids = ["u0", "u1", "u2", "u3"]
    adjacency = {"u0": ("u1", "u2", "u3"), "u1": ("u2",), "u2": (), "u3": ()}
    static = rng.normal(size=(4, d - post_width))
    seqs = [rng.normal(size=(int(rng.integers(1, 4)), input_width)) for _ in ids]
    lstm = penc.init_lstm_params(rng, hidden=lstm_hidden, input_width=input_width,
                                 out_width=post_width)
    attn = anet.init_attention_params(rng, d, 2)
    for arr in (lstm.b, lstm.b_out, attn.b1, attn.b2, attn.b3, attn.b4, attn.b5):
        arr[:] = rng.normal(scale=0.1, size=arr.shape)
    return layout, ids, adjacency, static, seqs, lstm, attn


def test_gradient_correctness_every_tensor():
    started = time.time()
    rng = np.random.default_rng(29)
    layout, ids, adjacency, static, seqs, lstm, attn = _toy_setup(rng)
    labels = {"u0": 1, "u1": 0}
    post_slice = layout.slice_of("post_behavior")

    def forward_all():
        vectors, caches = {}, {}
        for i, uid in enumerate(ids):
            vec, cache = penc.encode_with_cache(penc.PostSequenceTensor(seqs[i]), lstm)
            caches[uid] = cache
            vectors[uid] = PropertyVector(
                values=np.concatenate([static[i], vec]), layout=layout
            )
        graph = KnowledgeGraph(vectors=vectors,
                               labels={u: labels.get(u, 0) for u in ids},
                               adjacency=adjacency)
        return graph, caches

    def loss_value():
        graph, _ = forward_all()
        total = 0.0
        for uid, label in labels.items():
            trace = anet.forward_user(graph, uid, attn)
            total += anet.cross_entropy(trace.probs, label)
        return total

    graph, caches = forward_all()
    attn_grads = anet.zero_attention_grads(attn)
    d_p: dict[str, np.ndarray] = {}
    for uid, label in labels.items():
        trace = anet.forward_user(graph, uid, attn)
        grads, dp = anet.backward_user(trace, label, attn)
        attn_grads.add_(grads)
        for nid, vec in dp.items():
            d_p[nid] = d_p.get(nid, 0.0) + vec
    lstm_grads = penc.zero_grads(lstm)
    for uid, dvec in d_p.items():
        grads, _ = penc.lstm_backward(caches[uid], dvec[post_slice])
        lstm_grads.add_(grads)

    pairs = [(name, arr, lstm_grads.tensors()[name]) for name, arr in lstm.tensors().items()]
    pairs += [(name, arr, attn_grads.tensors()[name]) for name, arr in attn.tensors().items()]
    fd_check(loss_value, pairs, eps=1e-5, rel_tol=1e-4, abs_tol=1e-6, rng=rng, max_entries=25)
    elapsed = time.time() - started
    assert elapsed < 30.0, f"gradient check took {elapsed:.1f}s"
    _report("gradient-correctness", f"all 15 tensors, {elapsed:.1f}s")


def test_attention_normalization_1000_random_inputs():
    rng = np.random.default_rng(31)
    d = 12
    params = anet.init_attention_params(rng, d, 2)
    worst = 0.0
    for _ in range(1000):
        _, alpha = anet.property_attention(rng.normal(scale=3.0, size=d), params)
        assert np.all(alpha > 0.0)
        worst = max(worst, abs(float(alpha.sum()) - 1.0))
        k = int(rng.integers(1, 6))
        _, betas = anet.neighbour_scores(
            rng.normal(size=60), rng.normal(size=(k, 60)), params
        )
        assert np.all(betas > 0.0)
        worst = max(worst, abs(float(betas.sum()) - 1.0))
    assert worst < 1e-9
    _report("attention-normalization", f"worst |sum-1| = {worst:.2e}")


def test_structural_invariants_exact():
    rng = np.random.default_rng(37)
    layout, ids, adjacency, static, seqs, lstm, attn = _toy_setup(rng)
    vectors = {}
    for i, uid in enumerate(ids):
        vec = penc.encode_post_behavior(penc.PostSequenceTensor(seqs[i]), lstm)
        vectors[uid] = PropertyVector(values=np.concatenate([static[i], vec]), layout=layout)
    graph = KnowledgeGraph(vectors=vectors, labels={u: 0 for u in ids}, adjacency=adjacency)

    # neighbour permutation invariance (adjacency canonicalized)
    base = anet.forward_user(graph, "u0", attn)
    shuffled = KnowledgeGraph(
        vectors=vectors, labels=graph.labels,
        adjacency={**adjacency, "u0": tuple(sorted(("u3", "u2", "u1")))},
    )
    assert anet.forward_user(shuffled, "u0", attn).probs.tobytes() == base.probs.tobytes()

    # one-hop locality: u3 is at distance >= 2 from u1
    perturbed_vecs = dict(vectors)
    perturbed_vecs["u3"] = PropertyVector(vectors["u3"].values + 50.0, layout)
    perturbed = KnowledgeGraph(vectors=perturbed_vecs, labels=graph.labels, adjacency=adjacency)
    assert (
        anet.forward_user(perturbed, "u1", attn).probs.tobytes()
        == anet.forward_user(graph, "u1", attn).probs.tobytes()
    )

    # softmax shift invariance of the argmax
    before = anet.forward_user(graph, "u0", attn)
    attn.b5 += 11.0
    after = anet.forward_user(graph, "u0", attn)
    attn.b5 -= 11.0
    assert int(np.argmax(before.probs)) == int(np.argmax(after.probs))

    # one-hot segment sums are exactly 1
    from riskgraph.kg_builder import encode_gender, encode_location

    for g in ("female", "male", "unknown"):
        assert encode_gender(g).sum() == 1.0
    for loc in ("east", "south", "north", "south_west", "north_west", "middle",
                "north_east", "unknown"):
        assert encode_location(loc).sum() == 1.0
    _report("structural-invariants", "permutation, locality, shift, one-hot all exact")


@pytest.fixture(scope="module")
def e2e_cohort():
    return generate_synthetic_cohort(weibo_config(users=E2E_USERS), seed=E2E_SEED)


@pytest.fixture(scope="module")
def e2e_results(e2e_cohort):
    started = time.time()
    full_cfg = TrainConfig(epochs=8, seed=E2E_SEED, batch_size=64)
    bundle, _ = train(e2e_cohort, full_cfg)
    full_report, _ = evaluate(bundle, e2e_cohort, "test")

    ablation_cfg = TrainConfig(epochs=8, seed=E2E_SEED, batch_size=64, without_kg=True)
    ablation_bundle, _ = train(e2e_cohort, ablation_cfg)
    ablation_report, _ = evaluate(ablation_bundle, e2e_cohort, "test")
    return full_report, ablation_report, time.time() - started


def test_synthetic_end_to_end(e2e_results):
    full_report, _, elapsed = e2e_results
    assert elapsed < 600.0, f"end-to-end run took {elapsed:.0f}s"
    assert full_report.accuracy >= 0.90
    assert full_report.f1 >= 0.90
    _report(
        "synthetic-end-to-end",
        f"acc={full_report.accuracy:.4f} f1={full_report.f1:.4f} in {elapsed:.0f}s",
    )


def test_without_kg_ablation_scores_lower(e2e_results):
    full_report, ablation_report, _ = e2e_results
    gap = full_report.accuracy - ablation_report.accuracy
    assert gap >= 0.005, f"ablation gap {gap:.4f} below half a point"
    _report(
        "without-kg-ablation",
        f"full={full_report.accuracy:.4f} without-kg={ablation_report.accuracy:.4f} "
        f"gap={gap * 100:.1f}pt",
    )


def test_info_gain_recovers_planted_category():
    hits = 0
    for i, seed in enumerate(range(101, 111)):
        category = CATEGORIES[i % len(CATEGORIES)]
        ds = generate_synthetic_cohort(planted_config(category, users=200), seed=seed)
        ranked = rank_categories(ds)
        assert ranked[0][0] == category, f"seed {seed}: {ranked[:2]} != {category}"
        hits += 1
    assert hits == 10
    _report("info-gain-planted-category", "rank 1 in 10/10 seeds")


def test_info_gain_matches_bruteforce_exhaustively():
    def oracle(a, b, c, d):
        n = a + b + c + d

        def h(counts):
            total = sum(counts)
            return -sum((k / total) * math.log2(k / total) for k in counts if k)

        h_y = h((a + b, c + d))
        h_cond = 0.0
        for group in ((a, c), (b, d)):
            size = sum(group)
            if size:
                h_cond += (size / n) * h(group)
        return h_y - h_cond

    worst = 0.0
    cases = 0
    for n in range(4, 17):
        for a in range(n + 1):
            for b in range(n - a + 1):
                for c in range(n - a - b + 1):
                    d = n - a - b - c
                    labels = [0] * (a + b) + [1] * (c + d)
                    feats = ["x"] * a + ["y"] * b + ["x"] * c + ["y"] * d
                    got = info_gain(labels, feats)
                    worst = max(worst, abs(got - oracle(a, b, c, d)))
                    cases += 1
    assert worst < 1e-12
    _report("info-gain-oracle", f"{cases} exhaustive cases, worst err {worst:.1e}")


def test_feature_knockout_monotone_decline():
    ds = generate_synthetic_cohort(weibo_config(users=240), seed=23)
    config = TrainConfig(epochs=6, seed=23, batch_size=64)
    accuracies = []
    for x in (0, 1, 3, 5, 10):
        report = feature_knockout(ds, config, x)
        accuracies.append(report.accuracy)
    for prev, nxt in zip(accuracies, accuracies[1:]):
        assert nxt <= prev + 0.02, f"knockout sequence increased: {accuracies}"
    _report("feature-knockout", "acc @ x=0,1,3,5,10: "
            + ", ".join(f"{a:.3f}" for a in accuracies))


def test_metrics_match_hand_formulas():
    rng = np.random.default_rng(41)
    for _ in range(50):
        classes = int(rng.choice([2, 5]))
        n = int(rng.integers(4, 60))
        y_true = rng.integers(0, classes, size=n).tolist()
        y_pred = rng.integers(0, classes, size=n).tolist()
        cm = confusion_from_pairs(y_true, y_pred, classes)
        report = metrics_from_confusion(cm)
        correct = sum(1 for t, p in zip(y_true, y_pred) if t == p)
        assert report.accuracy == correct / n
        f1s = []
        for cls in range(classes):
            tp = sum(1 for t, p in zip(y_true, y_pred) if t == cls and p == cls)
            fp = sum(1 for t, p in zip(y_true, y_pred) if t != cls and p == cls)
            fn = sum(1 for t, p in zip(y_true, y_pred) if t == cls and p != cls)
            precision = tp / (tp + fp) if tp + fp else 0.0
            recall = tp / (tp + fn) if tp + fn else 0.0
            f1s.append(2 * precision * recall / (precision + recall) if precision + recall else 0.0)
            if classes == 2 and cls == 1:
                assert report.precision == precision
                assert report.recall == recall
        if classes == 5:
            assert report.macro_f1 == pytest.approx(sum(f1s) / 5, abs=1e-15)
    _report("metrics-oracle", "50 randomized confusion matrices exact")


def test_determinism_synth_train_eval(tmp_path):
    config_text = (
        "[train]\nepochs = 2\nseed = 5\nbatch_size = 16\nlearning_rate = 0.001\n"
        "\n[model]\nlstm_hidden = 32\n"
    )
    digests = []
    for run in ("one", "two"):
        base = tmp_path / run
        cohort = base / "cohort"
        model = base / "model.pkgr"
        (base).mkdir()
        config = base / "run.ini"
        config.write_text(config_text, encoding="utf-8")
        assert cli_main(["synth", "--out", str(cohort), "--users", "80", "--seed", "5"]) == 0
        assert cli_main(["train", "--data", str(cohort), "--config", str(config),
                         "--model-out", str(model)]) == 0
        assert cli_main(["eval", "--data", str(cohort), "--model", str(model),
                         "--split", "test"]) == 0
        digests.append(
            (
                model.read_bytes(),
                (base / "model_training_log.csv").read_bytes(),
                (base / "eval_test" / "metrics.txt").read_bytes(),
            )
        )
    assert digests[0][0] == digests[1][0], "model files differ between identical runs"
    assert digests[0][1] == digests[1][1], "training logs differ"
    assert digests[0][2] == digests[1][2], "metrics differ"
    _report("determinism", "model, log, and metrics byte-identical across runs")


def test_reddit_mode_beats_chance():
    ds = generate_synthetic_cohort(reddit_config(users=500), seed=E2E_SEED)
    config = TrainConfig(
        epochs=10,
        seed=E2E_SEED,
        batch_size=64,
        class_count=5,
        disable_neighbour_attention=True,
        disable_categories=("personal_information", "social_interaction"),
    )
    bundle, _ = train(ds, config)
    report, _ = evaluate(bundle, ds, "test")
    assert bundle.layout.total_width == 45
    assert report.accuracy > 0.30
    _report(
        "reddit-mode",
        f"5-class acc={report.accuracy:.4f} macro_f1={report.macro_f1:.4f} (chance 0.342)",
    )


def test_secondary_offline_contract():
    adapter = Path(__file__).resolve().parent.parent / "embed_adapter"
    export_dir = adapter / "test_output" / "offline_cohort"
    if not export_dir.is_dir():
        pytest.skip("embed_adapter offline export not present (secondary not built/run)")
    from riskgraph.data_model.io import load_cohort

    dataset = load_cohort(export_dir)
    for user in dataset.users:
        for post in user.posts:
            assert post.text_embedding.shape == (768,)
            assert post.image_embedding.shape == (300,)
    _report("secondary-offline-contract", f"{len(dataset.users)} users load cleanly")
