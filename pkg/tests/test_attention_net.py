import math

import numpy as np
import pytest

from riskgraph.attention_net import (
    AttentionParams,
    NetConfig,
    aggregate,
    backward_cohort,
    backward_user,
    classify,
    cross_entropy,
    forward_cohort,
    forward_user,
    hidden_state,
    init_attention_params,
    neighbour_scores,
    property_attention,
    softmax,
    zero_attention_grads,
)
from riskgraph.errors import IntegrityError
from riskgraph.kg_builder import KnowledgeGraph, PropertyLayout, PropertyVector, Segment

from conftest import fd_check

HID = 60


def zero_attention(d=4, c=2) -> AttentionParams:
    return AttentionParams(
        w1=np.zeros((d, d)), b1=np.zeros(d),
        w2=np.zeros((d, HID)), b2=np.zeros(HID),
        w3=np.zeros(2 * HID), b3=np.zeros(1),
        w4=np.zeros((HID, HID)), b4=np.zeros(HID),
        w5=np.zeros((HID, c)), b5=np.zeros(c),
    )


def random_attention(rng, d=6, c=2) -> AttentionParams:
    params = init_attention_params(rng, d, c)
    for arr in (params.b1, params.b2, params.b3, params.b4, params.b5):
        arr[:] = rng.normal(scale=0.1, size=arr.shape)
    return params


def toy_graph(rng, d=6, n=4, adjacency=None) -> KnowledgeGraph:
    layout = PropertyLayout(segments=(Segment("all", 0, d, "post_behavior"),), total_width=d)
    ids = [f"u{i}" for i in range(n)]
    adjacency = adjacency or {"u0": ("u1", "u2", "u3"), "u1": ("u2",), "u2": (), "u3": ()}
    vectors = {
        uid: PropertyVector(values=rng.normal(size=d), layout=layout) for uid in ids
    }
    return KnowledgeGraph(
        vectors=vectors,
        labels={uid: i % 2 for i, uid in enumerate(ids)},
        adjacency={uid: adjacency.get(uid, ()) for uid in ids},
    )


# --- single operations -----------------------------------------------------------


def test_property_attention_uniform_at_zero_params():
    p = np.array([1.0, 2.0, 3.0, 4.0])
    p_prime, alpha = property_attention(p, zero_attention(4))
    assert np.allclose(alpha, 0.25)
    assert np.allclose(p_prime, p * 0.25)


def test_property_attention_normalized_on_random_inputs():
    rng = np.random.default_rng(0)
    params = random_attention(rng, d=8)
    for _ in range(100):
        _, alpha = property_attention(rng.normal(size=8), params)
        assert abs(alpha.sum() - 1.0) < 1e-12
        assert np.all(alpha > 0.0)


def test_property_attention_hand_softmax():
    d = 3
    params = zero_attention(d)
    params.w1 = np.array([[0.5, -1.0, 2.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    p = np.array([1.0, 0.0, 0.0])
    z = [0.5, -1.0, 2.0]
    denom = sum(math.exp(v) for v in z)
    expected = [math.exp(v) / denom for v in z]
    p_prime, alpha = property_attention(p, params)
    assert np.allclose(alpha, expected, atol=1e-12)
    assert np.allclose(p_prime, p * np.array(expected), atol=1e-12)


def test_hidden_state_tanh_range_and_hand_value():
    rng = np.random.default_rng(1)
    params = random_attention(rng, d=5)
    assert np.all(hidden_state(np.zeros(5), zero_attention(5)) == 0.0)
    h = hidden_state(rng.normal(size=5) * 10, params)
    assert np.all(np.abs(h) < 1.0)
    # 2-wide toy: h = tanh(p' W2 + b2) computed by hand on the first two dims
    params = zero_attention(2)
    params.w2[0, 0] = 1.0
    params.w2[1, 0] = -2.0
    params.b2[0] = 0.5
    h = hidden_state(np.array([0.3, 0.4]), params)
    assert h[0] == pytest.approx(math.tanh(0.3 - 0.8 + 0.5), rel=1e-12)
    assert np.all(h[1:] == 0.0)


def test_neighbour_scores_basics():
    rng = np.random.default_rng(2)
    params = random_attention(rng)
    h_u = rng.normal(size=HID)
    coeffs, betas = neighbour_scores(h_u, np.zeros((0, HID)), params)
    assert coeffs.shape == betas.shape == (0,)
    one = rng.normal(size=(1, HID))
    _, betas = neighbour_scores(h_u, one, params)
    assert betas.tolist() == [1.0]
    twin = np.stack([one[0], one[0]])
    _, betas = neighbour_scores(h_u, twin, params)
    assert np.allclose(betas, [0.5, 0.5])


def test_neighbour_scores_hand_oracle():
    params = zero_attention()
    params.w3[:] = 0.0
    params.w3[HID] = 1.0  # coefficient = tanh(first entry of neighbour hidden)
    h_u = np.zeros(HID)
    hiddens = np.zeros((3, HID))
    hiddens[:, 0] = [0.5, -0.2, 1.5]
    coeffs, betas = neighbour_scores(h_u, hiddens, params)
    expected_c = [math.tanh(v) for v in (0.5, -0.2, 1.5)]
    assert np.allclose(coeffs, expected_c, atol=1e-12)
    denom = sum(math.exp(c) for c in expected_c)
    assert np.allclose(betas, [math.exp(c) / denom for c in expected_c], atol=1e-12)


def test_aggregate():
    h_u = np.zeros(HID)
    out = aggregate(h_u, np.zeros((0, HID)), np.zeros(0))
    assert np.allclose(out, 0.5)
    rng = np.random.default_rng(3)
    h_u = rng.normal(size=HID)
    nbrs = rng.normal(size=(3, HID))
    betas = softmax(rng.normal(size=3))
    base = aggregate(h_u, nbrs, betas)
    perm = [2, 0, 1]
    assert np.allclose(base, aggregate(h_u, nbrs[perm], betas[perm]), atol=1e-12)
    single = aggregate(h_u, nbrs[:1], np.array([1.0]))
    logistic = 1.0 / (1.0 + np.exp(-(nbrs[0] + h_u)))
    assert np.allclose(single, logistic, atol=1e-12)


def test_classify_uniform_and_shift_invariance():
    rng = np.random.default_rng(4)
    _, probs = classify(rng.normal(size=HID), zero_attention())
    assert np.allclose(probs, 0.5)
    params = random_attention(rng)
    h = rng.normal(size=HID)
    _, probs = classify(h, params)
    assert abs(probs.sum() - 1.0) < 1e-12
    shifted = AttentionParams(
        w1=params.w1, b1=params.b1, w2=params.w2, b2=params.b2,
        w3=params.w3, b3=params.b3, w4=params.w4, b4=params.b4,
        w5=params.w5, b5=params.b5 + 7.5,
    )
    _, probs_shifted = classify(h, shifted)
    assert np.argmax(probs) == np.argmax(probs_shifted)
    assert np.allclose(probs, probs_shifted, atol=1e-9)


# --- forward_user -----------------------------------------------------------------


def test_forward_isolated_user():
    rng = np.random.default_rng(5)
    graph = toy_graph(rng)
    params = random_attention(rng)
    trace = forward_user(graph, "u2", params)
    assert trace.betas.shape == (0,)
    assert abs(trace.probs.sum() - 1.0) < 1e-12


def test_forward_deterministic():
    rng = np.random.default_rng(6)
    graph = toy_graph(rng)
    params = random_attention(rng)
    a = forward_user(graph, "u0", params)
    b = forward_user(graph, "u0", params)
    assert a.probs.tobytes() == b.probs.tobytes()
    assert a.alpha.tobytes() == b.alpha.tobytes()


def test_forward_unknown_user():
    rng = np.random.default_rng(7)
    graph = toy_graph(rng)
    with pytest.raises(IntegrityError):
        forward_user(graph, "nope", random_attention(rng))


def test_neighbour_permutation_invariance_exact():
    # adjacency is stored sorted, so any input ordering of the same
    # neighbour set yields bit-identical traces
    rng = np.random.default_rng(8)
    graph = toy_graph(rng, adjacency={"u0": ("u3", "u1", "u2")})
    params = random_attention(rng)
    base = forward_user(graph, "u0", params)
    graph2 = KnowledgeGraph(
        vectors=graph.vectors,
        labels=graph.labels,
        adjacency={**graph.adjacency, "u0": tuple(sorted(("u2", "u3", "u1")))},
    )
    again = forward_user(graph2, "u0", params)
    assert base.probs.tobytes() == again.probs.tobytes()


def test_one_hop_locality_exact():
    # u1 -> u2; u3 is at distance >= 2 from u1, so perturbing u3 changes nothing
    rng = np.random.default_rng(9)
    graph = toy_graph(rng, adjacency={"u0": ("u1", "u2", "u3"), "u1": ("u2",)})
    params = random_attention(rng)
    before = forward_user(graph, "u1", params)
    vecs = dict(graph.vectors)
    vecs["u3"] = PropertyVector(
        values=vecs["u3"].values + 100.0, layout=vecs["u3"].layout
    )
    perturbed = KnowledgeGraph(vectors=vecs, labels=graph.labels, adjacency=graph.adjacency)
    after = forward_user(perturbed, "u1", params)
    assert before.probs.tobytes() == after.probs.tobytes()
    assert before.h_prime.tobytes() == after.h_prime.tobytes()


def test_duplicated_neighbour_splits_beta_mass():
    # duplicating a neighbour's vector under a new id halves each beta but
    # reproduces the single-neighbour aggregate
    rng = np.random.default_rng(10)
    d = 6
    layout = PropertyLayout(segments=(Segment("all", 0, d, "post_behavior"),), total_width=d)
    base_vec = rng.normal(size=d)
    centre = rng.normal(size=d)
    params = random_attention(rng, d=d)

    single = KnowledgeGraph(
        vectors={
            "u": PropertyVector(centre, layout),
            "n1": PropertyVector(base_vec, layout),
        },
        labels={"u": 0, "n1": 0},
        adjacency={"u": ("n1",), "n1": ()},
    )
    doubled = KnowledgeGraph(
        vectors={
            "u": PropertyVector(centre, layout),
            "n1": PropertyVector(base_vec, layout),
            "n2": PropertyVector(base_vec.copy(), layout),
        },
        labels={"u": 0, "n1": 0, "n2": 0},
        adjacency={"u": ("n1", "n2"), "n1": (), "n2": ()},
    )
    t1 = forward_user(single, "u", params)
    t2 = forward_user(doubled, "u", params)
    assert np.allclose(t2.betas, [0.5, 0.5], atol=1e-12)
    assert np.allclose(t1.probs, t2.probs, atol=1e-10)


# --- gradients --------------------------------------------------------------------


def test_saturated_prediction_has_tiny_gradients():
    rng = np.random.default_rng(11)
    graph = toy_graph(rng)
    params = random_attention(rng)
    params.b5[:] = np.array([30.0, -30.0])  # always predicts class 0 with p ~ 1
    trace = forward_user(graph, "u2", params)
    grads, _ = backward_user(trace, 0, params)
    for name, g in grads.tensors().items():
        assert np.max(np.abs(g)) < 1e-10, name


def test_no_neighbours_means_no_neighbour_gradients():
    rng = np.random.default_rng(12)
    graph = toy_graph(rng)
    params = random_attention(rng)
    trace = forward_user(graph, "u2", params)
    grads, d_p = backward_user(trace, 1, params)
    assert np.all(grads.w3 == 0.0)
    assert np.all(grads.b3 == 0.0)
    assert set(d_p) == {"u2"}


def test_backward_matches_finite_differences():
    rng = np.random.default_rng(13)
    d = 6
    graph = toy_graph(rng, d=d, adjacency={"u0": ("u1", "u2"), "u1": (), "u2": (), "u3": ()})
    params = random_attention(rng, d=d)
    label = 1

    def loss():
        trace = forward_user(graph, "u0", params)
        return cross_entropy(trace.probs, label, weight=1.2)

    trace = forward_user(graph, "u0", params)
    grads, d_p = backward_user(trace, label, params, weight=1.2)
    pairs = [(name, arr, grads.tensors()[name]) for name, arr in params.tensors().items()]
    pairs.append(("p_u0", graph.vectors["u0"].values, d_p["u0"]))
    pairs.append(("p_u1", graph.vectors["u1"].values, d_p["u1"]))
    fd_check(loss, pairs, rng=rng)


def test_backward_with_elu_and_disabled_attention():
    rng = np.random.default_rng(14)
    d = 5
    graph = toy_graph(rng, d=d, adjacency={"u0": ("u1",), "u1": (), "u2": (), "u3": ()})
    params = random_attention(rng, d=d)
    for config in (
        NetConfig(sigma="elu"),
        NetConfig(use_property_attention=False),
        NetConfig(use_neighbour_attention=False),
    ):
        def loss():
            trace = forward_user(graph, "u0", params, config)
            return cross_entropy(trace.probs, 0)

        trace = forward_user(graph, "u0", params, config)
        grads, d_p = backward_user(trace, 0, params)
        pairs = [(name, arr, grads.tensors()[name]) for name, arr in params.tensors().items()]
        pairs.append(("p_u0", graph.vectors["u0"].values, d_p["u0"]))
        fd_check(loss, pairs, rng=rng, max_entries=12)


# --- vectorized cohort pass ---------------------------------------------------------


def test_cohort_pass_matches_per_user():
    rng = np.random.default_rng(15)
    d = 6
    graph = toy_graph(rng, d=d, n=5, adjacency={
        "u0": ("u1", "u2"), "u1": ("u0", "u3"), "u2": (), "u3": ("u4",), "u4": (),
    })
    params = random_attention(rng, d=d)
    ids = sorted(graph.vectors)
    vectors = np.stack([graph.vectors[u].values for u in ids])
    trace = forward_cohort(ids, vectors, graph.adjacency, params)
    for i, uid in enumerate(ids):
        single = forward_user(graph, uid, params)
        assert np.allclose(trace.probs[i], single.probs, atol=1e-12)
        assert np.allclose(trace.alpha[i], single.alpha, atol=1e-12)


def test_cohort_backward_matches_per_user_sum():
    rng = np.random.default_rng(16)
    d = 5
    graph = toy_graph(rng, d=d, n=4, adjacency={
        "u0": ("u1", "u2"), "u1": ("u3",), "u2": (), "u3": (),
    })
    params = random_attention(rng, d=d)
    ids = sorted(graph.vectors)
    labels = {uid: i % 2 for i, uid in enumerate(ids)}
    vectors = np.stack([graph.vectors[u].values for u in ids])
    trace = forward_cohort(ids, vectors, graph.adjacency, params)
    d_logits = trace.probs.copy()
    for i, uid in enumerate(ids):
        d_logits[i, labels[uid]] -= 1.0
    grads, d_p = backward_cohort(trace, params, d_logits)

    expected = zero_attention_grads(params)
    expected_dp = np.zeros_like(vectors)
    index = {uid: i for i, uid in enumerate(ids)}
    for uid in ids:
        t = forward_user(graph, uid, params)
        g, dp = backward_user(t, labels[uid], params)
        expected.add_(g)
        for nid, v in dp.items():
            expected_dp[index[nid]] += v
    for name, arr in grads.tensors().items():
        assert np.allclose(arr, expected.tensors()[name], atol=1e-10), name
    assert np.allclose(d_p, expected_dp, atol=1e-10)
