import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dcchop.dvhop import DistanceEstimate, avg_hop_distance, estimate_distances
from dcchop.errors import DimensionMismatch
from dcchop.network import UNREACHABLE, Network, build_adjacency, hop_matrix, predicted_hops
from dcchop.objectives import (
    HopLossKind,
    LossContext,
    ObjectiveVector,
    ac_base,
    ac_cc,
    distance_residual_loss,
    evaluate,
    hop_loss,
    il_base,
    il_dst,
)
from dcchop.verify import folded_chain_instance

from conftest import bfs_oracle


# -- naive oracles: plain double loops over ordered pairs ------------------

def naive_hop_loss(kind, positions, real, radius):
    n = len(positions)
    pred_adj = [[i != j and math.dist(positions[i], positions[j]) <= radius for j in range(n)]
                for i in range(n)]
    pred = bfs_oracle(pred_adj)
    cap = lambda h: n if h == UNREACHABLE else int(h)
    total = 0.0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            d = math.dist(positions[i], positions[j])
            hr, hp = cap(real[i][j]), cap(pred[i][j])
            cc = (hr == 1 and d > radius) or (hr > 1 and d <= radius)
            if kind == "base" and hr < 3:
                total += (hr - hp) ** 2
            elif kind == "accc" and cc:
                total += (hr - hp) ** 2
            elif kind == "dcc" and cc:
                total += abs(d - radius)
    return total


def naive_residual(anchors, unknowns, est):
    total, count = 0.0, 0
    for i, a in enumerate(anchors):
        for k, u in enumerate(unknowns):
            if not math.isnan(est[i][k]):
                total += (math.dist(a, u) - est[i][k]) ** 2
                count += 1
    return total / count


def random_instance(rng, n=10, n_a=3, radius=None):
    radius = rng.uniform(15, 45) if radius is None else radius
    net = Network(rng.uniform(0, 100, size=(n, 2)), n_a, radius)
    hops = hop_matrix(build_adjacency(net))
    cand = rng.uniform(0, 100, size=net.dimension)
    return net, hops, cand


def exact_estimate(net):
    d = np.linalg.norm(net.anchors[:, None, :] - net.unknowns[None, :, :], axis=-1)
    return DistanceEstimate(np.ones(net.anchor_count), d)


# -- per-pair pieces -------------------------------------------------------

@pytest.mark.parametrize("hop,want", [(1, True), (2, True), (3, False), (UNREACHABLE, False)])
def test_ac_base(hop, want):
    assert bool(ac_base(hop)) is want


def test_il_base_examples():
    assert il_base(2, 2) == 0
    assert il_base(1, 3) == 4
    assert il_base(2, UNREACHABLE, cap=10) == (2 - 10) ** 2
    with pytest.raises(ValueError):
        il_base(2, UNREACHABLE)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_cap_exceeds_every_finite_hop(n):
    pairs = list(itertools.combinations(range(n), 2))
    longest = 0
    for mask in range(1 << len(pairs)):
        adj = np.zeros((n, n), dtype=bool)
        for b, (i, j) in enumerate(pairs):
            if mask >> b & 1:
                adj[i, j] = adj[j, i] = True
        h = hop_matrix(adj)
        longest = max(longest, int(h[h != UNREACHABLE].max()))
    assert longest == n - 1 < n


@pytest.mark.parametrize("hop,dist,want", [
    (1, 30.0, True),     # linked in reality, apart in prediction
    (3, 20.0, True),     # far in reality, linked in prediction
    (2, 60.0, False),
    (1, 25.0, False),    # boundary counts as linked
    (UNREACHABLE, 10.0, True),
])
def test_ac_cc_cases(hop, dist, want):
    assert bool(ac_cc(hop, dist, 25.0)) is want


@pytest.mark.parametrize("dist,want", [(30.0, 5.0), (20.0, 5.0), (25.0, 0.0)])
def test_il_dst(dist, want):
    assert il_dst(dist, 25.0) == want


# -- whole-network losses --------------------------------------------------

@pytest.mark.parametrize("kind", list(HopLossKind))
def test_ground_truth_has_zero_hop_loss(net100, kind):
    net, hops, _ = net100
    assert hop_loss(kind, net, hops, net.ground_truth()) == 0.0


def test_folded_chain_base_blind_dcc_not(folded_chain):
    net, folded = folded_chain
    real = hop_matrix(build_adjacency(net))
    assert hop_loss("base", net, real, folded) == 0.0
    assert hop_loss("dcc", net, real, folded) == pytest.approx(2.0)  # both orderings of (1, 4), 10 - 9
    assert hop_loss("accc", net, real, folded) == 8.0                # 2 * (3 - 1)^2
    dist = math.dist((0, 0), (0, 9))
    assert bool(ac_cc(real[0, 3], dist, net.radius)) and not bool(ac_base(real[0, 3]))


@pytest.mark.parametrize("kind", ["base", "accc", "dcc"])
def test_hop_loss_matches_naive_oracle(kind, rng):
    for _ in range(100):
        net, hops, cand = random_instance(rng)
        want = naive_hop_loss(kind, net.compose(cand).tolist(), hops.tolist(), net.radius)
        got = hop_loss(kind, net, hops, cand)
        assert got == pytest.approx(want, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("kind", list(HopLossKind))
def test_pair_terms_sum_and_symmetry(kind, rng):
    for _ in range(30):
        net, hops, cand = random_instance(rng, n=12)
        ctx = LossContext(net, hops)
        terms = ctx.pair_terms(kind, cand)
        np.testing.assert_array_equal(terms, terms.T)
        assert np.all(np.diag(terms) == 0)
        assert terms.sum() == pytest.approx(ctx.hop_loss(kind, cand), rel=1e-12, abs=1e-12)


def test_hop_loss_dimension_mismatch(folded_chain):
    net, folded = folded_chain
    real = hop_matrix(build_adjacency(net))
    with pytest.raises(DimensionMismatch):
        hop_loss("dcc", net, real, folded[:-1])
    with pytest.raises(DimensionMismatch):
        hop_loss("dcc", net, real[:3, :3], folded)


def test_residual_zero_on_exact_estimates(net100):
    net, _, _ = net100
    assert distance_residual_loss(net, exact_estimate(net), net.ground_truth()) == pytest.approx(0.0, abs=1e-20)


def test_residual_point_on_circle():
    net = Network([(0, 0), (50, 50)], 1, 20.0)
    est = DistanceEstimate(np.array([10.0]), np.array([[10.0]]))
    assert distance_residual_loss(net, est, np.array([6.0, 8.0])) == 0.0


def test_residual_matches_naive_oracle(rng):
    for _ in range(100):
        net, hops, cand = random_instance(rng, n=14, n_a=4, radius=30.0)
        est = estimate_distances(avg_hop_distance(net, hops), hops, net) \
            if (hops[:4, :4] != UNREACHABLE).sum() > 4 else exact_estimate(net)
        if np.isnan(est.est_dist).all():
            continue
        want = naive_residual(net.anchors.tolist(), cand.reshape(-1, 2).tolist(), est.est_dist.tolist())
        assert distance_residual_loss(net, est, cand) == pytest.approx(want, rel=1e-9)


def test_evaluate_ground_truth_and_determinism(net100):
    net, hops, est = net100
    assert evaluate("dcc", net, hops, exact_estimate(net), net.ground_truth()) == pytest.approx((0.0, 0.0), abs=1e-20)
    cand = net.ground_truth() + 1.5
    a = evaluate("base", net, hops, est, np.clip(cand, 0, 100))
    b = evaluate("base", net, hops, est, np.clip(cand, 0, 100))
    assert isinstance(a, ObjectiveVector) and a == b


@pytest.mark.parametrize("kind", list(HopLossKind))
def test_batch_matches_sequential(net100, rng, kind):
    net, hops, est = net100
    pop = rng.uniform(0, 100, size=(20, net.dimension))
    ctx = LossContext(net, hops, est)
    batch = ctx.objectives_batch(kind, pop)
    seq = np.array([evaluate(kind, net, hops, est, c) for c in pop])
    np.testing.assert_array_equal(batch, seq)


# -- properties of the connectivity-consistency loss -----------------------

def small_instances(seed, count, max_nodes=8):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(2, max_nodes + 1))
        net = Network(rng.uniform(0, 40, size=(n, 2)), int(rng.integers(1, n)), float(rng.uniform(5, 25)))
        hops = hop_matrix(build_adjacency(net))
        cand = rng.uniform(0, 40, size=net.dimension)
        if rng.random() < 0.3:  # nudge a copy of the truth so near-misses are common
            cand = np.clip(net.ground_truth() + rng.normal(0, 3, size=net.dimension), 0, 100)
        yield net, hops, cand


def test_hop_mismatch_always_activates_some_pair():
    mismatches = 0
    for net, hops, cand in small_instances(7, 2000):
        pred = predicted_hops(cand, net)
        dist = np.linalg.norm(net.compose(cand)[:, None] - net.compose(cand)[None], axis=-1)
        active = ac_cc(hops, dist, net.radius) & ~np.eye(net.size, dtype=bool)
        if not np.array_equal(pred, hops):
            mismatches += 1
            assert active.any()
    assert mismatches > 500


def test_zero_dcc_implies_identical_hops():
    for net, hops, cand in small_instances(8, 2000):
        if hop_loss("dcc", net, hops, cand) == 0.0:
            dist = np.linalg.norm(net.compose(cand)[:, None] - net.compose(cand)[None], axis=-1)
            if not np.any(dist == net.radius):
                assert np.array_equal(predicted_hops(cand, net), hops)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1e-6, 0.01))
def test_dcc_lipschitz(seed, delta):
    rng = np.random.default_rng(seed)
    net, hops, cand = random_instance(rng, n=int(rng.integers(3, 12)), n_a=1)
    coord = int(rng.integers(net.dimension))
    moved = cand.copy()
    moved[coord] += delta * (1 if rng.random() < 0.5 else -1)
    change = abs(hop_loss("dcc", net, hops, moved) - hop_loss("dcc", net, hops, cand))
    assert change <= 2 * net.size ** 2 * delta + 1e-9


def test_base_discontinuity_witness():
    # anchor - unknown linked in reality; candidate sits on either side of R
    net = Network([(0, 0), (5, 0)], 1, 10.0)
    hops = hop_matrix(build_adjacency(net))
    inside = np.array([10.0 - 0.5e-6, 0.0])
    outside = np.array([10.0 + 0.5e-6, 0.0])
    jump = hop_loss("base", net, hops, outside) - hop_loss("base", net, hops, inside)
    assert jump >= 1
    assert abs(hop_loss("dcc", net, hops, outside) - hop_loss("dcc", net, hops, inside)) < 1e-5


def test_folded_chain_fixture_consistency():
    net, folded = folded_chain_instance()
    real = hop_matrix(build_adjacency(net))
    pred = predicted_hops(folded, net)
    diff = np.argwhere(real != pred)
    assert sorted(map(tuple, diff.tolist())) == [(0, 3), (3, 0)]
