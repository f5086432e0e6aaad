import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dcchop.errors import DimensionMismatch, GenerationFailed, InvalidConfig
from dcchop.network import (
    UNREACHABLE,
    MaskParams,
    Network,
    Topology,
    build_adjacency,
    dump_network,
    generate_topology,
    hop_matrix,
    load_network,
    mask_contains,
    predicted_hops,
)

from conftest import bfs_oracle, floyd_warshall


def point_in_mask(topology, x, y, region=100.0, p=MaskParams()):
    """Scalar restatement of each mask, kept separate from the vectorized one."""
    if not (0 <= x <= region and 0 <= y <= region):
        return False
    if topology == "random":
        return True
    if topology == "x_shaped":
        return abs(y - x) <= p.x_half_width or abs(y - (region - x)) <= p.x_half_width
    r = math.dist((x, y), (region / 2, region / 2))
    if not p.inner_radius <= r <= p.outer_radius:
        return False
    if topology == "o_shaped":
        return True
    theta = math.degrees(math.atan2(y - region / 2, x - region / 2))
    return not -p.c_gap_half_angle < theta < p.c_gap_half_angle


def check_hop_invariants(hops, adj):
    n = len(hops)
    assert np.array_equal(hops, hops.T)
    assert np.all(np.diag(hops) == 0)
    off = ~np.eye(n, dtype=bool)
    assert np.array_equal((hops == 1) & off, adj)
    finite = hops != UNREACHABLE
    h = hops.astype(np.int64)
    for j in range(n):
        both = finite[:, j][:, None] & finite[j, :][None, :]
        assert np.all(h[both] <= (h[:, j][:, None] + h[j, :][None, :])[both])


class TestGenerate:
    def test_random_default_setting(self):
        net = generate_topology(Topology.RANDOM, 100, 20, 25, seed=1)
        assert net.size == 100 and net.anchor_count == 20
        assert np.all((net.positions >= 0) & (net.positions <= 100))
        hops = hop_matrix(build_adjacency(net))
        assert np.all((hops[:20] != UNREACHABLE).any(axis=0))

    def test_two_nodes_huge_radius(self):
        net = generate_topology("random", 2, 1, 200, seed=7)
        assert build_adjacency(net)[0, 1]

    @pytest.mark.parametrize("topology", [t.value for t in Topology])
    def test_mask_conformance(self, topology):
        net = generate_topology(topology, 100, 20, 25, seed=3)
        assert all(point_in_mask(topology, x, y) for x, y in net.positions)

    @pytest.mark.parametrize("topology", list(Topology))
    def test_deterministic(self, topology):
        a = generate_topology(topology, 60, 10, 30, seed=11)
        b = generate_topology(topology, 60, 10, 30, seed=11)
        assert a.positions.tobytes() == b.positions.tobytes()
        assert a == b
        c = generate_topology(topology, 60, 10, 30, seed=12)
        assert not np.array_equal(a.positions, c.positions)

    def test_anchors_are_first_indices(self):
        net = generate_topology("o_shaped", 30, 6, 30, seed=2)
        assert net.anchors.shape == (6, 2)
        assert np.array_equal(net.anchors, net.positions[:6])

    @pytest.mark.parametrize("args", [(5, 5, 10), (5, 0, 10), (5, 2, 0.0), (1, 1, 10)])
    def test_invalid_config(self, args):
        n, n_a, r = args
        with pytest.raises(InvalidConfig):
            generate_topology("random", n, n_a, r, seed=1)

    def test_generation_failed(self):
        with pytest.raises(GenerationFailed):
            generate_topology("random", 50, 1, 0.5, seed=1, max_attempts=3)

    def test_unknown_topology(self):
        with pytest.raises(InvalidConfig):
            Topology.parse("spiral")


class TestMaskVectorized:
    @given(st.sampled_from([t.value for t in Topology]),
           st.floats(-5, 105), st.floats(-5, 105))
    def test_matches_scalar_predicate(self, topology, x, y):
        got = bool(mask_contains(Topology(topology), np.array([[x, y]]))[0])
        assert got == point_in_mask(topology, x, y)


class TestAdjacency:
    def test_boundary_inclusive(self):
        net = Network([(0, 0), (0, 10)], 1, 10.0)
        assert build_adjacency(net)[0, 1]

    def test_just_outside(self):
        net = Network([(0, 0), (0, 10.001)], 1, 10.0)
        assert not build_adjacency(net).any()

    def test_matches_double_loop(self):
        net = generate_topology("random", 50, 5, 20, seed=4)
        adj = build_adjacency(net)
        p = net.positions
        for i in range(50):
            for j in range(50):
                d = math.sqrt((p[i][0] - p[j][0]) ** 2 + (p[i][1] - p[j][1]) ** 2)
                assert adj[i, j] == (i != j and d <= net.radius)


class TestHopMatrix:
    def test_chain(self):
        adj = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=bool)
        assert hop_matrix(adj)[0, 2] == 2

    def test_isolated_node(self):
        adj = np.zeros((3, 3), dtype=bool)
        adj[0, 1] = adj[1, 0] = True
        hops = hop_matrix(adj)
        assert hops[2, 0] == hops[2, 1] == hops[0, 2] == UNREACHABLE
        assert hops[2, 2] == 0

    def test_matches_floyd_warshall(self, rng):
        for _ in range(5):
            pts = rng.uniform(0, 100, size=(30, 2))
            net = Network(pts, 3, 22.0)
            adj = build_adjacency(net)
            assert np.array_equal(hop_matrix(adj), floyd_warshall(adj))

    @pytest.mark.parametrize("topology", list(Topology))
    def test_invariants_on_generated(self, topology):
        net = generate_topology(topology, 80, 15, 25, seed=5)
        adj = build_adjacency(net)
        assert np.array_equal(adj, adj.T) and not adj.diagonal().any()
        check_hop_invariants(hop_matrix(adj), adj)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 12), st.floats(5, 60), st.integers(0, 2**32 - 1))
    def test_invariants_property(self, n, radius, seed):
        pts = np.random.default_rng(seed).uniform(0, 100, size=(n, 2))
        adj = build_adjacency(Network(pts, 1, radius))
        hops = hop_matrix(adj)
        check_hop_invariants(hops, adj)
        assert np.array_equal(hops, bfs_oracle(adj))


class TestPredictedHops:
    def test_ground_truth_identity(self, net100):
        net, hops, _ = net100
        assert np.array_equal(predicted_hops(net.ground_truth(), net), hops)

    def test_folded_chain_fold(self, folded_chain):
        net, folded = folded_chain
        real = hop_matrix(build_adjacency(net))
        pred = predicted_hops(folded, net)
        assert real[0, 3] == 3 and pred[0, 3] == 1

    def test_far_node_becomes_unreachable(self):
        pts = np.array([(10, 10), (20, 10), (30, 10), (40, 10), (20, 20)])
        net = Network(pts, 2, 12.0)
        cand = net.ground_truth()
        cand[-2:] = (95.0, 95.0)
        pred = predicted_hops(cand, net)
        assert np.array_equal(pred, bfs_oracle(build_adjacency(Network(net.compose(cand), 2, 12.0))))
        assert pred[4, 4] == 0
        assert np.all(np.delete(pred[4], 4) == UNREACHABLE)

    def test_dimension_mismatch(self, folded_chain):
        net, folded = folded_chain
        with pytest.raises(DimensionMismatch):
            predicted_hops(folded[:3], net)


class TestSerialization:
    def test_round_trip(self):
        net = generate_topology("c_shaped", 40, 8, 30, seed=9)
        buf = io.StringIO()
        dump_network(net, buf)
        text = buf.getvalue()
        assert text.splitlines()[0] == "40 8 30.0 c_shaped 9"
        assert text.splitlines()[1].endswith(" 1") and text.splitlines()[-1].endswith(" 0")
        back = load_network(io.StringIO(text))
        assert back == net
        assert back.fingerprint() == net.fingerprint()

    def test_rejects_misplaced_anchor_flag(self):
        text = "3 1 10.0 random 0\n0 1.0 1.0 0\n1 2.0 2.0 1\n2 3.0 3.0 0\n"
        with pytest.raises(InvalidConfig):
            load_network(io.StringIO(text))
