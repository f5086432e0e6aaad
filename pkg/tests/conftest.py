import numpy as np
import pytest

from dcchop.dvhop import avg_hop_distance, estimate_distances
from dcchop.network import UNREACHABLE, build_adjacency, generate_topology, hop_matrix
from dcchop.verify import folded_chain_instance


def bfs_oracle(adj):
    """Textbook queue BFS from every source; returns a list-of-lists hop matrix."""
    n = len(adj)
    out = [[UNREACHABLE] * n for _ in range(n)]
    for s in range(n):
        out[s][s] = 0
        queue = [s]
        while queue:
            u = queue.pop(0)
            for v in range(n):
                if adj[u][v] and out[s][v] == UNREACHABLE:
                    out[s][v] = out[s][u] + 1
                    queue.append(v)
    return np.array(out)


def floyd_warshall(adj):
    n = len(adj)
    inf = float("inf")
    d = [[0 if i == j else (1 if adj[i][j] else inf) for j in range(n)] for i in range(n)]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i][k] + d[k][j] < d[i][j]:
                    d[i][j] = d[i][k] + d[k][j]
    return np.array([[UNREACHABLE if v == inf else int(v) for v in row] for row in d])


@pytest.fixture
def folded_chain():
    return folded_chain_instance()


@pytest.fixture(scope="session")
def net100():
    net = generate_topology("random", 100, 20, 25, seed=1)
    hops = hop_matrix(build_adjacency(net))
    est = estimate_distances(avg_hop_distance(net, hops), hops, net)
    return net, hops, est


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import ACCEPTANCE_LINES
    except ImportError:
        return
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
