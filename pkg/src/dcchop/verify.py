"""Property checks for the hop losses, runnable from the command line.

Each check returns a :class:`Check` carrying a pass flag and a one-line
detail string.  They are deliberately brute force: predicted hop counts are
recomputed by BFS and compared against what the activation rule reports.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from dcchop.network import Network, build_adjacency, hop_matrix, pairwise_distances, predicted_hops
from dcchop.objectives import LossContext, HopLossKind, ac_cc


@dataclass
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def folded_chain_instance() -> tuple[Network, np.ndarray]:
    """Chain 1-2-3-4 at 9 m spacing with R = 10 m, plus a folded candidate.

    Nodes 1 and 2 are anchors.  The candidate bends the chain into a 9 m
    square, so nodes 1 and 4 become neighbours while every other pair keeps
    its real hop count.
    """
    net = Network([(0, 0), (9, 0), (18, 0), (27, 0)], anchor_count=2, radius=10.0)
    return net, np.array([9.0, 9.0, 0.0, 9.0])


def random_small_instances(count: int, seed: int, max_nodes: int = 8
                           ) -> Iterator[tuple[Network, np.ndarray, np.ndarray]]:
    """Random (network, real hops, candidate) triples with at most ``max_nodes`` nodes.

    Roughly a third of the candidates are small perturbations of the truth,
    which produces many single-edge hop mismatches.
    """
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(2, max_nodes + 1))
        side = float(rng.uniform(20, 60))
        net = Network(rng.uniform(0, side, size=(n, 2)), int(rng.integers(1, n)),
                      float(rng.uniform(5, 30)))
        hops = hop_matrix(build_adjacency(net))
        if rng.random() < 1 / 3:
            cand = np.clip(net.ground_truth() + rng.normal(0, 4, size=net.dimension), 0, net.region)
        else:
            cand = rng.uniform(0, side, size=net.dimension)
        yield net, hops, cand


def proposition_coverage(instances: int = 10_000, seed: int = 2024) -> Check:
    """Any hop mismatch implies at least one connectivity-inconsistent pair."""
    t0 = time.perf_counter()
    mismatched = failures = 0
    for net, hops, cand in random_small_instances(instances, seed):
        pred = predicted_hops(cand, net)
        if np.array_equal(pred, hops):
            continue
        mismatched += 1
        dist = pairwise_distances(net.compose(cand))
        active = ac_cc(np.minimum(hops, net.size), dist, net.radius)
        np.fill_diagonal(active, False)
        failures += not active.any()
    secs = time.perf_counter() - t0
    return Check("hop-mismatch coverage", failures == 0 and mismatched > 0,
                 f"{instances} instances, {mismatched} with hop mismatch, "
                 f"{failures} uncovered, {secs:.1f}s")


def zero_loss_contrapositive(instances: int = 10_000, seed: int = 2024) -> Check:
    """Zero DCC loss (away from the exact-R boundary) implies identical hop matrices."""
    zero = failures = 0
    for net, hops, cand in random_small_instances(instances, seed):
        ctx = LossContext(net, hops)
        if ctx.hop_loss(HopLossKind.DCC, cand) != 0.0:
            continue
        zero += 1
        if np.any(pairwise_distances(net.compose(cand)) == net.radius):
            continue
        failures += not np.array_equal(predicted_hops(cand, net), hops)
    return Check("zero DCC loss implies exact hops", failures == 0,
                 f"{zero} zero-loss instances, {failures} with differing hops")


def folded_chain_regression() -> Check:
    net, folded = folded_chain_instance()
    ctx = LossContext(net, hop_matrix(build_adjacency(net)))
    base = ctx.hop_loss(HopLossKind.BASE, folded)
    dcc = ctx.hop_loss(HopLossKind.DCC, folded)
    dist = pairwise_distances(net.compose(folded))
    active = bool(ac_cc(ctx.real_capped[0, 3], dist[0, 3], net.radius))
    return Check("folded chain", base == 0.0 and dcc > 0.0 and active,
                 f"base loss {base:g}, DCC loss {dcc:g}, pair (1,4) active={active}")


def dcc_lipschitz(samples: int = 1_000, seed: int = 7, max_delta: float = 0.01) -> Check:
    """|change in DCC loss| <= 2 N^2 delta for single-coordinate moves of size delta."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    violations = 0
    for _ in range(samples):
        n = int(rng.integers(3, 16))
        net = Network(rng.uniform(0, 100, size=(n, 2)), int(rng.integers(1, n)),
                      float(rng.uniform(10, 45)))
        ctx = LossContext(net, hop_matrix(build_adjacency(net)))
        cand = rng.uniform(0, 100, size=net.dimension)
        delta = float(rng.uniform(0, max_delta))
        moved = cand.copy()
        moved[rng.integers(net.dimension)] += delta * rng.choice([-1.0, 1.0])
        change = abs(ctx.hop_loss(HopLossKind.DCC, moved) - ctx.hop_loss(HopLossKind.DCC, cand))
        bound = 2 * n * n * delta
        violations += change > bound + 1e-9
        if bound > 0:
            worst = max(worst, change / bound)
    return Check("DCC Lipschitz bound", violations == 0,
                 f"{samples} perturbations, {violations} violations, worst ratio {worst:.3f}")


def base_discontinuity_witness(step: float = 1e-6) -> Check:
    """Moving a node across the radio range by ``step`` makes the base loss jump."""
    net = Network([(0, 0), (5, 0)], anchor_count=1, radius=10.0)
    ctx = LossContext(net, hop_matrix(build_adjacency(net)))
    inside = np.array([net.radius - step / 2, 0.0])
    outside = np.array([net.radius + step / 2, 0.0])
    jump = ctx.hop_loss(HopLossKind.BASE, outside) - ctx.hop_loss(HopLossKind.BASE, inside)
    drift = abs(ctx.hop_loss(HopLossKind.DCC, outside) - ctx.hop_loss(HopLossKind.DCC, inside))
    return Check("base loss discontinuity", jump >= 1 and drift < 1e-5,
                 f"base jump {jump:g} over {step:g} m, DCC change {drift:.2e}")


def run_all(instances: int = 10_000, samples: int = 1_000) -> list[Check]:
    return [
        proposition_coverage(instances),
        zero_loss_contrapositive(instances),
        folded_chain_regression(),
        dcc_lipschitz(samples),
        base_discontinuity_witness(),
    ]
