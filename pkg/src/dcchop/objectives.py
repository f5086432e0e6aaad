"""The two optimization objectives: distance residual (f1) and hop loss (f2).

Every hop loss has the shape ``sum_i sum_j IL[i, j] * AC[i, j]`` over
ordered node pairs, so each unordered pair is counted twice.  The variants:

``BASE``
    AC = real hop < 3, IL = squared hop difference.  Needs the predicted
    hop matrix, i.e. a BFS over the candidate layout.
``ACCC``
    AC = connectivity mismatch, IL = squared hop difference.
``DCC``
    AC = connectivity mismatch, IL = ``|predicted distance - R|``.  Only
    pairwise distances are needed; no BFS.

A connectivity mismatch is a pair that is adjacent in the real network but
farther than ``R`` apart in the candidate layout, or vice versa.  Predicted
adjacency is simply ``distance <= R``.
"""

from __future__ import annotations

import enum
from typing import NamedTuple

import numpy as np

from dcchop.dvhop import DistanceEstimate
from dcchop.errors import DimensionMismatch, InvalidConfig
from dcchop.network import UNREACHABLE, Network, adjacency_from_positions, hop_matrix, pairwise_distances


class HopLossKind(str, enum.Enum):
    BASE = "base"
    ACCC = "accc"
    DCC = "dcc"

    @classmethod
    def parse(cls, value: str | HopLossKind) -> HopLossKind:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise InvalidConfig(f"unknown hop loss kind {value!r}") from None


class ObjectiveVector(NamedTuple):
    f1: float
    f2: float


# -- per-pair building blocks (scalar or array) ----------------------------

def ac_base(hop_real):
    """Baseline activation: the pair is within two real hops."""
    return np.asarray(hop_real) < 3


def il_base(hop_real, hop_pred, cap: int | None = None):
    """Squared hop-count difference.

    ``UNREACHABLE`` entries are replaced by ``cap`` (the node count, which
    exceeds every finite hop count) before differencing.
    """
    real = np.asarray(hop_real, dtype=np.int64)
    pred = np.asarray(hop_pred, dtype=np.int64)
    if cap is None:
        if np.any(real == UNREACHABLE) or np.any(pred == UNREACHABLE):
            raise ValueError("cap is required when a hop count is UNREACHABLE")
    else:
        real = np.minimum(real, cap)
        pred = np.minimum(pred, cap)
    return (real - pred) ** 2


def ac_cc(hop_real, dist_pred, radius: float):
    """Connectivity-consistency activation from real hops and predicted distances."""
    real = np.asarray(hop_real)
    linked = np.asarray(dist_pred) <= radius
    return ((real == 1) & ~linked) | ((real > 1) & linked)


def il_dst(dist_pred, radius: float):
    """Distance of the predicted pair separation from the radio range."""
    return np.abs(np.asarray(dist_pred, dtype=float) - radius)


# -- whole-network losses --------------------------------------------------

class LossContext:
    """Per-network constants shared by every candidate evaluation.

    Built once per network; :meth:`objectives` is then pure in the candidate.
    """

    def __init__(self, network: Network, real_hops: np.ndarray, est: DistanceEstimate | None = None):
        real = np.asarray(real_hops)
        n = network.size
        if real.shape != (n, n):
            raise DimensionMismatch(f"hop matrix shape {real.shape} does not match N={n}")
        self.network = network
        self.radius = network.radius
        self.size = n
        offdiag = ~np.eye(n, dtype=bool)
        self.real_linked = real == 1
        self.real_unlinked = (real > 1) & offdiag
        self.base_active = (real < 3) & offdiag
        self.real_capped = np.minimum(real, n).astype(np.int64)
        self.est = est
        if est is not None:
            self._est_ok = ~np.isnan(est.est_dist)
            self._est_vals = np.where(self._est_ok, est.est_dist, 0.0)
            self._est_count = int(self._est_ok.sum())

    def positions(self, candidate: np.ndarray) -> np.ndarray:
        return self.network.compose(candidate)

    def hop_loss(self, kind: HopLossKind, candidate: np.ndarray) -> float:
        pos = self.positions(candidate)
        if kind is HopLossKind.BASE:
            pred = hop_matrix(adjacency_from_positions(pos, self.radius))
            diff = self.real_capped - np.minimum(pred, self.size)
            return float((diff[self.base_active] ** 2).sum())

        dist = pairwise_distances(pos)
        linked = dist <= self.radius
        broken = self.real_linked & ~linked
        spurious = self.real_unlinked & linked
        if kind is HopLossKind.DCC:
            return float((self.radius - dist[spurious]).sum() + (dist[broken] - self.radius).sum())

        # ACCC: predicted hop is 1 on spurious links; broken links need the BFS.
        total = float(((self.real_capped[spurious] - 1) ** 2).sum())
        if broken.any():
            np.fill_diagonal(linked, False)
            pred = np.minimum(hop_matrix(linked), self.size)
            total += float(((1 - pred[broken]) ** 2).sum())
        return total

    def residual(self, candidate: np.ndarray) -> float:
        if self.est is None:
            raise ValueError("distance estimate required for the residual objective")
        unknowns = np.asarray(candidate, dtype=float).reshape(-1, 2)
        if unknowns.shape[0] != self.network.unknown_count:
            raise DimensionMismatch(f"candidate has {unknowns.size} coordinates, "
                                    f"expected {self.network.dimension}")
        diff = self.network.anchors[:, None, :] - unknowns[None, :, :]
        d = np.sqrt(np.einsum("akc,akc->ak", diff, diff))
        r = np.where(self._est_ok, d - self._est_vals, 0.0)
        return float((r * r).sum() / max(self._est_count, 1))

    def pair_terms(self, kind: HopLossKind, candidate: np.ndarray) -> np.ndarray:
        """Full ``IL * AC`` matrix; its sum equals :meth:`hop_loss`."""
        pos = self.positions(candidate)
        dist = pairwise_distances(pos)
        pred_adj = dist <= self.radius
        np.fill_diagonal(pred_adj, False)
        offdiag = ~np.eye(self.size, dtype=bool)
        if kind is HopLossKind.DCC:
            active = ac_cc(self.real_capped, dist, self.radius) & offdiag
            return np.where(active, il_dst(dist, self.radius), 0.0)
        pred = hop_matrix(pred_adj)
        il = il_base(self.real_capped, pred, cap=self.size).astype(float)
        if kind is HopLossKind.BASE:
            return np.where(self.base_active, il, 0.0)
        return np.where(ac_cc(self.real_capped, dist, self.radius) & offdiag, il, 0.0)

    def objectives(self, kind: HopLossKind, candidate: np.ndarray) -> ObjectiveVector:
        return ObjectiveVector(self.residual(candidate), self.hop_loss(kind, candidate))

    def objectives_batch(self, kind: HopLossKind, candidates: np.ndarray) -> np.ndarray:
        """``(n, 2)`` array of (f1, f2) for a population of candidates."""
        pop = np.asarray(candidates, dtype=float)
        out = np.empty((len(pop), 2))
        for i, cand in enumerate(pop):
            out[i] = self.residual(cand), self.hop_loss(kind, cand)
        return out


def hop_loss(kind: HopLossKind | str, network: Network, real_hops: np.ndarray,
             candidate: np.ndarray) -> float:
    return LossContext(network, real_hops).hop_loss(HopLossKind.parse(kind), candidate)


def distance_residual_loss(network: Network, est: DistanceEstimate, candidate: np.ndarray) -> float:
    """Mean squared gap between candidate anchor ranges and DV-Hop estimates.

    Averaged over the (anchor, unknown) pairs whose estimate is not missing.
    """
    n = network.size
    dummy = np.zeros((n, n), dtype=np.int32)
    return LossContext(network, dummy, est).residual(candidate)


def evaluate(kind: HopLossKind | str, network: Network, real_hops: np.ndarray,
             est: DistanceEstimate, candidate: np.ndarray) -> ObjectiveVector:
    return LossContext(network, real_hops, est).objectives(HopLossKind.parse(kind), candidate)
