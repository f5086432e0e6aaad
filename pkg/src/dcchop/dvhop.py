"""Classic DV-Hop: per-anchor hop size, anchor-to-unknown distances, multilateration."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from dcchop.errors import DegenerateGeometry, NoReachableAnchor
from dcchop.network import UNREACHABLE, Network

log = logging.getLogger(__name__)

MIN_ANCHORS = 3


@dataclass(frozen=True)
class DistanceEstimate:
    """``est_dist[i, k]`` is the estimated distance from anchor ``i`` to unknown ``k``.

    Unknowns that anchor ``i`` cannot reach carry ``nan`` (the missing marker).
    """

    avg_dis: np.ndarray
    est_dist: np.ndarray

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.est_dist)


def avg_hop_distance(network: Network, hops: np.ndarray, *, fallback: bool = True) -> np.ndarray:
    """Average hop length seen by each anchor.

    For anchor ``i`` this is the summed Euclidean distance to every other
    anchor it can reach divided by the summed hop counts to those anchors.
    An anchor that reaches no other anchor gets the mean of the valid anchors
    when ``fallback`` is set, otherwise :class:`NoReachableAnchor` is raised.
    """
    n_a = network.anchor_count
    anchors = network.anchors
    anchor_hops = np.asarray(hops)[:n_a, :n_a]
    reach = (anchor_hops != UNREACHABLE) & ~np.eye(n_a, dtype=bool)
    diff = anchors[:, None, :] - anchors[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=-1))

    num = np.where(reach, dist, 0.0).sum(axis=1)
    den = np.where(reach, anchor_hops, 0).sum(axis=1).astype(float)
    valid = den > 0
    avg = np.full(n_a, np.nan)
    avg[valid] = num[valid] / den[valid]

    if not valid.all():
        lonely = np.flatnonzero(~valid).tolist()
        if not fallback or not valid.any():
            raise NoReachableAnchor(f"anchors {lonely} reach no other anchor")
        log.debug("anchors %s reach no peer anchor; using mean hop size", lonely)
        avg[~valid] = avg[valid].mean()
    return avg


def estimate_distances(avg_dis: np.ndarray, hops: np.ndarray, network: Network) -> DistanceEstimate:
    n_a = network.anchor_count
    h = np.asarray(hops)[:n_a, n_a:]
    est = np.where(h != UNREACHABLE, np.asarray(avg_dis, dtype=float)[:, None] * h, np.nan)
    return DistanceEstimate(np.asarray(avg_dis, dtype=float), est)


def multilaterate(anchors: np.ndarray, distances: np.ndarray) -> np.ndarray:
    """Linearized least-squares position from ranges to three or more anchors.

    The last anchor's circle equation is subtracted from the others, leaving
    a linear system in (x, y).  Raises :class:`DegenerateGeometry` when that
    system is rank deficient, e.g. for collinear anchors.
    """
    anchors = np.asarray(anchors, dtype=float)
    d = np.asarray(distances, dtype=float)
    if len(anchors) < MIN_ANCHORS:
        raise DegenerateGeometry(f"need at least {MIN_ANCHORS} anchors, got {len(anchors)}")
    pivot, d_p = anchors[-1], d[-1]
    rest, d_r = anchors[:-1], d[:-1]
    a = 2.0 * (rest - pivot)
    b = d_p ** 2 - d_r ** 2 + (rest ** 2).sum(axis=1) - (pivot ** 2).sum()
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[-1] <= 1e-9 * max(sv[0], 1.0):
        raise DegenerateGeometry("anchor geometry is rank deficient")
    sol, *_ = np.linalg.lstsq(a, b, rcond=None)
    return sol


def least_squares_fix(network: Network, est: DistanceEstimate) -> np.ndarray:
    """Initial DV-Hop position for every unknown, as a flat candidate vector.

    Unknowns with fewer than three usable anchors, or with degenerate anchor
    geometry, fall back to the centroid of the anchors that reach them.
    """
    anchors = network.anchors
    out = np.empty((network.unknown_count, 2))
    for k in range(network.unknown_count):
        usable = ~np.isnan(est.est_dist[:, k])
        if not usable.any():
            out[k] = network.region / 2.0
            continue
        try:
            out[k] = multilaterate(anchors[usable], est.est_dist[usable, k])
        except DegenerateGeometry:
            out[k] = anchors[usable].mean(axis=0)
    return np.clip(out, 0.0, network.region).reshape(-1)
