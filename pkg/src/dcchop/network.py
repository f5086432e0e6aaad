"""Synthetic sensor networks, unit-disk connectivity and hop-count matrices.

Node ``i < anchor_count`` is an anchor; the remaining nodes are unknowns.
Hop counts are exact graph distances on the unit-disk graph, with
:data:`UNREACHABLE` marking disconnected pairs.  The sentinel is a large
positive integer so threshold tests such as ``hop < 3`` or ``hop > 1`` treat
disconnected pairs as arbitrarily far apart without special casing.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import TextIO

import numpy as np

from dcchop.errors import DimensionMismatch, GenerationFailed, InvalidConfig

UNREACHABLE = int(np.iinfo(np.int32).max)
HOP_DTYPE = np.int32
DEFAULT_REGION = 100.0
MAX_LAYOUT_ATTEMPTS = 100


class Topology(str, enum.Enum):
    RANDOM = "random"
    C_SHAPED = "c_shaped"
    O_SHAPED = "o_shaped"
    X_SHAPED = "x_shaped"

    @classmethod
    def parse(cls, value: str | Topology) -> Topology:
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {"c": "c_shaped", "cshaped": "c_shaped", "o": "o_shaped",
                   "oshaped": "o_shaped", "x": "x_shaped", "xshaped": "x_shaped"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise InvalidConfig(f"unknown topology {value!r}") from None


@dataclass(frozen=True)
class MaskParams:
    """Geometry of the irregular deployment masks.

    Distances are in meters and scale with nothing: they assume the default
    100 m square.  The C shape is the O annulus with the wedge
    ``|angle| < c_gap_half_angle`` (degrees, opening towards +x) removed.
    """

    inner_radius: float = 20.0
    outer_radius: float = 50.0
    c_gap_half_angle: float = 45.0
    x_half_width: float = 12.0


def mask_contains(topology: Topology, points: np.ndarray, region: float = DEFAULT_REGION,
                  params: MaskParams = MaskParams()) -> np.ndarray:
    """Boolean membership of ``points`` (shape ``(n, 2)``) in the topology mask."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    x, y = pts[:, 0], pts[:, 1]
    inside = (x >= 0) & (x <= region) & (y >= 0) & (y <= region)
    if topology is Topology.RANDOM:
        return inside
    if topology is Topology.X_SHAPED:
        band_main = np.abs(y - x) <= params.x_half_width
        band_anti = np.abs(y - (region - x)) <= params.x_half_width
        return inside & (band_main | band_anti)

    cx = cy = region / 2.0
    r = np.hypot(x - cx, y - cy)
    ring = inside & (r >= params.inner_radius) & (r <= params.outer_radius)
    if topology is Topology.O_SHAPED:
        return ring
    angle = np.degrees(np.arctan2(y - cy, x - cx))
    return ring & ~(np.abs(angle) < params.c_gap_half_angle)


@dataclass(frozen=True, eq=False)
class Network:
    positions: np.ndarray
    anchor_count: int
    radius: float
    region: float = DEFAULT_REGION
    topology: Topology = Topology.RANDOM
    seed: int = 0
    mask: MaskParams = field(default_factory=MaskParams)

    def __post_init__(self) -> None:
        pos = np.array(self.positions, dtype=float).reshape(-1, 2)
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "topology", Topology.parse(self.topology))
        n = len(pos)
        if not 1 <= self.anchor_count < n:
            raise InvalidConfig(f"need 1 <= anchor_count < {n}, got {self.anchor_count}")
        if not self.radius > 0:
            raise InvalidConfig(f"radius must be positive, got {self.radius}")
        if np.any(pos < 0) or np.any(pos > self.region):
            raise InvalidConfig("node positions must lie inside the deployment region")

    @property
    def size(self) -> int:
        return len(self.positions)

    @property
    def unknown_count(self) -> int:
        return self.size - self.anchor_count

    @property
    def anchors(self) -> np.ndarray:
        return self.positions[: self.anchor_count]

    @property
    def unknowns(self) -> np.ndarray:
        return self.positions[self.anchor_count:]

    @property
    def dimension(self) -> int:
        """Length of a candidate vector for this network."""
        return 2 * self.unknown_count

    def ground_truth(self) -> np.ndarray:
        """The candidate that places every unknown at its true position."""
        return self.unknowns.reshape(-1).copy()

    def compose(self, candidate: np.ndarray) -> np.ndarray:
        """Full ``(N, 2)`` position array: fixed anchors followed by candidate unknowns."""
        cand = np.asarray(candidate, dtype=float)
        if cand.shape != (self.dimension,):
            raise DimensionMismatch(
                f"candidate has shape {cand.shape}, expected ({self.dimension},)")
        return np.concatenate([self.anchors, cand.reshape(-1, 2)])

    def fingerprint(self) -> str:
        """Stable hex digest of the layout, used to check pairing across runs."""
        h = hashlib.sha256()
        h.update(f"{self.size} {self.anchor_count} {self.radius!r} {self.region!r} "
                 f"{self.topology.value}".encode())
        h.update(np.ascontiguousarray(self.positions, dtype="<f8").tobytes())
        return h.hexdigest()[:16]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return (self.anchor_count == other.anchor_count and self.radius == other.radius
                and self.region == other.region and self.topology == other.topology
                and self.seed == other.seed and np.array_equal(self.positions, other.positions))

    __hash__ = None  # type: ignore[assignment]


def _sample_mask(rng: np.random.Generator, count: int, topology: Topology, region: float,
                 params: MaskParams) -> np.ndarray:
    """Rejection-sample ``count`` points uniformly from the topology mask."""
    out = np.empty((0, 2))
    while len(out) < count:
        batch = rng.uniform(0.0, region, size=(max(4 * (count - len(out)), 64), 2))
        out = np.concatenate([out, batch[mask_contains(topology, batch, region, params)]])
    return out[:count]


def generate_topology(topology: Topology | str, total_nodes: int, anchor_count: int,
                      radius: float, seed: int, *, region: float = DEFAULT_REGION,
                      mask: MaskParams = MaskParams(),
                      max_attempts: int = MAX_LAYOUT_ATTEMPTS) -> Network:
    """Sample a layout in which every node can reach at least one anchor.

    Attempt ``k`` draws from the PCG64 stream seeded by
    ``SeedSequence(seed, spawn_key=(k,))``, so the result depends only on the
    arguments.  Raises :class:`GenerationFailed` after ``max_attempts``
    disconnected layouts.
    """
    topology = Topology.parse(topology)
    if anchor_count < 1 or total_nodes < anchor_count + 1:
        raise InvalidConfig(
            f"need total_nodes >= anchor_count + 1 >= 2, got {total_nodes=} {anchor_count=}")
    if not radius > 0:
        raise InvalidConfig(f"radius must be positive, got {radius}")
    if seed < 0:
        raise InvalidConfig("seed must be non-negative")

    for attempt in range(max_attempts):
        rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence(seed, spawn_key=(attempt,))))
        positions = _sample_mask(rng, total_nodes, topology, region, mask)
        net = Network(positions, anchor_count, float(radius), region, topology, seed, mask)
        hops = hop_matrix(build_adjacency(net))
        if np.all((hops[:anchor_count] != UNREACHABLE).any(axis=0)):
            return net
    raise GenerationFailed(
        f"no anchor-connected {topology.value} layout after {max_attempts} attempts "
        f"(N={total_nodes}, N_a={anchor_count}, R={radius}, seed={seed})")


def pairwise_distances(positions: np.ndarray) -> np.ndarray:
    diff = positions[:, None, :] - positions[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def adjacency_from_positions(positions: np.ndarray, radius: float) -> np.ndarray:
    adj = pairwise_distances(positions) <= radius
    np.fill_diagonal(adj, False)
    return adj


def build_adjacency(network: Network) -> np.ndarray:
    """Unit-disk adjacency; a pair at distance exactly ``radius`` is connected."""
    return adjacency_from_positions(network.positions, network.radius)


def hop_matrix(adjacency: np.ndarray) -> np.ndarray:
    """All-pairs minimum hop counts by breadth-first search.

    Row ``s`` is the BFS from source ``s``.  All sources advance one level
    per iteration, expanding every frontier with a single matrix product.
    """
    adj = np.asarray(adjacency, dtype=bool)
    n = len(adj)
    hops = np.full((n, n), UNREACHABLE, dtype=HOP_DTYPE)
    np.fill_diagonal(hops, 0)
    weights = adj.astype(np.float32)
    visited = np.eye(n, dtype=bool)
    frontier = visited
    level = 0
    while True:
        level += 1
        reached = (frontier.astype(np.float32) @ weights) > 0
        reached &= ~visited
        if not reached.any():
            return hops
        hops[reached] = level
        visited |= reached
        frontier = reached


def predicted_hops(candidate: np.ndarray, network: Network) -> np.ndarray:
    """Hop matrix of the layout obtained by moving unknowns to ``candidate``."""
    return hop_matrix(adjacency_from_positions(network.compose(candidate), network.radius))


# -- text serialization ----------------------------------------------------

def dump_network(network: Network, stream: TextIO) -> None:
    stream.write(f"{network.size} {network.anchor_count} {network.radius!r} "
                 f"{network.topology.value} {network.seed}\n")
    for i, (x, y) in enumerate(network.positions):
        stream.write(f"{i} {float(x)!r} {float(y)!r} {int(i < network.anchor_count)}\n")


def load_network(stream: TextIO, *, region: float = DEFAULT_REGION) -> Network:
    lines = [ln.split() for ln in stream if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise InvalidConfig("empty network file")
    try:
        n, n_a, radius, topo, seed = lines[0]
        n, n_a = int(n), int(n_a)
        rows = sorted((int(r[0]), float(r[1]), float(r[2]), int(r[3])) for r in lines[1:])
    except ValueError as exc:
        raise InvalidConfig(f"malformed network file: {exc}") from None
    if len(rows) != n or [r[0] for r in rows] != list(range(n)):
        raise InvalidConfig(f"expected node indices 0..{n - 1}")
    if [r[3] for r in rows] != [1] * n_a + [0] * (n - n_a):
        raise InvalidConfig("anchor flags must mark exactly the first N_a nodes")
    positions = np.array([(x, y) for _, x, y, _ in rows])
    return Network(positions, n_a, float(radius), region, Topology.parse(topo), int(seed))


def save_network(network: Network, path: str | Path) -> None:
    with open(path, "w") as fh:
        dump_network(network, fh)


def read_network(path: str | Path) -> Network:
    with open(path) as fh:
        return load_network(fh)
