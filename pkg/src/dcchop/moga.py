"""Elitist two-objective genetic algorithm (NSGA-II) over unknown-node coordinates.

Variation uses simulated binary crossover and polynomial mutation, both
clamped to the deployment square.  Survival keeps whole non-dominated fronts
and truncates the last admitted front by crowding distance.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from dcchop.dvhop import DistanceEstimate, least_squares_fix
from dcchop.errors import DimensionMismatch, EmptyFront, InvalidConfig
from dcchop.network import DEFAULT_REGION, Network
from dcchop.objectives import HopLossKind, LossContext, ObjectiveVector


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 20
    max_iterations: int = 500
    crossover_prob: float = 0.9
    mutation_prob: float = 0.1
    eta_c: float = 20.0
    eta_m: float = 20.0
    lower: float = 0.0
    upper: float = DEFAULT_REGION
    seed: int = 0
    # std-dev of the jitter around the DV-Hop fix; None means radius / 4
    init_jitter: float | None = None

    def __post_init__(self) -> None:
        if self.population_size < 4 or self.population_size % 2:
            raise InvalidConfig("population_size must be even and >= 4")
        if self.max_iterations < 0:
            raise InvalidConfig("max_iterations must be >= 0")
        for name in ("crossover_prob", "mutation_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise InvalidConfig(f"{name} must lie in [0, 1], got {p}")
        if self.eta_c <= 0 or self.eta_m <= 0:
            raise InvalidConfig("distribution indices must be positive")
        if not self.upper > self.lower:
            raise InvalidConfig("upper bound must exceed lower bound")


@dataclass
class GenerationLog:
    generation: int
    best_f1: float
    best_f2: float
    front_size: int
    wall_ms: float


@dataclass
class ParetoFront:
    """Mutually non-dominated (candidate, objectives) pairs.

    ``history`` holds one :class:`GenerationLog` per generation (generation 0
    is the initial population) and ``initial_objectives`` the objective
    vectors of the starting population.
    """

    candidates: list[np.ndarray]
    objectives: list[ObjectiveVector]
    history: list[GenerationLog] = field(default_factory=list)
    initial_objectives: list[ObjectiveVector] = field(default_factory=list)
    evaluations: int = 0
    objective_seconds: float = 0.0

    def __len__(self) -> int:
        return len(self.candidates)

    def __iter__(self):
        return iter(zip(self.candidates, self.objectives))


# -- sorting ---------------------------------------------------------------

def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))


def _domination_matrix(objs: np.ndarray) -> np.ndarray:
    le = (objs[:, None, :] <= objs[None, :, :]).all(axis=-1)
    lt = (objs[:, None, :] < objs[None, :, :]).any(axis=-1)
    return le & lt


def non_dominated_sort(population: Sequence[Sequence[float]]) -> list[list[int]]:
    """Partition indices into successive non-dominated fronts."""
    objs = np.asarray(population, dtype=float).reshape(len(population), -1)
    if len(objs) == 0:
        return []
    dom = _domination_matrix(objs)
    remaining = dom.sum(axis=0)
    assigned = np.zeros(len(objs), dtype=bool)
    fronts = []
    while not assigned.all():
        current = np.flatnonzero((remaining == 0) & ~assigned)
        fronts.append(current.tolist())
        assigned[current] = True
        remaining = remaining - dom[current].sum(axis=0)
    return fronts


def crowding_distance(front: Sequence[Sequence[float]]) -> np.ndarray:
    objs = np.asarray(front, dtype=float).reshape(len(front), -1)
    n, m = objs.shape
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for k in range(m):
        order = np.argsort(objs[:, k], kind="stable")
        vals = objs[order, k]
        dist[order[0]] = dist[order[-1]] = np.inf
        span = vals[-1] - vals[0]
        if span > 0:
            dist[order[1:-1]] += (vals[2:] - vals[:-2]) / span
    return dist


def hypervolume_2d(points: Iterable[Sequence[float]], reference: Sequence[float]) -> float:
    """Area dominated by ``points`` and bounded by ``reference`` (minimization)."""
    rx, ry = reference
    pts = sorted((float(a), float(b)) for a, b in points if a < rx and b < ry)
    area, best_y = 0.0, ry
    for x, y in pts:
        if y < best_y:
            area += (rx - x) * (best_y - y)
            best_y = y
    return area


# -- variation -------------------------------------------------------------

def sbx_crossover(p1: np.ndarray, p2: np.ndarray, config: GaConfig,
                  rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Simulated binary crossover on every coordinate, gated by ``crossover_prob``.

    Children are symmetric about the parents' midpoint; each coordinate's
    children are swapped with probability 1/2 so either child is unbiased.
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    if p1.shape != p2.shape:
        raise DimensionMismatch(f"parent shapes differ: {p1.shape} vs {p2.shape}")
    if rng.random() >= config.crossover_prob:
        return p1.copy(), p2.copy()
    u = rng.random(p1.shape)
    expo = 1.0 / (config.eta_c + 1.0)
    beta = np.where(u <= 0.5, (2.0 * u) ** expo, (1.0 / (2.0 * (1.0 - u))) ** expo)
    mid, half = 0.5 * (p1 + p2), 0.5 * (p1 - p2)
    c1 = mid + beta * half
    c2 = mid - beta * half
    swap = rng.random(p1.shape) < 0.5
    c1[swap], c2[swap] = c2[swap], c1[swap]
    return np.clip(c1, config.lower, config.upper), np.clip(c2, config.lower, config.upper)


def polynomial_mutation(c: np.ndarray, config: GaConfig, rng: np.random.Generator) -> np.ndarray:
    """Bounded polynomial mutation applied to each coordinate with probability ``mutation_prob``."""
    x = np.array(c, dtype=float)
    hit = rng.random(x.shape) < config.mutation_prob
    if not hit.any():
        return x
    u = rng.random(x.shape)[hit]
    lo, hi = config.lower, config.upper
    span = hi - lo
    xv = x[hit]
    d1 = (xv - lo) / span
    d2 = (hi - xv) / span
    expo = 1.0 / (config.eta_m + 1.0)
    with np.errstate(invalid="ignore"):
        low = u < 0.5
        val_lo = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1) ** (config.eta_m + 1.0)
        val_hi = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2) ** (config.eta_m + 1.0)
        dq = np.where(low, val_lo ** expo - 1.0, 1.0 - val_hi ** expo)
    x[hit] = np.clip(xv + dq * span, lo, hi)
    return x


# -- main loop -------------------------------------------------------------

def _initial_population(network: Network, est: DistanceEstimate, config: GaConfig,
                        rng: np.random.Generator) -> np.ndarray:
    size, dim = config.population_size, network.dimension
    seeded = size // 2
    fix = least_squares_fix(network, est)
    jitter = network.radius / 4.0 if config.init_jitter is None else config.init_jitter
    pop = np.empty((size, dim))
    pop[:seeded] = fix + rng.normal(0.0, jitter, size=(seeded, dim))
    pop[seeded:] = rng.uniform(config.lower, config.upper, size=(size - seeded, dim))
    return np.clip(pop, config.lower, config.upper)


def _rank_and_crowding(objs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rank = np.empty(len(objs), dtype=int)
    crowd = np.empty(len(objs))
    for r, front in enumerate(non_dominated_sort(objs)):
        rank[front] = r
        crowd[front] = crowding_distance(objs[front])
    return rank, crowd


def _tournament(rank: np.ndarray, crowd: np.ndarray, count: int,
                rng: np.random.Generator) -> np.ndarray:
    a = rng.integers(0, len(rank), size=count)
    b = rng.integers(0, len(rank), size=count)
    a_wins = (rank[a] < rank[b]) | ((rank[a] == rank[b]) & (crowd[a] >= crowd[b]))
    return np.where(a_wins, a, b)


def _survivors(objs: np.ndarray, size: int) -> np.ndarray:
    keep: list[int] = []
    for front in non_dominated_sort(objs):
        if len(keep) + len(front) <= size:
            keep.extend(front)
            if len(keep) == size:
                break
            continue
        crowd = crowding_distance(objs[front])
        order = np.argsort(-crowd, kind="stable")
        keep.extend(np.asarray(front)[order[: size - len(keep)]].tolist())
        break
    return np.asarray(keep)


def evolve(network: Network, real_hops: np.ndarray, est: DistanceEstimate,
           kind: HopLossKind | str, config: GaConfig, *,
           initial_population: np.ndarray | None = None) -> ParetoFront:
    """Minimize (distance residual, hop loss) and return the final first front.

    The run is fully determined by ``config.seed``.  Time spent inside the
    hop-loss computation is accumulated in ``ParetoFront.objective_seconds``.
    """
    kind = HopLossKind.parse(kind)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(config.seed)))
    ctx = LossContext(network, real_hops, est)
    hop_seconds = 0.0
    evaluations = 0

    def score(pop: np.ndarray) -> np.ndarray:
        nonlocal hop_seconds, evaluations
        out = np.empty((len(pop), 2))
        for i, cand in enumerate(pop):
            out[i, 0] = ctx.residual(cand)
            t0 = time.perf_counter()
            out[i, 1] = ctx.hop_loss(kind, cand)
            hop_seconds += time.perf_counter() - t0
        evaluations += len(pop)
        return out

    t_start = time.perf_counter()
    if initial_population is None:
        pop = _initial_population(network, est, config, rng)
    else:
        pop = np.clip(np.array(initial_population, dtype=float), config.lower, config.upper)
        if pop.shape != (config.population_size, network.dimension):
            raise DimensionMismatch(
                f"initial population shape {pop.shape}, expected "
                f"({config.population_size}, {network.dimension})")
    objs = score(pop)
    initial = [ObjectiveVector(*map(float, o)) for o in objs]
    history = [_log_entry(0, objs, t_start)]

    size = config.population_size
    for gen in range(1, config.max_iterations + 1):
        t_gen = time.perf_counter()
        rank, crowd = _rank_and_crowding(objs)
        parents = pop[_tournament(rank, crowd, size, rng)]
        children = np.empty_like(pop)
        for i in range(0, size, 2):
            c1, c2 = sbx_crossover(parents[i], parents[i + 1], config, rng)
            children[i] = polynomial_mutation(c1, config, rng)
            children[i + 1] = polynomial_mutation(c2, config, rng)
        child_objs = score(children)
        merged = np.concatenate([pop, children])
        merged_objs = np.concatenate([objs, child_objs])
        keep = _survivors(merged_objs, size)
        pop, objs = merged[keep], merged_objs[keep]
        history.append(_log_entry(gen, objs, t_gen))

    first = non_dominated_sort(objs)[0]
    return ParetoFront(
        candidates=[pop[i].copy() for i in first],
        objectives=[ObjectiveVector(*map(float, objs[i])) for i in first],
        history=history,
        initial_objectives=initial,
        evaluations=evaluations,
        objective_seconds=hop_seconds,
    )


def _log_entry(gen: int, objs: np.ndarray, t0: float) -> GenerationLog:
    return GenerationLog(gen, float(objs[:, 0].min()), float(objs[:, 1].min()),
                         len(non_dominated_sort(objs)[0]), (time.perf_counter() - t0) * 1e3)


def write_generation_log(history: Iterable[GenerationLog], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["generation", "best_f1", "best_f2", "front_size", "wall_ms"])
    for h in history:
        writer.writerow([h.generation, repr(h.best_f1), repr(h.best_f2), h.front_size,
                         f"{h.wall_ms:.3f}"])


def select_index(objectives: Sequence[Sequence[float]]) -> int:
    """Index minimizing the sum of min-max normalized objectives; ties go to the lowest index."""
    objs = np.asarray(objectives, dtype=float).reshape(len(objectives), -1)
    if len(objs) == 0:
        raise EmptyFront("cannot select from an empty front")
    lo, hi = objs.min(axis=0), objs.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    return int(np.argmin(((objs - lo) / span).sum(axis=1)))


def select_solution(front: ParetoFront) -> np.ndarray:
    if len(front) == 0:
        raise EmptyFront("cannot select from an empty front")
    return front.candidates[select_index(front.objectives)].copy()
