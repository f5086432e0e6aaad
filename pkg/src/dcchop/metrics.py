"""Localization error, confidence intervals and run-time decomposition."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from dcchop.errors import EmptyInput, InsufficientSamples
from dcchop.objectives import HopLossKind


@dataclass
class RunResult:
    mles: float
    per_node_errors: list[float]
    total_time: float
    objective_time: float
    generations_run: int
    kind: HopLossKind
    seed: int
    cpu_time: float = 0.0
    f1: float = math.nan
    f2: float = math.nan
    predicted: np.ndarray | None = field(default=None, repr=False)


def mles(predicted: np.ndarray, actual: np.ndarray, radius: float) -> float:
    """Mean localization error of the unknown nodes as a percentage of ``radius``."""
    pred = np.asarray(predicted, dtype=float).reshape(-1, 2)
    true = np.asarray(actual, dtype=float).reshape(-1, 2)
    if len(pred) == 0:
        raise EmptyInput("no unknown nodes to score")
    if pred.shape != true.shape:
        raise ValueError(f"position arrays differ in shape: {pred.shape} vs {true.shape}")
    if not radius > 0:
        raise ValueError("radius must be positive")
    err = np.hypot(*(pred - true).T)
    return float(100.0 * err.sum() / (len(pred) * radius))


def confidence_interval(samples: Sequence[float], level: float = 0.95) -> tuple[float, float]:
    """Student-t interval for the mean."""
    x = np.asarray(samples, dtype=float)
    if len(x) < 2:
        raise InsufficientSamples(f"need at least 2 samples, got {len(x)}")
    mean = float(x.mean())
    sem = float(x.std(ddof=1)) / math.sqrt(len(x))
    if sem == 0.0:
        return mean, mean
    half = float(stats.t.ppf(0.5 + level / 2.0, len(x) - 1)) * sem
    return mean - half, mean + half


def time_profile(run: RunResult) -> tuple[float, float, float]:
    """(total seconds, hop-loss seconds, hop-loss share of the total)."""
    share = run.objective_time / run.total_time if run.total_time > 0 else 0.0
    return run.total_time, run.objective_time, share
