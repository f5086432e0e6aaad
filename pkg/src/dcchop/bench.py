"""Seeded experiment sweeps over topology x anchor count x radius x hop-loss kind.

Output directory layout::

    manifest.json          resolved configuration (JSON), written first
    results.csv            one row per (topology, N_a, R, kind, repeat), append-only
    vectors/<run>.csv      real and predicted position of every unknown node
    summary.csv, summary.txt, plot_*.csv

Every kind in a given (cell, repeat) sees the same network and the same GA
seed, so cross-kind comparisons are paired.  Re-running a sweep skips rows
already present in ``results.csv``.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Sequence

import numpy as np

from dcchop.dvhop import avg_hop_distance, estimate_distances
from dcchop.errors import InvalidConfig, MissingCells
from dcchop.metrics import confidence_interval, mles
from dcchop.moga import GaConfig, evolve, select_index
from dcchop.network import Network, Topology, build_adjacency, generate_topology, hop_matrix
from dcchop.objectives import HopLossKind

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger(__name__)

OUTPUT_ENV = "DCCHOP_OUTPUT_DIR"

RESULT_FIELDS = [
    "topology", "anchor_count", "radius", "kind", "repeat", "seed", "network_hash",
    "mles", "f1", "f2", "front_size", "generations", "evaluations",
    "total_time", "objective_time", "cpu_time", "status", "error",
]
TIMING_FIELDS = ("total_time", "objective_time", "cpu_time")
SUMMARY_FIELDS = [
    "topology", "anchor_count", "radius", "kind", "runs", "mles_mean", "mles_ci_low",
    "mles_ci_high", "total_time_mean", "objective_time_mean",
]
PLOT_KINDS = ("ci_bars", "timing_curves", "error_vectors")


@dataclass
class ExperimentConfig:
    topologies: list[Topology] = field(default_factory=lambda: [Topology.RANDOM])
    anchor_counts: list[int] = field(default_factory=lambda: [5, 10, 15, 20, 25, 30])
    radii: list[float] = field(default_factory=lambda: [25.0, 30.0, 35.0, 40.0])
    repeats: int = 50
    total_nodes: int = 100
    ga: GaConfig = field(default_factory=GaConfig)
    kinds: list[HopLossKind] = field(default_factory=lambda: list(HopLossKind))
    base_seed: int = 0
    output_dir: Path = Path("results")
    workers: int = 1

    def __post_init__(self) -> None:
        self.topologies = [Topology.parse(t) for t in self.topologies]
        self.kinds = [HopLossKind.parse(k) for k in self.kinds]
        self.anchor_counts = [int(a) for a in self.anchor_counts]
        self.radii = [float(r) for r in self.radii]
        self.output_dir = Path(self.output_dir)
        for name in ("topologies", "anchor_counts", "radii", "kinds"):
            if not getattr(self, name):
                raise InvalidConfig(f"{name} must not be empty")
        if self.repeats < 1:
            raise InvalidConfig("repeats must be >= 1")
        if any(a < 1 or a >= self.total_nodes for a in self.anchor_counts):
            raise InvalidConfig("every anchor count must lie in [1, total_nodes)")
        if any(r <= 0 for r in self.radii):
            raise InvalidConfig("radii must be positive")
        if self.workers < 1:
            raise InvalidConfig("workers must be >= 1")

    def to_dict(self) -> dict[str, Any]:
        return {
            "topologies": [t.value for t in self.topologies],
            "anchor_counts": self.anchor_counts,
            "radii": self.radii,
            "repeats": self.repeats,
            "total_nodes": self.total_nodes,
            "kinds": [k.value for k in self.kinds],
            "base_seed": self.base_seed,
            "ga": {k: v for k, v in dataclasses.asdict(self.ga).items() if k != "seed"},
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any], **overrides: Any) -> ExperimentConfig:
        data = {**data, **overrides}
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidConfig(f"unknown config keys: {sorted(unknown)}")
        ga = data.get("ga", {})
        if isinstance(ga, dict):
            ga_known = {f.name for f in dataclasses.fields(GaConfig)}
            bad = set(ga) - ga_known
            if bad:
                raise InvalidConfig(f"unknown ga keys: {sorted(bad)}")
            data["ga"] = GaConfig(**ga)
        try:
            return cls(**data)
        except TypeError as exc:
            raise InvalidConfig(str(exc)) from None


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read a TOML config; top-level keys mirror :class:`ExperimentConfig`, plus a ``[ga]`` table."""
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}") from None


def derive_seed(base_seed: int, topology: Topology | str, anchor_count: int, radius: float,
                repeat: int) -> int:
    """Stable 63-bit seed for one (cell, repeat); the hop-loss kind is deliberately excluded."""
    key = f"{base_seed}|{Topology.parse(topology).value}|{int(anchor_count)}|{float(radius)!r}|{int(repeat)}"
    return int.from_bytes(hashlib.blake2b(key.encode(), digest_size=8).digest(), "big") >> 1


def run_key(row: dict[str, Any]) -> tuple[str, int, float, str, int]:
    return (str(row["topology"]), int(row["anchor_count"]), float(row["radius"]),
            str(row["kind"]), int(row["repeat"]))


def vector_filename(topology: str, anchor_count: int, radius: float, kind: str, repeat: int) -> str:
    return f"{topology}_na{anchor_count}_r{float(radius):g}_{kind}_rep{repeat}.csv"


@dataclass(frozen=True)
class Task:
    topology: Topology
    anchor_count: int
    radius: float
    repeat: int
    kinds: tuple[HopLossKind, ...]
    total_nodes: int
    ga: GaConfig
    base_seed: int


def _error_row(task: Task, kind: HopLossKind, seed: int, net_hash: str, exc: Exception) -> dict:
    row = {f: "" for f in RESULT_FIELDS}
    row.update(topology=task.topology.value, anchor_count=task.anchor_count, radius=task.radius,
               kind=kind.value, repeat=task.repeat, seed=seed, network_hash=net_hash,
               status="error", error=f"{type(exc).__name__}: {exc}".replace("\n", " "))
    return row


def run_task(task: Task) -> list[tuple[dict[str, Any], np.ndarray | None, Network | None]]:
    """Generate the (cell, repeat) network once and optimize it with every requested kind."""
    seed = derive_seed(task.base_seed, task.topology, task.anchor_count, task.radius, task.repeat)
    try:
        net = generate_topology(task.topology, task.total_nodes, task.anchor_count, task.radius, seed)
        hops = hop_matrix(build_adjacency(net))
        est = estimate_distances(avg_hop_distance(net, hops), hops, net)
    except Exception as exc:  # recorded per row; the sweep continues
        log.warning("network generation failed for %s: %s", task, exc)
        return [(_error_row(task, k, seed, "", exc), None, None) for k in task.kinds]

    out = []
    ga = dataclasses.replace(task.ga, seed=seed)
    for kind in task.kinds:
        try:
            wall0, cpu0 = time.perf_counter(), time.process_time()
            front = evolve(net, hops, est, kind, ga)
            best = select_index(front.objectives)
            pred = front.candidates[best]
            total = time.perf_counter() - wall0
            cpu = time.process_time() - cpu0
            row = {
                "topology": task.topology.value, "anchor_count": task.anchor_count,
                "radius": task.radius, "kind": kind.value, "repeat": task.repeat, "seed": seed,
                "network_hash": net.fingerprint(),
                "mles": mles(pred, net.unknowns, net.radius),
                "f1": front.objectives[best].f1, "f2": front.objectives[best].f2,
                "front_size": len(front), "generations": len(front.history) - 1,
                "evaluations": front.evaluations, "total_time": total,
                "objective_time": front.objective_seconds, "cpu_time": cpu,
                "status": "ok", "error": "",
            }
            out.append((row, pred, net))
        except Exception as exc:
            log.warning("run failed for %s / %s: %s", task, kind.value, exc)
            out.append((_error_row(task, kind, seed, net.fingerprint(), exc), None, None))
    return out


def _format(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def read_results(path: str | Path) -> list[dict[str, Any]]:
    """Load ``results.csv`` with numeric columns converted."""
    path = Path(path)
    if path.is_dir():
        path = path / "results.csv"
    if not path.exists():
        return []
    ints = {"anchor_count", "repeat", "seed", "front_size", "generations", "evaluations"}
    floats = {"radius", "mles", "f1", "f2", *TIMING_FIELDS}
    rows = []
    with open(path, newline="") as fh:
        for raw in csv.DictReader(fh):
            row: dict[str, Any] = dict(raw)
            for k in ints:
                row[k] = int(raw[k]) if raw.get(k) not in ("", None) else None
            for k in floats:
                row[k] = float(raw[k]) if raw.get(k) not in ("", None) else float("nan")
            rows.append(row)
    return rows


def _plan(config: ExperimentConfig, done: set) -> list[Task]:
    tasks = []
    for topo in config.topologies:
        for n_a in config.anchor_counts:
            for radius in config.radii:
                for rep in range(config.repeats):
                    kinds = tuple(k for k in config.kinds
                                  if (topo.value, n_a, radius, k.value, rep) not in done)
                    if kinds:
                        tasks.append(Task(topo, n_a, radius, rep, kinds, config.total_nodes,
                                          config.ga, config.base_seed))
    return tasks


def _check_manifest(config: ExperimentConfig, out: Path) -> None:
    manifest = out / "manifest.json"
    resolved = config.to_dict()
    if manifest.exists():
        previous = json.loads(manifest.read_text())
        if previous.get("config") != json.loads(json.dumps(resolved)):
            raise InvalidConfig(f"{out} holds results for a different configuration")
        return
    manifest.write_text(json.dumps({
        "format": "dcchop-results/1",
        "columns": RESULT_FIELDS,
        "config": resolved,
    }, indent=2, sort_keys=True) + "\n")


def run_sweep(config: ExperimentConfig) -> list[dict[str, Any]]:
    """Run (or resume) the sweep and return every row of ``results.csv``."""
    out = Path(config.output_dir)
    try:
        (out / "vectors").mkdir(parents=True, exist_ok=True)
        _check_manifest(config, out)
        results = out / "results.csv"
        done = {run_key(r) for r in read_results(results)}
        tasks = _plan(config, done)
        fresh = not results.exists()
        fh = open(results, "a", newline="")
    except OSError as exc:
        raise OSError(f"cannot write results under {out}: {exc}") from exc

    with fh:
        writer = csv.DictWriter(fh, fieldnames=RESULT_FIELDS, lineterminator="\n")
        if fresh:
            writer.writeheader()
        for outcome in _execute(tasks, config.workers):
            for row, pred, net in outcome:
                writer.writerow({k: _format(row[k]) for k in RESULT_FIELDS})
                if pred is not None:
                    _write_vectors(out / "vectors" / vector_filename(
                        row["topology"], row["anchor_count"], row["radius"], row["kind"],
                        row["repeat"]), net, pred)
            fh.flush()
    return read_results(results)


def _execute(tasks: list[Task], workers: int) -> Iterator[list]:
    if workers == 1 or len(tasks) <= 1:
        yield from map(run_task, tasks)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(run_task, tasks)


def _write_vectors(path: Path, net: Network, pred: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node", "x_real", "y_real", "x_pred", "y_pred"])
        for k, ((xr, yr), (xp, yp)) in enumerate(zip(net.unknowns, pred.reshape(-1, 2))):
            w.writerow([net.anchor_count + k, repr(float(xr)), repr(float(yr)),
                        repr(float(xp)), repr(float(yp))])


def record_digest(path: str | Path) -> str:
    """SHA-256 of ``results.csv`` with the timing columns dropped."""
    path = Path(path)
    if path.is_dir():
        path = path / "results.csv"
    h = hashlib.sha256()
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            h.update("|".join(row[k] for k in RESULT_FIELDS if k not in TIMING_FIELDS).encode())
            h.update(b"\n")
    return h.hexdigest()


# -- summaries ------------------------------------------------------------

def _cells(rows: Iterable[dict[str, Any]]) -> dict[tuple, list[dict[str, Any]]]:
    cells: dict[tuple, list[dict[str, Any]]] = {}
    for r in rows:
        if r.get("status", "ok") != "ok":
            continue
        key = (r["topology"], int(r["anchor_count"]), float(r["radius"]), r["kind"])
        cells.setdefault(key, []).append(r)
    return cells


def _kind_order(kind: str) -> int:
    order = [k.value for k in HopLossKind]
    return order.index(kind) if kind in order else len(order)


def summarize(record: Sequence[dict[str, Any]]) -> list[dict[str, Any]]:
    """Mean MLEs with a 95% t-interval and mean timings per (topology, N_a, R, kind)."""
    summary = []
    for key, rows in sorted(_cells(record).items(), key=lambda kv: (*kv[0][:3], _kind_order(kv[0][3]))):
        vals = [r["mles"] for r in rows]
        mean = float(np.mean(vals))
        lo, hi = confidence_interval(vals) if len(vals) > 1 else (float("nan"), float("nan"))
        topo, n_a, radius, kind = key
        summary.append({
            "topology": topo, "anchor_count": n_a, "radius": radius, "kind": kind,
            "runs": len(vals), "mles_mean": mean, "mles_ci_low": lo, "mles_ci_high": hi,
            "total_time_mean": float(np.mean([r["total_time"] for r in rows])),
            "objective_time_mean": float(np.mean([r["objective_time"] for r in rows])),
        })
    return summary


def format_summary_table(summary: Sequence[dict[str, Any]]) -> str:
    """Mean MLEs (%) laid out with one row per kind and one column per radius, per N_a block."""
    lines = []
    by_topo: dict[str, list[dict]] = {}
    for s in summary:
        by_topo.setdefault(s["topology"], []).append(s)
    for topo, entries in by_topo.items():
        radii = sorted({e["radius"] for e in entries})
        kinds = sorted({e["kind"] for e in entries}, key=_kind_order)
        lookup = {(e["anchor_count"], e["radius"], e["kind"]): e for e in entries}
        lines.append(f"MLEs (%) -- {topo} topology")
        for n_a in sorted({e["anchor_count"] for e in entries}):
            header = f"{'N_a = ' + str(n_a):<12}" + "".join(f"{'R=' + format(r, 'g'):>10}" for r in radii)
            lines.append(header)
            lines.append("-" * len(header))
            for kind in kinds:
                cells = []
                for r in radii:
                    e = lookup.get((n_a, r, kind))
                    cells.append(f"{e['mles_mean']:>10.2f}" if e else f"{'-':>10}")
                lines.append(f"{kind.upper():<12}" + "".join(cells))
            lines.append("")
    return "\n".join(lines)


def write_summary(record: Sequence[dict[str, Any]], out_dir: str | Path) -> list[dict[str, Any]]:
    out = Path(out_dir)
    summary = summarize(record)
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_FIELDS, lineterminator="\n")
        w.writeheader()
        for s in summary:
            w.writerow({k: _format(s[k]) for k in SUMMARY_FIELDS})
    (out / "summary.txt").write_text(format_summary_table(summary) + "\n")
    return summary


# -- plot-ready data ------------------------------------------------------

def emit_plot_data(record: Sequence[dict[str, Any]], kind: str, out_dir: str | Path, *,
                   topology: str = "random", anchor_count: int | None = None,
                   radius: float | None = None, run: tuple | None = None) -> Path:
    """Write one ``plot_<kind>.csv`` and return its path.

    ``ci_bars``       one (mean, low, high) MLEs triple per cell and hop-loss kind
    ``timing_curves`` mean wall-clock per hop-loss kind; x is R when
                      ``anchor_count`` is fixed, N_a when ``radius`` is fixed
    ``error_vectors`` per-unknown real and predicted positions for ``run``,
                      a (topology, N_a, R, kind, repeat) tuple
    """
    if kind not in PLOT_KINDS:
        raise InvalidConfig(f"plot kind must be one of {PLOT_KINDS}, got {kind!r}")
    out = Path(out_dir)
    target = out / f"plot_{kind}.csv"

    if kind == "error_vectors":
        if run is None:
            raise InvalidConfig("error_vectors needs a run: (topology, N_a, R, kind, repeat)")
        topo, n_a, r, k, rep = run
        src = out / "vectors" / vector_filename(Topology.parse(topo).value, int(n_a), float(r),
                                                HopLossKind.parse(k).value, int(rep))
        if not src.exists():
            raise MissingCells(f"no stored positions for run {run}")
        with open(src, newline="") as fh, open(target, "w", newline="") as dst:
            rows = list(csv.DictReader(fh))
            w = csv.writer(dst, lineterminator="\n")
            w.writerow(["x_real", "y_real", "x_pred", "y_pred"])
            for row in rows:
                w.writerow([row["x_real"], row["y_real"], row["x_pred"], row["y_pred"]])
        return target

    summary = [s for s in summarize(record) if s["topology"] == Topology.parse(topology).value]
    if kind == "ci_bars":
        if anchor_count is not None:
            summary = [s for s in summary if s["anchor_count"] == anchor_count]
        if radius is not None:
            summary = [s for s in summary if s["radius"] == float(radius)]
        if not summary:
            raise MissingCells("no cells match the requested ci_bars selection")
        header = ["series", "topology", "anchor_count", "radius", "x", "y", "y_low", "y_high"]
        rows = [[s["kind"], s["topology"], s["anchor_count"], s["radius"], f"{s['anchor_count']}/{s['radius']:g}",
                 s["mles_mean"], s["mles_ci_low"], s["mles_ci_high"]] for s in summary]
    else:
        if anchor_count is not None and radius is not None:
            raise InvalidConfig("timing_curves: fix exactly one of anchor_count or radius")
        if anchor_count is None and radius is None:
            anchor_count = 20
        if anchor_count is not None:
            picked = [s for s in summary if s["anchor_count"] == anchor_count]
            xkey = "radius"
        else:
            picked = [s for s in summary if s["radius"] == float(radius)]
            xkey = "anchor_count"
        if not picked:
            raise MissingCells("no cells match the requested timing_curves selection")
        cells = _cells(r for r in record if r["topology"] == Topology.parse(topology).value)
        header = ["series", "x", "y", "y_low", "y_high"]
        rows = []
        for s in sorted(picked, key=lambda s: (_kind_order(s["kind"]), s[xkey])):
            times = [r["total_time"] for r in cells[(s["topology"], s["anchor_count"], s["radius"], s["kind"])]]
            lo, hi = confidence_interval(times) if len(times) > 1 else (float("nan"), float("nan"))
            rows.append([s["kind"], s[xkey], float(np.mean(times)), lo, hi])

    with open(target, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_format(v) for v in row])
    return target


def resolve_output_dir(explicit: str | Path | None) -> Path:
    if explicit:
        return Path(explicit)
    return Path(os.environ.get(OUTPUT_ENV, "results"))
