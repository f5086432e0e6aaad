"""Command-line entry point: ``dcchop {sweep,summarize,plot-data,verify}``.

Exit codes: 0 success, 1 configuration error, 2 partial failure (failed
runs recorded in the results, or a failed verification check).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from dcchop import bench, verify
from dcchop.errors import InvalidConfig, MissingCells

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 1, 2

# flag dest -> (section, key) in the config mapping; section None is top level
SWEEP_FLAGS = {
    "topologies": (None, "topologies"),
    "anchor_counts": (None, "anchor_counts"),
    "radii": (None, "radii"),
    "repeats": (None, "repeats"),
    "total_nodes": (None, "total_nodes"),
    "kinds": (None, "kinds"),
    "base_seed": (None, "base_seed"),
    "workers": (None, "workers"),
    "population_size": ("ga", "population_size"),
    "max_iterations": ("ga", "max_iterations"),
    "pc": ("ga", "crossover_prob"),
    "pm": ("ga", "mutation_prob"),
    "eta_c": ("ga", "eta_c"),
    "eta_m": ("ga", "eta_m"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dcchop", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="run or resume a seeded experiment sweep")
    sw.add_argument("--config", type=Path, help="TOML file; its values take precedence over flags")
    sw.add_argument("--output-dir", type=Path, help=f"defaults to ${bench.OUTPUT_ENV} or ./results")
    sw.add_argument("--topologies", nargs="+")
    sw.add_argument("--anchor-counts", nargs="+", type=int)
    sw.add_argument("--radii", nargs="+", type=float)
    sw.add_argument("--repeats", type=int)
    sw.add_argument("--total-nodes", type=int)
    sw.add_argument("--kinds", nargs="+", choices=["base", "accc", "dcc"])
    sw.add_argument("--base-seed", type=int)
    sw.add_argument("--workers", type=int)
    sw.add_argument("--population-size", type=int)
    sw.add_argument("--max-iterations", type=int)
    sw.add_argument("--pc", type=float, help="crossover probability")
    sw.add_argument("--pm", type=float, help="per-coordinate mutation probability")
    sw.add_argument("--eta-c", type=float)
    sw.add_argument("--eta-m", type=float)
    sw.add_argument("--no-summary", action="store_true", help="skip writing summary files")

    sm = sub.add_parser("summarize", help="write summary.csv and summary.txt")
    sm.add_argument("--output-dir", type=Path)

    pd = sub.add_parser("plot-data", help="write plot-ready CSV series")
    pd.add_argument("--output-dir", type=Path)
    pd.add_argument("--kind", required=True, choices=bench.PLOT_KINDS)
    pd.add_argument("--topology", default="random")
    pd.add_argument("--anchor-count", type=int)
    pd.add_argument("--radius", type=float)
    pd.add_argument("--run", nargs=5, metavar=("TOPOLOGY", "N_A", "R", "KIND", "REPEAT"),
                    help="run selector for error_vectors")

    vf = sub.add_parser("verify", help="run the hop-loss property checks")
    vf.add_argument("--instances", type=int, default=10_000)
    vf.add_argument("--samples", type=int, default=1_000)
    return parser


def resolve_sweep_config(args: argparse.Namespace) -> bench.ExperimentConfig:
    """Merge defaults, then flags, then the config file (highest precedence)."""
    data: dict = {"ga": {}}
    for dest, (section, key) in SWEEP_FLAGS.items():
        value = getattr(args, dest, None)
        if value is not None:
            (data["ga"] if section else data)[key] = value
    output_dir = args.output_dir
    if args.config is not None:
        file_data = bench.load_config_file(args.config)
        ga_file = file_data.pop("ga", {})
        if not isinstance(ga_file, dict):
            raise InvalidConfig("[ga] must be a table")
        output_dir = file_data.pop("output_dir", output_dir)
        data.update(file_data)
        data["ga"].update(ga_file)
    data["output_dir"] = bench.resolve_output_dir(output_dir)
    return bench.ExperimentConfig.from_dict(data)


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = resolve_sweep_config(args)
    rows = bench.run_sweep(config)
    failed = [r for r in rows if r["status"] != "ok"]
    if not args.no_summary and len(failed) < len(rows):
        bench.write_summary(rows, config.output_dir)
    print(f"{len(rows)} rows in {config.output_dir / 'results.csv'} ({len(failed)} failed)")
    return EXIT_PARTIAL if failed else EXIT_OK


def _cmd_summarize(args: argparse.Namespace) -> int:
    out = bench.resolve_output_dir(args.output_dir)
    rows = bench.read_results(out)
    if not rows:
        raise InvalidConfig(f"no results found in {out}")
    bench.write_summary(rows, out)
    print((out / "summary.txt").read_text(), end="")
    return EXIT_OK


def _cmd_plot_data(args: argparse.Namespace) -> int:
    out = bench.resolve_output_dir(args.output_dir)
    rows = bench.read_results(out)
    run = None
    if args.run:
        topo, n_a, r, kind, rep = args.run
        run = (topo, int(n_a), float(r), kind, int(rep))
    path = bench.emit_plot_data(rows, args.kind, out, topology=args.topology,
                                anchor_count=args.anchor_count, radius=args.radius, run=run)
    print(path)
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    checks = verify.run_all(args.instances, args.samples)
    for c in checks:
        print(c.line())
    return EXIT_OK if all(c.passed for c in checks) else EXIT_PARTIAL


COMMANDS = {"sweep": _cmd_sweep, "summarize": _cmd_summarize,
            "plot-data": _cmd_plot_data, "verify": _cmd_verify}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (InvalidConfig, MissingCells) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
