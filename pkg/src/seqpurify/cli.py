"""Command-line entry point: ``seqpurify {synth,build-graph,attack,run,report}``.

Exit status is 0 on success, 1 for configuration errors and 2 for failures
while running.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
import time

from . import __version__
from .config import FIELDS, ConfigError, ExperimentConfig, resolve_config
from .data import InteractionDataset, write_interactions
from .graph import dumps_graph
from .runner import CSV_HEADER, build_defense_graph, load_experiment, write_outputs
from .synth import SynthParams, synthesize

log = logging.getLogger("seqpurify")

EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML/JSON config file or a run manifest")
    group = p.add_argument_group("config overrides (take precedence over --config)")
    for name, f in FIELDS.items():
        flag = "--" + name.replace("_", "-")
        if "bool" in f.type:
            group.add_argument(flag, dest=name, nargs="?", const="true", default=None)
        else:
            group.add_argument(flag, dest=name, default=None)


def _config(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {name: getattr(args, name) for name in FIELDS}
    return resolve_config(args.config, overrides)


def cmd_synth(args: argparse.Namespace) -> int:
    try:
        params = SynthParams(
            n_users=args.n_users,
            n_items=args.n_items,
            n_clusters=args.n_clusters,
            min_len=args.min_len,
            max_len=args.max_len,
            cross_cluster_noise=args.noise,
            seed=args.seed,
        )
    except ValueError as e:
        raise ConfigError(str(e)) from None
    db = synthesize(params)
    write_interactions(db, args.output)
    log.info("wrote %d users to %s", len(db), args.output)
    return 0


def cmd_build_graph(args: argparse.Namespace) -> int:
    cfg = _config(args)
    if not cfg.graph_cache:
        raise ConfigError("build-graph needs --graph-cache as its output path")
    cfg.check_paths()
    t0 = time.perf_counter()
    text = dumps_graph(build_defense_graph(cfg))
    elapsed = time.perf_counter() - t0
    with open(cfg.graph_cache, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    manifest = {
        "config": cfg.to_dict(),
        "graph_sha256": hashlib.sha256(text.encode("utf-8")).hexdigest(),
        "versions": {"seqpurify": __version__},
        "wall_clock_s": {"build_graph": round(elapsed, 4)},
    }
    with open(cfg.graph_cache + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    log.info("wrote graph to %s", cfg.graph_cache)
    return 0


def cmd_attack(args: argparse.Namespace) -> int:
    cfg = _config(args)
    cfg.check_paths()
    exp = load_experiment(cfg)
    attacked = {}
    positions = {}
    for pair in exp.pairs:
        a = exp.attack(pair)
        attacked[pair.user] = a.items
        positions[str(pair.user)] = list(a.inserted_positions)
    write_interactions(InteractionDataset(attacked), args.output)
    if args.positions:
        with open(args.positions, "w", encoding="utf-8") as fh:
            json.dump(positions, fh, indent=1, sort_keys=True)
            fh.write("\n")
    log.info("wrote %d attacked profiles to %s", len(attacked), args.output)
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _config(args)
    cfg.check_paths()
    result = load_experiment(cfg).run()
    report, manifest = write_outputs(result)
    if args.debug:
        log.info("raw defense ratios: %s", result.debug_ratios())
    log.info("wrote %s and %s", report, manifest)
    return 0


def merge_reports(paths: list[str]) -> list[list[str]]:
    rows = []
    for path in paths:
        run = os.path.splitext(os.path.basename(path))[0]
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != CSV_HEADER:
                raise ConfigError(f"{path} is not a report CSV")
            rows.extend([run] + r for r in reader)
    return rows


def format_table(rows: list[list[str]]) -> str:
    header = ["run"] + CSV_HEADER
    table = [header] + rows
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in table]
    return "\n".join(lines) + "\n"


def cmd_report(args: argparse.Namespace) -> int:
    for path in args.reports:
        if not os.path.isfile(path):
            raise ConfigError(f"report not found: {path}")
    rows = merge_reports(args.reports)
    if args.format == "table":
        text = format_table(rows)
    else:
        lines = [",".join(["run"] + CSV_HEADER)] + [",".join(r) for r in rows]
        text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seqpurify", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a clustered synthetic interaction log")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--n-users", type=int, default=500)
    p.add_argument("--n-items", type=int, default=200)
    p.add_argument("--n-clusters", type=int, default=4)
    p.add_argument("--min-len", type=int, default=6)
    p.add_argument("--max-len", type=int, default=15)
    p.add_argument("--noise", type=float, default=0.02, help="cross-cluster click probability")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("build-graph", help="build the co-occurrence graph file")
    _add_config_flags(p)
    p.set_defaults(func=cmd_build_graph)

    p = sub.add_parser("attack", help="write the attacked evaluation profiles")
    _add_config_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--positions", help="also write inserted positions as JSON")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("run", help="benign/attack/defense evaluation to CSV + manifest")
    _add_config_flags(p)
    p.add_argument("--debug", action="store_true", help="log raw defense ratios")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="merge report CSVs into one comparison table")
    p.add_argument("reports", nargs="+")
    p.add_argument("-o", "--output")
    p.add_argument("--format", choices=("csv", "table"), default="table")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
