"""Command-line entry point: ``dwadvisor {analyze,mine,recommend,explain,genworkload}``.

Exit status is 0 on success, 1 when the advisor rejects its inputs, and 2
on flag misuse.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from .catalog import load_catalog
from .cost import workload_cost
from .errors import AdvisorError
from .generator import generate_workload
from .miner import DEFAULT_MINSUP, DEFAULT_TAU, clusters_to_csv, itemsets_to_csv
from .pipeline import configuration_from_ids, generate_candidates, parse_size, recommend
from .selector import STRATEGIES
from .workload import build_matrix, load_workload


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fraction(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    return value


def _budget(text):
    try:
        value = parse_size(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if value <= 0:
        raise argparse.ArgumentTypeError("budget must be positive")
    return value


def _inputs(p, mining=True):
    p.add_argument("--catalog", required=True, type=Path, help="catalog JSON file")
    p.add_argument("--workload", required=True, type=Path, help="SQL workload file")
    if mining:
        p.add_argument("--minsup", type=_fraction, default=DEFAULT_MINSUP,
                       help="minimum itemset support in (0, 1] (default %(default)s)")
        p.add_argument("--tau", type=_fraction, default=DEFAULT_TAU,
                       help="clustering similarity threshold in (0, 1] (default %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dwadvisor", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="print the query-attribute matrix")
    _inputs(p, mining=False)
    p.add_argument("--out-dir", type=Path)

    p = sub.add_parser("mine", help="frequent itemsets and query clusters")
    _inputs(p)
    p.add_argument("--out-dir", type=Path)

    p = sub.add_parser("recommend", help="select indexes and views under a budget")
    _inputs(p)
    p.add_argument("--budget", type=_budget, required=True, help="bytes; K/M/G suffixes accepted")
    p.add_argument("--strategy", choices=STRATEGIES, default="joint")
    p.add_argument("--alpha", type=_fraction, default=0.5,
                   help="view share of the budget for mvfirst/indfirst (default %(default)s)")
    p.add_argument("--trace", action="store_true", help="write one line per greedy round")
    p.add_argument("--out-dir", type=Path, default=Path("dwadvisor-out"))
    p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("explain", help="per-query plans under a saved configuration")
    _inputs(p)
    p.add_argument("--config", required=True, type=Path,
                   help="report.json from recommend, or {\"structures\": [ids]}")
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")

    p = sub.add_parser("genworkload", help="generate a seeded synthetic workload")
    p.add_argument("--catalog", required=True, type=Path)
    p.add_argument("-n", "--count", dest="n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", type=Path, help="write here instead of stdout")
    return parser


def _cmd_analyze(args):
    catalog = load_catalog(args.catalog)
    matrix = build_matrix(load_workload(args.workload, catalog))
    text = matrix.to_csv()
    if args.out_dir:
        write_atomic(args.out_dir / "matrix.csv", text)
    sys.stdout.write(text)


def _cmd_mine(args):
    catalog = load_catalog(args.catalog)
    workload = load_workload(args.workload, catalog)
    cands = generate_candidates(workload, catalog, args.minsup, args.tau)
    itemsets = itemsets_to_csv(cands.itemsets)
    clusters = clusters_to_csv(cands.clusters)
    if args.out_dir:
        write_atomic(args.out_dir / "itemsets.csv", itemsets)
        write_atomic(args.out_dir / "clusters.csv", clusters)
    sys.stdout.write(itemsets + "\n" + clusters)


def _cmd_recommend(args):
    catalog = load_catalog(args.catalog)
    workload = load_workload(args.workload, catalog)
    rec = recommend(workload, catalog, args.budget, strategy=args.strategy, alpha=args.alpha,
                    minsup=args.minsup, tau=args.tau)
    out = args.out_dir
    write_atomic(out / "report.json", rec.to_json())
    write_atomic(out / "report.txt", rec.to_text())
    write_atomic(out / "recommendation.sql", "".join(d + "\n" for d in rec.ddl))
    if args.trace:
        write_atomic(out / "trace.txt", "".join(f"{r}\n" for r in rec.trace))
    sys.stdout.write(rec.to_json() if args.format == "json" else rec.to_text())


def _cmd_explain(args):
    catalog = load_catalog(args.catalog)
    workload = load_workload(args.workload, catalog)
    doc = json.loads(args.config.read_text(encoding="utf-8"))
    ids = [s["id"] if isinstance(s, dict) else s for s in doc.get("structures", [])]
    params = doc.get("parameters", {})
    minsup = params.get("minsup", args.minsup)
    tau = params.get("tau", args.tau)
    cands = generate_candidates(workload, catalog, minsup, tau)
    breakdown = workload_cost(workload, configuration_from_ids(ids, cands), catalog)
    if args.format == "csv":
        sys.stdout.write(breakdown.to_csv())
    elif args.format == "json":
        rows = [p._asdict() for p in breakdown.queries]
        sys.stdout.write(json.dumps({"queries": rows, "total": breakdown.total}, indent=2) + "\n")
    else:
        sys.stdout.write(breakdown.to_text())


def _cmd_genworkload(args):
    catalog = load_catalog(args.catalog)
    text = generate_workload(catalog, args.n, args.seed)
    if args.output:
        write_atomic(args.output, text)
    else:
        sys.stdout.write(text)


COMMANDS = {
    "analyze": _cmd_analyze,
    "mine": _cmd_mine,
    "recommend": _cmd_recommend,
    "explain": _cmd_explain,
    "genworkload": _cmd_genworkload,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "genworkload" and args.n < 1:
        parser.error("--count must be at least 1")
    try:
        COMMANDS[args.command](args)
    except (AdvisorError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
