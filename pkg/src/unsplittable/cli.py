"""Command-line front end.

Exit codes: 0 success or YES, 1 NO (``solve`` only), 2 invalid input,
3 budget or limit exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from pathlib import Path
from typing import List, Optional, Sequence

from . import __version__
from .core import (InputError, Instance, LimitExceeded, instance_from_dict, parse_instance, parse_routing,
                   serialize_instance, serialize_routing, verify_routing)
from .fpt import DEFAULT_TABLE_LIMIT as FPT_TABLE_LIMIT
from .fpt import solve_fpt
from .generators import (BinPackingInput, MccInput, gen_random, parse_colors, parse_edge_list, parse_items,
                         reduce_binpacking, reduce_mcc)
from .oracle import DEFAULT_BUDGET, OptimalResult, solve_exhaustive
from .treedecomp import auto_decomposition, compute_decomposition, read_td, to_nice, validate, write_td
from .xp import DEFAULT_TABLE_LIMIT as XP_TABLE_LIMIT
from .xp import solve_xp

log = logging.getLogger("unsplittable")

EXIT_OK, EXIT_NO, EXIT_INPUT, EXIT_LIMIT = 0, 1, 2, 3
ALGOS = ("brute", "xp", "fpt")
BENCH_COLUMNS = ("instance", "algo", "optimum", "nodes", "max_table_size", "wall_ms")


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _nice_for(instance: Instance, td_path: Optional[str]):
    graph = instance.graph
    if td_path is not None:
        td = read_td(_read(td_path))
        ok, problems = validate(graph, td)
        if not ok:
            raise InputError("decomposition is invalid: " + "; ".join(problems))
    else:
        td = auto_decomposition(graph)
    log.info("decomposition width %d", td.width)
    return to_nice(td, graph)


def solve(instance: Instance, algo: str, td_path: Optional[str] = None, budget: int = DEFAULT_BUDGET,
          table_limit: Optional[int] = None) -> OptimalResult:
    if algo == "brute":
        return solve_exhaustive(instance, budget)
    nice = _nice_for(instance, td_path)
    if algo == "xp":
        return solve_xp(instance, nice, table_limit=table_limit or XP_TABLE_LIMIT, validate_input=False)
    if algo == "fpt":
        return solve_fpt(instance, nice, table_limit=table_limit or FPT_TABLE_LIMIT, validate_input=False)
    raise InputError(f"unknown algorithm {algo!r}")


def _load_instance(args) -> Instance:
    instance = parse_instance(_read(args.instance))
    if getattr(args, "max_len", None) is not None:
        instance = instance.with_max_route_length(args.max_len)
    return instance


def cmd_solve(args) -> int:
    instance = _load_instance(args)
    result = solve(instance, args.algo, args.td, args.budget, args.table_limit)
    if args.witness:
        _write(args.witness, serialize_routing(result.witness))
    decision = "yes" if result.decision else "no"
    if args.json:
        doc = {"profit": result.optimum, "decision": decision, "target": instance.target,
               "algo": args.algo, "stats": {k: v for k, v in result.stats.items() if k != "violations"}}
        sys.stdout.write(json.dumps(doc, sort_keys=True) + "\n")
    else:
        print(f"profit={result.optimum} decision={decision}")
    return EXIT_OK if result.decision else EXIT_NO


def cmd_verify(args) -> int:
    instance = _load_instance(args)
    report = verify_routing(instance, parse_routing(_read(args.routing)))
    if args.json:
        sys.stdout.write(json.dumps(report.to_dict(), sort_keys=True) + "\n")
    else:
        print(f"valid={'true' if report.valid else 'false'} profit={report.profit}")
        for v in report.violations:
            where = f" task={v.task}" if v.task is not None else ""
            where += f" edge={v.edge[0]}-{v.edge[1]}" if v.edge is not None else ""
            print(f"violation {v.kind}{where}: {v.detail}")
    return EXIT_OK if report.valid else EXIT_INPUT


def cmd_decompose(args) -> int:
    instance = parse_instance(_read(args.instance))
    graph = instance.graph
    if args.mode == "auto":
        td = auto_decomposition(graph)
    else:
        td = compute_decomposition(graph, args.mode)
    log.info("decomposition width %d", td.width)
    if args.nice:
        td = to_nice(td, graph)
    _write(args.out, write_td(td, graph.vertex_count))
    return EXIT_OK


def cmd_generate(args) -> int:
    if args.kind == "random":
        instance = gen_random(args.n, args.max_degree, args.max_capacity, args.tasks,
                              tuple(args.demand), tuple(args.profit), args.max_len, args.seed,
                              args.edge_probability)
    elif args.kind == "mcc":
        colors = parse_colors(_read(args.colors))
        edges = parse_edge_list(_read(args.edges))
        instance = reduce_mcc(MccInput(len(colors), edges, colors, args.k), drop_zero=args.drop_zero)
    else:
        items = parse_items(_read(args.items))
        instance = reduce_binpacking(BinPackingInput(args.bins, args.capacity, items))
    _write(args.out, serialize_instance(instance))
    return EXIT_OK


def _suite_instances(doc: dict, base: Path) -> List[tuple]:
    out = []
    for i, entry in enumerate(doc.get("instances", [])):
        if "file" in entry:
            inst = parse_instance(_read(str(base / entry["file"])))
            name = entry.get("name", entry["file"])
        elif "random" in entry:
            p = dict(entry["random"])
            seeds = p.pop("seeds", [p.pop("seed", 0)])
            params = {k: tuple(v) if isinstance(v, list) else v for k, v in p.items()}
            for seed in seeds:
                try:
                    inst = gen_random(seed=seed, **params)
                except TypeError as exc:
                    raise InputError(f"suite entry {i}: {exc}") from exc
                out.append((f"{entry.get('name', f'random{i}')}-{seed}", inst))
            continue
        elif "instance" in entry:
            inst = instance_from_dict(entry["instance"])
            name = entry.get("name", f"inline{i}")
        else:
            raise InputError(f"suite entry {i} has no file, random, or instance field")
        if "max_route_length" in entry:
            inst = inst.with_max_route_length(int(entry["max_route_length"]))
        out.append((name, inst))
    return out


def cmd_bench(args) -> int:
    doc = json.loads(_read(args.suite))
    if not isinstance(doc, dict):
        raise InputError("suite must be a JSON object")
    algos = doc.get("algos", list(ALGOS))
    for a in algos:
        if a not in ALGOS:
            raise InputError(f"unknown algorithm {a!r} in suite")
    instances = sorted(_suite_instances(doc, Path(args.suite).parent), key=lambda x: x[0])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BENCH_COLUMNS)
    limited = False
    for name, inst in instances:
        for algo in algos:
            start = time.perf_counter()
            try:
                r = solve(inst, algo, None, args.budget, args.table_limit)
                row = [r.optimum, r.stats.get("nodes", ""), r.stats.get("max_table_size", "")]
            except LimitExceeded as exc:
                log.warning("%s/%s: %s", name, algo, exc)
                limited = True
                row = ["limit", "", ""]
            wall = (time.perf_counter() - start) * 1000
            writer.writerow([name, algo, *row, f"{wall:.1f}"])
    _write(args.out, buf.getvalue())
    return EXIT_LIMIT if limited and args.strict else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="unsplittable", description="Exact Unsplittable Flow solvers.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="compute an optimal routing")
    s.add_argument("--algo", choices=ALGOS, required=True)
    s.add_argument("--instance", required=True)
    s.add_argument("--td", help="PACE .td decomposition to use instead of computing one")
    s.add_argument("--witness", help="write the optimal routing here")
    s.add_argument("--json", action="store_true")
    s.add_argument("--max-len", type=int, help="override the route length bound")
    s.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="search-space cap for brute")
    s.add_argument("--table-limit", type=int, help="DP table size cap")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check a routing against an instance")
    v.add_argument("--instance", required=True)
    v.add_argument("--routing", required=True)
    v.add_argument("--max-len", type=int)
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("decompose", help="emit a tree decomposition in PACE .td format")
    d.add_argument("--instance", required=True)
    d.add_argument("--nice", action="store_true")
    d.add_argument("--mode", choices=("auto", "heuristic", "exact_small"), default="auto")
    d.add_argument("--out")
    d.set_defaults(func=cmd_decompose)

    g = sub.add_parser("generate", help="emit an instance")
    g.add_argument("--out")
    gs = g.add_subparsers(dest="kind", required=True)
    r = gs.add_parser("random")
    r.add_argument("--n", type=int, required=True)
    r.add_argument("--max-degree", type=int, default=3)
    r.add_argument("--max-capacity", type=int, default=3)
    r.add_argument("--tasks", type=int, default=5)
    r.add_argument("--demand", type=int, nargs=2, default=(1, 3), metavar=("LO", "HI"))
    r.add_argument("--profit", type=int, nargs=2, default=(1, 9), metavar=("LO", "HI"))
    r.add_argument("--max-len", type=int)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--edge-probability", type=float, default=0.5)
    r.add_argument("--out", default=argparse.SUPPRESS)
    m = gs.add_parser("mcc")
    m.add_argument("--colors", required=True, help="one class id per vertex line")
    m.add_argument("--edges", required=True, help="one 'u v' pair per line")
    m.add_argument("--k", type=int, help="number of classes if some are empty")
    m.add_argument("--drop-zero", action="store_true")
    m.add_argument("--out", default=argparse.SUPPRESS)
    b = gs.add_parser("binpack")
    b.add_argument("--bins", type=int, required=True)
    b.add_argument("--capacity", type=int, required=True)
    b.add_argument("--items", required=True, help="file with space-separated sizes")
    b.add_argument("--out", default=argparse.SUPPRESS)
    g.set_defaults(func=cmd_generate)

    be = sub.add_parser("bench", help="run a declared sweep and emit CSV")
    be.add_argument("--suite", required=True)
    be.add_argument("--out")
    be.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    be.add_argument("--table-limit", type=int)
    be.add_argument("--strict", action="store_true", help="exit 3 if any run hit a limit")
    be.set_defaults(func=cmd_bench)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(message)s"))
    log.handlers[:] = [handler]
    log.propagate = False
    log.setLevel(logging.DEBUG if args.verbose else logging.INFO)
    try:
        return args.func(args)
    except LimitExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except (InputError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


run = main

if __name__ == "__main__":
    sys.exit(main())
