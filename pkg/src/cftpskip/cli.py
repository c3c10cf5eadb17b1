"""Command line: ``cftpskip {sample,verify,bench,graph}``.

Exit status is 0 on success, 1 on a domain error (bad graph or fugacity
file, budget exhausted, graph too large to enumerate, failed verification)
and 2 on a usage error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

import numpy as np

from . import bench, graphs
from .automaton import BudgetExhausted
from .hardcore.engine import SAMPLERS, sample
from .verify import (
    ENUMERATION_LIMIT,
    EnumerationGuardError,
    indicator_table,
    stationary_distribution,
    tv_distance,
    tv_threshold,
)

__all__ = ["main", "build_parser", "read_fugacities"]


def read_fugacities(text: str, n: int) -> np.ndarray:
    """Parse ``v lambda(v)`` lines; every vertex must appear exactly once."""
    lam = np.full(n, np.nan)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'vertex fugacity'")
        try:
            v, x = int(parts[0]), float(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: expected 'vertex fugacity'") from None
        if not 0 <= v < n:
            raise ValueError(f"line {lineno}: vertex {v} out of range")
        if not np.isnan(lam[v]):
            raise ValueError(f"line {lineno}: vertex {v} listed twice")
        if not (x > 0 and np.isfinite(x)):
            raise ValueError(f"line {lineno}: fugacity must be positive and finite")
        lam[v] = x
    missing = np.flatnonzero(np.isnan(lam))
    if missing.size:
        raise ValueError(f"no fugacity for vertices {missing[:10].tolist()}")
    return lam


def _fugacity_arg(value: str, n: int):
    try:
        lam = float(value)
    except ValueError:
        with open(value, encoding="utf-8") as fh:
            return read_fugacities(fh.read(), n)
    if not (lam > 0 and np.isfinite(lam)):
        raise ValueError("--lambda must be positive and finite")
    return lam


def _format_set(row) -> str:
    ids = np.flatnonzero(row)
    return " ".join(map(str, ids.tolist())) if ids.size else "-"


def _cmd_sample(args) -> int:
    graph = graphs.parse_graph_spec(args.graph, seed=args.seed)
    lam = _fugacity_arg(args.fugacity, graph.n)
    batch = sample(graph, lam, args.sampler, args.count, np.random.default_rng(args.seed),
                   swap_probability=args.ps)
    out = sys.stdout
    for row in batch.states:
        out.write(_format_set(row) + "\n")
    if args.stats:
        for d in batch.stats_dicts():
            sys.stderr.write(json.dumps(d, sort_keys=True) + "\n")
    return 0


def _cmd_verify(args) -> int:
    graph = graphs.parse_graph_spec(args.graph, seed=args.seed)
    if graph.n > ENUMERATION_LIMIT:
        raise EnumerationGuardError(
            f"{graph.n} vertices exceeds the enumeration limit of {ENUMERATION_LIMIT}")
    lam = _fugacity_arg(args.fugacity, graph.n)
    exact = stationary_distribution(graph, lam)
    batch = sample(graph, lam, args.sampler, args.reps, np.random.default_rng(args.seed),
                   swap_probability=args.ps)
    tv = tv_distance(indicator_table(batch.states), exact)
    thr = tv_threshold(len(exact), args.reps)
    verdict = "PASS" if tv <= thr else "FAIL"
    print(f"{verdict} tv={tv:.6f} threshold={thr:.6f} support={len(exact)} reps={args.reps}")
    return 0 if verdict == "PASS" else 1


def _cmd_bench(args) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(message)s")
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            config = bench.load_config(fh.read())
        if args.seed is not None:
            config = replace(config, seed=args.seed)
        if args.jobs is not None:
            config = replace(config, n_jobs=args.jobs)
        rows = bench.run_experiment(config)
        out = args.out or config.out
    else:
        config = bench.figure_config(args.figure, args.scale, args.seed or 0, n_jobs=args.jobs)
        rows = bench.run_experiment(config)
        out = args.out
    bench.write_csv(rows, out if out else sys.stdout)
    if any(r.failed for r in rows):
        logging.getLogger(__name__).warning("some replications exhausted their budget")
    return 0


def _cmd_graph(args) -> int:
    kind = args.gen.partition(":")[0]
    if kind not in ("star", "ba"):
        raise argparse.ArgumentTypeError(f"--gen expects star:n or ba:n, got {args.gen!r}")
    graph = graphs.parse_graph_spec(args.gen, seed=args.seed)
    graphs.write_edge_list(graph, args.out)
    return 0


def _positive_int(text):
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if k < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return k


def _probability(text):
    try:
        p = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a probability, got {text!r}") from None
    if not 0.0 <= p <= 1.0:
        raise argparse.ArgumentTypeError(f"expected a probability in [0, 1], got {text!r}")
    return p


def _scale(text):
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0.0 < x <= 1.0:
        raise argparse.ArgumentTypeError(f"--scale must lie in (0, 1], got {text!r}")
    return x


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cftpskip", description="Exact sampling of weighted independent sets.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="draw exact samples")
    s.add_argument("--graph", required=True, help="star:n, ba:n[:seed], complete:n, path:n, cycle:n or file:path")
    s.add_argument("--lambda", dest="fugacity", required=True, help="fugacity, or a file of 'v lambda' lines")
    s.add_argument("--sampler", choices=SAMPLERS, default="oracle")
    s.add_argument("--ps", type=_probability, default=1.0, help="swap probability (dg)")
    s.add_argument("--count", type=_positive_int, default=1)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--stats", action="store_true", help="JSON work counters per sample on stderr")
    s.set_defaults(func=_cmd_sample)

    v = sub.add_parser("verify", help="compare samples with the exact distribution")
    v.add_argument("--graph", required=True)
    v.add_argument("--lambda", dest="fugacity", required=True)
    v.add_argument("--sampler", choices=SAMPLERS, default="oracle")
    v.add_argument("--ps", type=_probability, default=1.0)
    v.add_argument("--reps", type=_positive_int, default=100000)
    v.add_argument("--seed", type=int, default=None)
    v.set_defaults(func=_cmd_verify)

    b = sub.add_parser("bench", help="benchmark sweeps, CSV output")
    g = b.add_mutually_exclusive_group(required=True)
    g.add_argument("--figure", choices=sorted(bench.FIGURES))
    g.add_argument("--config", help="key=value experiment file")
    b.add_argument("--scale", type=_scale, default=1.0)
    b.add_argument("--out", default=None)
    b.add_argument("--seed", type=int, default=None)
    b.add_argument("--jobs", type=_positive_int, default=None, help="worker threads")
    b.set_defaults(func=_cmd_bench)

    gr = sub.add_parser("graph", help="generate a graph file")
    gr.add_argument("--gen", required=True, help="star:n or ba:n")
    gr.add_argument("--seed", type=int, default=None)
    gr.add_argument("--out", required=True)
    gr.set_defaults(func=_cmd_graph)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))
    except (ValueError, BudgetExhausted, OSError) as exc:
        print(f"cftpskip: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
