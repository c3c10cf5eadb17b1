"""Experiment harness: sweep fugacity and sampler, aggregate work counters, write CSV.

Replication i of every (sampler, lambda) cell is seeded with ``seed + i``,
so a configuration always yields the same CSV bytes.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .graphs import parse_graph_spec
from .hardcore.engine import DEFAULT_MAX_LETTERS, SAMPLERS, replicate

__all__ = [
    "CSV_HEADER",
    "FIGURES",
    "ExperimentConfig",
    "ResultRow",
    "run_experiment",
    "figure_config",
    "reproduce_figure",
    "format_csv",
    "write_csv",
    "load_config",
]

log = logging.getLogger(__name__)

CSV_HEADER = (
    "graph", "sampler", "lambda", "reps",
    "mean_letters", "se_letters", "mean_updates", "se_updates", "mean_tau_b", "se_tau_b",
)

# graph, samplers, lambda grid, replications at scale 1
FIGURES = {
    "fig3": ("star:100", ("gibbs", "dg", "oracle"), (1, 2, 5, 10, 20, 50, 100, 200), 1000),
    "fig4": ("star:1000", ("dg", "oracle"), (1, 2, 5, 10, 20, 50, 100, 200, 500, 1000), 100),
    "fig5": ("ba:100:1", ("gibbs", "dg", "oracle"), (1, 2, 5, 10, 20, 50, 100), 100),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep over samplers and fugacities on a single graph.

    Parameters
    ----------
    graph : str
        Graph spec such as ``star:100``, ``ba:100:1`` or ``file:path``.
    samplers : tuple of str
    lambdas : tuple of float
    reps : int
    seed : int
    swap_probability : float
    max_letters : int
        Per-replication budget; replications that exceed it are dropped
        from the row and reported on the log.
    n_jobs : int or None
    out : str or None
    """

    graph: str
    samplers: tuple = SAMPLERS
    lambdas: tuple = (1.0,)
    reps: int = 100
    seed: int = 0
    swap_probability: float = 1.0
    max_letters: int = DEFAULT_MAX_LETTERS
    n_jobs: int | None = None
    out: str | None = None

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if not self.lambdas or any(not (lam > 0 and math.isfinite(lam)) for lam in self.lambdas):
            raise ValueError("lambdas must be positive and finite")
        if not 0.0 <= self.swap_probability <= 1.0:
            raise ValueError("swap_probability must lie in [0, 1]")
        bad = [s for s in self.samplers if s not in SAMPLERS]
        if bad or not self.samplers:
            raise ValueError(f"unknown samplers {bad}; expected a subset of {SAMPLERS}")


@dataclass(frozen=True)
class ResultRow:
    graph: str
    sampler: str
    lam: float
    reps: int
    mean_letters: float
    se_letters: float
    mean_updates: float
    se_updates: float
    mean_tau_b: float
    se_tau_b: float
    failed: int = field(default=0, compare=False)

    def csv_fields(self) -> list[str]:
        nums = (self.mean_letters, self.se_letters, self.mean_updates,
                self.se_updates, self.mean_tau_b, self.se_tau_b)
        return [self.graph, self.sampler, f"{self.lam:g}", str(self.reps)] + [f"{x:.4f}" for x in nums]


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    if x.size == 0:
        return math.nan, math.nan
    se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return float(x.mean()), se


def run_experiment(config: ExperimentConfig) -> list[ResultRow]:
    """Run every (sampler, lambda) cell of `config`; rows come sampler-major."""
    graph = parse_graph_spec(config.graph, seed=config.seed)
    rows = []
    for sampler in config.samplers:
        for lam in config.lambdas:
            log.info("%s %s lambda=%g reps=%d", config.graph, sampler, lam, config.reps)
            stats, ok = replicate(
                graph, float(lam), sampler, config.reps, config.seed,
                swap_probability=config.swap_probability,
                max_letters=config.max_letters, n_jobs=config.n_jobs,
            )
            failed = int((~ok).sum())
            if failed:
                log.warning("%s %s lambda=%g: %d of %d replications exhausted the budget",
                            config.graph, sampler, lam, failed, config.reps)
            good = stats[ok].astype(float)
            ml, sl = _mean_se(good[:, 0])
            mu, su = _mean_se(good[:, 1])
            mt, st = _mean_se(good[:, 3])
            rows.append(ResultRow(config.graph, sampler, float(lam), int(ok.sum()),
                                  ml, sl, mu, su, mt, st, failed))
    return rows


def figure_config(figure: str, scale: float = 1.0, seed: int = 0, **kw) -> ExperimentConfig:
    """Configuration reproducing one of the benchmark figures.

    `scale` in (0, 1] multiplies the replication count (1000 for fig3, 100
    for fig4 and fig5).
    """
    if figure not in FIGURES:
        raise ValueError(f"unknown figure {figure!r}; expected one of {sorted(FIGURES)}")
    if not 0.0 < scale <= 1.0:
        raise ValueError("scale must lie in (0, 1]")
    graph, samplers, lambdas, reps = FIGURES[figure]
    return ExperimentConfig(graph=graph, samplers=samplers, lambdas=tuple(float(x) for x in lambdas),
                            reps=max(1, round(reps * scale)), seed=seed, **kw)


def reproduce_figure(figure: str, scale: float = 1.0, out=None, seed: int = 0, **kw) -> list[ResultRow]:
    """Run :func:`figure_config` and write the CSV to `out` when given."""
    config = figure_config(figure, scale, seed, **kw)
    rows = run_experiment(config)
    if out is not None:
        write_csv(rows, out)
    return rows


def format_csv(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow(r.csv_fields())
    return buf.getvalue()


def write_csv(rows: Sequence[ResultRow], out) -> None:
    text = format_csv(rows)
    if hasattr(out, "write"):
        out.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


_KEYS = {
    "graph": ("graph", str),
    "sampler": ("samplers", lambda s: tuple(x.strip() for x in s.split(",") if x.strip())),
    "samplers": ("samplers", lambda s: tuple(x.strip() for x in s.split(",") if x.strip())),
    "lambda": ("lambdas", lambda s: tuple(float(x) for x in s.split(",") if x.strip())),
    "lambdas": ("lambdas", lambda s: tuple(float(x) for x in s.split(",") if x.strip())),
    "reps": ("reps", int),
    "replications": ("reps", int),
    "seed": ("seed", int),
    "ps": ("swap_probability", float),
    "swap_probability": ("swap_probability", float),
    "max_letters": ("max_letters", int),
    "n_jobs": ("n_jobs", int),
    "out": ("out", str),
}


def load_config(text: str) -> ExperimentConfig:
    """Parse a flat ``key=value`` file; ``#`` starts a comment.

    Keys: graph, sampler(s), lambda(s) (comma separated), reps, seed, ps,
    max_letters, n_jobs, out.
    """
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not sep or key not in _KEYS:
            raise ValueError(f"line {lineno}: expected key=value with a known key, got {raw!r}")
        name, conv = _KEYS[key]
        try:
            values[name] = conv(val)
        except ValueError:
            raise ValueError(f"line {lineno}: bad value for {key}: {val!r}") from None
    if "graph" not in values:
        raise ValueError("config needs a graph")
    return replace(ExperimentConfig(graph=values.pop("graph")), **values)
