"""Fast hard-core samplers backed by the compiled kernels.

These run the same algorithms as :mod:`cftpskip.cftp` and
:mod:`cftpskip.skipping` on integer-coded letters, which is what the
benchmarks, the estimator and the command line use.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..automaton import BudgetExhausted, check_rng
from ..graphs import Graph
from ..skipping import ContractionError, EmbeddingError, StuckChainError
from . import _kernels as K
from .model import _as_fugacities

__all__ = [
    "SAMPLERS",
    "FORWARD_METHODS",
    "DEFAULT_MAX_LETTERS",
    "STAT_FIELDS",
    "SampleBatch",
    "sample",
    "forward_times",
    "replicate",
]

SAMPLERS = ("gibbs", "dg", "oracle")
FORWARD_METHODS = ("gibbs", "dg", "oracle", "incremental")
STAT_FIELDS = ("letters_drawn", "bound_updates", "doubling_rounds", "backward_time")

# caps the generating word at 400 MB for bounded CFTP
DEFAULT_MAX_LETTERS = 10**8


@dataclass
class SampleBatch:
    """Samples as a boolean membership matrix plus per-sample work counters.

    Attributes
    ----------
    states : ndarray of shape (count, n), dtype bool
    stats : ndarray of shape (count, 4), dtype int64
        Columns follow :data:`STAT_FIELDS`. For oracle CFTP ``backward_time``
        is the length of the final contracted word.
    """

    states: np.ndarray
    stats: np.ndarray

    def sets(self) -> list[frozenset]:
        return [frozenset(np.flatnonzero(row).tolist()) for row in self.states]

    def stats_dicts(self) -> list[dict]:
        return [dict(zip(STAT_FIELDS, map(int, row))) for row in self.stats]


def _raise_for(code: int, what: str, letters=None):
    if code == K.ERR_BUDGET:
        raise BudgetExhausted(f"{what} did not couple within the letter budget", letters)
    if code == K.ERR_STUCK:
        raise StuckChainError(f"{what}: no active letter left")
    if code == K.ERR_CONTRACTION:
        raise ContractionError(f"{what}: stored letter is passive for the old chain")
    if code in (K.ERR_EMBEDDING, K.ERR_SHARPS):
        raise EmbeddingError(f"{what}: round bound escaped the previous one")
    raise RuntimeError(f"{what}: kernel error {code}")


def _prepare(graph: Graph, fugacity, sampler: str, swap_probability: float):
    if not isinstance(graph, Graph):
        raise TypeError(f"expected a Graph, got {type(graph).__name__}")
    if graph.n < 1:
        raise ValueError("graph must have at least one vertex")
    if not 0.0 <= swap_probability <= 1.0:
        raise ValueError("swap_probability must lie in [0, 1]")
    fug = _as_fugacities(fugacity, graph.n)
    if sampler == "dg" and not fug.is_uniform:
        raise ValueError("the Dyer-Greenhill chain needs uniform fugacities")
    return np.array(fug.values, dtype=np.float64)


def sample(
    graph: Graph,
    fugacity=1.0,
    sampler: str = "oracle",
    count: int = 1,
    rng=None,
    swap_probability: float = 1.0,
    max_letters: int = DEFAULT_MAX_LETTERS,
    check: bool = False,
) -> SampleBatch:
    """Draw `count` exact samples of the hard-core model.

    Parameters
    ----------
    graph : Graph
    fugacity : float or array-like
        Uniform lambda or one value per vertex.
    sampler : {"gibbs", "dg", "oracle"}
        Bounded CFTP on the Gibbs or Dyer-Greenhill bounding chain, or CFTP
        with oracle skipping on the Gibbs bounding chain.
    count : int
    rng : None, int or numpy.random.Generator
    swap_probability : float
        Swap probability of the Dyer-Greenhill chain.
    max_letters : int
        Letter budget per sample.
    check : bool
        Oracle only: verify the embedding of successive rounds.

    Returns
    -------
    SampleBatch

    Raises
    ------
    BudgetExhausted
        A sample needed more than `max_letters` letters.
    """
    if sampler not in SAMPLERS:
        raise ValueError(f"unknown sampler {sampler!r}; expected one of {SAMPLERS}")
    if count < 0:
        raise ValueError("count must be non-negative")
    lam = _prepare(graph, fugacity, sampler, swap_probability)
    rng = check_rng(rng)
    states = np.zeros((count, graph.n), dtype=np.uint8)
    stats = np.zeros((count, 4), dtype=np.int64)
    method = 1 if sampler == "oracle" else 0
    err = K.sample_batch(
        method, graph.indptr, graph.indices, lam, float(swap_probability),
        sampler == "dg", rng, int(max_letters), bool(check), states, stats,
    )
    if err < 0:
        _raise_for(err, f"{sampler} CFTP", max_letters)
    return SampleBatch(states.astype(bool), stats)


def forward_times(
    graph: Graph,
    fugacity=1.0,
    method: str = "gibbs",
    reps: int = 1,
    rng=None,
    swap_probability: float = 1.0,
    max_steps: int = 10**9,
) -> np.ndarray:
    """Forward coupling times of the bounding chain started at the top.

    `method` is "gibbs" or "dg" (base distribution), "oracle" (letters drawn
    conditionally on being active) or "incremental" (incremental skipping,
    every draw counted). Entries are -1 where `max_steps` ran out.
    """
    if method not in FORWARD_METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {FORWARD_METHODS}")
    lam = _prepare(graph, fugacity, method, swap_probability)
    rng = check_rng(rng)
    steps = np.zeros(int(reps), dtype=np.int64)
    code = {"gibbs": 0, "dg": 0, "oracle": 1, "incremental": 2}[method]
    K.forward_batch(
        code, graph.indptr, graph.indices, lam, float(swap_probability),
        method == "dg", rng, int(max_steps), steps,
    )
    if np.any(steps == K.ERR_STUCK):
        raise StuckChainError(f"forward {method}: no active letter left")
    return np.where(steps < 0, -1, steps)


def _one(graph, lam, sampler, seed, swap_probability, max_letters):
    rng = np.random.default_rng(seed)
    states = np.zeros((1, graph.n), dtype=np.uint8)
    stats = np.zeros((1, 4), dtype=np.int64)
    err = K.sample_batch(
        1 if sampler == "oracle" else 0, graph.indptr, graph.indices, lam,
        float(swap_probability), sampler == "dg", rng, int(max_letters), False, states, stats,
    )
    if err < 0:
        if err != K.ERR_BUDGET:
            _raise_for(err, f"{sampler} CFTP")
        return None
    return stats[0]


def replicate(
    graph: Graph,
    fugacity,
    sampler: str,
    reps: int,
    seed: int = 0,
    swap_probability: float = 1.0,
    max_letters: int = DEFAULT_MAX_LETTERS,
    n_jobs: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Run `reps` independent CFTP samples; replication i is seeded with ``seed + i``.

    Returns
    -------
    stats : ndarray of shape (reps, 4)
        Work counters per replication (zeros where the budget ran out).
    ok : ndarray of shape (reps,), dtype bool
        False for replications that exhausted `max_letters`.
    """
    if sampler not in SAMPLERS:
        raise ValueError(f"unknown sampler {sampler!r}; expected one of {SAMPLERS}")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    lam = _prepare(graph, fugacity, sampler, swap_probability)
    seeds = [int(seed) + i for i in range(int(reps))]
    if n_jobs is None or n_jobs == 1:
        rows = [_one(graph, lam, sampler, s, swap_probability, max_letters) for s in seeds]
    else:
        from joblib import Parallel, delayed

        # kernels release the GIL, so threads scale
        rows = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_one)(graph, lam, sampler, s, swap_probability, max_letters) for s in seeds
        )
    ok = np.array([r is not None for r in rows], dtype=bool)
    stats = np.array([r if r is not None else np.zeros(4, np.int64) for r in rows], dtype=np.int64)
    return stats.reshape(int(reps), 4), ok
