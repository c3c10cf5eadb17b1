"""Ground-truth oracles for the hard-core model.

Exhaustive enumeration of independent sets, exact Gibbs distributions,
empirical frequency tables and total variation, and the birth-and-death
chain that the bounding chain induces on a star.
"""
from __future__ import annotations

import gc
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from .automaton import check_rng
from .graphs import Graph

__all__ = [
    "ENUMERATION_LIMIT",
    "EnumerationGuardError",
    "DistributionTable",
    "enumerate_independent_sets",
    "stationary_distribution",
    "empirical_distribution",
    "frequency_table",
    "indicator_table",
    "tv_distance",
    "tv_threshold",
    "BirthDeathStar",
    "birth_death_star",
    "simulate_birth_death",
]

ENUMERATION_LIMIT = 25


class EnumerationGuardError(ValueError):
    """The graph is too large for exhaustive enumeration."""


def _enumerate(graph: Graph, limit: int) -> tuple[np.ndarray, list[frozenset]]:
    n = graph.n
    if n > limit:
        raise EnumerationGuardError(f"{n} vertices exceeds the enumeration limit of {limit}")
    masks = [0] * n
    for v in range(n):
        for w in graph.neighbors[v]:
            masks[v] |= 1 << w
    found: list[int] = []
    members: list[tuple] = []

    def rec(v: int, chosen: int, blocked: int, tup: tuple):
        if v == n:
            found.append(chosen)
            members.append(tup)
            return
        rec(v + 1, chosen, blocked, tup)
        if not (blocked >> v) & 1:
            rec(v + 1, chosen | (1 << v), blocked | masks[v], tup + (v,))

    # millions of small objects: cyclic GC passes would dominate the run time
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        rec(0, 0, 0, ())
        sets = [frozenset(t) for t in members]
    finally:
        if was_enabled:
            gc.enable()
    sizes = np.fromiter((len(t) for t in members), dtype=np.int64, count=len(members))
    codes = np.array(found, dtype=np.int64)
    order = np.lexsort((codes, sizes))
    return codes[order], [sets[i] for i in order]


def enumerate_independent_sets(graph: Graph, limit: int = ENUMERATION_LIMIT) -> list[frozenset]:
    """All independent sets of `graph`, the empty set included, each once.

    Backtracking over vertices in index order; a vertex is a candidate only
    if no chosen vertex is adjacent to it (checked with neighbour bitmasks).
    Sets come out ordered by size, then by bitmask.
    """
    return _enumerate(graph, limit)[1]


@dataclass(frozen=True)
class DistributionTable:
    """Probabilities of independent sets.

    Attributes
    ----------
    probs : Mapping[frozenset, float]
    Z : float
        Partition function for exact tables, number of samples for
        empirical ones.
    """

    probs: Mapping[frozenset, float]
    Z: float = 1.0

    def __getitem__(self, s) -> float:
        return self.probs.get(frozenset(s), 0.0)

    def __len__(self):
        return len(self.probs)

    @property
    def support(self) -> frozenset:
        return frozenset(s for s, p in self.probs.items() if p > 0)

    def total(self) -> float:
        return math.fsum(self.probs.values())


def stationary_distribution(graph: Graph, fugacity=1.0) -> DistributionTable:
    """Exact law P(I) proportional to the product of lambda(v) over I."""
    lam = np.broadcast_to(np.asarray(fugacity, dtype=float), (graph.n,))
    if np.any(lam <= 0) or not np.all(np.isfinite(lam)):
        raise ValueError("fugacities must be positive and finite")
    codes, sets = _enumerate(graph, ENUMERATION_LIMIT)
    w = np.ones(codes.size)
    for v in range(graph.n):
        w[(codes >> v) & 1 == 1] *= lam[v]
    weights = w.tolist()
    # sets are ordered by size, so Z is summed in increasing |I|
    Z = math.fsum(weights)
    return DistributionTable({s: w / Z for s, w in zip(sets, weights)}, Z)


def frequency_table(samples: Iterable) -> DistributionTable:
    counts: dict[frozenset, int] = {}
    total = 0
    for s in samples:
        key = frozenset(s)
        counts[key] = counts.get(key, 0) + 1
        total += 1
    if total == 0:
        raise ValueError("no samples")
    return DistributionTable({s: c / total for s, c in counts.items()}, float(total))


def indicator_table(states) -> DistributionTable:
    """Frequency table of the rows of a 0/1 membership matrix."""
    X = np.asarray(states, dtype=bool)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("expected a non-empty (samples, vertices) matrix")
    rows, counts = np.unique(X, axis=0, return_counts=True)
    total = X.shape[0]
    return DistributionTable(
        {frozenset(np.flatnonzero(r).tolist()): c / total for r, c in zip(rows, counts)}, float(total)
    )


def empirical_distribution(sampler: Callable, reps: int, rng=None) -> DistributionTable:
    """Frequency table of `reps` calls ``sampler(rng)``."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    rng = check_rng(rng)
    return frequency_table(sampler(rng) for _ in range(reps))


def tv_distance(P, Q) -> float:
    """Half the L1 distance over the union of supports."""
    p = P.probs if isinstance(P, DistributionTable) else P
    q = Q.probs if isinstance(Q, DistributionTable) else Q
    keys = set(p) | set(q)
    return 0.5 * math.fsum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def tv_threshold(support_size: int, reps: int, floor: float = 0.02) -> float:
    """Acceptance threshold max(floor, 2 sqrt(support / reps))."""
    return max(floor, 2.0 * math.sqrt(support_size / reps))


# ------------------------------------------------------------ star chain


@dataclass(frozen=True)
class BirthDeathStar:
    """Number of leaves in D once the hub of star(n) has left D.

    State i is the number of leaves still in D. From state i the chain moves
    up with probability ``up[i]`` and down with ``down[i]`` (one step of the
    chain conditioned on moving).

    Attributes
    ----------
    n, lam
    up, down : ndarray of shape (n + 1,)
    pi : ndarray of shape (n + 1,)
        Normalized stationary law.
    hitting_time : float
        Expected number of moves to reach 0 from n.
    tau1_bound : float
        2e(n + 1), bound on the expected time until the hub leaves D.
    tau2_bound : float
        n + exp(n / lam).
    tau2_formula : float
        ((1 + lam) / lam)**n + n.
    """

    n: int
    lam: float
    up: np.ndarray
    down: np.ndarray
    pi: np.ndarray
    hitting_time: float
    tau1_bound: float
    tau2_bound: float
    tau2_formula: float

    def pi_ratio(self) -> float:
        """pi(n) / pi(0)."""
        return float(self.pi[-1] / self.pi[0])


def birth_death_star(n: int, lam: float) -> BirthDeathStar:
    """Transition probabilities, stationary law and hitting times on star(n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not lam > 0:
        raise ValueError("lam must be positive")
    i = np.arange(n + 1, dtype=float)
    denom = (n - i) + i * lam
    up = np.divide(n - i, denom, out=np.zeros(n + 1), where=denom > 0)
    down = np.divide(i * lam, denom, out=np.zeros(n + 1), where=denom > 0)
    # closed form relative to pi(0); C(n-1, -1) = 0
    rel = [1.0]
    for k in range(1, n + 1):
        rel.append(math.comb(n - 1, k - 1) * lam ** -(k - 1) + math.comb(n - 1, k) * lam**-k)
    rel_arr = np.array(rel)
    pi = rel_arr / math.fsum(rel)
    # first passage n -> 0: d_k = expected moves from k to k - 1
    d = [0.0] * (n + 1)
    d[n] = 1.0 / down[n]
    for k in range(n - 1, 0, -1):
        d[k] = (1.0 + up[k] * d[k + 1]) / down[k]
    hit = math.fsum(d[1:])
    return BirthDeathStar(
        n=n,
        lam=float(lam),
        up=up,
        down=down,
        pi=pi,
        hitting_time=hit,
        tau1_bound=2.0 * math.e * (n + 1),
        tau2_bound=n + math.exp(n / lam),
        tau2_formula=((1.0 + lam) / lam) ** n + n,
    )


def simulate_birth_death(n: int, lam: float, reps: int, rng=None) -> np.ndarray:
    """Monte Carlo hitting times of 0 from n for :func:`birth_death_star`.

    All replications advance together, one move per sweep.
    """
    bd = birth_death_star(n, lam)
    rng = check_rng(rng)
    state = np.full(reps, n, dtype=np.int64)
    steps = np.zeros(reps, dtype=np.int64)
    alive = np.arange(reps)
    while alive.size:
        s = state[alive]
        s += np.where(rng.random(alive.size) < bd.up[s], 1, -1)
        state[alive] = s
        steps[alive] += 1
        alive = alive[s > 0]
    return steps
