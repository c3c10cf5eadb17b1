"""Hard-core model on a graph: Gibbs and Dyer-Greenhill dynamics, the
<B, D> bounding chain and the active-event bookkeeping.

States are frozensets of vertices. A bound ``<B, D>`` stands for every
independent set I with B <= I <= B | D; C is the rest of the vertices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..automaton import SHARP, DomainError, MarkovAutomaton, UnsupportedDomainError
from ..graphs import Graph
from ..skipping import StuckChainError
from . import _kernels as K

__all__ = [
    "Remove",
    "Add",
    "AddSwap",
    "Fugacities",
    "HardcoreBound",
    "CountedBound",
    "ActiveDelta",
    "HardcoreAutomaton",
    "gibbs_apply",
    "gibbs_bound_apply",
    "dg_apply",
    "dg_bound_apply",
    "active_partition",
    "update_active",
    "draw_conditional",
]


@dataclass(frozen=True, slots=True)
class Remove:
    v: int


@dataclass(frozen=True, slots=True)
class Add:
    v: int


@dataclass(frozen=True, slots=True)
class AddSwap:
    v: int
    swap: bool


class Fugacities:
    """Per-vertex fugacities lambda(v) > 0."""

    __slots__ = ("values",)

    def __init__(self, values):
        arr = np.array(values, dtype=np.float64).reshape(-1)
        if arr.size == 0:
            raise ValueError("fugacity vector is empty")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
            raise ValueError("fugacities must be positive and finite")
        arr.setflags(write=False)
        self.values = arr

    @classmethod
    def uniform(cls, lam: float, n: int) -> "Fugacities":
        return cls(np.full(n, float(lam)))

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def is_uniform(self) -> bool:
        return bool(np.all(self.values == self.values[0]))

    def __getitem__(self, v) -> float:
        return float(self.values[v])

    def __eq__(self, other):
        return isinstance(other, Fugacities) and np.array_equal(self.values, other.values)

    def __repr__(self):
        if self.is_uniform:
            return f"Fugacities.uniform({self.values[0]!r}, {self.n})"
        return f"Fugacities({self.values.tolist()!r})"


def _as_fugacities(lam, n: int) -> Fugacities:
    if isinstance(lam, Fugacities):
        if lam.n != n:
            raise ValueError(f"expected {n} fugacities, got {lam.n}")
        return lam
    if np.ndim(lam) == 0:
        return Fugacities.uniform(float(lam), n)
    f = Fugacities(lam)
    if f.n != n:
        raise ValueError(f"expected {n} fugacities, got {f.n}")
    return f


class HardcoreBound(NamedTuple):
    """``<B, D>``: B in every set of the bound, D in some but not all."""

    B: frozenset
    D: frozenset

    def C(self, n: int) -> frozenset:
        return frozenset(range(n)) - self.B - self.D

    def n_b(self, graph: Graph, v: int) -> int:
        return len(graph.neighbors[v] & self.B)

    def n_d(self, graph: Graph, v: int) -> int:
        return len(graph.neighbors[v] & self.D)


# ---------------------------------------------------------------- dynamics


def gibbs_apply(graph: Graph, I: frozenset, letter) -> frozenset:
    if letter is SHARP:
        return I
    if isinstance(letter, Remove):
        return I - {letter.v}
    if isinstance(letter, Add):
        return I | {letter.v} if not (graph.neighbors[letter.v] & I) else I
    raise DomainError(f"{letter!r} is not a Gibbs letter")


def gibbs_bound_apply(graph: Graph, bound: HardcoreBound, letter) -> HardcoreBound:
    if letter is SHARP:
        return bound
    B, D = bound
    v = letter.v
    if isinstance(letter, Remove):
        return HardcoreBound(B - {v}, D - {v})
    if not isinstance(letter, (Add, AddSwap)):
        raise DomainError(f"{letter!r} is not a Gibbs letter")
    nb = graph.neighbors[v]
    if not (nb & B) and not (nb & D):
        return HardcoreBound(B | {v}, D - {v})
    if not (nb & B):
        # v joins D; in reachable bounds v was in C or D already
        return HardcoreBound(B - {v}, D | {v})
    return bound


def dg_apply(graph: Graph, I: frozenset, letter) -> frozenset:
    if letter is SHARP or isinstance(letter, Remove):
        return gibbs_apply(graph, I, letter)
    if not isinstance(letter, AddSwap):
        raise DomainError(f"{letter!r} is not a Dyer-Greenhill letter")
    v = letter.v
    blockers = graph.neighbors[v] & I
    if not blockers:
        return I | {v}
    if len(blockers) == 1 and letter.swap:
        return (I - blockers) | {v}
    return I


def dg_bound_apply(graph: Graph, bound: HardcoreBound, letter) -> HardcoreBound:
    if letter is SHARP or isinstance(letter, Remove):
        return gibbs_bound_apply(graph, bound, letter)
    if not isinstance(letter, AddSwap):
        raise DomainError(f"{letter!r} is not a Dyer-Greenhill letter")
    if not letter.swap:
        return gibbs_bound_apply(graph, bound, letter)
    B, D = bound
    v = letter.v
    nb = graph.neighbors[v]
    in_b = nb & B
    in_d = nb & D
    kb, kd = len(in_b), len(in_d)
    if kb == 0 and kd == 0:
        return HardcoreBound(B | {v}, D - {v})
    if kb == 0 and kd == 1:
        # whether or not the D-neighbour is present, v ends in and it ends out
        return HardcoreBound(B | {v}, D - {v} - in_d)
    if kb == 1 and kd == 0:
        return HardcoreBound((B - in_b) | {v}, D - {v})
    if kb == 0:
        return HardcoreBound(B - {v}, D | {v})
    if kb == 1:
        return HardcoreBound(B - in_b - {v}, D | in_b | {v})
    return bound


# ---------------------------------------------------------- active events


@dataclass(frozen=True)
class ActiveDelta:
    """Changes to (V_r, V_a) caused by one letter."""

    r_on: frozenset = frozenset()
    r_off: frozenset = frozenset()
    a_on: frozenset = frozenset()
    a_off: frozenset = frozenset()

    def __bool__(self):
        return bool(self.r_on or self.r_off or self.a_on or self.a_off)


class CountedBound:
    """Mutable ``<B, D>`` with per-vertex neighbour counters and activity flags.

    ``status[v]`` is 0 for C, 1 for B, 2 for D; ``nb[v] = |N(v) & B|`` and
    ``nd[v] = |N(v) & D|``. ``act[v]`` / ``act[n + v]`` flag whether removal /
    addition of v is active for the Gibbs bounding chain. Updates go through
    the compiled kernels, so this class is also how tests reach them.
    """

    def __init__(self, graph: Graph, bound: HardcoreBound | None = None):
        self.graph = graph
        n = graph.n
        self.status = np.full(n, K.IN_D, dtype=np.int8)
        self.nb = np.zeros(n, dtype=np.int32)
        self.nd = np.zeros(n, dtype=np.int32)
        self.act = np.zeros(2 * n, dtype=np.uint8)
        if bound is not None:
            self.status[:] = K.IN_C
            self.status[list(bound.B)] = K.IN_B
            self.status[list(bound.D)] = K.IN_D
        self.n_d = K.recount(graph.indptr, graph.indices, self.status, self.nb, self.nd)
        K.refresh_all_flags(self.status, self.nb, self.nd, self.act)

    def to_bound(self) -> HardcoreBound:
        s = self.status
        return HardcoreBound(
            frozenset(np.flatnonzero(s == K.IN_B).tolist()),
            frozenset(np.flatnonzero(s == K.IN_D).tolist()),
        )

    def apply(self, letter, chain: str = "gibbs") -> tuple[int, ...]:
        """Apply a letter; return the vertices whose status changed."""
        code = encode_letter(letter, self.graph.n, chain)
        if code < 0:
            return ()
        out = np.full(2, -1, dtype=np.int64)
        self.n_d += K.apply_letter(
            self.graph.indptr, self.graph.indices, self.status, self.nb, self.nd,
            code, self.graph.n, chain == "dg", out,
        )
        return tuple(int(x) for x in out if x >= 0)

    def counters_ok(self) -> bool:
        nb = np.zeros_like(self.nb)
        nd = np.zeros_like(self.nd)
        n_d = K.recount(self.graph.indptr, self.graph.indices, self.status, nb, nd)
        return bool(np.array_equal(nb, self.nb) and np.array_equal(nd, self.nd) and n_d == self.n_d)

    def partition(self) -> tuple[frozenset, frozenset]:
        n = self.graph.n
        return (
            frozenset(np.flatnonzero(self.act[:n]).tolist()),
            frozenset(np.flatnonzero(self.act[n:]).tolist()),
        )


def active_partition(graph: Graph, bound: HardcoreBound) -> tuple[frozenset, frozenset]:
    """(V_r, V_a): vertices whose removal / addition moves the Gibbs bound.

    V_r is every vertex outside C. V_a is the C-vertices with no neighbour
    in B, plus the D-vertices whose neighbours all lie in C.
    """
    return CountedBound(graph, bound).partition()


def update_active(cb: CountedBound, v: int) -> ActiveDelta:
    """Refresh the activity flags of `v` and its neighbours after `v` changed."""
    n = cb.graph.n
    before = cb.act.copy()
    touched = [v, *cb.graph.neighbors[v]]
    for w in touched:
        K.refresh_flags(cb.status, cb.nb, cb.nd, cb.act, w, n)
    r_on, r_off, a_on, a_off = set(), set(), set(), set()
    for w in touched:
        if before[w] != cb.act[w]:
            (r_on if cb.act[w] else r_off).add(w)
        if before[n + w] != cb.act[n + w]:
            (a_on if cb.act[n + w] else a_off).add(w)
    return ActiveDelta(frozenset(r_on), frozenset(r_off), frozenset(a_on), frozenset(a_off))


def draw_conditional(fugacities, V_a, V_r, q: float, rng):
    """Draw a letter from D_q restricted to SHARP and the active events.

    Add(v) for v in V_a has base weight lambda(v) / (n (lambda(v) + 1)),
    Remove(v) for v in V_r has 1 / (n (lambda(v) + 1)); these are scaled by
    1 - q and SHARP gets q, then everything is normalized.
    """
    lam = fugacities.values if isinstance(fugacities, Fugacities) else np.asarray(fugacities, float)
    n = lam.size
    V_a = sorted(V_a)
    V_r = sorted(V_r)
    wa = (1.0 - q) * lam[V_a] / (n * (lam[V_a] + 1.0)) if V_a else np.zeros(0)
    wr = (1.0 - q) / (n * (lam[V_r] + 1.0)) if V_r else np.zeros(0)
    total = q + wa.sum() + wr.sum()
    if total <= 0.0:
        raise StuckChainError("no active event and q = 0")
    while True:
        u = rng.random() * total
        if u < q:
            return SHARP
        u -= q
        sa = wa.sum()
        if u < sa:
            i = int(np.searchsorted(np.cumsum(wa), u, side="right"))
            if i < len(V_a):
                return Add(V_a[i])
            continue
        u -= sa
        i = int(np.searchsorted(np.cumsum(wr), u, side="right"))
        if i < len(V_r):
            return Remove(V_r[i])


# ----------------------------------------------------------- letter codes


def encode_letter(letter, n: int, chain: str = "gibbs") -> int:
    """Integer code used by the kernels; -1 for SHARP."""
    if letter is SHARP:
        return -1
    if isinstance(letter, Remove):
        return letter.v
    if isinstance(letter, Add):
        return n + letter.v
    if isinstance(letter, AddSwap):
        if chain != "dg":
            return n + letter.v
        return (n if letter.swap else 2 * n) + letter.v
    raise DomainError(f"unknown letter {letter!r}")


def decode_letter(code: int, n: int, chain: str = "gibbs"):
    if code < 0:
        return SHARP
    kind, v = divmod(int(code), n)
    if kind == 0:
        return Remove(v)
    if chain == "gibbs":
        return Add(v)
    return AddSwap(v, kind == 1)


# --------------------------------------------------------------- automaton


class HardcoreAutomaton(MarkovAutomaton):
    """Hard-core model on `graph` as a Markov automaton.

    Parameters
    ----------
    graph : Graph
    fugacity : float or array-like or Fugacities
        Scalar lambda or one value per vertex.
    chain : {"gibbs", "dg"}
        Glauber dynamics, or the Dyer-Greenhill variant with swaps.
    swap_probability : float
        p_s for the Dyer-Greenhill chain.
    """

    def __init__(self, graph: Graph, fugacity=1.0, chain: str = "gibbs", swap_probability: float = 1.0):
        if graph.n < 1:
            raise ValueError("graph must have at least one vertex")
        if chain not in ("gibbs", "dg"):
            raise ValueError(f"unknown chain {chain!r}")
        if not 0.0 <= swap_probability <= 1.0:
            raise ValueError("swap_probability must lie in [0, 1]")
        self.graph = graph
        self.fugacities = _as_fugacities(fugacity, graph.n)
        if chain == "dg" and not self.fugacities.is_uniform:
            raise ValueError("the Dyer-Greenhill chain needs uniform fugacities")
        self.chain = chain
        self.swap_probability = float(swap_probability)
        n = graph.n
        lam = self.fugacities.values
        weights = {}
        for v in range(n):
            weights[Remove(v)] = 1.0 / (n * (lam[v] + 1.0))
            w_add = lam[v] / (n * (lam[v] + 1.0))
            if chain == "gibbs":
                weights[Add(v)] = w_add
            else:
                weights[AddSwap(v, True)] = self.swap_probability * w_add
                weights[AddSwap(v, False)] = (1.0 - self.swap_probability) * w_add
        self._weights = {a: w for a, w in weights.items() if w > 0.0}
        self._alphabet = tuple(self._weights)

    @property
    def alphabet(self):
        return self._alphabet

    def base_weight(self, letter) -> float:
        if letter is SHARP:
            return 0.0
        try:
            return self._weights[letter]
        except KeyError:
            raise DomainError(f"letter {letter!r} is not in the alphabet") from None

    def _act(self, state, letter):
        if self.chain == "gibbs":
            return gibbs_apply(self.graph, state, letter)
        return dg_apply(self.graph, state, letter)

    def _bound_act(self, bound, letter):
        if self.chain == "gibbs":
            return gibbs_bound_apply(self.graph, bound, letter)
        return dg_bound_apply(self.graph, bound, letter)

    def top(self) -> HardcoreBound:
        return HardcoreBound(frozenset(), frozenset(range(self.graph.n)))

    def is_singleton(self, bound):
        return bound.B if not bound.D else None

    def bound_contains(self, bound, state) -> bool:
        return bound.B <= state <= (bound.B | bound.D) and self.graph.is_independent(state)

    def bound_subset(self, inner, outer) -> bool:
        return outer.B <= inner.B and (inner.B | inner.D) <= (outer.B | outer.D)

    def active_letters(self, bound) -> frozenset:
        cache = self.__dict__.setdefault("_active_cache", {})
        act = cache.get(bound)
        if act is not None:
            return act
        if self.chain != "gibbs":
            act = super().active_letters(bound)
        else:
            V_r, V_a = active_partition(self.graph, bound)
            act = frozenset([Remove(v) for v in V_r] + [Add(v) for v in V_a if Add(v) in self._weights] + [SHARP])
        if len(cache) < 1 << 16:
            cache[bound] = act
        return act

    def states(self) -> list:
        from ..verify import enumerate_independent_sets

        try:
            return enumerate_independent_sets(self.graph)
        except ValueError as exc:
            raise UnsupportedDomainError(str(exc)) from exc

    def log_weight(self, state) -> float:
        return math.fsum(math.log(self.fugacities[v]) for v in state)
