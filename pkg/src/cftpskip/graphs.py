"""Simple undirected graphs, the generators used in the experiments, and
edge-list file I/O.

Edge-list format::

    n <vertex-count>
    u v
    ...

with 0-based vertex ids, one edge per line, LF line endings.
"""
from __future__ import annotations

import os
from itertools import combinations
from typing import Iterable

import numpy as np

__all__ = [
    "Graph",
    "GraphFormatError",
    "star",
    "complete",
    "path",
    "cycle",
    "empty",
    "barabasi_albert",
    "gnp",
    "read_edge_list",
    "write_edge_list",
    "format_edge_list",
    "parse_edge_list",
    "parse_graph_spec",
]

MAX_VERTICES = 4096


class GraphFormatError(ValueError):
    """Malformed edge-list content or an invalid graph."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class Graph:
    """Immutable simple undirected graph on vertices ``0..n-1``.

    Parameters
    ----------
    n : int
        Number of vertices.
    edges : iterable of (int, int)
        Undirected edges. Self-loops, duplicates and out-of-range ids are
        rejected.

    Attributes
    ----------
    neighbors : tuple of frozenset
        ``neighbors[v]`` is N(v).
    indptr, indices : ndarray of int32
        CSR adjacency, consumed by the compiled kernels.
    """

    __slots__ = ("n", "neighbors", "indptr", "indices", "_edges", "_masks")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        n = int(n)
        if n < 0:
            raise GraphFormatError("vertex count must be nonnegative")
        if n > MAX_VERTICES:
            raise GraphFormatError(f"at most {MAX_VERTICES} vertices are supported, got {n}")
        adj = [set() for _ in range(n)]
        canon = []
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise GraphFormatError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise GraphFormatError(f"self-loop on vertex {u}")
            if v in adj[u]:
                raise GraphFormatError(f"duplicate edge ({u}, {v})")
            adj[u].add(v)
            adj[v].add(u)
            canon.append((min(u, v), max(u, v)))
        self.n = n
        self.neighbors = tuple(frozenset(a) for a in adj)
        self._edges = tuple(sorted(canon))
        degs = np.fromiter((len(a) for a in adj), dtype=np.int32, count=n)
        self.indptr = np.zeros(n + 1, dtype=np.int32)
        np.cumsum(degs, out=self.indptr[1:])
        self.indices = np.fromiter(
            (w for a in adj for w in sorted(a)), dtype=np.int32, count=int(degs.sum())
        )
        self._masks = None

    @classmethod
    def from_adjacency(cls, matrix) -> "Graph":
        """Build a graph from a square symmetric 0/1 adjacency matrix (dense or sparse)."""
        if hasattr(matrix, "tocoo"):
            coo = matrix.tocoo()
            n = coo.shape[0]
            if coo.shape != (n, n):
                raise GraphFormatError("adjacency matrix must be square")
            pairs = {(int(i), int(j)) for i, j, x in zip(coo.row, coo.col, coo.data) if x}
        else:
            a = np.asarray(matrix)
            if a.ndim != 2 or a.shape[0] != a.shape[1]:
                raise GraphFormatError("adjacency matrix must be square")
            n = a.shape[0]
            pairs = {(int(i), int(j)) for i, j in zip(*np.nonzero(a))}
        for i, j in pairs:
            if i == j:
                raise GraphFormatError(f"self-loop on vertex {i}")
            if (j, i) not in pairs:
                raise GraphFormatError("adjacency matrix must be symmetric")
        return cls(n, sorted((i, j) for i, j in pairs if i < j))

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    def edges(self) -> tuple[tuple[int, int], ...]:
        """Sorted edges ``(u, v)`` with ``u < v``."""
        return self._edges

    def degree(self, v: int) -> int:
        return len(self.neighbors[v])

    @property
    def max_degree(self) -> int:
        return max((len(a) for a in self.neighbors), default=0)

    @property
    def neighbor_masks(self) -> tuple[int, ...]:
        """N(v) as integer bitmasks, used by enumeration."""
        if self._masks is None:
            self._masks = tuple(sum(1 << w for w in a) for a in self.neighbors)
        return self._masks

    def is_independent(self, vertices) -> bool:
        s = set(vertices)
        return all(not (self.neighbors[v] & s) for v in s)

    def to_adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.int8)
        for u, v in self._edges:
            a[u, v] = a[v, u] = 1
        return a

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self._edges == other._edges

    def __hash__(self):
        return hash((self.n, self._edges))

    def __repr__(self):
        return f"Graph(n={self.n}, n_edges={self.n_edges})"


def star(n: int) -> Graph:
    """Star with hub 0 and leaves ``1..n`` (``n + 1`` vertices)."""
    if n < 0:
        raise ValueError("star size must be nonnegative")
    return Graph(n + 1, [(0, i) for i in range(1, n + 1)])


def complete(n: int) -> Graph:
    return Graph(n, combinations(range(n), 2))


def path(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n: int) -> Graph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def empty(n: int) -> Graph:
    return Graph(n)


def gnp(n: int, p: float, rng) -> Graph:
    """Erdos-Renyi G(n, p); handy for randomized tests."""
    rng = np.random.default_rng(rng)
    return Graph(n, [(u, v) for u, v in combinations(range(n), 2) if rng.random() < p])


def barabasi_albert(n: int, rng=None) -> Graph:
    """Preferential attachment graph grown from a 5-clique.

    Every new vertex attaches to two distinct existing vertices, each drawn
    with probability proportional to its current degree. The second endpoint
    is redrawn on collision, and degrees are updated once both edges are in.
    """
    if n < 5:
        raise ValueError(f"barabasi_albert needs n >= 5, got {n}")
    rng = np.random.default_rng(rng)
    edges = list(combinations(range(5), 2))
    # one entry per edge endpoint: a uniform pick is degree-proportional
    ends = [x for e in edges for x in e]
    for v in range(5, n):
        w1 = ends[int(rng.integers(len(ends)))]
        w2 = w1
        while w2 == w1:
            w2 = ends[int(rng.integers(len(ends)))]
        edges += [(w1, v), (w2, v)]
        ends += [w1, v, w2, v]
    return Graph(n, edges)


def format_edge_list(graph: Graph) -> str:
    lines = [f"n {graph.n}"] + [f"{u} {v}" for u, v in graph.edges()]
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> Graph:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise GraphFormatError("missing header 'n <vertex-count>'", 1)
    head = lines[0].split()
    if len(head) != 2 or head[0] != "n" or not head[1].isdigit():
        raise GraphFormatError(f"bad header {lines[0]!r}", 1)
    n = int(head[1])
    seen = set()
    edges = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise GraphFormatError(f"expected 'u v', got {line!r}", lineno)
        u, v = int(parts[0]), int(parts[1])
        if u >= n or v >= n:
            raise GraphFormatError(f"vertex id out of range for n={n}", lineno)
        if u == v:
            raise GraphFormatError(f"self-loop on vertex {u}", lineno)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphFormatError(f"duplicate edge {key}", lineno)
        seen.add(key)
        edges.append(key)
    return Graph(n, edges)


def read_edge_list(path_: str | os.PathLike) -> Graph:
    with open(path_, encoding="ascii", newline="") as fh:
        return parse_edge_list(fh.read())


def write_edge_list(graph: Graph, path_: str | os.PathLike) -> None:
    with open(path_, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_edge_list(graph))


def parse_graph_spec(spec: str, seed=None) -> Graph:
    """Build a graph from a short spec string.

    Accepted forms: ``star:n``, ``ba:n``, ``ba:n:seed``, ``complete:n``,
    ``path:n``, ``cycle:n``, ``empty:n`` and ``file:path``. ``ba:n`` without
    an explicit seed uses `seed`.
    """
    kind, _, rest = spec.partition(":")
    if kind == "file":
        if not rest:
            raise ValueError("file: spec needs a path")
        return read_edge_list(rest)
    args = rest.split(":") if rest else []
    try:
        nums = [int(a) for a in args]
    except ValueError:
        raise ValueError(f"bad graph spec {spec!r}") from None
    simple = {"star": star, "complete": complete, "path": path, "cycle": cycle, "empty": empty}
    if kind in simple and len(nums) == 1:
        return simple[kind](nums[0])
    if kind == "ba" and len(nums) in (1, 2):
        return barabasi_albert(nums[0], nums[1] if len(nums) == 2 else seed)
    raise ValueError(f"bad graph spec {spec!r}")
