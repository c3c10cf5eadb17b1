"""Input validation helpers shared by the estimator, the bench and the CLI."""
from __future__ import annotations

import numbers

import numpy as np

from .graphs import Graph
from .hardcore.model import Fugacities

__all__ = ["check_graph", "check_fugacities", "check_probability", "check_positive_int"]


def check_graph(X) -> Graph:
    """Accept a :class:`Graph` or a square symmetric 0/1 adjacency matrix.

    Parameters
    ----------
    X : Graph, array-like of shape (n, n) or scipy sparse matrix

    Returns
    -------
    Graph

    Raises
    ------
    ValueError
        Non-square, asymmetric, self-looped or empty input.
    """
    if isinstance(X, Graph):
        graph = X
    else:
        try:
            graph = Graph.from_adjacency(X)
        except TypeError as exc:
            raise ValueError(f"cannot read an adjacency matrix: {exc}") from exc
    if graph.n < 1:
        raise ValueError("graph must have at least one vertex")
    return graph


def check_fugacities(fugacity, n: int) -> Fugacities:
    """Broadcast a scalar or check a per-vertex vector of fugacities."""
    if isinstance(fugacity, Fugacities):
        if fugacity.n != n:
            raise ValueError(f"expected {n} fugacities, got {fugacity.n}")
        return fugacity
    arr = np.asarray(fugacity, dtype=float)
    if arr.ndim == 0:
        return Fugacities.uniform(float(arr), n)
    if arr.ndim != 1 or arr.size != n:
        raise ValueError(f"expected a scalar or {n} fugacities, got shape {arr.shape}")
    return Fugacities(arr)


def check_probability(p, name: str) -> float:
    if not isinstance(p, numbers.Real) or not 0.0 <= float(p) <= 1.0:
        raise ValueError(f"{name} must be a real in [0, 1], got {p!r}")
    return float(p)


def check_positive_int(k, name: str) -> int:
    if isinstance(k, bool) or not isinstance(k, numbers.Integral) or k < 1:
        raise ValueError(f"{name} must be a positive integer, got {k!r}")
    return int(k)
