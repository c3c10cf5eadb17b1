"""Exact sampling of weighted independent sets by coupling from the past,
with event skipping."""
from . import bench, graphs, verify
from .automaton import SHARP, BudgetExhausted, DomainError, MarkovAutomaton
from .estimator import PerfectSampler
from .graphs import Graph
from .hardcore import Fugacities, HardcoreAutomaton, forward_times, sample

__version__ = "0.1.0"

__all__ = [
    "SHARP",
    "BudgetExhausted",
    "DomainError",
    "Fugacities",
    "Graph",
    "HardcoreAutomaton",
    "MarkovAutomaton",
    "PerfectSampler",
    "bench",
    "forward_times",
    "graphs",
    "sample",
    "verify",
]
