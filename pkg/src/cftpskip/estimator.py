"""scikit-learn style front end for exact hard-core sampling."""
from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .automaton import check_rng
from .hardcore.engine import DEFAULT_MAX_LETTERS, SAMPLERS, STAT_FIELDS, sample
from .validation import check_fugacities, check_graph, check_positive_int, check_probability

__all__ = ["PerfectSampler"]


class PerfectSampler(BaseEstimator):
    """Exact sampler of weighted independent sets.

    Parameters
    ----------
    method : {"oracle", "dg", "gibbs"}, default="oracle"
        CFTP with oracle skipping on the Gibbs bounding chain, or bounded
        CFTP on the Dyer-Greenhill or Gibbs bounding chain.
    fugacity : float or array-like of shape (n_vertices,), default=1.0
        Uniform lambda or one value per vertex.
    swap_probability : float, default=1.0
        Swap probability of the Dyer-Greenhill chain.
    max_letters : int, default=10**8
        Letter budget per sample.
    random_state : None, int or numpy.random.Generator, default=None

    Attributes
    ----------
    graph_ : Graph
    fugacities_ : Fugacities
    n_features_in_ : int
        Number of vertices.
    last_stats_ : ndarray of shape (n_samples, 4)
        Work counters of the last call to :meth:`sample`.

    Examples
    --------
    >>> from cftpskip import PerfectSampler, graphs
    >>> est = PerfectSampler(fugacity=2.0, random_state=0).fit(graphs.star(3))
    >>> est.sample(2).shape
    (2, 4)
    """

    def __init__(self, method="oracle", fugacity=1.0, swap_probability=1.0,
                 max_letters=DEFAULT_MAX_LETTERS, random_state=None):
        self.method = method
        self.fugacity = fugacity
        self.swap_probability = swap_probability
        self.max_letters = max_letters
        self.random_state = random_state

    def fit(self, X, y=None):
        """Store the graph and validate the parameters.

        Parameters
        ----------
        X : Graph, array-like of shape (n, n) or sparse matrix
            The graph, or its adjacency matrix.
        y : None
            Ignored.

        Returns
        -------
        self : object
        """
        if self.method not in SAMPLERS:
            raise ValueError(f"method must be one of {SAMPLERS}, got {self.method!r}")
        check_probability(self.swap_probability, "swap_probability")
        check_positive_int(self.max_letters, "max_letters")
        graph = check_graph(X)
        fug = check_fugacities(self.fugacity, graph.n)
        if self.method == "dg" and not fug.is_uniform:
            raise ValueError("method='dg' needs uniform fugacities")
        self.graph_ = graph
        self.fugacities_ = fug
        self.n_features_in_ = graph.n
        self._rng = check_rng(self.random_state)
        return self

    def sample(self, n_samples=1, return_stats=False):
        """Draw independent exact samples.

        Parameters
        ----------
        n_samples : int, default=1
        return_stats : bool, default=False
            Also return the work counters as a list of dicts.

        Returns
        -------
        X : ndarray of shape (n_samples, n_vertices), dtype bool
            Row i is the indicator vector of the i-th independent set.
        stats : list of dict
            Only when `return_stats` is True.
        """
        check_is_fitted(self, "graph_")
        n_samples = check_positive_int(n_samples, "n_samples")
        batch = sample(
            self.graph_, self.fugacities_, self.method, n_samples, self._rng,
            swap_probability=self.swap_probability, max_letters=self.max_letters,
        )
        self.last_stats_ = batch.stats
        if return_stats:
            return batch.states, batch.stats_dicts()
        return batch.states

    def score_samples(self, X):
        """Unnormalized log-probability sum of log lambda(v) over each set.

        Rows that are not independent sets score -inf.
        """
        check_is_fitted(self, "graph_")
        X = np.asarray(X, dtype=bool)
        if X.ndim != 2 or X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected shape (n_samples, {self.n_features_in_}), got {X.shape}")
        logw = np.log(self.fugacities_.values)
        scores = X.astype(float) @ logw
        for i, row in enumerate(X):
            if not self.graph_.is_independent(np.flatnonzero(row).tolist()):
                scores[i] = -math.inf
        return scores

    @staticmethod
    def stat_fields():
        return STAT_FIELDS
