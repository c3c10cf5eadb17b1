"""Coupling from the past: the all-states version and the bounding-chain
version with period doubling.

These are reference implementations written against the generic
:class:`~cftpskip.automaton.MarkovAutomaton` contract. The hard-core model
has compiled equivalents in :mod:`cftpskip.hardcore.engine`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .automaton import (
    DEFAULT_MAX_STEPS,
    BudgetExhausted,
    MarkovAutomaton,
    UnsupportedDomainError,
    check_rng,
)

__all__ = ["CftpStats", "CftpResult", "cftp_naive", "cftp_bounded"]


@dataclass
class CftpStats:
    """Work counters for one CFTP run.

    Attributes
    ----------
    letters_drawn : int
        Random events generated.
    bound_updates : int
        Applications of the bounding operator (or of the action, for the
        all-states algorithm, once per tracked state).
    doubling_rounds : int
        Number of times the generating word was extended into the past.
    backward_time : int
        Length of the final generating word.
    """

    letters_drawn: int = 0
    bound_updates: int = 0
    doubling_rounds: int = 0
    backward_time: int = 0

    def as_dict(self) -> dict:
        return {
            "letters_drawn": self.letters_drawn,
            "bound_updates": self.bound_updates,
            "doubling_rounds": self.doubling_rounds,
            "backward_time": self.backward_time,
        }


@dataclass
class CftpResult:
    state: Any
    stats: CftpStats = field(default_factory=CftpStats)
    # generating word of each round, kept only when requested
    history: list | None = None


def _transition_table(automaton):
    # table[k][i] = index of states[i] . letters[k]; cached on the automaton
    cached = automaton.__dict__.get("_naive_table")
    if cached is None:
        try:
            states = automaton.states()
        except NotImplementedError:
            raise UnsupportedDomainError("state space is not enumerable") from None
        index = {s: i for i, s in enumerate(states)}
        letters = list(automaton.alphabet)
        table = np.array(
            [[index[automaton.act(s, a)] for s in states] for a in letters], dtype=np.intp
        ).reshape(len(letters), len(states))
        cached = (states, letters, table, {a: k for k, a in enumerate(letters)})
        automaton.__dict__["_naive_table"] = cached
    return cached


def cftp_naive(automaton: MarkovAutomaton, rng=None, max_steps: int = DEFAULT_MAX_STEPS) -> CftpResult:
    """Propp-Wilson CFTP tracking every state.

    Maintains the composed map S from states at time -t to states at time 0;
    each new (older) letter a updates it as S(s) <- S(s . a).
    """
    rng = check_rng(rng)
    states, letters, table, pos = _transition_table(automaton)
    sampler = automaton.letter_sampler(rng)
    S = np.arange(len(states))
    stats = CftpStats()
    while True:
        if stats.letters_drawn >= max_steps:
            raise BudgetExhausted("naive CFTP did not couple within budget", stats.letters_drawn)
        a = sampler.draw()
        S = S[table[pos[a]]]
        stats.letters_drawn += 1
        stats.bound_updates += len(states)
        if S.min() == S.max():
            break
    stats.backward_time = stats.letters_drawn
    return CftpResult(states[int(S[0])], stats)


def cftp_bounded(
    automaton: MarkovAutomaton,
    rng=None,
    max_letters: int = DEFAULT_MAX_STEPS,
    keep_history: bool = False,
) -> CftpResult:
    """CFTP on the bounding chain with period doubling.

    Round r prepends a fresh block of 2**(r-1) letters to the generating
    word (older letters go in front, already drawn letters are reused) and
    recomputes the bound from the top. Stops at the first singleton.
    """
    rng = check_rng(rng)
    sampler = automaton.letter_sampler(rng)
    word: list = []
    history = [] if keep_history else None
    stats = CftpStats()
    k = 1
    while True:
        if len(word) + k > max_letters:
            raise BudgetExhausted("bounded CFTP did not couple within budget", len(word))
        word = sampler.draw_many(k) + word
        stats.letters_drawn += k
        stats.doubling_rounds += 1
        if history is not None:
            history.append(list(word))
        bound = automaton.top()
        for a in word:
            bound = automaton._bound_act(bound, a)
        stats.bound_updates += len(word)
        x = automaton.is_singleton(bound)
        if x is not None:
            stats.backward_time = len(word)
            return CftpResult(x, stats, history)
        k *= 2
