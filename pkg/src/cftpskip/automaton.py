"""Markov automata and their bounding chains.

A Markov automaton is a finite state space, a finite alphabet of events
with a probability on it, and a deterministic action of letters on states.
Reading i.i.d. letters from every initial state at once gives the grand
coupling; a bounding chain tracks a representable superset of the states the
grand coupling can still be in.

Samplers in this package are written against :class:`MarkovAutomaton`.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass
from typing import Any, Hashable, Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "SHARP",
    "DomainError",
    "UnsupportedDomainError",
    "BudgetExhausted",
    "EventWord",
    "MarkovAutomaton",
    "ForwardResult",
    "LetterSampler",
    "apply_word",
    "bound_word",
    "forward_coupling",
    "check_rng",
    "DEFAULT_MAX_STEPS",
]

DEFAULT_MAX_STEPS = 10**9


class _Sharp:
    """The delimiter letter: acts as the identity but always counts as active."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "SHARP"

    def __reduce__(self):
        return (_Sharp, ())


SHARP = _Sharp()


class DomainError(ValueError):
    """A letter, state or bound does not belong to the automaton."""


class UnsupportedDomainError(DomainError):
    """The operation needs an explicitly enumerable state space."""


class BudgetExhausted(RuntimeError):
    """A sampler hit its letter budget before coupling."""

    def __init__(self, message, letters_drawn=None):
        super().__init__(message)
        self.letters_drawn = letters_drawn


def check_rng(seed=None) -> np.random.Generator:
    """Turn None, an int, a SeedSequence or a Generator into a Generator.

    Replication ``i`` of an experiment seeded with ``s`` uses
    ``check_rng(s + i)``.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


class EventWord:
    """FIFO word over an alphabet extended with :data:`SHARP`."""

    __slots__ = ("_q",)

    def __init__(self, letters: Iterable[Hashable] = ()):
        self._q = deque(letters)

    def push(self, letter) -> None:
        self._q.append(letter)

    def pop(self):
        return self._q.popleft()

    def extend(self, letters) -> None:
        self._q.extend(letters)

    def is_empty(self) -> bool:
        return not self._q

    def count(self, letter) -> int:
        return self._q.count(letter)

    def copy(self) -> "EventWord":
        return EventWord(self._q)

    def __len__(self):
        return len(self._q)

    def __iter__(self) -> Iterator:
        return iter(self._q)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return EventWord(list(self._q)[i])
        return self._q[i]

    def __eq__(self, other):
        if isinstance(other, EventWord):
            return list(self._q) == list(other._q)
        if isinstance(other, (list, tuple)):
            return list(self._q) == list(other)
        return NotImplemented

    def __add__(self, other):
        return EventWord(list(self._q) + list(other))

    def __repr__(self):
        return f"EventWord({list(self._q)!r})"


class MarkovAutomaton(ABC):
    """Contract for a Markov automaton together with a bounding chain.

    Subclasses provide the alphabet and its weights, the action on states,
    the bounding operator and its top element. :data:`SHARP` is handled here:
    it leaves states and bounds unchanged and is always active.
    """

    @property
    @abstractmethod
    def alphabet(self) -> Sequence[Hashable]:
        """Letters with positive weight, in a fixed order."""

    @abstractmethod
    def base_weight(self, letter) -> float:
        """Probability of `letter` under the base event distribution."""

    @abstractmethod
    def _act(self, state, letter):
        ...

    @abstractmethod
    def _bound_act(self, bound, letter):
        ...

    @abstractmethod
    def top(self):
        """The bound standing for the whole state space."""

    @abstractmethod
    def is_singleton(self, bound) -> Any:
        """The unique state of `bound`, or None when it holds several."""

    def bound_contains(self, bound, state) -> bool:
        raise NotImplementedError

    def bound_subset(self, inner, outer) -> bool:
        """Whether every state of `inner` lies in `outer`."""
        raise NotImplementedError

    def states(self) -> list:
        """Explicit enumeration of the state space, for small domains."""
        raise UnsupportedDomainError(f"{type(self).__name__} has no enumerable state space")

    def _check_letter(self, letter):
        if letter not in self._letter_set:
            raise DomainError(f"letter {letter!r} is not in the alphabet")

    @property
    def _letter_set(self):
        s = self.__dict__.get("_letter_set_cache")
        if s is None:
            s = frozenset(self.alphabet)
            self.__dict__["_letter_set_cache"] = s
        return s

    def act(self, state, letter):
        """x . a"""
        if letter is SHARP:
            return state
        self._check_letter(letter)
        return self._act(state, letter)

    def bound_act(self, bound, letter):
        """B o a"""
        if letter is SHARP:
            return bound
        self._check_letter(letter)
        return self._bound_act(bound, letter)

    def active_letters(self, bound) -> frozenset:
        """Letters that move `bound`, plus :data:`SHARP`."""
        return frozenset([a for a in self.alphabet if self._bound_act(bound, a) != bound] + [SHARP])

    def letter_sampler(self, rng) -> "LetterSampler":
        return LetterSampler(self.alphabet, [self.base_weight(a) for a in self.alphabet], rng)


class LetterSampler:
    """i.i.d. draws from a finite distribution, generated in blocks."""

    def __init__(self, letters, weights, rng, block=1024):
        self.letters = list(letters)
        w = np.asarray(weights, dtype=float)
        self.p = w / w.sum()
        self.rng = rng
        self.block = block
        self._next = 16
        self._buf = []

    def draw(self):
        if not self._buf:
            # short runs should not pay for a full block
            k = min(self._next, self.block)
            self._next = 2 * k
            idx = self.rng.choice(len(self.letters), size=k, p=self.p)
            self._buf = [self.letters[i] for i in idx[::-1]]
        return self._buf.pop()

    def draw_many(self, k: int) -> list:
        idx = self.rng.choice(len(self.letters), size=k, p=self.p)
        return [self.letters[i] for i in idx]


@dataclass(frozen=True)
class ForwardResult:
    """Outcome of a forward coupling run.

    `result` is None when the step budget ran out first.
    """

    steps: int
    result: Any = None

    @property
    def coupled(self) -> bool:
        return self.result is not None


def apply_word(automaton: MarkovAutomaton, x, word):
    """Return x . w1 . ... . wn."""
    for a in word:
        x = automaton.act(x, a)
    return x


def bound_word(automaton: MarkovAutomaton, bound, word):
    """Return B o w1 o ... o wn."""
    for a in word:
        bound = automaton.bound_act(bound, a)
    return bound


def forward_coupling(automaton: MarkovAutomaton, rng=None, max_steps: int = DEFAULT_MAX_STEPS) -> ForwardResult:
    """Run the bounding chain forward from the top until it is a singleton.

    Letters are drawn i.i.d. from the base distribution. The singleton test
    happens after every letter.
    """
    if max_steps <= 0:
        raise ValueError("max_steps must be positive")
    sampler = automaton.letter_sampler(check_rng(rng))
    bound = automaton.top()
    x = automaton.is_singleton(bound)
    steps = 0
    while x is None:
        if steps >= max_steps:
            return ForwardResult(steps, None)
        bound = automaton._bound_act(bound, sampler.draw())
        steps += 1
        x = automaton.is_singleton(bound)
    return ForwardResult(steps, x)
