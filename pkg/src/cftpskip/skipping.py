"""Event skipping for bounding chains.

Passive letters (those that leave the current bound unchanged) carry no
information for coupling. This module provides

* the word calculus used to skip them safely inside CFTP: contraction,
  (h, q)-expansion, G-words and the fused expand/contract pass that doubles
  the history;
* CFTP with oracle skipping built on it;
* the forward oracle and incremental skipping chains, whose coupling times
  bracket each other.

Everything here works on any :class:`~cftpskip.automaton.MarkovAutomaton`.
The hard-core model has compiled versions in :mod:`cftpskip.hardcore.engine`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

from .automaton import (
    DEFAULT_MAX_STEPS,
    SHARP,
    BudgetExhausted,
    DomainError,
    EventWord,
    ForwardResult,
    MarkovAutomaton,
    check_rng,
)

__all__ = [
    "SkipDistribution",
    "HistoryContext",
    "GWord",
    "OracleStats",
    "OracleResult",
    "EmbeddingError",
    "StuckChainError",
    "ContractionError",
    "contract",
    "expand",
    "expand_g",
    "split_segments",
    "g_word",
    "double_history",
    "cftp_oracle",
    "forward_oracle_coupling",
    "forward_incremental_coupling",
]


class EmbeddingError(AssertionError):
    """A later oracle-CFTP round produced a bound outside the previous one."""


class ContractionError(RuntimeError):
    """A stored word holds a letter that is passive where it stands."""


class StuckChainError(RuntimeError):
    """No active letter is left although the bound is not a singleton."""


@dataclass(frozen=True)
class SkipDistribution:
    """The base distribution extended with SHARP at weight `q`."""

    automaton: MarkovAutomaton
    q: float

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"q must lie in [0, 1], got {self.q}")

    def weight(self, letter) -> float:
        if letter is SHARP:
            return self.q
        return (1.0 - self.q) * self.automaton.base_weight(letter)

    def mass(self, letters) -> float:
        return math.fsum(self.weight(a) for a in letters)

    def draw(self, letters, rng):
        """Draw from this distribution restricted to `letters`."""
        letters = list(letters)
        weights = [self.weight(a) for a in letters]
        total = math.fsum(weights)
        if total <= 0.0:
            raise StuckChainError("cannot draw from an empty restriction")
        while True:
            u = rng.random() * total
            acc = 0.0
            for a, w in zip(letters, weights):
                acc += w
                if u < acc and w > 0.0:
                    return a


class HistoryContext:
    """Bound reached after reading a history, with its active letters."""

    __slots__ = ("automaton", "bound", "active")

    def __init__(self, automaton: MarkovAutomaton, bound=None, active=None):
        self.automaton = automaton
        self.bound = automaton.top() if bound is None else bound
        self.active = automaton.active_letters(self.bound) if active is None else active

    def advance(self, letter) -> None:
        new = self.automaton.bound_act(self.bound, letter)
        if new != self.bound:
            self.bound = new
            self.active = self.automaton.active_letters(new)

    def passive(self) -> list:
        return [a for a in self.automaton.alphabet if a not in self.active]

    def copy(self) -> "HistoryContext":
        return HistoryContext(self.automaton, self.bound, self.active)


def contract(ctx: HistoryContext, word) -> EventWord:
    """Drop the letters of `word` that are passive where they are read.

    `ctx` is left untouched.
    """
    ctx = ctx.copy()
    out = EventWord()
    for a in word:
        if a in ctx.active:
            out.push(a)
            ctx.advance(a)
    return out


def expand(ctx: HistoryContext, q: float, word, rng) -> EventWord:
    """Randomly reinsert passive letters in front of each letter of `word`.

    Before each letter, passive letters are inserted one at a time with
    probability D_q(passive), each drawn from D_q restricted to the passive
    set at the current position. `word` must be contracted relative to
    `ctx`; `ctx` is left untouched.
    """
    rng = check_rng(rng)
    dist = SkipDistribution(ctx.automaton, q)
    ctx = ctx.copy()
    out = EventWord()
    passive = ctx.passive()
    p_insert = dist.mass(passive)
    for a in word:
        if a not in ctx.active:
            raise DomainError(f"letter {a!r} is passive: word is not contracted")
        while p_insert > 0.0 and rng.random() < p_insert:
            out.push(dist.draw(passive, rng))
        out.push(a)
        before = ctx.bound
        ctx.advance(a)
        if ctx.bound != before:
            passive = ctx.passive()
            p_insert = dist.mass(passive)
    return out


def split_segments(word) -> list[list]:
    """Split a word ending with SHARP into pieces that each end with one SHARP."""
    segments, cur = [], []
    for a in word:
        cur.append(a)
        if a is SHARP:
            segments.append(cur)
            cur = []
    if cur:
        raise ValueError("word does not end with SHARP")
    return segments


def expand_g(automaton: MarkovAutomaton, word, rng) -> EventWord:
    """Expansion of a contracted word made of G-word segments.

    With n segments, the first one is expanded with q = 2**-n from the top,
    the next with q = 2**-(n-1) after the first, and so on down to q = 1/2.
    """
    rng = check_rng(rng)
    segments = split_segments(word)
    ctx = HistoryContext(automaton)
    out = EventWord()
    n = len(segments)
    for j, seg in enumerate(segments):
        out.extend(expand(ctx, 2.0 ** -(n - j), seg, rng))
        for a in seg:
            ctx.advance(a)
    return out


@dataclass
class GWord:
    bound: Any
    active: frozenset
    word: EventWord
    letters_drawn: int = 0


def g_word(automaton: MarkovAutomaton, q: float, rng=None) -> GWord:
    """Draw a contracted G_q word: active letters up to and including the first SHARP."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    rng = check_rng(rng)
    dist = SkipDistribution(automaton, q)
    ctx = HistoryContext(automaton)
    word = EventWord()
    drawn = 0
    while True:
        a = dist.draw(sorted_letters(ctx.active, automaton), rng)
        drawn += 1
        word.push(a)
        ctx.advance(a)
        if a is SHARP:
            return GWord(ctx.bound, ctx.active, word, drawn)


def sorted_letters(active, automaton) -> list:
    # deterministic iteration order so runs are reproducible under a seed
    order = automaton.__dict__.get("_letter_order")
    if order is None:
        order = {a: i for i, a in enumerate(automaton.alphabet)}
        automaton.__dict__["_letter_order"] = order
    return sorted(active, key=lambda a: -1 if a is SHARP else order[a])


@dataclass
class _DoubleResult:
    bound: Any
    word: EventWord
    letters_drawn: int
    bound_updates: int
    min_m: int


def double_history(automaton: MarkovAutomaton, w, n: int, rng=None) -> _DoubleResult:
    """Build w^n = c(u^n . e_G(w^{n-1})) in one pass.

    A fresh contracted G-word u^n (q = 2**-n) is drawn on a new chain. The
    previous word is then replayed on an old chain started from the top:
    each step draws from D_q restricted to the union of both active sets; a
    draw active for the old chain means "the next old letter comes now" and
    pops it, otherwise the draw is an inserted letter that the old chain
    would have ignored. Letters active for the new chain are appended. q is
    2**-m where m counts the old segments not yet finished.
    """
    if n < 1:
        raise ValueError("round index must be >= 1")
    rng = check_rng(rng)
    old = EventWord(w)
    if old.count(SHARP) != n - 1:
        raise ValueError(f"word for round {n} must hold {n - 1} SHARP letters")
    m = n
    g = g_word(automaton, 2.0**-m, rng)
    # letters_drawn counts fresh events: the G-word and inserted letters
    new = HistoryContext(automaton, g.bound, g.active)
    prev = HistoryContext(automaton)
    word = g.word
    drawn = g.letters_drawn
    updates = len(g.word) - 1
    m -= 1
    min_m = m if not old.is_empty() else 0
    while not old.is_empty():
        min_m = min(min_m, m)
        dist = SkipDistribution(automaton, 2.0**-m)
        a = dist.draw(sorted_letters(new.active | prev.active, automaton), rng)
        if a in prev.active:
            a = old.pop()
            if a not in prev.active:
                raise ContractionError(f"stored letter {a!r} is passive for the old chain")
            prev.advance(a)
            updates += a is not SHARP
        else:
            # fresh letter; popped ones reuse stored events
            drawn += 1
        if a in new.active:
            word.push(a)
            new.advance(a)
            if a is SHARP:
                m -= 1
            else:
                updates += 1
    if m != 0:
        raise ContractionError(f"segment counter ended at {m}, expected 0")
    return _DoubleResult(new.bound, word, drawn, updates, min_m)


@dataclass
class OracleStats:
    letters_drawn: int = 0
    bound_updates: int = 0
    rounds: int = 0
    word_length: int = 0

    def as_dict(self) -> dict:
        return {
            "letters_drawn": self.letters_drawn,
            "bound_updates": self.bound_updates,
            "rounds": self.rounds,
            "backward_time": self.word_length,
        }


@dataclass
class OracleResult:
    state: Any
    stats: OracleStats
    bounds: list | None = None
    words: list | None = None


def cftp_oracle(
    automaton: MarkovAutomaton,
    rng=None,
    max_letters: int = DEFAULT_MAX_STEPS,
    check: bool = False,
    keep_history: bool = False,
) -> OracleResult:
    """CFTP with oracle skipping.

    Rounds n = 1, 2, ... double the history with :func:`double_history`
    until the bound is a singleton. With ``check=True`` every round verifies
    that the new bound lies inside the previous one and that the word holds
    exactly n SHARP letters.
    """
    rng = check_rng(rng)
    stats = OracleStats()
    word = EventWord()
    prev_bound = None
    bounds = [] if keep_history else None
    words = [] if keep_history else None
    n = 0
    while True:
        n += 1
        res = double_history(automaton, word, n, rng)
        word = res.word
        stats.letters_drawn += res.letters_drawn
        stats.bound_updates += res.bound_updates
        stats.rounds = n
        if check:
            if word.count(SHARP) != n:
                raise EmbeddingError(f"round {n}: word holds {word.count(SHARP)} SHARP letters")
            if prev_bound is not None and not automaton.bound_subset(res.bound, prev_bound):
                raise EmbeddingError(f"round {n}: bound escaped the previous round's bound")
        prev_bound = res.bound
        if bounds is not None:
            bounds.append(res.bound)
            words.append(list(word))
        x = automaton.is_singleton(res.bound)
        if x is not None:
            stats.word_length = len(word)
            return OracleResult(x, stats, bounds, words)
        if stats.letters_drawn > max_letters:
            raise BudgetExhausted("oracle CFTP did not couple within budget", stats.letters_drawn)


def forward_oracle_coupling(
    automaton: MarkovAutomaton, rng=None, max_steps: int = DEFAULT_MAX_STEPS
) -> ForwardResult:
    """Forward bounding chain with every letter drawn from D conditioned on being active."""
    rng = check_rng(rng)
    dist = SkipDistribution(automaton, 0.0)
    ctx = HistoryContext(automaton)
    steps = 0
    x = automaton.is_singleton(ctx.bound)
    while x is None:
        if steps >= max_steps:
            return ForwardResult(steps, None)
        act = [a for a in sorted_letters(ctx.active, automaton) if a is not SHARP]
        if not act:
            raise StuckChainError("bound has no active letter")
        ctx.advance(dist.draw(act, rng))
        steps += 1
        x = automaton.is_singleton(ctx.bound)
    return ForwardResult(steps, x)


def forward_incremental_coupling(
    automaton: MarkovAutomaton, rng=None, max_steps: int = DEFAULT_MAX_STEPS
) -> ForwardResult:
    """Forward bounding chain with incremental skipping.

    Each passive draw removes that letter from the proposal distribution;
    an active draw restores the full base distribution. Every draw counts
    as a step.
    """
    rng = check_rng(rng)
    dist = SkipDistribution(automaton, 0.0)
    letters = list(automaton.alphabet)
    ctx = HistoryContext(automaton)
    removed: set = set()
    steps = 0
    x = automaton.is_singleton(ctx.bound)
    while x is None:
        if steps >= max_steps:
            return ForwardResult(steps, None)
        pool = [a for a in letters if a not in removed]
        if not pool:
            raise StuckChainError("every letter was removed but the bound is not a singleton")
        a = dist.draw(pool, rng)
        steps += 1
        if a in ctx.active:
            ctx.advance(a)
            removed.clear()
            x = automaton.is_singleton(ctx.bound)
        else:
            removed.add(a)
    return ForwardResult(steps, x)
