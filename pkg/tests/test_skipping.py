import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cftpskip.automaton import SHARP, BudgetExhausted, DomainError, bound_word
from cftpskip.graphs import Graph, complete, star
from cftpskip.hardcore import Add, HardcoreAutomaton, Remove, forward_times, sample
from cftpskip.skipping import (
    ContractionError,
    HistoryContext,
    SkipDistribution,
    contract,
    cftp_oracle,
    double_history,
    expand,
    expand_g,
    forward_incremental_coupling,
    forward_oracle_coupling,
    g_word,
    split_segments,
)
from cftpskip.verify import stationary_distribution, tv_distance, tv_threshold

EDGE = complete(2)


@pytest.fixture
def edge():
    return HardcoreAutomaton(EDGE, 1.0)


def _draw_word(aut, q, k, rng):
    letters = list(aut.alphabet) + [SHARP]
    p = np.array([SkipDistribution(aut, q).weight(a) for a in letters])
    return [letters[i] for i in rng.choice(len(letters), size=k, p=p)]


# ----------------------------------------------------- skip distribution


@pytest.mark.parametrize("q", [0.0, 0.25, 0.5, 1.0])
def test_skip_distribution_mass(q):
    aut = HardcoreAutomaton(star(3), [1.0, 2.0, 0.5, 7.0])
    d = SkipDistribution(aut, q)
    assert math.isclose(d.mass(list(aut.alphabet) + [SHARP]), 1.0, abs_tol=1e-12)
    assert d.weight(SHARP) == q


def test_skip_distribution_validation(edge):
    with pytest.raises(ValueError):
        SkipDistribution(edge, 1.5)


def test_history_context_active_matches_recomputation(edge):
    rng = np.random.default_rng(0)
    ctx = HistoryContext(edge)
    for a in _draw_word(edge, 0.0, 200, rng):
        ctx.advance(a)
        assert ctx.active == edge.active_letters(ctx.bound)


# ------------------------------------------------------------ contraction


def test_contract_examples(edge):
    top = HistoryContext(edge)
    assert contract(top, [Add(0), Remove(0)]) == [Remove(0)]
    assert contract(top, [Remove(0), Remove(1)]) == [Remove(0), Remove(1)]
    assert contract(top, []) == []


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(0, 4), max_size=12), st.integers(0, 3))
def test_contract_idempotent(idx, hlen):
    aut = HardcoreAutomaton(EDGE, 1.0)
    letters = list(aut.alphabet) + [SHARP]
    ctx = HistoryContext(aut)
    for a in letters[:hlen]:
        ctx.advance(a)
    u = [letters[i] for i in idx]
    c = contract(ctx, u)
    assert contract(ctx, c) == c


def test_equivalence_laws_exhaustive(edge):
    # c^h(u) and u lead to the same bound after h, for all short h and u
    letters = list(edge.alphabet) + [SHARP]
    words = [list(w) for k in range(5) for w in itertools.product(letters, repeat=k)]
    histories = [w for w in words if len(w) <= 2]
    for h in histories:
        ctx = HistoryContext(edge)
        for a in h:
            ctx.advance(a)
        for u in words:
            c = list(contract(ctx, u))
            assert bound_word(edge, ctx.bound, c) == bound_word(edge, ctx.bound, u)


# -------------------------------------------------------------- expansion


def test_expand_with_empty_inact():
    aut = HardcoreAutomaton(Graph(1), 1.0)
    ctx = HistoryContext(aut)
    assert not ctx.passive()
    rng = np.random.default_rng(0)
    for q in (0.1, 0.5, 1.0):
        assert expand(ctx, q, [Remove(0)], rng) == [Remove(0)]


def test_expand_q1_inserts_nothing_but_passives(edge):
    ctx = HistoryContext(edge)
    rng = np.random.default_rng(0)
    out = expand(ctx, 1.0, [Remove(0), SHARP], rng)
    assert out == [Remove(0), SHARP]


def test_expand_rejects_uncontracted(edge):
    with pytest.raises(DomainError):
        expand(HistoryContext(edge), 0.5, [Add(0)], np.random.default_rng(0))


def test_expand_contract_round_trip(edge):
    rng = np.random.default_rng(1)
    ctx = HistoryContext(edge)
    for _ in range(200):
        u = contract(ctx, _draw_word(edge, 0.5, 8, rng))
        assert contract(ctx, expand(ctx, 0.5, u, rng)) == u


def _stopped_word(aut, q, k, rng):
    # prefix of an infinite D_q word, cut once k letters survive contraction
    dist = SkipDistribution(aut, q)
    letters = list(aut.alphabet) + [SHARP]
    p = np.array([dist.weight(a) for a in letters])
    ctx = HistoryContext(aut)
    u, kept = [], 0
    while kept < k:
        a = letters[rng.choice(len(letters), p=p)]
        u.append(a)
        if a in ctx.active:
            kept += 1
            ctx.advance(a)
    return u


def test_shuffle_law_two_letter_prefix(edge):
    q, k, trials = 0.5, 2, 100_000
    rng = np.random.default_rng(2)
    dist = SkipDistribution(edge, q)
    top = HistoryContext(edge)
    counts = {}
    for _ in range(trials):
        u = _stopped_word(edge, q, k, rng)
        key = tuple(expand(top, q, contract(top, u), rng)[:k])
        counts[key] = counts.get(key, 0) + 1
    letters = list(edge.alphabet) + [SHARP]
    exact = {w: math.prod(dist.weight(a) for a in w) for w in itertools.product(letters, repeat=k)}
    emp = {w: c / trials for w, c in counts.items()}
    assert tv_distance(emp, exact) <= 0.02


def test_shuffle_law_per_position(edge):
    q, k, trials = 0.5, 6, 20_000
    rng = np.random.default_rng(3)
    dist = SkipDistribution(edge, q)
    top = HistoryContext(edge)
    letters = list(edge.alphabet) + [SHARP]
    pos = np.zeros((k, len(letters)))
    index = {a: i for i, a in enumerate(letters)}
    for _ in range(trials):
        w = expand(top, q, contract(top, _stopped_word(edge, q, k, rng)), rng)[:k]
        for j, a in enumerate(w):
            pos[j, index[a]] += 1
    exact = np.array([dist.weight(a) for a in letters])
    for j in range(k):
        assert 0.5 * np.abs(pos[j] / trials - exact).sum() <= 0.02


# ----------------------------------------------------------------- G-words


def test_g_word_high_q(edge):
    rng = np.random.default_rng(4)
    hits = sum(list(g_word(edge, 0.999, rng).word) == [SHARP] for _ in range(10_000))
    assert hits / 10_000 >= 0.998


def test_g_word_first_draw_probability():
    aut = HardcoreAutomaton(star(2), 1.0)
    q = 0.3
    # active letters at the top are the three removals, of total weight 1/2
    expected = q / (q + (1 - q) * 0.5)
    rng = np.random.default_rng(5)
    n = 100_000
    hits = sum(len(g_word(aut, q, rng).word) == 1 for _ in range(n))
    assert abs(hits / n - expected) < 0.005


def test_g_word_is_contracted(edge):
    rng = np.random.default_rng(6)
    for _ in range(200):
        g = g_word(edge, 0.4, rng)
        assert contract(HistoryContext(edge), g.word) == g.word
        assert g.word[-1] is SHARP and g.word.count(SHARP) == 1
        assert bound_word(edge, edge.top(), g.word) == g.bound


def test_g_word_validation(edge):
    for q in (0.0, 1.0):
        with pytest.raises(ValueError):
            g_word(edge, q, 0)


def test_g_shuffle_length_and_positions(edge):
    q, trials = 0.5, 50_000
    rng = np.random.default_rng(7)
    letters = list(edge.alphabet) + [SHARP]
    p = np.array([SkipDistribution(edge, q).weight(a) for a in letters])
    lengths, positions = {}, [{} for _ in range(3)]
    top = HistoryContext(edge)
    for _ in range(trials):
        u = []
        while not u or u[-1] is not SHARP:
            u.append(letters[rng.choice(len(letters), p=p)])
        w = expand_g(edge, contract(top, u), rng)
        lengths[len(w)] = lengths.get(len(w), 0) + 1
        for j, a in enumerate(list(w)[:3]):
            positions[j][a] = positions[j].get(a, 0) + 1
    exact_len = {k: (1 - q) ** (k - 1) * q for k in range(1, 200)}
    assert tv_distance({k: v / trials for k, v in lengths.items()}, exact_len) <= 0.02
    for j in range(3):
        total = sum(positions[j].values())
        reach = (1 - q) ** j
        exact = {a: p[i] for i, a in enumerate(letters)}
        assert abs(total / trials - reach) < 0.01
        assert tv_distance({a: c / total for a, c in positions[j].items()}, exact) <= 0.02


def test_split_segments():
    assert split_segments([1, SHARP, SHARP]) == [[1, SHARP], [SHARP]]
    with pytest.raises(ValueError):
        split_segments([1])


# ------------------------------------------------------------ double history


def test_double_history_first_round_is_g_word(edge):
    a = double_history(edge, [], 1, 8)
    b = g_word(edge, 0.5, 8)
    assert a.word == b.word and a.bound == b.bound


def test_double_history_invariants():
    aut = HardcoreAutomaton(star(4), 3.0)
    rng = np.random.default_rng(9)
    for _ in range(50):
        w = []
        for n in range(1, 7):
            res = double_history(aut, w, n, rng)
            assert res.word.count(SHARP) == n
            if n > 1:
                assert res.min_m >= 1
            assert contract(HistoryContext(aut), res.word) == res.word
            w = res.word


def test_double_history_contraction_error(edge):
    with pytest.raises(ContractionError):
        double_history(edge, [Add(0), SHARP], 2, 0)


def test_double_history_sharp_count_checked(edge):
    with pytest.raises(ValueError):
        double_history(edge, [SHARP], 3, 0)
    with pytest.raises(ValueError):
        double_history(edge, [], 0, 0)


# -------------------------------------------------------------- oracle CFTP


def test_oracle_python_route_star2():
    g = star(2)
    aut = HardcoreAutomaton(g, 2.0)
    rng = np.random.default_rng(10)
    reps = 20_000
    counts = {}
    for _ in range(reps):
        s = cftp_oracle(aut, rng, check=True).state
        counts[s] = counts.get(s, 0) + 1
    pi = stationary_distribution(g, 2.0)
    assert tv_distance({k: v / reps for k, v in counts.items()}, pi) <= tv_threshold(len(pi), reps)


def test_oracle_embedding_history():
    aut = HardcoreAutomaton(star(6), 10.0)
    res = cftp_oracle(aut, 11, check=True, keep_history=True)
    for prev, cur in zip(res.bounds, res.bounds[1:]):
        assert aut.bound_subset(cur, prev)
    for n, w in enumerate(res.words, 1):
        assert w.count(SHARP) == n
    assert res.stats.rounds == len(res.bounds)
    assert res.stats.word_length == len(res.words[-1])


def test_oracle_determinism():
    aut = HardcoreAutomaton(star(5), 4.0)
    a, b = cftp_oracle(aut, 12), cftp_oracle(aut, 12)
    assert a.state == b.state and a.stats == b.stats


def test_oracle_budget():
    with pytest.raises(BudgetExhausted):
        cftp_oracle(HardcoreAutomaton(star(30), 100.0), 0, max_letters=5)


def test_oracle_letters_decrease_with_lambda():
    g = star(100)
    means, ses = [], []
    for lam in (10.0, 100.0, 1000.0):
        letters = sample(g, lam, "oracle", 200, rng=13).stats[:, 0]
        means.append(letters.mean())
        ses.append(letters.std(ddof=1) / math.sqrt(letters.size))
    for i in range(2):
        assert means[i + 1] <= means[i] + 2 * math.hypot(ses[i], ses[i + 1])


def test_rounds_track_log_backward_time():
    g = star(20)
    rounds = sample(g, 5.0, "oracle", 200, rng=14).stats[:, 2].mean()
    log_tau = np.log2(sample(g, 5.0, "gibbs", 200, rng=14).stats[:, 3]).mean()
    assert 0.5 <= rounds / log_tau <= 2.0


# ------------------------------------------------------------ forward chains


def test_forward_single_vertex():
    aut = HardcoreAutomaton(Graph(1), 1.0)
    for seed in range(50):
        assert forward_oracle_coupling(aut, seed).steps == 1
        assert forward_incremental_coupling(aut, seed).steps == 1


def test_forward_bracket_edge_graph(edge):
    rng = np.random.default_rng(15)
    reps = 10_000
    t_o = np.mean([forward_oracle_coupling(edge, rng).steps for _ in range(reps)])
    t_i = np.mean([forward_incremental_coupling(edge, rng).steps for _ in range(reps)])
    assert t_o <= t_i <= len(edge.alphabet) * t_o


def test_forward_bracket_star20():
    g = star(20)
    t_o = forward_times(g, 20.0, "oracle", 500, rng=16).mean()
    t_i = forward_times(g, 20.0, "incremental", 500, rng=16).mean()
    assert t_o <= t_i <= 2 * (g.n) * t_o


def test_forward_oracle_linear_in_n():
    means = {n: forward_times(star(n), 10.0 * n, "oracle", 200, rng=17).mean() for n in (50, 100, 200)}
    for n in (50, 100, 200):
        assert means[n] <= (2 * math.e + 1) * n + 200
    assert abs(means[100] / means[50] / 2 - 1) < 0.3
    assert abs(means[200] / means[100] / 2 - 1) < 0.3


def test_forward_python_route_matches_kernel():
    aut = HardcoreAutomaton(star(20), 20.0)
    rng = np.random.default_rng(18)
    py = np.mean([forward_oracle_coupling(aut, rng).steps for _ in range(400)])
    nb = forward_times(star(20), 20.0, "oracle", 4000, rng=19).mean()
    assert abs(py / nb - 1) < 0.1


def test_forward_budget():
    aut = HardcoreAutomaton(star(30), 100.0)
    assert not forward_oracle_coupling(aut, 0, max_steps=2).coupled
    assert not forward_incremental_coupling(aut, 0, max_steps=2).coupled
