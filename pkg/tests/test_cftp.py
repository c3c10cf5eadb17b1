import math

import numpy as np
import pytest

from cftpskip.automaton import BudgetExhausted, UnsupportedDomainError
from cftpskip.cftp import CftpStats, cftp_bounded, cftp_naive
from cftpskip.graphs import Graph, complete, cycle, gnp, path, star
from cftpskip.hardcore import HardcoreAutomaton, sample
from cftpskip.verify import indicator_table, stationary_distribution, tv_distance, tv_threshold

RUNS = 100_000


def _frequency_of_vertex(engine, lam, runs=RUNS, seed=0):
    aut = HardcoreAutomaton(Graph(1), lam)
    rng = np.random.default_rng(seed)
    return sum(bool(engine(aut, rng).state) for _ in range(runs)) / runs


@pytest.mark.parametrize("lam, expected", [(1.0, 0.5), (3.0, 0.75)])
def test_naive_single_vertex(lam, expected):
    assert abs(_frequency_of_vertex(cftp_naive, lam) - expected) < 0.01


def test_bounded_single_vertex():
    assert abs(_frequency_of_vertex(cftp_bounded, 1.0) - 0.5) < 0.01


def test_naive_star2_uniform():
    aut = HardcoreAutomaton(star(2), 1.0)
    rng = np.random.default_rng(1)
    counts = {}
    for _ in range(RUNS):
        s = cftp_naive(aut, rng).state
        counts[s] = counts.get(s, 0) + 1
    assert len(counts) == 5
    assert all(abs(c / RUNS - 0.2) < 0.01 for c in counts.values())


def test_bounded_star4_tv():
    # compiled route of the same algorithm; the Python route is checked below at lower scale
    g = star(4)
    batch = sample(g, 2.0, "gibbs", RUNS, rng=2)
    assert tv_distance(indicator_table(batch.states), stationary_distribution(g, 2.0)) <= 0.02


def test_bounded_python_route_star2():
    g = star(2)
    aut = HardcoreAutomaton(g, 2.0)
    rng = np.random.default_rng(3)
    reps = 20_000
    counts = {}
    for _ in range(reps):
        s = cftp_bounded(aut, rng).state
        counts[s] = counts.get(s, 0) + 1
    emp = {k: v / reps for k, v in counts.items()}
    pi = stationary_distribution(g, 2.0)
    assert tv_distance(emp, pi) <= tv_threshold(len(pi), reps)


@pytest.mark.parametrize("graph", [path(10), cycle(10), star(6), gnp(8, 0.3, 4)], ids=str)
@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_exactness_small_graphs(graph, lam):
    batch = sample(graph, lam, "gibbs", RUNS, rng=5)
    pi = stationary_distribution(graph, lam)
    assert tv_distance(indicator_table(batch.states), pi) <= tv_threshold(len(pi), RUNS)


def test_reuse_discipline():
    aut = HardcoreAutomaton(star(6), 5.0)
    res = cftp_bounded(aut, 9, keep_history=True)
    h = res.history
    assert len(h) == res.stats.doubling_rounds
    for r, w in enumerate(h, 1):
        assert len(w) == 2**r - 1
        if r > 1:
            assert w[-len(h[r - 2]):] == h[r - 2]
    assert len(h[-1]) == res.stats.backward_time


def test_stats_invariants():
    aut = HardcoreAutomaton(star(5), 3.0, "dg")
    rng = np.random.default_rng(6)
    for _ in range(50):
        st = cftp_bounded(aut, rng).stats
        assert st.bound_updates >= st.backward_time
        assert st.doubling_rounds == math.floor(math.log2(st.backward_time)) + 1
        assert st.letters_drawn == st.backward_time


def test_naive_stats():
    st = cftp_naive(HardcoreAutomaton(complete(2), 1.0), 0).stats
    assert st.bound_updates == 3 * st.letters_drawn
    assert st.backward_time == st.letters_drawn


@pytest.mark.parametrize("engine", [cftp_naive, cftp_bounded])
def test_determinism(engine):
    aut = HardcoreAutomaton(path(4), 2.0)
    a, b = engine(aut, 17), engine(aut, 17)
    assert a.state == b.state and a.stats == b.stats


def test_naive_unsupported_domain():
    with pytest.raises(UnsupportedDomainError):
        cftp_naive(HardcoreAutomaton(star(40), 1.0), 0)


def test_bounded_budget():
    with pytest.raises(BudgetExhausted):
        cftp_bounded(HardcoreAutomaton(star(30), 100.0), 0, max_letters=16)


def test_stats_as_dict():
    assert CftpStats(1, 2, 3, 4).as_dict() == {
        "letters_drawn": 1, "bound_updates": 2, "doubling_rounds": 3, "backward_time": 4,
    }
