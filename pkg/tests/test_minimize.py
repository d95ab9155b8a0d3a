from itertools import product as cartesian

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rmoore.core import Machine, representing_function
from rmoore.errors import AlphabetMismatchError, InfiniteMachineError
from rmoore.examples import make_cell, make_counter, make_length, make_stack
from rmoore.minimize import equivalent, minimize, reachable
from rmoore.randgen import random_machine


def words_upto(k, n):
    for m in range(n + 1):
        yield from cartesian(range(k), repeat=m)


def classes_oracle(m):
    """Myhill-Nerode classes of reachable states by output signatures."""
    reach = {m.start}
    frontier = [m.start]
    while frontier:
        s = frontier.pop()
        for t in m.delta[s]:
            if int(t) not in reach:
                reach.add(int(t))
                frontier.append(int(t))
    k = m.delta.shape[1]
    tests = list(words_upto(k, m.n_states))

    def sig(s):
        out = []
        for w in tests:
            t = s
            for j in w:
                t = m.delta[t, j]
            out.append(int(m.gamma[t]))
        return tuple(out)

    return len(reach), len({sig(s) for s in reach})


def test_counter_and_cell_sizes():
    for n in range(1, 9):
        assert minimize(make_counter(n)).n_states == n
    # EMPTY is both the initial value and a writable letter
    assert minimize(make_cell()).n_states == 3


def test_stack_minimizes_to_reachable_configs():
    assert minimize(make_stack(3)).n_states == 15


def test_redundant_states_merge():
    # two copies of a 2-cycle
    m = Machine(["t"], ["0", "1"], [[1], [2], [3], [0]], [0, 1, 0, 1])
    mm = minimize(m)
    assert mm.n_states == 2
    assert mm.class_of.tolist() == [0, 1, 0, 1]


def test_unreachable_states_dropped():
    m = Machine(["t"], ["0", "1", "2"], [[0], [1]], [0, 2])
    r = reachable(m)
    assert r.n_states == 1 and len(r.outputs) == 1
    assert minimize(m).class_of.tolist() == [0, -1]


@given(st.integers(0, 2**32 - 1), st.integers(1, 7), st.integers(1, 3))
def test_minimize_matches_nerode_oracle(seed, n, k):
    m = random_machine(np.random.default_rng(seed), n, ["a", "b", "c"][:k], ["0", "1"])
    n_reach, n_classes = classes_oracle(m)
    assert reachable(m).n_states == n_reach
    mm = minimize(m)
    assert mm.n_states == n_classes
    assert equivalent(mm, m)


@given(st.integers(0, 2**32 - 1), st.integers(2, 12))
def test_witnesses_distinguish_and_are_shortest(seed, n):
    m = random_machine(np.random.default_rng(seed), n, ["a", "b"], ["0", "1", "2"])
    mm = minimize(m)
    q = mm.machine
    for (s, t), w in mm.witnesses().items():
        assert q.output(q.run(s, w)) is not q.output(q.run(t, w))
        # no shorter word separates them
        for short in words_upto(2, len(w) - 1):
            ws = [q.alphabet[j] for j in short]
            assert q.output(q.run(s, ws)) is q.output(q.run(t, ws))


def test_minimized_numbering_is_bfs_order():
    m = Machine(["a", "b"], ["x", "y", "z"], [[2, 1], [1, 1], [0, 0]], [0, 1, 2], 0)
    q = minimize(m).machine
    assert q.delta.tolist() == [[1, 2], [0, 0], [2, 2]]
    assert [str(q.output(s)) for s in q.states] == ["x", "z", "y"]


def test_equivalent_counterexample_is_shortest():
    a = make_counter(4)
    b = make_counter(2)
    eq = equivalent(a, b)
    assert not eq
    assert len(eq.counterexample) == 2
    assert [str(y) for y in eq.outputs] == ["2", "0"]


def test_equivalent_alphabet_order_irrelevant():
    m1 = make_counter(3, ["x", "y"])
    m2 = make_counter(3, ["y", "x"])
    assert equivalent(m1, m2)
    with pytest.raises(AlphabetMismatchError):
        equivalent(m1, make_counter(3, ["x"]))


def test_equivalent_bounded_and_infinite():
    assert equivalent(make_counter(8), make_counter(16), bound=7)
    assert not equivalent(make_counter(8), make_counter(16), bound=8)
    length = make_length(["tick"])
    with pytest.raises(InfiniteMachineError):
        equivalent(length, make_counter(5))
    assert equivalent(length, make_counter(5), bound=4)
    eq = equivalent(length, make_counter(5), bound=9)
    assert not eq and len(eq.counterexample) == 5
    with pytest.raises(InfiniteMachineError):
        minimize(length)


@pytest.mark.parametrize("n", [3, 7])
def test_minimize_is_idempotent(rng, n):
    for _ in range(10):
        mm = minimize(random_machine(rng, n, ["a", "b"], ["0", "1"]))
        again = minimize(mm.machine).machine
        assert np.array_equal(again.delta, mm.machine.delta)
        assert np.array_equal(again.gamma, mm.machine.gamma)


def test_backends_give_identical_minimization(rng, backend):
    m = random_machine(rng, 40, ["a", "b", "c"], ["0", "1"])
    mm = minimize(m)
    f, g = representing_function(m), representing_function(mm.machine)
    for w in [(), ("a",), ("a", "b", "c", "a")]:
        assert f(w) is g(w)
