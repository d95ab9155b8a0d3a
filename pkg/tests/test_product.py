import math
from itertools import product as cartesian

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rmoore import product as P
from rmoore.core import Machine, Symbol, representing_function, word
from rmoore.errors import (
    AlphabetMismatchError,
    BudgetExceededError,
    InfiniteMachineError,
    OpaqueMapError,
    UnknownSymbolError,
)
from rmoore.examples import make_counter, make_length, make_ripple, make_stack
from rmoore.minimize import equivalent, minimize
from rmoore.product import (
    ProductDef,
    binary_encode,
    check_theorem1,
    expand_product,
    initial_state,
    is_cascade,
    product_function,
    recursion_eval,
    recursion_machine,
    step,
)
from rmoore.randgen import random_machine, random_product

S = Symbol.parse


def words_upto(alphabet, n):
    for k in range(n + 1):
        yield from cartesian(list(alphabet), repeat=k)


def u_oracle(p, w):
    """u_i by the defining recursion, recomputing every f_i(u_i) from scratch."""
    fs = [representing_function(f) if not isinstance(f, ProductDef) else product_function(f) for f in p.factors]
    us = [()] * p.n
    for a in w:
        xs = tuple(f(u) for f, u in zip(fs, us))
        us = [u + tuple(p.g(i + 1, a, xs)) for i, u in enumerate(us)]
    xs = tuple(f(u) for f, u in zip(fs, us))
    return us, p.h(xs)


@given(st.integers(0, 2**32 - 1))
def test_recursion_matches_defining_equations(seed):
    rng = np.random.default_rng(seed)
    p = random_product(rng)
    for w in words_upto(p.alphabet, 4):
        rs = initial_state(p, track_words=True)
        for a in w:
            rs = step(p, rs, a)
        us, y = u_oracle(p, w)
        assert list(rs.words) == us
        assert rs.lengths == tuple(len(u) for u in us)
        assert rs.output is y
        assert recursion_eval(p, w) is y


def stack_oracle(w, depth=3):
    cells = ["EMPTY"] * depth
    for a in w:
        if a.name == "PUSH":
            cells = [a.params[0].name] + cells[:-1]
        else:
            cells = cells[1:] + ["EMPTY"]
    return S("TUPLE[" + ",".join(cells) + "]")


def test_stack_frozen_values():
    p = make_stack(3)
    assert recursion_eval(p, "PUSH[a] PUSH[b]") is S("TUPLE[b,a,EMPTY]")
    assert recursion_eval(p, "PUSH[a] PUSH[b] POP") is S("TUPLE[a,EMPTY,EMPTY]")
    assert recursion_eval(p, "POP POP") is S("TUPLE[EMPTY,EMPTY,EMPTY]")
    assert recursion_eval(p, "PUSH[a] PUSH[b] PUSH[b] PUSH[a]") is S("TUPLE[a,b,b]")
    for w in words_upto(p.alphabet, 4):
        assert recursion_eval(p, w) is stack_oracle(w)


def test_expand_product_layout():
    p = make_stack(2)
    m = expand_product(p)
    assert m.n_states == 9
    # factor 1 most significant: index of (s1, s2) is 3*s1 + s2
    assert m.start == 0 and m.state_name(0) == "(EMPTY,EMPTY)"
    assert m.state_name(3 * 1 + 2) == "(a,b)"
    assert representing_function(m)("PUSH[b] PUSH[a]") is S("TUPLE[a,b]")


def test_zero_factor_product():
    p = ProductDef([], ["x"], [], lambda xs: "k")
    assert recursion_eval(p, "x x") is S("k")
    assert expand_product(p).n_states == 1
    assert check_theorem1(p, 3).ok


def test_single_factor_identity():
    t3 = make_counter(3)
    p = ProductDef([t3], ["tick"], [{"factor": 1, "input": "$x", "emit": ["$x"]}], {"project": 1})
    assert equivalent(p, t3)
    assert check_theorem1(p, 8).words_checked == 9


def test_emission_outside_factor_alphabet():
    p = ProductDef([make_counter(2)], ["tick"], lambda i, a, xs: ["tock"])
    with pytest.raises(AlphabetMismatchError):
        recursion_eval(p, "tick")


def test_literal_rule_checked_at_construction():
    with pytest.raises(AlphabetMismatchError):
        ProductDef([make_counter(2)], ["tick"], [{"factor": 1, "emit": ["tock"]}])


def test_unknown_composite_symbol():
    with pytest.raises(UnknownSymbolError):
        recursion_eval(make_stack(2), "PUSH[c]")


def test_nested_product_factor():
    inner = make_stack(2)
    outer = ProductDef([inner, make_counter(2, inner.alphabet)], inner.alphabet,
                       [{"factor": "*", "input": "$x", "emit": ["$x"]}])
    for w in words_upto(inner.alphabet, 3):
        y = recursion_eval(outer, w)
        assert y.params[0] is recursion_eval(inner, w)
        assert y.params[1] is S(str(len(w) % 2))
    assert check_theorem1(outer, 4).ok


def test_generator_factor_runs_but_does_not_expand():
    length = make_length(["a"])
    p = ProductDef([length], ["a"], [{"factor": 1, "emit": ["a", "a"]}], {"project": 1})
    assert recursion_eval(p, "a a a") is S("6")
    with pytest.raises(InfiniteMachineError):
        expand_product(p)
    with pytest.raises(InfiniteMachineError):
        check_theorem1(p, 3)


def test_expansion_budget(monkeypatch):
    monkeypatch.setattr(P, "MAX_EXPANDED_STATES", 8)
    with pytest.raises(BudgetExceededError):
        expand_product(make_stack(2))


def test_check_theorem1_reports_minimal_counterexample(monkeypatch):
    p = make_stack(2)
    good = expand_product(p)
    gamma = good.gamma.copy()
    bad_state = good.run(good.start, word("PUSH[b] POP PUSH[b]"))
    gamma[bad_state] = good.gamma[good.start]
    broken = Machine(good.alphabet, good.outputs, good.delta, gamma, good.start)
    monkeypatch.setattr(P, "expand_product", lambda _: broken)
    r = check_theorem1(p, 5)
    assert not r.ok
    # shortlex-least word reaching (b, EMPTY) is PUSH[b]
    assert r.counterexample == word("PUSH[b]")
    assert r.recursion_output is S("TUPLE[b,EMPTY]")
    assert "diverge on PUSH[b]" in r.summary()


def test_check_theorem1_budget():
    with pytest.raises(BudgetExceededError):
        check_theorem1(make_stack(2), 10, budget=100)


def test_recursion_machine_agrees_with_expansion():
    p = make_stack(3)
    # reachable stacks are filled from the top: sum of 2**k for k = 0..3
    assert recursion_machine(p).n_states == 15
    assert equivalent(recursion_machine(p), expand_product(p))
    assert minimize(recursion_machine(p)).n_states == minimize(p).n_states


@pytest.mark.parametrize("n", [2, 3, 4])
def test_cascade_detection(n):
    assert is_cascade(make_ripple(n)).is_cascade
    rep = is_cascade(make_stack(n))
    assert not rep
    assert all((i, i + 1) in rep.offenders for i in range(1, n))
    assert rep.dependencies[1] == [2]


def test_cascade_opaque_map():
    p = ProductDef([make_counter(2)], ["tick"], lambda i, a, xs: [a])
    with pytest.raises(OpaqueMapError):
        is_cascade(p)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 8, 9, 12])
def test_binary_encode_counter(n):
    m = make_counter(n, ["a", "b"])
    p = binary_encode(m)
    assert p.n == (math.ceil(math.log2(n)) if n > 1 else 0)
    assert equivalent(p, m)


def test_binary_encode_nonzero_start(rng):
    m = random_machine(rng, 7, ["a", "b"], ["x", "y", "z"], start=5)
    p = binary_encode(m)
    assert p.n == 3
    assert equivalent(p, m, bound=8)
    assert equivalent(p, m)
