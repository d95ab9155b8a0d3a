"""Acceptance criteria 1-9, one test each.

Every test records a one-line verdict in RESULTS; the conftest hook prints
them at the end of the pytest run.  ``python3 tests/test_acceptance.py``
runs the same checks without pytest and prints the lines directly.
"""

import math
import os
import subprocess
import sys
import time
from itertools import product as cartesian

import numpy as np

sys.path.insert(0, os.path.dirname(__file__))

from oracles import (  # noqa: E402
    NetworkOracle,
    context_congruent,
    stack_cells,
    stack_empty,
    stack_full,
    stack_top,
)
from rmoore import examples, fixture_path, specfmt  # noqa: E402
from rmoore.cli import cmd_dot, cmd_monoid  # noqa: E402
from rmoore.core import Symbol, representing_function  # noqa: E402
from rmoore.minimize import equivalent, minimize  # noqa: E402
from rmoore.monoid import classify, congruent, transition_monoid  # noqa: E402
from rmoore.product import (  # noqa: E402
    ProductDef,
    binary_encode,
    check_theorem1,
    initial_state,
    is_cascade,
    step,
)
from rmoore.randgen import random_machine, random_product  # noqa: E402

FIXTURES = ["stack.json", "stack_corrupt.json", "ripple.json", "network.json", "counters.json"]
RESULTS = {}


def record(k, ok, detail):
    RESULTS[k] = (bool(ok), detail)
    assert ok, f"criterion {k}: {detail}"


def fixture_products():
    for name in FIXTURES:
        _, objs = specfmt.load(fixture_path(name))
        for target, obj in objs.items():
            if isinstance(obj, ProductDef):
                yield f"{name}:{target}", obj


# 1 ------------------------------------------------------------------------


def test_criterion_1_recursion_equals_expanded_product():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    cases = [(f"random#{k}", random_product(rng, max_factors=3, max_states=4, max_alphabet=3, max_rules=5))
             for k in range(200)]
    cases += list(fixture_products())
    divergences, words = [], 0
    for label, p in cases:
        r = check_theorem1(p, 8)
        words += r.words_checked
        if not r.ok:
            divergences.append((label, r.summary()))
    elapsed = time.perf_counter() - t0
    ok = not divergences and elapsed < 120
    record(1, ok, f"{len(cases)} products ({len(cases) - 200} from fixtures), {words} words, "
                  f"{len(divergences)} divergences, {elapsed:.1f}s")


# 2 ------------------------------------------------------------------------


def test_criterion_2_stack_matches_list_oracle():
    p = examples.make_stack(3)
    letters = ["PUSH[a]", "PUSH[b]", "POP"]
    mismatches, count = 0, 0
    # walk the word tree depth first so each prefix is stepped once
    stack = [((), initial_state(p))]
    while stack:
        w, rs = stack.pop()
        count += 1
        cells = stack_cells(w)
        y = rs.output
        got = (str(examples.stack_top(y)), examples.stack_empty(y), examples.stack_full(y))
        want = (stack_top(cells), stack_empty(cells), stack_full(cells))
        mismatches += got != want
        if len(w) < 7:
            for a in letters:
                stack.append((w + (a,), step(p, rs, a)))
    expected = sum(3**k for k in range(8))
    record(2, mismatches == 0 and count == expected,
           f"{count} words (expected {expected}), {mismatches} Top/Empty/Full mismatches")


# 3 ------------------------------------------------------------------------


def test_criterion_3_ripple_is_counter_mod_power_of_two():
    selected = examples.select_ripple_reading(4)
    reading = examples.DEFAULT_RIPPLE_READING
    same = {n: bool(equivalent(minimize(examples.ripple_value(n, reading)),
                               minimize(examples.make_counter(2**n))))
            for n in (1, 2, 3, 4)}
    rejected = [r for r in examples.RIPPLE_READINGS if r != reading]
    rejected_fail = {r: not equivalent(minimize(examples.ripple_value(2, r)), minimize(examples.make_counter(4)))
                     for r in rejected}
    ok = all(same.values()) and selected[reading] is None and all(rejected_fail.values())
    record(3, ok, f"reading={reading!r} H_n == T_2^n for n=1..4: {same}; "
                  f"rejected reading fails n=2: {rejected_fail}; brute-force selection {selected}")


# 4 ------------------------------------------------------------------------


def test_criterion_4_minimization():
    sizes = {n: minimize(examples.make_counter(n)).n_states for n in range(1, 9)}
    rng = np.random.default_rng(4)
    not_idempotent = bad_witness = witnesses = 0
    for _ in range(100):
        n = int(rng.integers(1, 21))
        k = int(rng.integers(1, 4))
        m = random_machine(rng, n, ["a", "b", "c"][:k], ["0", "1", "2"][: int(rng.integers(1, 4))])
        mm = minimize(m)
        again = minimize(mm.machine)
        if not (np.array_equal(again.machine.delta, mm.machine.delta)
                and np.array_equal(again.machine.gamma, mm.machine.gamma)
                and again.machine.start == mm.machine.start):
            not_idempotent += 1
        q = mm.machine
        for (s, t), w in mm.witnesses().items():
            witnesses += 1
            if q.output(q.run(s, w)) is q.output(q.run(t, w)):
                bad_witness += 1
    ok = all(sizes[n] == n for n in sizes) and not not_idempotent and not bad_witness
    record(4, ok, f"|min T_n| = {list(sizes.values())}; {not_idempotent}/100 not idempotent; "
                  f"{bad_witness}/{witnesses} witnesses fail on replay")


# 5 ------------------------------------------------------------------------


def test_criterion_5_monoid():
    groups = {}
    for n in (2, 3, 5, 8):
        c = classify(transition_monoid(examples.make_counter(n)))
        groups[n] = (c.element_count, c.is_group)
    cells = {}
    for k in (1, 2, 3):
        c = classify(transition_monoid(examples.make_cell(["a", "b", "c"][:k], "EMPTY")))
        cells[k] = (c.element_count, c.is_aperiodic)
    rng = np.random.default_rng(5)
    letters = [Symbol("a"), Symbol("b")]
    disagree = congruent_pairs = 0
    for _ in range(50):
        m = random_machine(rng, int(rng.integers(1, 5)), ["a", "b"], ["0", "1"])
        f = representing_function(m)
        for _ in range(10):
            w = tuple(letters[i] for i in rng.integers(0, 2, size=int(rng.integers(0, 5))))
            u = tuple(letters[i] for i in rng.integers(0, 2, size=int(rng.integers(0, 5))))
            got = congruent(m, w, u)
            congruent_pairs += got
            disagree += got != context_congruent(f, w, u, letters, 4)
    ok = (all(groups[n] == (n, True) for n in groups)
          and all(cells[k] == (k + 1, True) for k in cells)
          and disagree == 0)
    record(5, ok, f"T_n (elements, group) {groups}; cell (elements, aperiodic) {cells}; "
                  f"congruent vs context oracle: {disagree}/500 disagreements ({congruent_pairs} congruent pairs)")


# 6 ------------------------------------------------------------------------


def test_criterion_6_binary_encoding():
    rng = np.random.default_rng(6)
    wrong_count = not_equal = 0
    for _ in range(50):
        n = int(rng.integers(2, 13))
        m = random_machine(rng, n, ["a", "b", "c"][: int(rng.integers(1, 4))], ["0", "1", "2"])
        p = binary_encode(m)
        wrong_count += p.n != math.ceil(math.log2(n))
        not_equal += not equivalent(p, m, bound=8)
    record(6, not wrong_count and not not_equal,
           f"50 machines: {wrong_count} wrong factor counts, {not_equal} bounded-equivalence failures")


# 7 ------------------------------------------------------------------------


def test_criterion_7_cascade_detection():
    rows = {}
    for n in (2, 3, 4):
        ripple = is_cascade(examples.make_ripple(n))
        stack = is_cascade(examples.make_stack(n))
        rows[n] = (ripple.is_cascade, stack.is_cascade,
                   all((i, i + 1) in stack.offenders for i in range(1, n)))
    ok = all(r == (True, False, True) for r in rows.values())
    record(7, ok, f"n -> (G_n cascade, stack cascade, (i,i+1) offenders reported): {rows}")


# 8 ------------------------------------------------------------------------


def _outboxes(messages=("m1", "m2"), capacity=2):
    boxes = [()]
    for k in range(1, capacity + 1):
        boxes += list(cartesian(messages, repeat=k))
    return boxes


def test_criterion_8_network_delivery():
    cfg = examples.NetworkConfig()
    nodes = {b: examples.make_node(cfg.messages, cfg.capacity, b) for b in _outboxes(cfg.messages, cfg.capacity)}
    runs = deliveries = violations = oracle_mismatch = 0
    for grant in (1, 2, 3):
        for boxes in cartesian(list(nodes), repeat=3):
            c = examples.NetworkConfig(initial=boxes, start_grant=grant)
            p = examples.make_network(c, [nodes[b] for b in boxes])
            oracle = NetworkOracle(boxes, cfg.capacity, grant)
            rs = initial_state(p)
            runs += 1
            for _ in range(6):
                before = rs.outputs
                sender = int(before[3].params[0].name)
                offered = before[sender - 1].params[0]
                rs = step(p, rs, "TICK")
                got = []
                for i in range(3):
                    z = rs.emitted[i]
                    if z and z[0].name == "RECV":
                        m = z[0].params[0]
                        got.append((i + 1, m.name))
                        deliveries += 1
                        if m is not offered or m.name == "NULL":
                            violations += 1
                        if before[i].params[1] is not examples.READY:
                            violations += 1
                oracle_mismatch += sorted(got) != sorted(oracle.tick())
                oracle_mismatch += str(rs.output) != oracle.output()
    record(8, violations == 0 and oracle_mismatch == 0,
           f"{runs} schedules x 6 ticks: {deliveries} RECV deliveries, {violations} violations, "
           f"{oracle_mismatch} disagreements with the delivery oracle")


# 9 ------------------------------------------------------------------------


def test_criterion_9_tooling_determinism():
    not_exact = [n for n in FIXTURES
                 if specfmt.render(specfmt.parse(fixture_path(n).read_text(encoding="utf-8")))
                 != fixture_path(n).read_text(encoding="utf-8")]
    targets = [("stack.json", "stack3"), ("counters.json", "t5"), ("counters.json", "cell"),
               ("ripple.json", "ripple3"), ("network.json", "network")]
    unstable = []
    for name, target in targets:
        path = str(fixture_path(name))
        if cmd_dot(path, target) != cmd_dot(path, target) or cmd_monoid(path, target) != cmd_monoid(path, target):
            unstable.append(f"{name}:{target}")
    # separate interpreters with different string-hash seeds
    cross = []
    for cmd in ("dot", "monoid"):
        outs = set()
        for seed in ("0", "12345"):
            env = dict(os.environ, PYTHONHASHSEED=seed)
            res = subprocess.run([sys.executable, "-m", "rmoore.cli", cmd, str(fixture_path("stack.json")), "stack3"],
                                 capture_output=True, text=True, env=env)
            outs.add((res.returncode, res.stdout))
        if len(outs) != 1:
            cross.append(cmd)
    ok = not not_exact and not unstable and not cross
    record(9, ok, f"round-trip failures {not_exact}; unstable in-process {unstable}; unstable across processes {cross}")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted((k, v) for k, v in globals().items() if k.startswith("test_criterion_")):
        try:
            fn()
        except AssertionError:
            failed += 1
        k = int(name.split("_")[2])
        ok, detail = RESULTS.get(k, (False, "did not run to completion"))
        print(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
    sys.exit(1 if failed else 0)
