"""Random machines and rule-based products for property tests and benchmarks."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .core import Machine
from .product import ProductDef
from .rules import RuleMap

__all__ = ["random_machine", "random_product"]

POOL = ("a", "b", "c")


def random_machine(
    rng: np.random.Generator,
    n_states: int,
    alphabet: Sequence = ("a", "b"),
    outputs: Sequence = ("0", "1"),
    start: Optional[int] = None,
) -> Machine:
    delta = rng.integers(0, n_states, size=(n_states, len(alphabet)))
    gamma = rng.integers(0, len(outputs), size=n_states)
    s0 = int(rng.integers(0, n_states)) if start is None else start
    return Machine(alphabet, outputs, delta, gamma, s0)


def _pattern(rng, n):
    options = ["*", "n", ">1", "<n"] + list(range(1, n + 1))
    return options[int(rng.integers(0, len(options)))]


def _matched(pattern, n):
    if pattern == "*":
        return list(range(1, n + 1))
    if pattern == "n":
        return [n]
    if pattern == ">1":
        return list(range(2, n + 1))
    if pattern == "<n":
        return list(range(1, n))
    return [pattern]


def random_product(
    rng: np.random.Generator,
    max_factors: int = 3,
    max_states: int = 4,
    max_alphabet: int = 3,
    max_rules: int = 5,
    max_emit: int = 2,
) -> ProductDef:
    """Product of small random tables wired by random first-match rules.

    Factor and composite alphabets are prefixes of ``a b c`` and factor outputs
    are drawn from the same pool, so ``out(j)`` and ``$input`` emissions are
    offered only where every matched factor can read them.
    """
    n = int(rng.integers(1, max_factors + 1))
    alphas, outs, factors = [], [], []
    for _ in range(n):
        alpha = POOL[: int(rng.integers(1, max_alphabet + 1))]
        out = POOL[: int(rng.integers(1, max_alphabet + 1))]
        factors.append(random_machine(rng, int(rng.integers(1, max_states + 1)), alpha, out))
        alphas.append(set(alpha))
        outs.append(set(out))
    composite = POOL[: int(rng.integers(1, max_alphabet + 1))]
    rules = []
    for _ in range(int(rng.integers(0, max_rules + 1))):
        pattern = _pattern(rng, n)
        targets = _matched(pattern, n)
        if not targets:
            continue
        common = set.intersection(*(alphas[i - 1] for i in targets))
        choices = sorted(common)
        choices += [f"out({j})" for j in range(1, n + 1) if outs[j - 1] <= common]
        if set(composite) <= common:
            choices.append("$input")
        emit = [choices[int(rng.integers(0, len(choices)))] for _ in range(int(rng.integers(0, max_emit + 1)))]
        guards = []
        for _ in range(int(rng.integers(0, 3))):
            j = int(rng.integers(0, n + 1))
            left = "out(i)" if j == 0 else f"out({j})"
            guards.append([left, "==" if rng.integers(0, 2) else "!=", POOL[int(rng.integers(0, len(POOL)))]])
        rule = {"factor": pattern, "input": "*" if rng.integers(0, 2) else composite[int(rng.integers(0, len(composite)))],
                "emit": emit}
        if guards:
            rule["when"] = guards
        rules.append(rule)
    return ProductDef(factors, composite, RuleMap(rules), "tuple", name="random")
