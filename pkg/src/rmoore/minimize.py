"""Reachable-part extraction, observational minimization and equivalence."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .core import Machine, representing_function
from .errors import AlphabetMismatchError, InfiniteMachineError
from .product import as_finite_machine

__all__ = ["reachable", "minimize", "MinimizedMachine", "equivalent", "Equivalence"]


def _finite(m) -> Machine:
    return as_finite_machine(m)


def _restrict(m: Machine, order: np.ndarray) -> Machine:
    new_id = np.full(m.n_states, -1, dtype=np.int64)
    new_id[order] = np.arange(order.shape[0])
    delta = new_id[m.delta[order]]
    used = np.unique(m.gamma[order])
    outs = [m.outputs[int(x)] for x in used]
    remap = np.full(len(m.outputs), -1, dtype=np.int64)
    remap[used] = np.arange(used.shape[0])
    names = [m.state_name(int(s)) for s in order] if m.state_names else None
    return Machine(m.alphabet, outs, delta, remap[m.gamma[order]], 0, names)


def reachable(m) -> Machine:
    """Restrict ``m`` to the states reachable from start, renumbered in BFS order.

    The output alphabet keeps only outputs that some reachable state emits,
    in the original order.
    """
    m = _finite(m)
    return _restrict(m, _kernels.bfs_order(m.delta, m.start))


@dataclass
class MinimizedMachine:
    """Quotient of the reachable part of a machine by observational equivalence.

    ``class_of[s]`` is the minimized state of original state ``s`` (``-1`` if
    unreachable).  :meth:`witness` returns a shortest word distinguishing two
    minimized states.
    """

    machine: Machine
    class_of: np.ndarray
    _rounds: list = field(repr=False, default_factory=list)
    _witness_cache: dict = field(repr=False, default_factory=dict)

    @property
    def n_states(self) -> int:
        return self.machine.n_states

    @property
    def is_finite(self) -> bool:
        return True

    def witness(self, p: int, q: int) -> tuple:
        """Shortest word after which states ``p`` and ``q`` emit different outputs."""
        if p == q:
            raise ValueError("a state is not distinguishable from itself")
        key = (p, q) if p < q else (q, p)
        cached = self._witness_cache.get(key)
        if cached is not None:
            return cached
        m = self.machine
        rounds = self._rounds
        letters = []
        a, b = p, q
        r = next(r for r in range(len(rounds)) if rounds[r][a] != rounds[r][b])
        # rounds[r] separates a and b; rounds[r-1] separates some successor pair
        while r > 0:
            prev = rounds[r - 1]
            for j in range(len(m.alphabet)):
                a2, b2 = m.delta[a, j], m.delta[b, j]
                if prev[a2] != prev[b2]:
                    letters.append(m.alphabet[j])
                    a, b = int(a2), int(b2)
                    break
            r -= 1
        w = tuple(letters)
        self._witness_cache[key] = w
        return w

    def witnesses(self) -> dict:
        n = self.n_states
        return {(p, q): self.witness(p, q) for p in range(n) for q in range(p + 1, n)}


def _moore_partition(m: Machine):
    """Moore refinement seeded by outputs; returns the label history per round."""
    labels, count = _kernels.refine_round(np.zeros((m.n_states, 0), dtype=np.int64), m.gamma)
    history = [labels]
    while True:
        new, new_count = _kernels.refine_round(m.delta, labels)
        if new_count == count:
            return history
        history.append(new)
        labels, count = new, new_count


def minimize(m) -> MinimizedMachine:
    """Minimal machine with the same representing function.

    Reachable part first, then the quotient by the coarsest output-respecting
    congruence; minimized states are numbered in BFS order from start.
    """
    original = _finite(m)
    order = _kernels.bfs_order(original.delta, original.start)
    r = _restrict(original, order)
    history = _moore_partition(r)
    labels = history[-1]
    nblocks = int(labels.max()) + 1
    reps = np.full(nblocks, -1, dtype=np.int64)
    for s in range(r.n_states - 1, -1, -1):
        reps[labels[s]] = s
    quotient = Machine(
        r.alphabet,
        r.outputs,
        labels[r.delta[reps]],
        r.gamma[reps],
        int(labels[r.start]),
    )
    bfs = _kernels.bfs_order(quotient.delta, quotient.start)
    final = _restrict(quotient, bfs)
    block_to_final = np.empty(nblocks, dtype=np.int64)
    block_to_final[bfs] = np.arange(nblocks)
    class_of = np.full(original.n_states, -1, dtype=np.int64)
    class_of[order] = block_to_final[labels]
    mm = MinimizedMachine(final, class_of)
    mm._rounds = _moore_partition(final)
    return mm


@dataclass
class Equivalence:
    equal: bool
    counterexample: Optional[tuple] = None
    outputs: Optional[tuple] = None

    def __bool__(self):
        return self.equal


def _align(m1: Machine, m2: Machine):
    if not m1.alphabet.same_set(m2.alphabet):
        raise AlphabetMismatchError("machines have different input alphabets")
    cols = [m2.alphabet.index(a) for a in m1.alphabet]
    d2 = m2.delta[:, cols]
    universe = {}
    o1 = np.array([universe.setdefault(m1.outputs[g], len(universe)) for g in m1.gamma.tolist()])
    o2 = np.array([universe.setdefault(m2.outputs[g], len(universe)) for g in m2.gamma.tolist()])
    return d2, o1, o2


def equivalent(m1, m2, bound: Optional[int] = None) -> Equivalence:
    """Decide whether two machines have the same representing function.

    Exact mode (``bound=None``) explores the reachable pair automaton, which is
    complete for finite machines.  With ``bound`` only words of length
    ``<= bound`` are considered; generator-backed machines need a bound.
    Counterexamples are shortest words.
    """
    try:
        a = as_finite_machine(m1)
        b = as_finite_machine(m2)
    except InfiniteMachineError:
        if bound is None:
            raise
        return _bounded_generic(m1, m2, bound)
    d2, o1, o2 = _align(a, b)
    hit, parent, via = _kernels.pair_bfs(
        a.delta, o1, a.start, d2, o2, b.start, -1 if bound is None else bound
    )
    if hit < 0:
        return Equivalence(True)
    w = tuple(a.alphabet[j] for j in _kernels.trace_path(hit, parent, via))
    fa, fb = representing_function(a), representing_function(b)
    return Equivalence(False, w, (fa(w), fb(w)))


def _bounded_generic(m1, m2, bound):
    from .product import ProductDef, product_function

    def fn(m):
        if isinstance(m, ProductDef):
            return product_function(m)
        if hasattr(m, "delta") or hasattr(m, "run"):
            return representing_function(m)
        return m

    f1, f2 = fn(m1), fn(m2)
    if not f1.alphabet.same_set(f2.alphabet):
        raise AlphabetMismatchError("machines have different input alphabets")
    queue = deque([()])
    while queue:
        w = queue.popleft()
        y1, y2 = f1(w), f2(w)
        if y1 is not y2:
            return Equivalence(False, w, (y1, y2))
        if len(w) < bound:
            queue.extend(w + (a,) for a in f1.alphabet)
    return Equivalence(True)

