"""General products of Moore machines with feedback.

A product runs ``n`` factors side by side.  On composite input ``a`` every
factor ``i`` consumes the word ``g(i, a, xs)``, where ``xs`` are the factor
outputs *before* the step, and the composite output is ``h(xs)``.

Two evaluation routes are provided and cross-checked by
:func:`check_theorem1`:

* :func:`recursion_eval` / :func:`step` keep one cursor per factor and never
  build the product state set;
* :func:`expand_product` builds the explicit product machine over the full
  Cartesian state set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (
    Alphabet,
    GeneratorMachine,
    Machine,
    StringFunction,
    Symbol,
    _sym,
    show_word,
    word,
)
from .errors import (
    AlphabetMismatchError,
    BudgetExceededError,
    InfiniteMachineError,
    OpaqueMapError,
    UnknownSymbolError,
)
from .rules import (
    ConnectionRule,
    FunctionMap,
    Guard,
    IndexExpr,
    FactorPattern,
    LookupOutput,
    RuleMap,
    as_output_map,
)

__all__ = [
    "ProductDef",
    "RecursionState",
    "initial_state",
    "step",
    "recursion_eval",
    "product_function",
    "expand_product",
    "recursion_machine",
    "check_theorem1",
    "Theorem1Report",
    "is_cascade",
    "CascadeReport",
    "binary_encode",
    "as_finite_machine",
]

MAX_EXPANDED_STATES = 5_000_000


# ------------------------------------------------------------ factor adapters
# Each adapter exposes initial(), advance(cursor, word) and output(cursor).
# Cursors must be hashable so the recursion's reachable graph can be tabulated.


class _TableRunner:
    def __init__(self, m: Machine):
        self.m = m
        self.alphabet = m.alphabet
        self._rows = m.delta.tolist()
        self._outs = [m.outputs[g] for g in m.gamma.tolist()]
        self._col = {a: j for j, a in enumerate(m.alphabet)}

    def initial(self):
        return self.m.start

    def advance(self, s, z):
        rows, col = self._rows, self._col
        for a in z:
            s = rows[s][col[a]]
        return s

    def output(self, s):
        return self._outs[s]

    def describe(self, s):
        return self.m.state_name(s)


class _GeneratorRunner:
    def __init__(self, m: GeneratorMachine):
        self.m = m
        self.alphabet = m.alphabet

    def initial(self):
        return self.m.start

    def advance(self, s, z):
        return self.m.run(s, z)

    def output(self, s):
        return self.m.output(s)

    def describe(self, s):
        return str(s)


class _WordRunner:
    """Fallback for a bare string function: the cursor is the accumulated word."""

    def __init__(self, f: StringFunction):
        self.f = f
        self.alphabet = f.alphabet

    def initial(self):
        return ()

    def advance(self, u, z):
        return u + tuple(z)

    def output(self, u):
        return self.f._fn(u)

    def describe(self, u):
        return show_word(u)


class _ProductRunner:
    def __init__(self, p: "ProductDef"):
        self.p = p
        self.alphabet = p.alphabet

    def initial(self):
        return tuple(r.initial() for r in self.p._runners)

    def advance(self, cursors, z):
        p = self.p
        for a in z:
            xs = p._outputs(cursors)
            cursors, _ = p._advance(cursors, xs, a)
        return cursors

    def output(self, cursors):
        return self.p._h(self.p._outputs(cursors))

    def describe(self, cursors):
        return "(" + ",".join(r.describe(c) for r, c in zip(self.p._runners, cursors)) + ")"


def _runner(f):
    if isinstance(f, ProductDef):
        return _ProductRunner(f)
    if isinstance(f, Machine):
        return _TableRunner(f)
    if isinstance(f, GeneratorMachine):
        return _GeneratorRunner(f)
    if isinstance(f, StringFunction):
        if f.machine is not None:
            return _runner(f.machine)
        return _WordRunner(f)
    raise TypeError(f"cannot use {f!r} as a product factor")


class ProductDef:
    """Factors, composite alphabet, connection map ``g`` and output map ``h``.

    Factors are 1-indexed in rules, matching ``g(i, a, xs)``.  ``g`` is a
    :class:`RuleMap`, a list of rules, or any callable; ``h`` is an output
    selector (``"tuple"``, ``{"project": i}``, ``{"weighted_sum": b}``,
    ``{"table": ...}``) or a callable on the output tuple.  ``reference``
    optionally names another target expected to behave identically.
    """

    def __init__(self, factors: Sequence, alphabet, g, h="tuple", name: Optional[str] = None,
                 reference: Optional[str] = None):
        self.factors = tuple(factors)
        self.alphabet = alphabet if isinstance(alphabet, Alphabet) else Alphabet(alphabet)
        self.name = name
        self.reference = reference
        if isinstance(g, RuleMap):
            g = RuleMap(g.rules)
        elif isinstance(g, (list, tuple)):
            g = RuleMap(g)
        elif not isinstance(g, FunctionMap):
            if not callable(g):
                raise TypeError("g must be a rule list, RuleMap or callable")
            g = FunctionMap(g)
        self._runners = tuple(_runner(f) for f in self.factors)
        self.g = g.bind(len(self.factors), [r.alphabet for r in self._runners])
        self.h = as_output_map(h)
        self._g_cache: dict = {}
        self._h_cache: dict = {}

    @property
    def n(self) -> int:
        return len(self.factors)

    def __repr__(self):
        return f"<ProductDef {self.name or ''} n={self.n} |A|={len(self.alphabet)}>".replace("  ", " ")

    # -- cached primitives used by both step() and the nested-factor runner

    def _emission(self, i, a, xs):
        key = (i, a, xs)
        z = self._g_cache.get(key)
        if z is None:
            z = tuple(self.g(i, a, xs))
            alpha = self._runners[i - 1].alphabet
            for s in z:
                if s not in alpha:
                    raise AlphabetMismatchError(
                        f"g({i}, {a}, ...) emitted {s}, which is not in factor {i}'s alphabet"
                    )
            if len(self._g_cache) > 1_000_000:
                self._g_cache.clear()
            self._g_cache[key] = z
        return z

    def _h(self, xs):
        y = self._h_cache.get(xs)
        if y is None:
            y = _sym(self.h(xs))
            self._h_cache[xs] = y
        return y

    def _outputs(self, cursors):
        return tuple(r.output(c) for r, c in zip(self._runners, cursors))

    def _advance(self, cursors, xs, a):
        emitted = tuple(self._emission(i, a, xs) for i in range(1, self.n + 1))
        new = tuple(r.advance(c, z) for r, c, z in zip(self._runners, cursors, emitted))
        return new, emitted


@dataclass(frozen=True)
class RecursionState:
    """Per-factor cursors after some word ``w`` plus what the recursion tracks.

    ``lengths[i]`` is ``len(u_i(w))``; ``words`` holds the ``u_i`` themselves
    when tracking was requested; ``emitted`` is what the last step appended.
    """

    cursors: tuple
    outputs: tuple
    output: Symbol
    lengths: tuple
    emitted: tuple = ()
    words: Optional[tuple] = None
    steps: int = 0


def initial_state(p: ProductDef, track_words: bool = False) -> RecursionState:
    cursors = tuple(r.initial() for r in p._runners)
    xs = p._outputs(cursors)
    return RecursionState(
        cursors,
        xs,
        p._h(xs),
        (0,) * p.n,
        (),
        ((),) * p.n if track_words else None,
        0,
    )


def step(p: ProductDef, rs: RecursionState, a) -> RecursionState:
    """Extend the recursion by one composite input symbol."""
    a = _sym(a)
    if a not in p.alphabet:
        raise UnknownSymbolError(a, p.alphabet.symbols)
    cursors, emitted = p._advance(rs.cursors, rs.outputs, a)
    xs = p._outputs(cursors)
    lengths = tuple(n + len(z) for n, z in zip(rs.lengths, emitted))
    words = None
    if rs.words is not None:
        words = tuple(u + z for u, z in zip(rs.words, emitted))
    return RecursionState(cursors, xs, p._h(xs), lengths, emitted, words, rs.steps + 1)


def recursion_eval(p: ProductDef, w) -> Symbol:
    rs = initial_state(p)
    for a in word(w):
        rs = step(p, rs, a)
    return rs.output


def product_function(p: ProductDef) -> StringFunction:
    """The string function defined by the simultaneous recursion."""
    return StringFunction(p.alphabet, lambda w: recursion_eval(p, w), name=p.name)


# -------------------------------------------------------------- expansion


def as_finite_machine(f) -> Machine:
    """Finite table for a machine, finite string function, or product of finite factors."""
    if isinstance(f, Machine):
        return f
    if isinstance(f, ProductDef):
        return expand_product(f)
    if isinstance(f, StringFunction) and isinstance(f.machine, Machine):
        return f.machine
    if hasattr(f, "machine") and isinstance(f.machine, Machine):  # MinimizedMachine
        return f.machine
    raise InfiniteMachineError(f"{f!r} has no finite table")


def expand_product(p: ProductDef) -> Machine:
    """Build the explicit product machine over the full Cartesian state set.

    State ``(s_1, ..., s_n)`` gets the mixed-radix index with factor 1 most
    significant; unreachable tuples are kept.
    """
    machines = [as_finite_machine(f) for f in p.factors]
    sizes = tuple(m.n_states for m in machines)
    total = math.prod(sizes)
    if total > MAX_EXPANDED_STATES:
        raise BudgetExceededError(f"product has {total} states, over the {MAX_EXPANDED_STATES} limit")
    k = len(p.alphabet)
    if not machines:
        y = p._h(())
        return Machine(p.alphabet, [y], [[0] * k], [0], 0, ["()"])

    comps = np.unravel_index(np.arange(total, dtype=np.int64), sizes)
    out_ids = np.stack([m.gamma[c] for m, c in zip(machines, comps)], axis=1)
    groups, inverse = np.unique(out_ids, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    col = [{a: j for j, a in enumerate(m.alphabet)} for m in machines]

    delta = np.empty((total, k), dtype=np.int64)
    group_out = []
    for gi, ids in enumerate(groups):
        xs = tuple(m.outputs[int(x)] for m, x in zip(machines, ids))
        group_out.append(p._h(xs))
        members = np.flatnonzero(inverse == gi)
        for j, a in enumerate(p.alphabet):
            new = []
            for i, m in enumerate(machines):
                z = p._emission(i + 1, a, xs)
                c = comps[i][members]
                for sym in z:
                    c = m.delta[c, col[i][sym]]
                new.append(c)
            delta[members, j] = np.ravel_multi_index(new, sizes)

    state_out = [group_out[g] for g in inverse.tolist()]
    outs = Alphabet(dict.fromkeys(state_out))
    out_index = {y: i for i, y in enumerate(outs)}
    gamma = np.array([out_index[y] for y in state_out], dtype=np.int64)
    start = int(np.ravel_multi_index(tuple(m.start for m in machines), sizes))
    names = None
    if total <= 100_000:
        labels = [[m.state_name(s) for s in range(m.n_states)] for m in machines]
        names = [
            "(" + ",".join(labels[i][int(c[t])] for i, c in enumerate(comps)) + ")"
            for t in range(total)
        ]
    return Machine(p.alphabet, outs, delta, gamma, start, names)


def recursion_machine(p: ProductDef, max_states: int = 1_000_000) -> Machine:
    """Tabulate the recursion's reachable cursor graph (no product state set involved)."""

    def nxt(cursors, a):
        return p._advance(cursors, p._outputs(cursors), a)[0]

    def out(cursors):
        return p._h(p._outputs(cursors))

    start = tuple(r.initial() for r in p._runners)
    return Machine.from_function(p.alphabet, start, nxt, out, max_states)


# ------------------------------------------------------------ recursion vs expansion


@dataclass
class Theorem1Report:
    ok: bool
    words_checked: int
    max_len: int
    counterexample: Optional[tuple] = None
    recursion_output: Optional[Symbol] = None
    product_output: Optional[Symbol] = None

    def __bool__(self):
        return self.ok

    def summary(self) -> str:
        if self.ok:
            return f"agree on {self.words_checked} words of length <= {self.max_len}"
        return (
            f"diverge on {show_word(self.counterexample)}: recursion gives "
            f"{self.recursion_output}, expanded product gives {self.product_output}"
        )


def _enumeration_size(k: int, max_len: int) -> int:
    return sum(k**n for n in range(max_len + 1))


def check_theorem1(p: ProductDef, max_len: int, budget: int = 5_000_000) -> Theorem1Report:
    """Compare the recursion with the expanded product on every word up to ``max_len``.

    Words are visited in length-lexicographic order (alphabet order within a
    length), so the first divergence reported is a minimal counterexample.
    """
    m = expand_product(p)
    letters = list(p.alphabet)
    k = len(letters)
    level_states = np.array([m.start], dtype=np.int64)
    level_rec = [initial_state(p)]
    checked = 0
    for length in range(max_len + 1):
        if length:
            level_states = m.delta[level_states].reshape(-1)
            level_rec = [step(p, rs, a) for rs in level_rec for a in letters]
        if checked + len(level_rec) > budget:
            raise BudgetExceededError(
                f"checking length {length} would exceed the budget of {budget} words "
                f"({checked} checked so far)",
                checked=checked,
            )
        expected = m.gamma[level_states].tolist()
        for idx, rs in enumerate(level_rec):
            y = m.outputs[expected[idx]]
            if rs.output is not y:
                return Theorem1Report(False, checked + idx + 1, max_len, _nth_word(letters, length, idx), rs.output, y)
        checked += len(level_rec)
        if k == 0:
            break
    return Theorem1Report(True, checked, max_len)


def _nth_word(letters, length, idx):
    k = len(letters)
    out = []
    for _ in range(length):
        idx, r = divmod(idx, k)
        out.append(letters[r])
    return tuple(reversed(out))


# ------------------------------------------------------------ cascades


@dataclass
class CascadeReport:
    is_cascade: bool
    offenders: list
    dependencies: dict

    def __bool__(self):
        return self.is_cascade


def is_cascade(p: ProductDef) -> CascadeReport:
    """True iff every factor's rules read only the outputs of lower-indexed factors.

    Both guards and ``out(k)`` emissions count as reads.  Offenders are
    ``(i, j)`` pairs where factor ``i`` reads factor ``j >= i``.
    """
    if not getattr(p.g, "inspectable", False):
        raise OpaqueMapError("connection map is opaque code; fall back to behavioural testing")
    deps = {i: sorted(p.g.dependencies(i)) for i in range(1, p.n + 1)}
    offenders = [(i, j) for i, js in deps.items() for j in js if j >= i]
    return CascadeReport(not offenders, offenders, deps)


# ------------------------------------------------------------ binary encoding

_BITS = Alphabet(["0", "1"])


def _bit_factor() -> Machine:
    # input b sets the stored bit to b
    return Machine(_BITS, _BITS, [[0, 1], [0, 1]], [0, 1], 0)


def binary_encode(m: Machine) -> ProductDef:
    """Encode ``m`` as a product of ``ceil(log2 |S|)`` two-state factors.

    Factor ``i`` stores bit ``i-1`` (least significant first) of the current
    state index.  The rule map looks up the current index from the bits and
    emits the next bit; ``h`` maps bit vectors back to ``m``'s outputs.
    """
    m = as_finite_machine(m)
    if m.start != 0:
        # the product starts in the all-zero bit vector
        m = _move_start_to_zero(m)
    n = m.n_states
    k = math.ceil(math.log2(n)) if n > 1 else 0
    if k and n > 2**k:  # float log2 guard
        k += 1
    zero, one = _BITS
    bit = lambda s, i: one if (s >> i) & 1 else zero  # noqa: E731

    rules = []
    for i in range(k):
        for s in range(n):
            guards = tuple(Guard(IndexExpr("", j + 1), "==", bit(s, j)) for j in range(k))
            for a_idx, a in enumerate(m.alphabet):
                t = int(m.delta[s, a_idx])
                rules.append(ConnectionRule(FactorPattern("=", IndexExpr("", i + 1)), a, guards, (bit(t, i),)))
    table = tuple(
        (tuple(bit(s, j) for j in range(k)), m.output(s)) for s in range(n)
    )
    h = LookupOutput(table, default=m.output(m.start))
    factors = [_bit_factor() for _ in range(k)]
    return ProductDef(factors, m.alphabet, RuleMap(rules), h, name="binary")


def _move_start_to_zero(m: Machine) -> Machine:
    perm = list(range(m.n_states))
    perm[0], perm[m.start] = perm[m.start], perm[0]
    inv = np.argsort(perm)
    delta = inv[m.delta[perm]]
    gamma = m.gamma[perm]
    names = [m.state_name(s) for s in perm]
    return Machine(m.alphabet, m.outputs, delta, gamma, 0, names)

