"""Symbols, alphabets, words, Moore machines and the string functions they represent."""

from __future__ import annotations

from collections import deque
from typing import Callable, Hashable, Iterable, Mapping, Union

import numpy as np

from .errors import InfiniteMachineError, UnknownStateError, UnknownSymbolError

__all__ = [
    "Symbol",
    "Alphabet",
    "Word",
    "EMPTY_WORD",
    "word",
    "show_word",
    "concat",
    "Machine",
    "GeneratorMachine",
    "StringFunction",
    "delta_star",
    "representing_function",
    "remap_output",
    "constant_machine",
    "require_finite",
]


class Symbol:
    """An interned token ``name[p1,...,pk]``; parameters are Symbols themselves.

    Interning makes equality an identity check, which matters for the
    equality-heavy enumeration in the product checker and the monoid closure.
    """

    __slots__ = ("name", "params", "_hash", "_text", "__weakref__")
    _pool: dict = {}

    def __new__(cls, name, params=()):
        if isinstance(name, Symbol):
            if params:
                raise TypeError("cannot add params to an existing Symbol")
            return name
        params = tuple(p if isinstance(p, Symbol) else Symbol(str(p)) for p in params)
        key = (name, params)
        sym = cls._pool.get(key)
        if sym is None:
            if not isinstance(name, str) or not name or _BAD_NAME_CHARS.intersection(name):
                raise ValueError(f"invalid symbol name {name!r}")
            sym = object.__new__(cls)
            sym.name = name
            sym.params = params
            sym._hash = hash(key)
            sym._text = name + ("[" + ",".join(p._text for p in params) + "]" if params else "")
            cls._pool[key] = sym
        return sym

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    def __lt__(self, other):
        return self._text < other._text

    def __str__(self):
        return self._text

    def __repr__(self):
        return f"Symbol({self._text!r})"

    def __reduce__(self):
        return (Symbol, (self.name, self.params))

    @classmethod
    def parse(cls, text: str) -> "Symbol":
        text = text.strip()
        sym, pos = _parse_symbol(text, 0)
        if pos != len(text):
            raise ValueError(f"trailing characters in symbol {text!r} at offset {pos}")
        return sym


_BAD_NAME_CHARS = frozenset("[], \t\n\r")


def _parse_symbol(text, pos):
    start = pos
    while pos < len(text) and text[pos] not in "[],":
        if text[pos].isspace():
            break
        pos += 1
    name = text[start:pos]
    if not name:
        raise ValueError(f"expected a symbol name in {text!r} at offset {start}")
    params = []
    if pos < len(text) and text[pos] == "[":
        pos += 1
        while True:
            p, pos = _parse_symbol(text, pos)
            params.append(p)
            if pos >= len(text):
                raise ValueError(f"unterminated parameter list in {text!r}")
            if text[pos] == ",":
                pos += 1
            elif text[pos] == "]":
                pos += 1
                break
            else:
                raise ValueError(f"unexpected {text[pos]!r} in {text!r} at offset {pos}")
    return Symbol(name, params), pos


def _sym(x) -> Symbol:
    return x if isinstance(x, Symbol) else Symbol.parse(str(x))


Word = tuple  # a Word is a tuple of Symbols; () is the empty word
EMPTY_WORD: tuple = ()


def word(spec: Union[str, Iterable, None] = None) -> tuple:
    """Build a word from whitespace-separated rendered symbols or an iterable."""
    if spec is None:
        return EMPTY_WORD
    if isinstance(spec, str):
        return tuple(Symbol.parse(tok) for tok in spec.split())
    return tuple(_sym(s) for s in spec)


def show_word(w) -> str:
    return " ".join(str(s) for s in w) if w else "Λ"


def concat(w, z) -> tuple:
    return tuple(w) + tuple(z)


class Alphabet:
    """Finite ordered set of symbols; iteration follows declaration order."""

    __slots__ = ("symbols", "_index")

    def __init__(self, symbols: Iterable = ()):
        if isinstance(symbols, str):
            symbols = symbols.split()
        syms = tuple(_sym(s) for s in symbols)
        index = {}
        for i, s in enumerate(syms):
            if s in index:
                raise ValueError(f"duplicate symbol {s} in alphabet")
            index[s] = i
        self.symbols = syms
        self._index = index

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def __contains__(self, sym):
        if not isinstance(sym, Symbol):
            try:
                sym = _sym(sym)
            except ValueError:
                return False
        return sym in self._index

    def __getitem__(self, i) -> Symbol:
        return self.symbols[i]

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self.symbols == other.symbols

    def __hash__(self):
        return hash(self.symbols)

    def __repr__(self):
        return f"Alphabet([{', '.join(str(s) for s in self.symbols)}])"

    def index(self, sym) -> int:
        if not isinstance(sym, Symbol):
            sym = _sym(sym)
        try:
            return self._index[sym]
        except KeyError:
            raise UnknownSymbolError(sym, self.symbols) from None

    def encode(self, w) -> np.ndarray:
        return np.fromiter((self.index(s) for s in w), dtype=np.int64, count=len(w))

    def same_set(self, other: "Alphabet") -> bool:
        return set(self.symbols) == set(other.symbols)


class Machine:
    """Table-backed Moore machine ``(A, X, S, start, delta, gamma)``.

    States are ``0 .. n_states-1``.  ``delta[s, j]`` is the successor of ``s``
    on ``alphabet[j]`` and ``gamma[s]`` indexes into ``outputs``.
    """

    is_finite = True

    def __init__(self, alphabet, outputs, delta, gamma, start=0, state_names=None):
        self.alphabet = alphabet if isinstance(alphabet, Alphabet) else Alphabet(alphabet)
        self.outputs = outputs if isinstance(outputs, Alphabet) else Alphabet(outputs)
        gamma = np.array(gamma, dtype=np.int64).reshape(-1)
        n = gamma.shape[0]
        delta = np.array(delta, dtype=np.int64).reshape(n, len(self.alphabet))
        if n == 0:
            raise ValueError("a machine needs at least one state")
        if delta.shape[0] != n:
            raise ValueError(f"delta has {delta.shape[0]} rows for {n} states")
        if delta.size and (delta.min() < 0 or delta.max() >= n):
            raise ValueError("delta refers to a state outside the machine")
        if gamma.min() < 0 or gamma.max() >= len(self.outputs):
            raise ValueError("gamma refers to an output outside the output alphabet")
        if not 0 <= start < n:
            raise UnknownStateError(f"start state {start} is not a state")
        delta.setflags(write=False)
        gamma.setflags(write=False)
        self.delta = delta
        self.gamma = gamma
        self.start = int(start)
        if state_names is not None:
            state_names = tuple(str(x) for x in state_names)
            if len(state_names) != n:
                raise ValueError("state_names must name every state")
        self.state_names = state_names

    @property
    def n_states(self) -> int:
        return self.gamma.shape[0]

    @property
    def states(self) -> range:
        return range(self.n_states)

    def state_name(self, s: int) -> str:
        return self.state_names[s] if self.state_names else str(s)

    def check_state(self, s) -> int:
        if not isinstance(s, (int, np.integer)) or not 0 <= s < self.n_states:
            raise UnknownStateError(f"{s!r} is not a state of this machine")
        return int(s)

    def output(self, s: int) -> Symbol:
        return self.outputs[self.gamma[self.check_state(s)]]

    def step(self, s: int, a: Symbol) -> int:
        return int(self.delta[s, self.alphabet.index(a)])

    def run(self, s: int, w) -> int:
        delta = self.delta
        index = self.alphabet.index
        for a in w:
            s = delta[s, index(a)]
        return int(s)

    @classmethod
    def from_function(cls, alphabet, start, step: Callable, output: Callable, max_states=100_000):
        """Tabulate the part of a rule-defined machine reachable from ``start``.

        States are numbered in BFS discovery order; names come from ``str(state)``.
        """
        alphabet = alphabet if isinstance(alphabet, Alphabet) else Alphabet(alphabet)
        ids = {start: 0}
        order = [start]
        rows = []
        queue = deque([start])
        while queue:
            s = queue.popleft()
            row = []
            for a in alphabet:
                t = step(s, a)
                if t not in ids:
                    if len(order) >= max_states:
                        raise InfiniteMachineError(
                            f"more than {max_states} reachable states; not tabulating"
                        )
                    ids[t] = len(order)
                    order.append(t)
                    queue.append(t)
                row.append(ids[t])
            rows.append(row)
        outs = [_sym(output(s)) for s in order]
        out_alpha = Alphabet(dict.fromkeys(outs))
        gamma = [out_alpha.index(o) for o in outs]
        names = [_state_label(s) for s in order]
        return cls(alphabet, out_alpha, rows, gamma, 0, names)

    def __repr__(self):
        return f"<Machine states={self.n_states} |A|={len(self.alphabet)} |X|={len(self.outputs)}>"


def _state_label(s) -> str:
    if isinstance(s, tuple):
        return "(" + ",".join(_state_label(x) for x in s) + ")"
    return str(s)


class GeneratorMachine:
    """Moore machine whose transition and output are given as code.

    Hosts functions such as word length whose state set is infinite.
    Operations that need a finite table raise :class:`InfiniteMachineError`.
    """

    is_finite = False

    def __init__(self, alphabet, start: Hashable, step: Callable, output: Callable, name=None):
        self.alphabet = alphabet if isinstance(alphabet, Alphabet) else Alphabet(alphabet)
        self.start = start
        self._step = step
        self._output = output
        self.name = name

    def check_state(self, s):
        return s

    def output(self, s) -> Symbol:
        return _sym(self._output(s))

    def step(self, s, a: Symbol):
        if a not in self.alphabet:
            raise UnknownSymbolError(a, self.alphabet.symbols)
        return self._step(s, a)

    def run(self, s, w):
        for a in w:
            s = self.step(s, a)
        return s

    def tabulate(self, max_states=100_000) -> Machine:
        return Machine.from_function(self.alphabet, self.start, self._step, self._output, max_states)

    def __repr__(self):
        return f"<GeneratorMachine {self.name or ''}>".replace(" >", ">")


def require_finite(m) -> Machine:
    if not getattr(m, "is_finite", False):
        raise InfiniteMachineError(f"{m!r} is not a finite table machine")
    return m


def delta_star(m, s, w):
    """Fold the transition function over ``w`` starting in state ``s``."""
    s = m.check_state(s)
    return m.run(s, word(w) if isinstance(w, str) else w)


class StringFunction:
    """A total function from words over ``alphabet`` to output symbols.

    ``machine`` is set when the function is known to be represented by a
    particular machine; finite-only operations use it.
    """

    def __init__(self, alphabet, fn: Callable, machine=None, name=None):
        self.alphabet = alphabet if isinstance(alphabet, Alphabet) else Alphabet(alphabet)
        self._fn = fn
        self.machine = machine
        self.name = name

    @property
    def is_finite(self) -> bool:
        return self.machine is not None and self.machine.is_finite

    def __call__(self, w) -> Symbol:
        w = word(w)
        for a in w:
            if a not in self.alphabet:
                raise UnknownSymbolError(a, self.alphabet.symbols)
        return self._fn(w)

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"<StringFunction{label} |A|={len(self.alphabet)}>"


def representing_function(m) -> StringFunction:
    """Return ``w -> gamma(delta*(start, w))`` for a table or generator machine."""
    start = m.start

    def f(w):
        return m.output(m.run(start, w))

    return StringFunction(m.alphabet, f, machine=m, name=getattr(m, "name", None))


def _as_symbol_map(g) -> Callable[[Symbol], Symbol]:
    if isinstance(g, Mapping):
        # outputs missing from the table are kept
        table = {_sym(k): _sym(v) for k, v in g.items()}
        return lambda x: table.get(x, x)
    return lambda x: _sym(g(x))


def remap_output(f: StringFunction, g) -> StringFunction:
    """Compose ``g`` after ``f``; the backing machine keeps its states and delta."""
    gmap = _as_symbol_map(g)
    m = f.machine
    if isinstance(m, Machine):
        mapped = [gmap(x) for x in m.outputs]
        outs = Alphabet(dict.fromkeys(mapped))
        lookup = np.array([outs.index(x) for x in mapped], dtype=np.int64)
        m2 = Machine(m.alphabet, outs, m.delta, lookup[m.gamma], m.start, m.state_names)
        return representing_function(m2)
    if isinstance(m, GeneratorMachine):
        m2 = GeneratorMachine(m.alphabet, m.start, m._step, lambda s: gmap(m.output(s)), m.name)
        return representing_function(m2)
    return StringFunction(f.alphabet, lambda w: gmap(f._fn(w)), name=f.name)


def constant_machine(alphabet, value="0") -> Machine:
    alphabet = alphabet if isinstance(alphabet, Alphabet) else Alphabet(alphabet)
    return Machine(alphabet, [value], [[0] * len(alphabet)], [0], 0)

