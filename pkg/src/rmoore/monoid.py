"""The monoid determined by a finite string function.

Elements are the state maps that words induce on the minimized machine;
two words are congruent exactly when they induce the same map.  Element 0
is the identity (the empty word) and elements are numbered in BFS discovery
order, so each element's witness is its length-lexicographically least word.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .core import word
from .errors import MonoidSizeError
from .minimize import MinimizedMachine, minimize

__all__ = [
    "DEFAULT_CAP",
    "monoid_cap",
    "StateMapElement",
    "MonoidTable",
    "transition_monoid",
    "congruent",
    "classify",
    "Classification",
]

DEFAULT_CAP = 10_000


def monoid_cap() -> int:
    return int(os.environ.get("RMOORE_MONOID_CAP", DEFAULT_CAP))


@dataclass(frozen=True)
class StateMapElement:
    index: int
    mapping: tuple
    witness: tuple


class MonoidTable:
    """Transition monoid with lazily computed Cayley table.

    ``mul(x, y)`` is "apply x, then y", matching ``[w][z] = [wz]``.
    """

    def __init__(self, machine, elements, parent, letter, right):
        self.machine = machine
        self._maps = elements
        self._parent = parent
        self._letter = letter
        self.right = right
        self._table = None
        self._witnesses = None
        self._index = None

    def __len__(self):
        return self._maps.shape[0]

    @property
    def identity(self) -> int:
        return 0

    def witness(self, e: int) -> tuple:
        if self._witnesses is None:
            ws = [()]
            for i in range(1, len(self)):
                ws.append(ws[self._parent[i]] + (self.machine.alphabet[self._letter[i]],))
            self._witnesses = ws
        return self._witnesses[e]

    def element(self, e: int) -> StateMapElement:
        return StateMapElement(e, tuple(self._maps[e].tolist()), self.witness(e))

    @property
    def elements(self) -> list:
        return [self.element(e) for e in range(len(self))]

    def index_of(self, mapping) -> Optional[int]:
        if self._index is None:
            self._index = {row.tobytes(): i for i, row in enumerate(self._maps)}
        return self._index.get(np.asarray(mapping, dtype=np.int64).tobytes())

    def mul(self, x: int, y: int) -> int:
        for a in self._letter_ids(y):
            x = self.right[x, a]
        return int(x)

    def _letter_ids(self, e):
        ids = []
        while e:
            ids.append(int(self._letter[e]))
            e = int(self._parent[e])
        ids.reverse()
        return ids

    def table(self) -> np.ndarray:
        if self._table is None:
            m = len(self)
            tab = np.empty((m, m), dtype=np.int64)
            col = np.arange(m, dtype=np.int64)
            # column y is reached from column parent(y) by one right multiplication
            for y in range(m):
                if y == 0:
                    tab[:, 0] = col
                else:
                    tab[:, y] = self.right[tab[:, self._parent[y]], self._letter[y]]
            self._table = tab
        return self._table

    def render(self) -> str:
        tab = self.table()
        m = len(self)
        width = max(len(str(m - 1)), 1)
        lines = ["elements:"]
        for e in range(m):
            w = self.witness(e)
            lines.append(f"  {e:>{width}}  [{' '.join(str(a) for a in w) if w else 'Λ'}]")
        lines.append("cayley:")
        lines.append(" " * (width + 3) + " ".join(f"{y:>{width}}" for y in range(m)))
        for x in range(m):
            lines.append(f"  {x:>{width}} " + " ".join(f"{v:>{width}}" for v in tab[x].tolist()))
        return "\n".join(lines) + "\n"


def transition_monoid(m, cap: Optional[int] = None) -> MonoidTable:
    """Close the letter-induced state maps of the minimized machine under composition."""
    mm = m if isinstance(m, MinimizedMachine) else minimize(m)
    mach = mm.machine
    cap = monoid_cap() if cap is None else cap
    result = _kernels.closure(mach.delta.T, cap)
    if result is None:
        raise MonoidSizeError(cap)
    elements, parent, letter, right = result
    return MonoidTable(mach, elements, parent, letter, right)


def _induced_map(mach, w):
    states = np.arange(mach.n_states, dtype=np.int64)
    for j in mach.alphabet.encode(w):
        states = mach.delta[states, j]
    return states


def congruent(f, w, u) -> bool:
    """True iff ``f(z w y) == f(z u y)`` for all contexts ``z``, ``y``.

    Decided by comparing the maps ``w`` and ``u`` induce on the minimized machine.
    """
    mm = f if isinstance(f, MinimizedMachine) else minimize(f)
    w = word(w) if isinstance(w, str) else tuple(w)
    u = word(u) if isinstance(u, str) else tuple(u)
    return bool(np.array_equal(_induced_map(mm.machine, w), _induced_map(mm.machine, u)))


@dataclass(frozen=True)
class Classification:
    is_group: bool
    is_aperiodic: bool
    element_count: int
    idempotent_count: int


def classify(t: MonoidTable) -> Classification:
    tab = t.table()
    m = len(t)
    idx = np.arange(m)
    # in a finite monoid, right inverses for every element already make it a group
    is_group = bool(np.all((tab == t.identity).any(axis=1)))
    idempotents = int(np.count_nonzero(tab[idx, idx] == idx))
    aperiodic = True
    for x in range(m):
        seen = {}
        p, k = x, 1
        while p not in seen:
            seen[p] = k
            p = int(tab[p, x])
            k += 1
        if k - seen[p] != 1:
            aperiodic = False
            break
    return Classification(is_group, aperiodic, m, idempotents)
