"""Array kernels over transition tables.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy/Python
version with identical results.  ``RMOORE_BACKEND=numpy`` (or a missing
numba) selects the fallback.  Tables are ``int64`` arrays: ``delta`` is
``(n_states, n_letters)``, output vectors are ``(n_states,)`` of output ids.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit, types
    from numba.typed import Dict as _NbDict

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

BACKENDS = ("numba", "numpy")


def _initial_backend() -> str:
    name = os.environ.get("RMOORE_BACKEND", "numba").strip().lower()
    if name not in BACKENDS:
        raise ValueError(f"RMOORE_BACKEND must be one of {BACKENDS}, got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        return "numpy"
    return name


_backend = _initial_backend()


def backend() -> str:
    return _backend


def set_backend(name: str) -> str:
    """Switch backends at runtime; returns the previous one."""
    global _backend
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not importable")
    old, _backend = _backend, name
    return old


# ---------------------------------------------------------------- numpy path


def _bfs_order_np(delta, start):
    n = delta.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[start] = True
    order = [start]
    head = 0
    rows = delta.tolist()
    while head < len(order):
        for t in rows[order[head]]:
            if not seen[t]:
                seen[t] = True
                order.append(t)
        head += 1
    return np.array(order, dtype=np.int64)


def _refine_round_np(delta, labels):
    sig = np.column_stack([labels, labels[delta]]) if delta.shape[1] else labels[:, None]
    _, first, inv = np.unique(sig, axis=0, return_index=True, return_inverse=True)
    rank = np.empty(first.shape[0], dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(first.shape[0])
    new = rank[inv.reshape(-1)]
    return new, int(first.shape[0])


def _pair_bfs_np(d1, o1, s1, d2, o2, s2, max_depth):
    # pairs are numbered in discovery order, which is also the BFS queue order
    n2 = d2.shape[0]
    k = d1.shape[1]
    r1, r2 = d1.tolist(), d2.tolist()
    o1, o2 = o1.tolist(), o2.tolist()
    root = int(s1) * n2 + int(s2)
    seen = {root: 0}
    pairs, parent, via, depth = [root], [-1], [-1], [0]
    head = 0
    while head < len(pairs):
        a, b = divmod(pairs[head], n2)
        if o1[a] != o2[b]:
            return head, np.array(parent, dtype=np.int64), np.array(via, dtype=np.int64)
        if max_depth < 0 or depth[head] < max_depth:
            ra, rb = r1[a], r2[b]
            for j in range(k):
                q = ra[j] * n2 + rb[j]
                if q not in seen:
                    seen[q] = len(pairs)
                    pairs.append(q)
                    parent.append(head)
                    via.append(j)
                    depth.append(depth[head] + 1)
        head += 1
    return -1, np.array(parent, dtype=np.int64), np.array(via, dtype=np.int64)


def _closure_np(letter_maps, cap):
    k, n = letter_maps.shape
    ident = np.arange(n, dtype=np.int64)
    elems = [ident]
    index = {ident.tobytes(): 0}
    parent, letter = [-1], [-1]
    right = []
    head = 0
    while head < len(elems):
        e = elems[head]
        row = []
        for a in range(k):
            new = letter_maps[a][e]
            key = new.tobytes()
            idx = index.get(key)
            if idx is None:
                if len(elems) >= cap:
                    return None
                idx = len(elems)
                index[key] = idx
                elems.append(new)
                parent.append(head)
                letter.append(a)
            row.append(idx)
        right.append(row)
        head += 1
    return (
        np.array(elems, dtype=np.int64).reshape(len(elems), n),
        np.array(parent, dtype=np.int64),
        np.array(letter, dtype=np.int64),
        np.array(right, dtype=np.int64).reshape(len(elems), k),
    )


def _run_words_np(delta, start, words):
    states = np.full(words.shape[0], start, dtype=np.int64)
    for col in words.T:
        live = col >= 0
        states[live] = delta[states[live], col[live]]
    return states


# ---------------------------------------------------------------- numba path

if HAVE_NUMBA:
    _pair_t = types.UniTuple(types.int64, 2)

    @njit(cache=True)
    def _bfs_order_nb(delta, start):
        n, k = delta.shape
        seen = np.zeros(n, dtype=np.bool_)
        order = np.empty(n, dtype=np.int64)
        order[0] = start
        seen[start] = True
        m = 1
        head = 0
        while head < m:
            s = order[head]
            for j in range(k):
                t = delta[s, j]
                if not seen[t]:
                    seen[t] = True
                    order[m] = t
                    m += 1
            head += 1
        return order[:m].copy()

    @njit(cache=True)
    def _relabel_pairs(x, y):
        n = x.shape[0]
        d = _NbDict.empty(key_type=_pair_t, value_type=types.int64)
        out = np.empty(n, dtype=np.int64)
        for s in range(n):
            key = (x[s], y[s])
            v = d.get(key, -1)
            if v == -1:
                v = len(d)
                d[key] = v
            out[s] = v
        return out, len(d)

    @njit(cache=True)
    def _refine_round_nb(delta, labels):
        n, k = delta.shape
        zero = np.zeros(n, dtype=np.int64)
        cur, count = _relabel_pairs(labels, zero)
        for j in range(k):
            nxt = np.empty(n, dtype=np.int64)
            for s in range(n):
                nxt[s] = labels[delta[s, j]]
            cur, count = _relabel_pairs(cur, nxt)
        return cur, count

    @njit(cache=True)
    def _grow(arr, size):
        out = np.empty(size, dtype=arr.dtype)
        out[: arr.shape[0]] = arr
        return out

    @njit(cache=True)
    def _pair_bfs_nb(d1, o1, s1, d2, o2, s2, max_depth):
        n2 = d2.shape[0]
        k = d1.shape[1]
        seen = _NbDict.empty(key_type=types.int64, value_type=types.int64)
        cap = 64
        pairs = np.empty(cap, dtype=np.int64)
        parent = np.empty(cap, dtype=np.int64)
        via = np.empty(cap, dtype=np.int64)
        depth = np.empty(cap, dtype=np.int64)
        root = s1 * n2 + s2
        seen[root] = 0
        pairs[0], parent[0], via[0], depth[0] = root, -1, -1, 0
        m = 1
        head = 0
        while head < m:
            a = pairs[head] // n2
            b = pairs[head] % n2
            if o1[a] != o2[b]:
                return head, parent[:m].copy(), via[:m].copy()
            if max_depth < 0 or depth[head] < max_depth:
                for j in range(k):
                    q = d1[a, j] * n2 + d2[b, j]
                    if q not in seen:
                        if m == cap:
                            cap *= 2
                            pairs, parent = _grow(pairs, cap), _grow(parent, cap)
                            via, depth = _grow(via, cap), _grow(depth, cap)
                        seen[q] = m
                        pairs[m], parent[m], via[m], depth[m] = q, head, j, depth[head] + 1
                        m += 1
            head += 1
        return -1, parent[:m].copy(), via[:m].copy()

    @njit(cache=True)
    def _row_hash(row):
        h = np.uint64(1469598103934665603)
        for x in row:
            h = (h ^ np.uint64(x)) * np.uint64(1099511628211)
        return h

    @njit(cache=True)
    def _rehash(elems, m, tsize):
        slots = np.full(tsize, -1, dtype=np.int64)
        mask = np.uint64(tsize - 1)
        for e in range(m):
            h = _row_hash(elems[e]) & mask
            while slots[np.int64(h)] != -1:
                h = (h + np.uint64(1)) & mask
            slots[np.int64(h)] = e
        return slots

    @njit(cache=True)
    def _closure_nb(letter_maps, cap):
        k, n = letter_maps.shape
        size = 64
        elems = np.empty((size, n), dtype=np.int64)
        parent = np.full(size, -1, dtype=np.int64)
        letter = np.full(size, -1, dtype=np.int64)
        right = np.full((size, k), -1, dtype=np.int64)
        for i in range(n):
            elems[0, i] = i
        tsize = 4 * size
        slots = _rehash(elems, 1, tsize)
        m = 1
        head = 0
        new = np.empty(n, dtype=np.int64)
        while head < m:
            for a in range(k):
                for i in range(n):
                    new[i] = letter_maps[a, elems[head, i]]
                mask = np.uint64(tsize - 1)
                h = _row_hash(new) & mask
                idx = -1
                while slots[np.int64(h)] != -1:
                    c = slots[np.int64(h)]
                    same = True
                    for i in range(n):
                        if elems[c, i] != new[i]:
                            same = False
                            break
                    if same:
                        idx = c
                        break
                    h = (h + np.uint64(1)) & mask
                if idx == -1:
                    if m >= cap:
                        return elems[:0], parent[:0], letter[:0], right[:0], False
                    if m == size:
                        size *= 2
                        e2 = np.empty((size, n), dtype=np.int64)
                        e2[:m] = elems[:m]
                        r2 = np.full((size, k), -1, dtype=np.int64)
                        r2[:m] = right[:m]
                        elems, right = e2, r2
                        parent, letter = _grow(parent, size), _grow(letter, size)
                    idx = m
                    elems[m, :] = new
                    parent[m] = head
                    letter[m] = a
                    m += 1
                    if 2 * m > tsize:
                        tsize *= 2
                        slots = _rehash(elems, m, tsize)
                    else:
                        slots[np.int64(h)] = idx
                right[head, a] = idx
            head += 1
        return elems[:m].copy(), parent[:m].copy(), letter[:m].copy(), right[:m].copy(), True

    @njit(cache=True)
    def _run_words_nb(delta, start, words):
        n_words, length = words.shape
        out = np.empty(n_words, dtype=np.int64)
        for w in range(n_words):
            s = start
            for t in range(length):
                c = words[w, t]
                if c >= 0:
                    s = delta[s, c]
            out[w] = s
        return out


# ---------------------------------------------------------------- dispatch


def _i64(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def bfs_order(delta, start, *, use=None):
    """States reachable from ``start`` in BFS discovery order (letters in table order)."""
    if (use or _backend) == "numba":
        return _bfs_order_nb(_i64(delta), np.int64(start))
    return _bfs_order_np(_i64(delta), int(start))


def refine_round(delta, labels, *, use=None):
    """One Moore refinement round.

    Returns labels for the partition induced by ``(labels[s], labels[delta[s, a]] ...)``,
    numbered by first occurrence, plus the block count.
    """
    delta, labels = _i64(delta), _i64(labels)
    if (use or _backend) == "numba":
        new, count = _refine_round_nb(delta, labels)
        return new, int(count)
    return _refine_round_np(delta, labels)


def pair_bfs(d1, o1, s1, d2, o2, s2, max_depth=-1, *, use=None):
    """Breadth-first search of the pair automaton for an output mismatch.

    Pairs are numbered in discovery order and only reachable pairs are stored.
    Returns ``(hit, parent, via)``: ``hit`` is the number of the first
    mismatching pair (or -1), and ``parent``/``via`` let the caller rebuild
    the shortest word leading to it.
    """
    args = (_i64(d1), _i64(o1), np.int64(s1), _i64(d2), _i64(o2), np.int64(s2), np.int64(max_depth))
    if (use or _backend) == "numba":
        hit, parent, via = _pair_bfs_nb(*args)
        return int(hit), parent, via
    return _pair_bfs_np(*args)


def closure(letter_maps, cap, *, use=None):
    """Close the letter maps under composition, breadth first from the identity.

    Element ``e`` followed by letter ``a`` is ``letter_maps[a][e]``.  Returns
    ``(elements, parent, letter, right)`` or ``None`` when more than ``cap``
    elements would be needed.
    """
    letter_maps = _i64(letter_maps)
    if letter_maps.ndim != 2:
        raise ValueError("letter_maps must be 2-D")
    if (use or _backend) == "numba":
        elems, parent, letter, right, ok = _closure_nb(letter_maps, np.int64(cap))
        return (elems, parent, letter, right) if ok else None
    return _closure_np(letter_maps, cap)


def run_words(delta, start, words, *, use=None):
    """Final states after each row of ``words`` (letter ids, ``-1`` = padding)."""
    words = _i64(words)
    if words.ndim != 2:
        raise ValueError("words must be 2-D")
    if (use or _backend) == "numba":
        return _run_words_nb(_i64(delta), np.int64(start), words)
    return _run_words_np(_i64(delta), int(start), words)


def trace_path(hit, parent, via):
    """Letter ids along the BFS tree from the root to ``hit``."""
    path = []
    while parent[hit] != -1:
        path.append(int(via[hit]))
        hit = int(parent[hit])
    path.reverse()
    return path
