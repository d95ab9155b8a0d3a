"""Worked examples as constructors: storage cell, parallel stack, broadcast
network, modular counters, ripple-carry cascades and the length function.

Every constructor is registered under a stable name so spec documents and the
command line can refer to it (see :func:`build`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

from .core import (
    Alphabet,
    GeneratorMachine,
    Machine,
    StringFunction,
    Symbol,
    constant_machine,
    representing_function,
)
from .errors import BadParameterError
from .product import ProductDef
from .rules import ConnectionRule, RuleMap

__all__ = [
    "EMPTY",
    "make_cell",
    "StackConfig",
    "make_stack",
    "stack_top",
    "stack_empty",
    "stack_full",
    "make_counter",
    "RIPPLE_READINGS",
    "DEFAULT_RIPPLE_READING",
    "make_ripple",
    "ripple_value",
    "select_ripple_reading",
    "NetworkConfig",
    "make_node",
    "make_arbiter",
    "make_network",
    "make_length",
    "search_cascade_counters",
    "REGISTRY",
    "build",
]

EMPTY = Symbol("EMPTY")
NULL = Symbol("NULL")
READY = Symbol("ready")
BUSY = Symbol("busy")
TICK = Symbol("TICK")


def make_cell(alphabet: Sequence = ("a", "b", "EMPTY"), empty: str = "EMPTY") -> Machine:
    """Storage cell: outputs the last symbol read, ``empty`` before any input."""
    alphabet = Alphabet(alphabet)
    values = [Symbol(empty)] + [a for a in alphabet if a is not Symbol(empty)]
    outs = Alphabet(values)
    delta = [[outs.index(a) for a in alphabet] for _ in values]
    return Machine(alphabet, outs, delta, list(range(len(values))), 0, [str(v) for v in values])


# ------------------------------------------------------------------ stack


@dataclass(frozen=True)
class StackConfig:
    depth: int = 3
    values: tuple = ("a", "b")
    empty: str = "EMPTY"

    def __post_init__(self):
        if self.depth < 1:
            raise BadParameterError("stack depth must be at least 1")
        if self.empty in self.values:
            raise BadParameterError("the empty marker cannot be pushed")
        if not self.values:
            raise BadParameterError("a stack needs at least one value")


STACK_RULES = (
    {"factor": 1, "input": "PUSH[$v]", "emit": ["$v"]},
    {"factor": "n", "input": "POP", "emit": ["EMPTY"]},
    {"factor": ">1", "input": "PUSH[$v]", "emit": ["out(i-1)"]},
    {"factor": "<n", "input": "POP", "emit": ["out(i+1)"]},
)


def make_stack(c: Union[StackConfig, int] = StackConfig()) -> ProductDef:
    """``depth`` storage cells; PUSH shifts right, POP shifts left.

    POP on an empty stack and PUSH on a full one still shift; nothing raises.
    The composite output is ``TUPLE[cell_1,...,cell_n]``.
    """
    if isinstance(c, int):
        c = StackConfig(c)
    cell_alpha = list(c.values) + [c.empty]
    cell = make_cell(cell_alpha, c.empty)
    alphabet = [Symbol("PUSH", [v]) for v in c.values] + [Symbol("POP")]
    rules = [dict(r) for r in STACK_RULES]
    if c.empty != "EMPTY":
        rules[1]["emit"] = [c.empty]
    return ProductDef([cell] * c.depth, alphabet, RuleMap(rules), "tuple", name=f"stack{c.depth}")


def stack_top(y: Symbol) -> Symbol:
    return y.params[0]


def stack_empty(y: Symbol, empty: Symbol = EMPTY) -> int:
    return int(y.params[0] is empty)


def stack_full(y: Symbol, empty: Symbol = EMPTY) -> int:
    return int(y.params[-1] is not empty)


# ------------------------------------------------------------- counters


def make_counter(n: int, alphabet: Sequence = ("tick",)) -> Machine:
    """Mod-``n`` counter: every input symbol adds one; outputs ``"0"..str(n-1)``."""
    if not isinstance(n, int) or n < 1:
        raise BadParameterError(f"counter modulus must be an integer >= 1, got {n!r}")
    alphabet = Alphabet(alphabet)
    delta = [[(s + 1) % n] * len(alphabet) for s in range(n)]
    return Machine(alphabet, [str(s) for s in range(n)], delta, list(range(n)), 0)


RIPPLE_READINGS = ("carry", "printed")
# Chosen by select_ripple_reading(); the printed guard fails already at n=2.
DEFAULT_RIPPLE_READING = "carry"


def _ripple_rules(n: int, reading: str) -> list:
    if reading not in RIPPLE_READINGS:
        raise BadParameterError(f"ripple reading must be one of {RIPPLE_READINGS}")
    rules = [{"factor": 1, "input": "*", "emit": ["$input"]}]
    for k in range(2, n + 1):
        # factor k = i+1; "printed" skips if some j < i is 0, "carry" if some j <= i is 0
        top = k - 2 if reading == "printed" else k - 1
        for j in range(1, top + 1):
            rules.append({"factor": k, "input": "*", "when": [[f"out({j})", "==", "0"]], "emit": []})
        rules.append({"factor": k, "input": "*", "emit": ["$input"]})
    return rules


def make_ripple(n: int, reading: str = DEFAULT_RIPPLE_READING, alphabet=("tick",), output="tuple") -> ProductDef:
    """Cascade of ``n`` mod-2 counters; factor ``k`` ticks only when the carry reaches it."""
    if not isinstance(n, int) or n < 1:
        raise BadParameterError(f"ripple length must be an integer >= 1, got {n!r}")
    t2 = make_counter(2, alphabet)
    h = {"weighted_sum": 2} if output == "sum" else output
    return ProductDef([t2] * n, alphabet, RuleMap(_ripple_rules(n, reading)), h, name=f"ripple{n}")


def ripple_value(n: int, reading: str = DEFAULT_RIPPLE_READING, alphabet=("tick",)) -> ProductDef:
    """The ripple cascade read as a binary number (least significant factor first)."""
    return make_ripple(n, reading, alphabet, output="sum")


def select_ripple_reading(max_n: int = 4) -> dict:
    """Brute-force which carry reading makes the cascade count mod ``2**n``.

    Returns ``{reading: first failing n or None}``.
    """
    from .minimize import equivalent

    result = {}
    for reading in RIPPLE_READINGS:
        result[reading] = None
        for n in range(1, max_n + 1):
            if not equivalent(ripple_value(n, reading), make_counter(2**n)):
                result[reading] = n
                break
    return result


# -------------------------------------------------------------- network


def _node_output(m, ready: bool) -> Symbol:
    return Symbol("NODE", [m, READY if ready else BUSY])


def make_node(messages: Sequence = ("m1", "m2"), capacity: int = 2, initial: Sequence = ()) -> Machine:
    """Bounded-queue echo node.

    State ``(outbox, inbox)``.  The head of the outbox is offered for one tick;
    ``TICK`` drops it and moves received messages into the outbox, so whatever
    arrives during a tick is retransmitted later, in order.  The node is busy
    while its queues hold ``capacity`` messages; a ``RECV`` that arrives when
    full is dropped.
    """
    if capacity < 1:
        raise BadParameterError("node capacity must be at least 1")
    msgs = [Symbol(m) for m in messages]
    initial = tuple(Symbol(m) for m in initial)
    if len(initial) > capacity:
        raise BadParameterError("initial outbox exceeds capacity")
    alphabet = [Symbol("RECV", [m]) for m in msgs] + [TICK]

    def step(state, a):
        outbox, inbox = state
        if a is TICK:
            return (outbox[1:] + inbox, ())
        if len(outbox) + len(inbox) >= capacity:
            return state
        return (outbox, inbox + (a.params[0],))

    def output(state):
        outbox, inbox = state
        head = outbox[0] if outbox else NULL
        return _node_output(head, len(outbox) + len(inbox) < capacity)

    return Machine.from_function(alphabet, (initial, ()), step, output)


ARBITER_POLICIES = ("round_robin", "tdma", "fixed")


def make_arbiter(nodes: int, policy: Union[str, Callable] = "round_robin", start: int = 1) -> Machine:
    """Finite arbiter whose input each tick is the vector of pending flags.

    Its output ``GRANT[j]`` names the node allowed to broadcast on the next
    tick.  ``round_robin`` moves to the next node (cyclically, after the
    current one) with a pending message and stays put if none is pending;
    ``tdma`` rotates regardless; ``fixed`` never moves.  A callable
    ``policy(current, bits) -> next`` plugs in anything else.
    """
    if not 1 <= start <= nodes:
        raise BadParameterError("arbiter start must name a node")
    bits = list(itertools.product("01", repeat=nodes))
    alphabet = [Symbol("PENDING", list(b)) for b in bits]

    if callable(policy):
        choose = policy
    elif policy == "round_robin":
        def choose(cur, flags):
            for k in range(1, nodes + 1):
                j = (cur - 1 + k) % nodes + 1
                if flags[j - 1]:
                    return j
            return cur
    elif policy == "tdma":
        def choose(cur, flags):
            return cur % nodes + 1
    elif policy == "fixed":
        def choose(cur, flags):
            return cur
    else:
        raise BadParameterError(f"unknown arbiter policy {policy!r}")

    states = list(range(1, nodes + 1))
    delta = []
    for s in states:
        delta.append([choose(s, [b == "1" for b in flags]) - 1 for flags in bits])
    outs = [Symbol("GRANT", [str(s)]) for s in states]
    # rotate so that the start grant is state 0
    order = states[start - 1:] + states[: start - 1]
    pos = {s: k for k, s in enumerate(order)}
    delta = [[pos[delta[s - 1][j] + 1] for j in range(len(bits))] for s in order]
    return Machine(alphabet, [outs[s - 1] for s in order], delta, list(range(nodes)), 0,
                   [f"g{s}" for s in order])


@dataclass(frozen=True)
class NetworkConfig:
    nodes: int = 3
    messages: tuple = ("m1", "m2")
    capacity: int = 2
    initial: Optional[tuple] = None  # per-node initial outbox
    arbiter: Union[str, Callable] = "round_robin"
    start_grant: int = 1

    def initial_outboxes(self) -> tuple:
        if self.initial is None:
            return tuple((self.messages[k % len(self.messages)],) for k in range(self.nodes))
        if len(self.initial) != self.nodes:
            raise BadParameterError("initial outboxes must be given for every node")
        return tuple(tuple(x) for x in self.initial)


def network_rules(nodes: int) -> list:
    """Delivery rules for ``nodes`` nodes plus the arbiter as the last factor."""
    rules = []
    for j in range(1, nodes + 1):
        rules.append({
            "factor": "<n",
            "input": "TICK",
            "when": [
                ["out(n)", "==", f"GRANT[{j}]"],
                [f"out({j})", "~", "NODE[$m,*]"],
                [f"out({j})", "!~", "NODE[NULL,*]"],
                ["out(i)", "~", "NODE[*,ready]"],
            ],
            "emit": ["RECV[$m]", "TICK"],
        })
    rules.append({"factor": "<n", "input": "TICK", "emit": ["TICK"]})
    for flags in itertools.product("01", repeat=nodes):
        guards = [
            [f"out({j})", "!~" if b == "1" else "~", "NODE[NULL,*]"]
            for j, b in enumerate(flags, start=1)
        ]
        rules.append({"factor": "n", "input": "TICK", "when": guards, "emit": [f"PENDING[{','.join(flags)}]"]})
    return rules


def make_network(c: NetworkConfig = NetworkConfig(), node_machines: Optional[Sequence] = None) -> ProductDef:
    """Broadcast network over the single input ``TICK``.

    Each tick, if the granted node ``j`` offers a message ``m``, every ready
    node (``j`` included) reads ``RECV[m] TICK``; all others read ``TICK``.
    The arbiter reads the pending flags.  Output: ``TUPLE[node_1,...,GRANT[j]]``.
    """
    if c.nodes < 1:
        raise BadParameterError("a network needs at least one node")
    if node_machines is None:
        cache = {}
        node_machines = []
        for outbox in c.initial_outboxes():
            if outbox not in cache:
                cache[outbox] = make_node(c.messages, c.capacity, outbox)
            node_machines.append(cache[outbox])
    node_machines = list(node_machines)
    if len(node_machines) != c.nodes:
        raise BadParameterError("one node machine per node is required")
    arbiter = make_arbiter(c.nodes, c.arbiter, c.start_grant)
    return ProductDef(node_machines + [arbiter], [TICK], RuleMap(network_rules(c.nodes)), "tuple",
                      name=f"network{c.nodes}")


def parse_node_output(x: Symbol):
    """Split ``NODE[m,c]`` into ``(m, c)``; raises on anything else."""
    if x.name != "NODE" or len(x.params) != 2 or x.params[1] not in (READY, BUSY):
        raise BadParameterError(f"malformed node output {x}")
    return x.params


# ---------------------------------------------------------------- length


def make_length(alphabet: Sequence = ("a", "b")) -> StringFunction:
    """Word length: an infinite-state function, evaluable but not minimizable."""
    gen = GeneratorMachine(alphabet, 0, lambda s, a: s + 1, lambda s: str(s), name="length")
    return representing_function(gen)


# ----------------------------------------------------- counting evidence


def search_cascade_counters(modulus: int, max_emit: int = 2) -> list:
    """All two-factor ``T_2`` cascades (with any output map) that count mod ``modulus``.

    Factor 1 reads a fixed word of ``tick``s; factor 2 reads a word chosen by
    factor 1's output.  Word lengths up to ``max_emit``.  Returns matching
    ``(w1, w2_if_0, w2_if_1, h_table)`` tuples.
    """
    from .minimize import equivalent
    from .product import expand_product

    target = make_counter(modulus)
    t2 = make_counter(2)
    outs = [str(v) for v in range(modulus)]
    bits = [Symbol("0"), Symbol("1")]
    vectors = list(itertools.product(bits, repeat=2))
    found = []
    lengths = range(max_emit + 1)
    for n1, n0, n1b in itertools.product(lengths, repeat=3):
        rules = [
            ConnectionRule.parse({"factor": 1, "emit": ["tick"] * n1}),
            ConnectionRule.parse({"factor": 2, "when": [["out(1)", "==", "0"]], "emit": ["tick"] * n0}),
            ConnectionRule.parse({"factor": 2, "when": [["out(1)", "==", "1"]], "emit": ["tick"] * n1b}),
        ]
        base = expand_product(ProductDef([t2, t2], ["tick"], RuleMap(rules), "tuple"))
        for values in itertools.product(outs, repeat=len(vectors)):
            table = dict(zip(vectors, values))
            relabeled = Machine(
                base.alphabet,
                outs,
                base.delta,
                [outs.index(table[tuple(y.params)]) for y in (base.output(s) for s in base.states)],
                base.start,
            )
            if equivalent(relabeled, target):
                found.append((n1, n0, n1b, tuple(values)))
    return found


# --------------------------------------------------------------- registry


def _seq(params, key, default):
    v = params.get(key, default)
    if isinstance(v, str):
        v = v.split()
    return tuple(v)


def _int(params, key, default):
    v = params.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int):
        raise BadParameterError(f"parameter {key!r} must be an integer, got {v!r}")
    return v


def _build_network(p):
    initial = p.get("initial")
    cfg = NetworkConfig(
        nodes=_int(p, "nodes", 3),
        messages=_seq(p, "messages", ("m1", "m2")),
        capacity=_int(p, "capacity", 2),
        initial=tuple(tuple(x) for x in initial) if initial is not None else None,
        arbiter=p.get("arbiter", "round_robin"),
        start_grant=_int(p, "start_grant", 1),
    )
    return make_network(cfg)


REGISTRY = {
    "cell": (lambda p: make_cell(_seq(p, "alphabet", ("a", "b", "EMPTY")), p.get("empty", "EMPTY")),
             {"alphabet", "empty"}),
    "stack": (lambda p: make_stack(StackConfig(_int(p, "depth", 3), _seq(p, "values", ("a", "b")),
                                               p.get("empty", "EMPTY"))),
              {"depth", "values", "empty"}),
    "counter": (lambda p: make_counter(_int(p, "n", 2), _seq(p, "alphabet", ("tick",))), {"n", "alphabet"}),
    "ripple": (lambda p: make_ripple(_int(p, "n", 2), p.get("reading", DEFAULT_RIPPLE_READING),
                                     _seq(p, "alphabet", ("tick",)), p.get("output", "sum")),
               {"n", "reading", "alphabet", "output"}),
    "node": (lambda p: make_node(_seq(p, "messages", ("m1", "m2")), _int(p, "capacity", 2),
                                 _seq(p, "initial", ())),
             {"messages", "capacity", "initial"}),
    "arbiter": (lambda p: make_arbiter(_int(p, "nodes", 3), p.get("policy", "round_robin"),
                                       _int(p, "start", 1)),
                {"nodes", "policy", "start"}),
    "network": (_build_network, {"nodes", "messages", "capacity", "initial", "arbiter", "start_grant"}),
    "length": (lambda p: make_length(_seq(p, "alphabet", ("a", "b"))), {"alphabet"}),
    "constant": (lambda p: constant_machine(_seq(p, "alphabet", ("a",)), p.get("value", "0")),
                 {"alphabet", "value"}),
}


def build(name: str, params: Optional[dict] = None):
    """Instantiate a registered example by name."""
    params = dict(params or {})
    try:
        builder, allowed = REGISTRY[name]
    except KeyError:
        raise BadParameterError(f"unknown builtin {name!r}; known: {', '.join(sorted(REGISTRY))}") from None
    extra = set(params) - allowed
    if extra:
        raise BadParameterError(f"builtin {name!r} does not take {sorted(extra)}")
    try:
        return builder(params)
    except BadParameterError:
        raise
    except (TypeError, ValueError) as exc:
        raise BadParameterError(f"bad parameters for {name!r}: {exc}") from exc
