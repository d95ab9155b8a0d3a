"""Rule-based connection maps and output-map selectors.

A connection map decides, for factor ``i``, composite input ``a`` and the
factors' current outputs ``xs``, which word factor ``i`` consumes next.
Rule-based maps are inspectable (cascade analysis) and serializable; any
callable ``g(i, a, xs)`` is accepted as an opaque alternative.

Rule syntax, as used in spec documents::

    {"factor": ">1", "input": "PUSH[$v]", "when": [["out(i-1)", "!=", "EMPTY"]],
     "emit": ["out(i-1)"]}

* ``factor``: ``"*"``, an index, ``"n"``, or a comparison ``">1"``, ``"<n"``,
  ``">=2"``, ``"<=n-1"``.
* ``input``: ``"*"`` or a symbol pattern whose parameters may be ``$name``
  binders or ``*`` wildcards.
* ``when``: guards ``[lhs, op, rhs]`` where ``lhs`` is ``out(k)``, ``op`` is
  ``==``/``!=`` (against a literal or another ``out(k)``) or ``~``/``!~``
  (against a pattern, which may bind ``$name`` parameters).
* ``emit``: literal symbols (``$name`` parameters are substituted),
  ``$name``, ``$input`` or ``out(k)``.

Index expressions ``k`` are ``i``, ``n`` or an integer, with an optional
``+c``/``-c`` offset.  Rules are tried in order; the first match wins and
no match emits the empty word.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional

from .core import Symbol, _sym
from .errors import AlphabetMismatchError, RmooreError

__all__ = [
    "IndexExpr",
    "FactorPattern",
    "Guard",
    "ConnectionRule",
    "RuleMap",
    "FunctionMap",
    "TupleOutput",
    "ProjectOutput",
    "WeightedSumOutput",
    "LookupOutput",
    "FunctionOutput",
    "as_output_map",
    "TUPLE",
]

TUPLE = "TUPLE"
WILDCARD = Symbol("*")

_INDEX_RE = re.compile(r"^(i|n|\d+)(?:([+-])(\d+))?$")
_OUT_RE = re.compile(r"^out\(([^()]*)\)$")
_FACTOR_RE = re.compile(r"^(>=|<=|>|<)?(.+)$")


@dataclass(frozen=True)
class IndexExpr:
    base: str  # "i", "n" or "" for an absolute index
    offset: int

    @classmethod
    def parse(cls, text) -> "IndexExpr":
        if isinstance(text, int):
            return cls("", text)
        m = _INDEX_RE.match(str(text).replace(" ", ""))
        if not m:
            raise ValueError(f"bad factor index expression {text!r}")
        head, sign, num = m.groups()
        off = int(num) * (-1 if sign == "-" else 1) if sign else 0
        if head.isdigit():
            return cls("", int(head) + off)
        return cls(head, off)

    def resolve(self, i: int, n: int) -> int:
        if self.base == "i":
            return i + self.offset
        if self.base == "n":
            return n + self.offset
        return self.offset

    def __str__(self):
        if not self.base:
            return str(self.offset)
        if self.offset == 0:
            return self.base
        return f"{self.base}{'+' if self.offset > 0 else '-'}{abs(self.offset)}"


@dataclass(frozen=True)
class FactorPattern:
    op: str  # "*", "=", ">", "<", ">=", "<="
    bound: Optional[IndexExpr] = None

    @classmethod
    def parse(cls, text) -> "FactorPattern":
        if isinstance(text, int):
            return cls("=", IndexExpr("", text))
        text = str(text).replace(" ", "")
        if text == "*":
            return cls("*")
        op, rest = _FACTOR_RE.match(text).groups()
        bound = IndexExpr.parse(rest)
        if bound.base == "i":
            raise ValueError(f"factor pattern {text!r} cannot refer to i")
        return cls(op or "=", bound)

    def matches(self, i: int, n: int) -> bool:
        if self.op == "*":
            return True
        b = self.bound.resolve(i, n)
        return {
            "=": i == b,
            ">": i > b,
            "<": i < b,
            ">=": i >= b,
            "<=": i <= b,
        }[self.op]

    def to_json(self):
        if self.op == "*":
            return "*"
        if self.op == "=" and not self.bound.base:
            return self.bound.offset
        return ("" if self.op == "=" else self.op) + str(self.bound)


def _is_binder(sym: Symbol) -> bool:
    return not sym.params and sym.name.startswith("$")


def match_pattern(pattern: Symbol, sym: Symbol, bindings: dict) -> Optional[dict]:
    """Match ``sym`` against a pattern, returning extended bindings or None."""
    if pattern is WILDCARD:
        return bindings
    if _is_binder(pattern):
        bound = bindings.get(pattern.name)
        if bound is None:
            return {**bindings, pattern.name: sym}
        return bindings if bound is sym else None
    if pattern.name != sym.name or len(pattern.params) != len(sym.params):
        return None
    for p, s in zip(pattern.params, sym.params):
        bindings = match_pattern(p, s, bindings)
        if bindings is None:
            return None
    return bindings


def substitute(template: Symbol, bindings: dict) -> Symbol:
    if _is_binder(template):
        try:
            return bindings[template.name]
        except KeyError:
            raise RmooreError(f"unbound parameter {template.name}") from None
    if not template.params:
        return template
    return Symbol(template.name, [substitute(p, bindings) for p in template.params])


def _has_binder(sym: Symbol) -> bool:
    return _is_binder(sym) or any(_has_binder(p) for p in sym.params)


def _ref(text) -> Optional[IndexExpr]:
    m = _OUT_RE.match(str(text).replace(" ", ""))
    return IndexExpr.parse(m.group(1)) if m else None


@dataclass(frozen=True)
class Guard:
    left: IndexExpr
    op: str
    right: object  # Symbol or IndexExpr

    OPS = ("==", "!=", "~", "!~")

    @classmethod
    def parse(cls, item) -> "Guard":
        if not isinstance(item, (list, tuple)) or len(item) != 3:
            raise ValueError(f"guard must be [lhs, op, rhs], got {item!r}")
        lhs, op, rhs = item
        left = _ref(lhs)
        if left is None:
            raise ValueError(f"guard left side must be out(k), got {lhs!r}")
        if op not in cls.OPS:
            raise ValueError(f"unknown guard operator {op!r}")
        right = _ref(rhs)
        if right is None:
            right = Symbol.parse(str(rhs))
        elif op in ("~", "!~"):
            raise ValueError("pattern guards need a literal pattern on the right")
        return cls(left, op, right)

    def to_json(self):
        right = f"out({self.right})" if isinstance(self.right, IndexExpr) else str(self.right)
        return [f"out({self.left})", self.op, right]

    def refs(self):
        yield self.left
        if isinstance(self.right, IndexExpr):
            yield self.right


@dataclass(frozen=True)
class ConnectionRule:
    factor: FactorPattern
    input: Symbol
    guards: tuple = ()
    emit: tuple = ()  # items: Symbol (literal/template/$name/$input) or IndexExpr

    @classmethod
    def parse(cls, obj) -> "ConnectionRule":
        if not isinstance(obj, dict):
            raise ValueError(f"rule must be an object, got {obj!r}")
        unknown = set(obj) - {"factor", "input", "when", "emit"}
        if unknown:
            raise ValueError(f"unknown rule keys {sorted(unknown)}")
        factor = FactorPattern.parse(obj.get("factor", "*"))
        inp = Symbol.parse(str(obj.get("input", "*")))
        guards = tuple(Guard.parse(g) for g in obj.get("when", ()))
        emit = []
        for item in obj.get("emit", ()):
            ref = _ref(item)
            emit.append(ref if ref is not None else Symbol.parse(str(item)))
        return cls(factor, inp, guards, tuple(emit))

    def to_json(self) -> dict:
        out = {"factor": self.factor.to_json(), "input": str(self.input)}
        if self.guards:
            out["when"] = [g.to_json() for g in self.guards]
        out["emit"] = [f"out({e})" if isinstance(e, IndexExpr) else str(e) for e in self.emit]
        return out

    def refs(self):
        for g in self.guards:
            yield from g.refs()
        for e in self.emit:
            if isinstance(e, IndexExpr):
                yield e


class RuleMap:
    """Ordered rule list acting as a connection map for an ``n``-factor product."""

    inspectable = True

    def __init__(self, rules, n: Optional[int] = None):
        self.rules = tuple(r if isinstance(r, ConnectionRule) else ConnectionRule.parse(r) for r in rules)
        self.n = n
        self._by_factor = None
        if n is not None:
            self.bind(n)

    def bind(self, n: int, alphabets=None) -> "RuleMap":
        """Resolve rules per factor and check references and literal emissions."""
        by_factor = {}
        for i in range(1, n + 1):
            applicable = [r for r in self.rules if r.factor.matches(i, n)]
            for r in applicable:
                for ref in r.refs():
                    j = ref.resolve(i, n)
                    if not 1 <= j <= n:
                        raise RmooreError(f"rule {r.to_json()} refers to out({j}) for factor {i} of {n}")
                if alphabets is not None:
                    for e in r.emit:
                        if isinstance(e, Symbol) and not _has_binder(e) and e.name != "$input":
                            if e not in alphabets[i - 1]:
                                raise AlphabetMismatchError(
                                    f"rule emits {e} but factor {i} alphabet is "
                                    f"{{{', '.join(str(s) for s in alphabets[i - 1])}}}"
                                )
            by_factor[i] = applicable
        self.n = n
        self._by_factor = by_factor
        return self

    def __call__(self, i: int, a: Symbol, xs: tuple) -> tuple:
        n = self.n
        for rule in self._by_factor[i]:
            b = match_pattern(rule.input, a, {})
            if b is None:
                continue
            for g in rule.guards:
                x = xs[g.left.resolve(i, n) - 1]
                if g.op == "==" or g.op == "!=":
                    y = xs[g.right.resolve(i, n) - 1] if isinstance(g.right, IndexExpr) else g.right
                    if (x is y) != (g.op == "=="):
                        break
                else:
                    b2 = match_pattern(g.right, x, b)
                    if g.op == "~":
                        if b2 is None:
                            break
                        b = b2
                    elif b2 is not None:
                        break
            else:
                return tuple(self._emit(e, i, a, xs, b) for e in rule.emit)
        return ()

    def _emit(self, e, i, a, xs, bindings):
        if isinstance(e, IndexExpr):
            return xs[e.resolve(i, self.n) - 1]
        if e.name == "$input" and not e.params:
            return a
        return substitute(e, bindings) if _has_binder(e) else e

    def dependencies(self, i: int) -> set:
        """Absolute factor indices whose outputs factor ``i``'s rules read."""
        return {ref.resolve(i, self.n) for r in self._by_factor[i] for ref in r.refs()}

    def to_json(self):
        return [r.to_json() for r in self.rules]


class FunctionMap:
    """Opaque connection map wrapping ``g(i, a, xs) -> iterable of symbols``."""

    inspectable = False

    def __init__(self, fn: Callable):
        self.fn = fn
        self.n = None

    def bind(self, n, alphabets=None):
        self.n = n
        return self

    def __call__(self, i, a, xs):
        return tuple(_sym(s) for s in self.fn(i, a, xs))


# ------------------------------------------------------------- output maps


@dataclass(frozen=True)
class TupleOutput:
    def __call__(self, xs) -> Symbol:
        return Symbol(TUPLE, xs)

    def to_json(self):
        return "tuple"


@dataclass(frozen=True)
class ProjectOutput:
    index: int

    def __call__(self, xs) -> Symbol:
        return xs[self.index - 1]

    def to_json(self):
        return {"project": self.index}


@dataclass(frozen=True)
class WeightedSumOutput:
    """``sum(int(x_i) * base**(i-1))``; factor outputs must be integer-named symbols."""

    base: int = 2

    def __call__(self, xs) -> Symbol:
        total = 0
        for k, x in enumerate(xs):
            total += int(x.name) * self.base**k
        return Symbol(str(total))

    def to_json(self):
        return {"weighted_sum": self.base}


@dataclass(frozen=True)
class LookupOutput:
    table: tuple  # ((xs, y), ...)
    default: Optional[Symbol] = None
    _index: dict = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {tuple(k): v for k, v in self.table})

    def __call__(self, xs) -> Symbol:
        y = self._index.get(tuple(xs), self.default)
        if y is None:
            raise RmooreError(f"output lookup has no entry for ({', '.join(map(str, xs))})")
        return y

    @classmethod
    def from_json(cls, obj) -> "LookupOutput":
        rows = tuple((tuple(Symbol.parse(x) for x in k), Symbol.parse(v)) for k, v in obj["table"])
        default = obj.get("default")
        return cls(rows, Symbol.parse(default) if default is not None else None)

    def to_json(self):
        out = {"table": [[[str(x) for x in k], str(v)] for k, v in self.table]}
        if self.default is not None:
            out["default"] = str(self.default)
        return out


class FunctionOutput:
    inspectable = False

    def __init__(self, fn: Callable):
        self.fn = fn

    def __call__(self, xs) -> Symbol:
        return _sym(self.fn(xs))


def as_output_map(h):
    if h is None or h == "tuple":
        return TupleOutput()
    if isinstance(h, (TupleOutput, ProjectOutput, WeightedSumOutput, LookupOutput, FunctionOutput)):
        return h
    if isinstance(h, dict):
        if "project" in h:
            return ProjectOutput(int(h["project"]))
        if "weighted_sum" in h:
            return WeightedSumOutput(int(h["weighted_sum"]))
        if "table" in h:
            return LookupOutput.from_json(h)
        raise ValueError(f"unknown output selector {h!r}")
    if callable(h):
        return FunctionOutput(h)
    raise ValueError(f"unknown output selector {h!r}")

