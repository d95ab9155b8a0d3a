"""JSON spec documents for machines, products and run directives.

Layout (every section optional except the version)::

    {
      "specfmt_version": 1,
      "alphabets": {"bits": ["0", "1"]},
      "machines": {
        "t2": {"alphabet": ["tick"], "start": 0, "delta": [[1], [0]], "gamma": ["0", "1"]},
        "c5": {"builtin": "counter", "params": {"n": 5}}
      },
      "products": {
        "h2": {"alphabet": ["tick"], "factors": ["t2", "t2"], "rules": [...],
               "output": {"weighted_sum": 2}, "reference": "t4"}
      },
      "run": [{"target": "h2", "word": "tick tick"}]
    }

Alphabet fields are either a list of rendered symbols or the name of an
entry in ``alphabets``.  ``render`` emits the canonical text; canonical
documents survive ``render(parse(text)) == text`` byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Union

from .core import Alphabet, Machine, Symbol
from .errors import BadParameterError, RmooreError, SpecError, UnresolvedNameError
from .examples import build
from .product import ProductDef
from .rules import ConnectionRule, RuleMap, as_output_map

__all__ = [
    "SPECFMT_VERSION",
    "TableSpec",
    "BuiltinSpec",
    "ProductSpec",
    "RunDirective",
    "SpecDocument",
    "parse",
    "render",
    "compile_document",
    "load",
    "machine_to_spec",
]

SPECFMT_VERSION = 1
AlphabetRef = Union[str, tuple]


@dataclass(frozen=True)
class TableSpec:
    alphabet: AlphabetRef
    delta: tuple
    gamma: tuple
    start: int = 0
    outputs: Optional[AlphabetRef] = None
    states: Optional[tuple] = None


@dataclass
class BuiltinSpec:
    builtin: str
    params: dict = field(default_factory=dict)


@dataclass
class ProductSpec:
    alphabet: AlphabetRef
    factors: tuple
    rules: tuple = ()
    output: object = "tuple"
    reference: Optional[str] = None


@dataclass(frozen=True)
class RunDirective:
    target: str
    word: str = ""


@dataclass
class SpecDocument:
    alphabets: dict = field(default_factory=dict)
    machines: dict = field(default_factory=dict)
    products: dict = field(default_factory=dict)
    runs: list = field(default_factory=list)
    version: int = SPECFMT_VERSION

    def targets(self) -> list:
        return list(self.machines) + list(self.products)


# ------------------------------------------------------------------ parse


class _Errors:
    def __init__(self):
        self.items = []

    def add(self, where, msg):
        self.items.append((where, msg))


def _norm_symbol(x, where, errs):
    try:
        return str(Symbol.parse(str(x)))
    except ValueError as exc:
        errs.add(where, str(exc))
        return str(x)


def _alphabet_ref(obj, where, errs) -> AlphabetRef:
    if isinstance(obj, str):
        return obj
    if isinstance(obj, list):
        return tuple(_norm_symbol(x, f"{where}[{k}]", errs) for k, x in enumerate(obj))
    errs.add(where, "alphabet must be a list of symbols or the name of a declared alphabet")
    return ()


def _parse_machine(name, obj, errs):
    where = f"machines.{name}"
    if not isinstance(obj, dict):
        errs.add(where, "machine must be an object")
        return None
    if "builtin" in obj:
        extra = set(obj) - {"builtin", "params"}
        if extra:
            errs.add(where, f"unknown keys {sorted(extra)}")
        params = obj.get("params", {})
        if not isinstance(params, dict):
            errs.add(f"{where}.params", "params must be an object")
            params = {}
        return BuiltinSpec(str(obj["builtin"]), dict(params))
    extra = set(obj) - {"alphabet", "outputs", "states", "start", "delta", "gamma"}
    if extra:
        errs.add(where, f"unknown keys {sorted(extra)}")
    for key in ("alphabet", "delta", "gamma"):
        if key not in obj:
            errs.add(where, f"missing {key!r}")
            return None
    delta = obj["delta"]
    if not isinstance(delta, list) or not all(
        isinstance(r, list) and all(isinstance(x, int) and not isinstance(x, bool) for x in r) for r in delta
    ):
        errs.add(f"{where}.delta", "delta must be a list of integer rows")
        return None
    gamma = obj["gamma"]
    if not isinstance(gamma, list):
        errs.add(f"{where}.gamma", "gamma must be a list of output symbols")
        return None
    start = obj.get("start", 0)
    if not isinstance(start, int) or isinstance(start, bool):
        errs.add(f"{where}.start", "start must be a state index")
        start = 0
    states = obj.get("states")
    return TableSpec(
        _alphabet_ref(obj["alphabet"], f"{where}.alphabet", errs),
        tuple(tuple(r) for r in delta),
        tuple(_norm_symbol(x, f"{where}.gamma[{k}]", errs) for k, x in enumerate(gamma)),
        start,
        _alphabet_ref(obj["outputs"], f"{where}.outputs", errs) if "outputs" in obj else None,
        tuple(str(s) for s in states) if states is not None else None,
    )


def _parse_product(name, obj, errs):
    where = f"products.{name}"
    if not isinstance(obj, dict):
        errs.add(where, "product must be an object")
        return None
    if "builtin" in obj:
        return _parse_machine(name, obj, errs)
    extra = set(obj) - {"alphabet", "factors", "rules", "output", "reference"}
    if extra:
        errs.add(where, f"unknown keys {sorted(extra)}")
    if "alphabet" not in obj or "factors" not in obj:
        errs.add(where, "a product needs 'alphabet' and 'factors'")
        return None
    factors = obj["factors"]
    if not isinstance(factors, list) or not all(isinstance(f, str) for f in factors):
        errs.add(f"{where}.factors", "factors must be a list of names")
        return None
    rules = []
    for k, r in enumerate(obj.get("rules", [])):
        try:
            rules.append(ConnectionRule.parse(r))
        except ValueError as exc:
            errs.add(f"{where}.rules[{k}]", str(exc))
    output = obj.get("output", "tuple")
    try:
        output = as_output_map(output)
        if callable(output) and not hasattr(output, "to_json"):
            raise ValueError("output must be a selector")
    except (ValueError, KeyError, TypeError) as exc:
        errs.add(f"{where}.output", str(exc))
        output = as_output_map("tuple")
    ref = obj.get("reference")
    return ProductSpec(
        _alphabet_ref(obj["alphabet"], f"{where}.alphabet", errs),
        tuple(factors),
        tuple(rules),
        output,
        ref,
    )


def parse(text: str, validate: bool = True) -> SpecDocument:
    """Parse a spec document; raises :class:`SpecError` listing every problem found."""
    if not text.strip():
        return SpecDocument()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError([(f"{exc.lineno}:{exc.colno}", f"syntax error: {exc.msg}")]) from None
    if not isinstance(raw, dict):
        raise SpecError([("1:1", "document must be a JSON object")])
    errs = _Errors()
    version = raw.get("specfmt_version")
    if version != SPECFMT_VERSION:
        errs.add("specfmt_version", f"expected specfmt_version {SPECFMT_VERSION}, got {version!r}")
    extra = set(raw) - {"specfmt_version", "alphabets", "machines", "products", "run"}
    if extra:
        errs.add("", f"unknown top-level keys {sorted(extra)}")
    doc = SpecDocument(version=version if isinstance(version, int) else SPECFMT_VERSION)
    for name, syms in raw.get("alphabets", {}).items():
        if not isinstance(syms, list):
            errs.add(f"alphabets.{name}", "alphabet must be a list")
            continue
        doc.alphabets[name] = tuple(_norm_symbol(x, f"alphabets.{name}[{k}]", errs) for k, x in enumerate(syms))
    for name, obj in raw.get("machines", {}).items():
        spec = _parse_machine(name, obj, errs)
        if spec is not None:
            doc.machines[name] = spec
    for name, obj in raw.get("products", {}).items():
        if name in doc.machines:
            errs.add(f"products.{name}", f"name {name!r} already used by a machine")
        spec = _parse_product(name, obj, errs)
        if spec is not None:
            doc.products[name] = spec
    for k, item in enumerate(raw.get("run", [])):
        if not isinstance(item, dict) or "target" not in item:
            errs.add(f"run[{k}]", "run directive needs a target")
            continue
        doc.runs.append(RunDirective(str(item["target"]), " ".join(str(item.get("word", "")).split())))
    if errs.items:
        raise SpecError(errs.items)
    if validate:
        compile_document(doc)
    return doc


# ---------------------------------------------------------------- compile


def _resolve_alphabet(doc, ref, where) -> Alphabet:
    if isinstance(ref, str):
        if ref not in doc.alphabets:
            raise UnresolvedNameError(ref, where)
        return Alphabet(doc.alphabets[ref])
    return Alphabet(ref)


def _compile_table(doc, name, spec: TableSpec) -> Machine:
    where = f"machines.{name}"
    alphabet = _resolve_alphabet(doc, spec.alphabet, f"{where}.alphabet")
    if spec.outputs is not None:
        outputs = _resolve_alphabet(doc, spec.outputs, f"{where}.outputs")
    else:
        outputs = Alphabet(dict.fromkeys(spec.gamma))
    if len(spec.delta) != len(spec.gamma):
        raise SpecError([(where, f"delta has {len(spec.delta)} rows but gamma has {len(spec.gamma)} entries")])
    for k, row in enumerate(spec.delta):
        if len(row) != len(alphabet):
            raise SpecError([(f"{where}.delta[{k}]", f"row has {len(row)} entries for {len(alphabet)} letters")])
    gamma = []
    for k, y in enumerate(spec.gamma):
        sym = Symbol.parse(y)
        if sym not in outputs:
            raise SpecError([(f"{where}.gamma[{k}]", f"{y} is not in the output alphabet")])
        gamma.append(outputs.index(sym))
    try:
        return Machine(alphabet, outputs, spec.delta, gamma, spec.start, spec.states)
    except (ValueError, RmooreError) as exc:
        raise SpecError([(where, str(exc))]) from None


def compile_document(doc: SpecDocument) -> dict:
    """Instantiate every machine and product; returns ``{name: object}``."""
    out = {}
    for name, spec in doc.machines.items():
        if isinstance(spec, BuiltinSpec):
            try:
                out[name] = build(spec.builtin, spec.params)
            except BadParameterError as exc:
                raise SpecError([(f"machines.{name}", str(exc))]) from None
        else:
            out[name] = _compile_table(doc, name, spec)

    visiting = set()

    def product(name):
        if name in out:
            return out[name]
        if name in visiting:
            raise SpecError([(f"products.{name}", "products refer to each other in a cycle")])
        spec = doc.products[name]
        where = f"products.{name}"
        visiting.add(name)
        if isinstance(spec, BuiltinSpec):
            try:
                obj = build(spec.builtin, spec.params)
            except BadParameterError as exc:
                raise SpecError([(where, str(exc))]) from None
        else:
            factors = []
            for k, f in enumerate(spec.factors):
                if f in doc.machines:
                    factors.append(out[f])
                elif f in doc.products:
                    factors.append(product(f))
                else:
                    raise UnresolvedNameError(f, f"{where}.factors[{k}]")
            alphabet = _resolve_alphabet(doc, spec.alphabet, f"{where}.alphabet")
            if spec.reference is not None and spec.reference not in doc.machines and spec.reference not in doc.products:
                raise UnresolvedNameError(spec.reference, f"{where}.reference")
            try:
                obj = ProductDef(factors, alphabet, RuleMap(spec.rules), spec.output, name=name,
                                 reference=spec.reference)
            except RmooreError as exc:
                raise SpecError([(f"{where}.rules", str(exc))]) from None
        visiting.discard(name)
        out[name] = obj
        return obj

    for name in doc.products:
        product(name)
    for k, r in enumerate(doc.runs):
        if r.target not in out:
            raise UnresolvedNameError(r.target, f"run[{k}].target")
    return out


def load(path) -> tuple:
    """Read, parse and compile a spec file; returns ``(document, compiled)``."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    doc = parse(text, validate=False)
    return doc, compile_document(doc)


# ----------------------------------------------------------------- render


def _alpha_json(ref):
    return ref if isinstance(ref, str) else list(ref)


def _machine_json(spec):
    if isinstance(spec, BuiltinSpec):
        out = {"builtin": spec.builtin}
        if spec.params:
            out["params"] = spec.params
        return out
    out = {"alphabet": _alpha_json(spec.alphabet)}
    if spec.outputs is not None:
        out["outputs"] = _alpha_json(spec.outputs)
    if spec.states is not None:
        out["states"] = list(spec.states)
    out["start"] = spec.start
    out["delta"] = [list(r) for r in spec.delta]
    out["gamma"] = list(spec.gamma)
    return out


def _product_json(spec):
    if isinstance(spec, BuiltinSpec):
        return _machine_json(spec)
    out = {"alphabet": _alpha_json(spec.alphabet), "factors": list(spec.factors)}
    out["rules"] = [r.to_json() for r in spec.rules]
    out["output"] = spec.output.to_json()
    if spec.reference is not None:
        out["reference"] = spec.reference
    return out


def to_json(doc: SpecDocument) -> dict:
    out = {"specfmt_version": doc.version}
    if doc.alphabets:
        out["alphabets"] = {k: list(v) for k, v in doc.alphabets.items()}
    if doc.machines:
        out["machines"] = {k: _machine_json(v) for k, v in doc.machines.items()}
    if doc.products:
        out["products"] = {k: _product_json(v) for k, v in doc.products.items()}
    if doc.runs:
        out["run"] = [{"target": r.target, "word": r.word} for r in doc.runs]
    return out


_WIDTH = 100


def _dump(obj, indent=0, lead=0) -> str:
    # lead: characters already on the current line (indent plus any "key": prefix)
    flat = json.dumps(obj, ensure_ascii=False, separators=(", ", ": "))
    if not isinstance(obj, (dict, list)) or len(flat) + max(lead, indent) <= _WIDTH or not obj:
        return flat
    pad = " " * (indent + 2)
    if isinstance(obj, list):
        items = [pad + _dump(x, indent + 2) for x in obj]
        return "[\n" + ",\n".join(items) + "\n" + " " * indent + "]"
    items = []
    for k, v in obj.items():
        key = json.dumps(k, ensure_ascii=False) + ": "
        items.append(pad + key + _dump(v, indent + 2, indent + 2 + len(key)))
    return "{\n" + ",\n".join(items) + "\n" + " " * indent + "}"


def render(doc: SpecDocument) -> str:
    """Canonical text: fixed key order, objects folded onto one line when short."""
    return _dump(to_json(doc)) + "\n"


def machine_to_spec(m: Machine) -> TableSpec:
    return TableSpec(
        tuple(str(a) for a in m.alphabet),
        tuple(tuple(int(x) for x in row) for row in m.delta.tolist()),
        tuple(str(m.output(s)) for s in m.states),
        m.start,
        tuple(str(y) for y in m.outputs),
        tuple(m.state_names) if m.state_names else None,
    )
