"""``rmoore run|check|minimize|monoid|dot <spec> <target> [flags]``.

Exit codes: 0 ok, 1 spec parse error, 2 unknown target, 3 bad word,
4 divergence, 5 infinite target, 6 monoid cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from typing import Optional

from . import specfmt
from .core import GeneratorMachine, Machine, StringFunction, Symbol, show_word, word
from .errors import (
    BudgetExceededError,
    InfiniteMachineError,
    MonoidSizeError,
    SpecError,
    UnknownSymbolError,
)
from .minimize import MinimizedMachine, equivalent, minimize
from .monoid import classify, transition_monoid
from .product import ProductDef, as_finite_machine, check_theorem1, initial_state, step

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_TARGET = 2
EXIT_WORD = 3
EXIT_DIVERGE = 4
EXIT_INFINITE = 5
EXIT_CAP = 6


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass
class RunReport:
    word: tuple
    outputs: list = field(default_factory=list)  # composite output after each step, f(Λ) first
    trace: list = field(default_factory=list)
    status: int = EXIT_OK

    @property
    def result(self) -> Symbol:
        return self.outputs[-1]


# ---------------------------------------------------------------- helpers


def _load(path):
    try:
        return specfmt.load(path)
    except SpecError as exc:
        lines = [f"{path}: {where}: {msg}" if where else f"{path}: {msg}" for where, msg in exc.errors]
        raise CliError(EXIT_PARSE, "\n".join(lines)) from None
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc.strerror}") from None


def _target(objs, name):
    if name not in objs:
        known = ", ".join(objs) or "none"
        raise CliError(EXIT_TARGET, f"unknown target {name!r} (known: {known})")
    return objs[name]


def _parse_word(obj, tokens) -> tuple:
    try:
        w = word(" ".join(tokens))
    except ValueError as exc:
        raise CliError(EXIT_WORD, f"bad word: {exc}") from None
    for a in w:
        if a not in obj.alphabet:
            raise CliError(EXIT_WORD, f"symbol {a} is not in the target alphabet {{{', '.join(map(str, obj.alphabet))}}}")
    return w


def _finite(obj) -> Machine:
    try:
        return as_finite_machine(obj)
    except InfiniteMachineError as exc:
        raise CliError(EXIT_INFINITE, f"target is not a finite machine: {exc}") from None
    except BudgetExceededError as exc:
        raise CliError(EXIT_INFINITE, str(exc)) from None


def _write(text: str, out: Optional[str]):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_path(spec: Optional[str]) -> tuple:
    if not spec:
        return ()
    try:
        path = tuple(int(x) for x in spec.split("/"))
    except ValueError:
        raise CliError(EXIT_TARGET, f"bad factor path {spec!r}; expected e.g. 2/1") from None
    if any(k < 1 for k in path):
        raise CliError(EXIT_TARGET, "factor indices start at 1")
    return path


def _drill(p: ProductDef, cursors, path):
    """Runner and cursor of the factor addressed by ``path``."""
    runner, cursor = None, cursors
    current = p
    for depth, k in enumerate(path):
        if not isinstance(current, ProductDef):
            raise CliError(EXIT_TARGET, f"factor path {'/'.join(map(str, path[:depth]))} is not a product")
        if k > current.n:
            raise CliError(EXIT_TARGET, f"factor {k} does not exist (product has {current.n})")
        runner, cursor = current._runners[k - 1], cursor[k - 1]
        current = current.factors[k - 1]
    return runner, cursor


# --------------------------------------------------------------- commands


def cmd_run(spec_path, target, tokens, trace=False, factor=None) -> RunReport:
    _, objs = _load(spec_path)
    obj = _target(objs, target)
    w = _parse_word(obj, tokens)
    path = _parse_path(factor)
    report = RunReport(w)
    if isinstance(obj, ProductDef):
        rs = initial_state(obj)
        if path:
            _drill(obj, rs.cursors, path)
        report.outputs.append(rs.output)
        for k, a in enumerate(w, start=1):
            rs = step(obj, rs, a)
            report.outputs.append(rs.output)
            if path:
                runner, cur = _drill(obj, rs.cursors, path)
                detail = f"factor {'/'.join(map(str, path))}: out={runner.output(cur)} state={runner.describe(cur)}"
            else:
                detail = " ".join(f"u{i}+=[{show_word(z)}]" for i, z in enumerate(rs.emitted, start=1))
            report.trace.append(f"{k}: {a} -> {rs.output} | {detail}")
    else:
        if path:
            raise CliError(EXIT_TARGET, "--factor needs a product target")
        m = obj.machine if isinstance(obj, StringFunction) and obj.machine is not None else obj
        if isinstance(m, (Machine, GeneratorMachine)):
            s = m.start
            report.outputs.append(m.output(s))
            for k, a in enumerate(w, start=1):
                s = m.step(s, a)
                report.outputs.append(m.output(s))
                name = m.state_name(s) if isinstance(m, Machine) else str(s)
                report.trace.append(f"{k}: {a} -> {m.output(s)} | state={name}")
        else:
            report.outputs.append(obj(()))
            for k, a in enumerate(w, start=1):
                y = obj(w[:k])
                report.outputs.append(y)
                report.trace.append(f"{k}: {a} -> {y}")
    if not trace:
        report.trace = []
    return report


def cmd_check(spec_path, target, max_len=6) -> tuple:
    """Returns ``(exit code, lines)``."""
    _, objs = _load(spec_path)
    obj = _target(objs, target)
    if not isinstance(obj, ProductDef):
        raise CliError(EXIT_TARGET, f"target {target!r} is not a product")
    try:
        report = check_theorem1(obj, max_len)
    except (InfiniteMachineError, BudgetExceededError) as exc:
        raise CliError(EXIT_INFINITE, f"cannot expand {target!r}: {exc}") from None
    lines = [f"recursion vs expanded product: {report.summary()}"]
    if not report.ok:
        lines.append(f"counterexample: {show_word(report.counterexample)}")
        return EXIT_DIVERGE, lines
    ref = getattr(obj, "reference", None)
    if ref is not None:
        try:
            eq = equivalent(obj, objs[ref], bound=max_len)
        except InfiniteMachineError as exc:
            raise CliError(EXIT_INFINITE, f"cannot compare with {ref!r}: {exc}") from None
        if not eq:
            lines.append(
                f"{target} vs reference {ref}: diverge on {show_word(eq.counterexample)}: "
                f"{eq.outputs[0]} vs {eq.outputs[1]}"
            )
            lines.append(f"counterexample: {show_word(eq.counterexample)}")
            return EXIT_DIVERGE, lines
        lines.append(f"{target} vs reference {ref}: agree on words of length <= {max_len}")
    return EXIT_OK, lines


def cmd_minimize(spec_path, target) -> tuple:
    """Returns ``(before, after, canonical spec text of the minimized table)``."""
    _, objs = _load(spec_path)
    m = _finite(_target(objs, target))
    mm = minimize(m)
    doc = specfmt.SpecDocument(machines={target: specfmt.machine_to_spec(mm.machine)})
    return m.n_states, mm.n_states, specfmt.render(doc)


def cmd_monoid(spec_path, target) -> str:
    _, objs = _load(spec_path)
    m = _finite(_target(objs, target))
    try:
        t = transition_monoid(m)
    except MonoidSizeError as exc:
        raise CliError(EXIT_CAP, str(exc)) from None
    c = classify(t)
    head = (
        f"elements: {c.element_count}\n"
        f"group: {str(c.is_group).lower()}\n"
        f"aperiodic: {str(c.is_aperiodic).lower()}\n"
        f"idempotents: {c.idempotent_count}\n"
    )
    return head + t.render()


def _dot_id(text: str) -> str:
    return json.dumps(text, ensure_ascii=False)


def to_dot(mm: MinimizedMachine, name: str) -> str:
    m = mm.machine
    lines = [f"digraph {_dot_id(name)} {{", "  rankdir=LR;", '  __start [shape=point, label=""];']
    for s in m.states:
        lines.append(f"  {s} [label={_dot_id(f'{s}/{m.output(s)}')}];")
    lines.append(f"  __start -> {m.start};")
    for s in m.states:
        for j, a in enumerate(m.alphabet):
            lines.append(f"  {s} -> {int(m.delta[s, j])} [label={_dot_id(str(a))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_dot(spec_path, target) -> str:
    _, objs = _load(spec_path)
    return to_dot(minimize(_finite(_target(objs, target))), target)


# ------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rmoore", description="Evaluate and analyse Moore-machine products.")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate a target on a word")
    run.add_argument("spec")
    run.add_argument("target")
    run.add_argument("word", nargs="*", help="whitespace-separated symbols; none for the empty word")
    run.add_argument("--trace", action="store_true", help="print one row per input symbol")
    run.add_argument("--factor", metavar="PATH", help="with --trace, follow a (nested) factor, e.g. 2/1")

    check = sub.add_parser("check", help="compare the recursion with the expanded product")
    check.add_argument("spec")
    check.add_argument("target")
    check.add_argument("--max-len", type=int, default=6)

    for name, text in (
        ("minimize", "minimize a finite target"),
        ("monoid", "transition monoid and Cayley table"),
        ("dot", "Graphviz export of the minimized machine"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("spec")
        p.add_argument("target")
        p.add_argument("-o", "--out", help="write here instead of stdout")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            report = cmd_run(args.spec, args.target, args.word, args.trace, args.factor)
            for row in report.trace:
                print(row)
            print(report.result)
            return EXIT_OK
        if args.command == "check":
            code, lines = cmd_check(args.spec, args.target, args.max_len)
            print("\n".join(lines))
            return code
        if args.command == "minimize":
            before, after, text = cmd_minimize(args.spec, args.target)
            print(f"states: {before} -> {after}")
            _write(text, args.out)
            return EXIT_OK
        if args.command == "monoid":
            _write(cmd_monoid(args.spec, args.target), args.out)
            return EXIT_OK
        _write(cmd_dot(args.spec, args.target), args.out)
        return EXIT_OK
    except CliError as exc:
        print(f"rmoore: {exc}", file=sys.stderr)
        return exc.code
    except UnknownSymbolError as exc:
        print(f"rmoore: {exc}", file=sys.stderr)
        return EXIT_WORD


if __name__ == "__main__":
    sys.exit(main())
